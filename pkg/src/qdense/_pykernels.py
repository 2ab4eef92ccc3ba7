"""Pure numpy state-vector kernels.

The compiled module ``_ckernels`` exposes the same six functions with
identical semantics; ``qdense.kernels`` picks one implementation at import
time. Flat amplitude labels are big-endian over the register list: the
first register is the most significant digit.
"""

from __future__ import annotations

import numpy as np


def kron_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vector Kronecker product: out[i*len(b)+j] = a[i]*b[j]."""
    return np.kron(a, b)


def vdot(a: np.ndarray, b: np.ndarray) -> complex:
    """Inner product, conjugating the first argument."""
    return complex(np.vdot(a, b))


def apply_matrix(amps, dims, mat, targets):
    """Apply a square matrix to the listed registers, identity elsewhere.

    The matrix index runs big-endian over ``targets`` in the given order.
    """
    dims = tuple(dims)
    extent = mat.shape[0]
    rest = [i for i in range(len(dims)) if i not in targets]
    perm = list(targets) + rest
    tensor = amps.reshape(dims).transpose(perm).reshape(extent, -1)
    tensor = mat @ tensor
    tensor = tensor.reshape([dims[i] for i in perm]).transpose(np.argsort(perm))
    return np.ascontiguousarray(tensor.reshape(-1))


def register_probs(amps, dims, target):
    """Probability of each digit value on one register."""
    weights = np.abs(amps.reshape(dims)) ** 2
    axes = tuple(i for i in range(len(dims)) if i != target)
    return weights.sum(axis=axes)


def collapse_register(amps, dims, target, outcome):
    """Project one register onto a digit value and renormalize.

    Returns (probability, collapsed amplitudes). The caller guarantees the
    projection has positive probability.
    """
    tensor = amps.reshape(dims)
    sel: list = [slice(None)] * len(dims)
    sel[target] = outcome
    sel_t = tuple(sel)
    kept = tensor[sel_t]
    prob = float(np.sum(np.abs(kept) ** 2))
    out = np.zeros(tensor.shape, dtype=np.complex128)
    out[sel_t] = kept / np.sqrt(prob)
    return prob, out.reshape(-1)


def best_overlap(basis, amps):
    """Index and magnitude of the largest |<basis_i|amps>|, first row on ties."""
    overlaps = basis.conj() @ amps
    mags = np.abs(overlaps)
    idx = int(np.argmax(mags))
    return idx, float(mags[idx])
