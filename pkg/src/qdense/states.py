"""Dense complex state vectors over qudit registers.

Basis labels are big-endian: the first register is the most significant
digit of the flat amplitude index, so for dims (3, 3, 3) the label "012"
sits at index 0*9 + 1*3 + 2. Values are immutable after construction and
every operation returns a fresh value; randomness always enters through an
explicit generator argument.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .textfmt import dumps

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
MEMBERSHIP_TOL = 1e-6


class BasisMismatchError(ValueError):
    """A state lies outside the span of the supplied orthonormal family.

    Carries the closest family member anyway: ``best_index`` and
    ``best_overlap`` describe the winning (but insufficient) projection.
    """

    def __init__(self, message: str, best_index: int, best_overlap: float):
        super().__init__(message)
        self.best_index = best_index
        self.best_overlap = best_overlap


def _frozen_array(values, dtype=np.complex128) -> np.ndarray:
    arr = np.array(values, dtype=dtype, order="C", copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over the computational basis of one or more qudits."""

    dims: tuple[int, ...]
    amps: np.ndarray

    @classmethod
    def from_amplitudes(cls, dims: Iterable[int], amps) -> "StateVector":
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 2 for d in dims):
            raise ValueError(f"register dimensions must all be >= 2, got {dims}")
        arr = _frozen_array(amps)
        size = math.prod(dims)
        if arr.shape != (size,):
            raise ValueError(f"expected {size} amplitudes for dims {dims}, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("amplitudes must be finite")
        return cls(dims, arr)

    @classmethod
    def basis_state(cls, dims: Iterable[int], digits: Sequence[int]) -> "StateVector":
        """The computational basis ket whose label spells ``digits``."""
        dims = tuple(int(d) for d in dims)
        amps = np.zeros(math.prod(dims), dtype=np.complex128)
        amps[int(np.ravel_multi_index(tuple(digits), dims))] = 1.0
        return cls._make(dims, amps)

    @classmethod
    def _make(cls, dims: tuple[int, ...], owned: np.ndarray) -> "StateVector":
        # Trusted constructor: takes ownership of a fresh complex128 array.
        owned.setflags(write=False)
        return cls(dims, owned)

    def index_of(self, digits: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(digits), self.dims))

    def digits_of(self, index: int) -> tuple[int, ...]:
        return tuple(int(v) for v in np.unravel_index(index, self.dims))

    def squared_norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def norm(self) -> float:
        return math.sqrt(self.squared_norm())

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.squared_norm() - 1.0) <= tol

    def to_record(self) -> str:
        """Text record {"dims": [...], "amps": [[re, im], ...]} at 17 digits."""
        amps = [[a.real, a.imag] for a in self.amps.tolist()]
        return dumps({"dims": list(self.dims), "amps": amps})

    @classmethod
    def from_record(cls, text: str) -> "StateVector":
        doc = json.loads(text)
        if not isinstance(doc, dict) or "dims" not in doc or "amps" not in doc:
            raise ValueError("state record needs 'dims' and 'amps' fields")
        pairs = doc["amps"]
        arr = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
        return cls.from_amplitudes(doc["dims"], arr)


@dataclass(frozen=True)
class UnitaryMatrix:
    """Dense square complex matrix verified unitary at construction."""

    dim: int
    entries: np.ndarray

    @classmethod
    def from_array(cls, entries, tol: float = UNITARY_TOL) -> "UnitaryMatrix":
        arr = _frozen_array(entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"matrix must be square, got shape {arr.shape}")
        dim = arr.shape[0]
        defect = float(np.abs(arr.conj().T @ arr - np.eye(dim)).max())
        if defect > tol:
            raise ValueError(f"matrix is not unitary: max |U^H U - I| = {defect:.3e}")
        return cls(dim, arr)

    @classmethod
    def identity(cls, dim: int) -> "UnitaryMatrix":
        return cls.from_array(np.eye(dim, dtype=np.complex128))

    def unitarity_defect(self) -> float:
        return float(np.abs(self.entries.conj().T @ self.entries - np.eye(self.dim)).max())

    def to_record(self) -> str:
        """Text record {"dim": n, "rows": [[[re, im], ...], ...]}, row-major."""
        rows = [[[v.real, v.imag] for v in row] for row in self.entries.tolist()]
        return dumps({"dim": self.dim, "rows": rows})

    @classmethod
    def from_record(cls, text: str) -> "UnitaryMatrix":
        doc = json.loads(text)
        rows = doc["rows"]
        arr = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)
        return cls.from_array(arr)


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of a projective measurement on one register."""

    index: int
    probability: float
    post_state: StateVector


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    """Joint state; the combined label is a's digits followed by b's."""
    return StateVector._make(a.dims + b.dims, kernels.kron_vec(a.amps, b.amps))


def apply_unitary(u: UnitaryMatrix, state: StateVector, targets: Sequence[int]) -> StateVector:
    """Apply ``u`` to the listed registers (identity on the rest).

    The matrix digit order follows ``targets`` as given, big-endian, so a
    d*d-dimensional matrix on targets (0, 3) indexes row = digit0 * d + digit3.
    """
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target registers in {targets}")
    if any(t < 0 or t >= len(state.dims) for t in targets):
        raise ValueError(f"target registers {targets} out of range for dims {state.dims}")
    block = math.prod(state.dims[t] for t in targets)
    if u.dim != block:
        raise ValueError(f"matrix of dimension {u.dim} cannot act on registers {targets} (block size {block})")
    return StateVector._make(state.dims, kernels.apply_matrix(state.amps, state.dims, u.entries, targets))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.dims != b.dims:
        raise ValueError(f"register shapes differ: {a.dims} vs {b.dims}")
    return kernels.vdot(a.amps, b.amps)


def measure_register(state: StateVector, target: int, rng: np.random.Generator) -> MeasurementOutcome:
    """Projective measurement of one register in the computational basis.

    The outcome is drawn from the register's marginal distribution using
    ``rng``, so a fixed seed reproduces the outcome sequence bit for bit.
    """
    if target < 0 or target >= len(state.dims):
        raise ValueError(f"target register {target} out of range for dims {state.dims}")
    n2 = state.squared_norm()
    if n2 < 1e-12:
        raise ValueError("zero-norm state cannot be measured")
    if abs(n2 - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized: |amps|^2 = {n2!r}")
    probs = kernels.register_probs(state.amps, state.dims, target)
    cum = np.cumsum(probs / probs.sum())
    draw = rng.random()
    outcome = int(np.searchsorted(cum, draw, side="right"))
    if outcome >= len(probs):
        outcome = int(np.flatnonzero(probs > 0)[-1])
    prob, collapsed = kernels.collapse_register(state.amps, state.dims, target, outcome)
    return MeasurementOutcome(outcome, prob, StateVector._make(state.dims, collapsed))


def project_onto_basis(state: StateVector, basis: Sequence[StateVector]) -> tuple[int, float]:
    """Argmax of |<basis_i|state>| over an orthonormal family.

    Returns (index, overlap magnitude). Raises BasisMismatchError when even
    the best overlap is below 1 - 1e-6, i.e. the state is not a member of
    the family up to numerical noise. The family is expected to be mutually
    orthonormal; that precondition is not re-checked here.
    """
    if len(basis) == 0:
        raise ValueError("cannot project onto an empty basis")
    if basis[0].dims != state.dims:
        raise ValueError(f"basis register shapes {basis[0].dims} differ from state {state.dims}")
    matrix = np.vstack([b.amps for b in basis])
    idx, mag = kernels.best_overlap(matrix, state.amps)
    if mag < 1.0 - MEMBERSHIP_TOL:
        raise BasisMismatchError(
            f"state is outside the spanned family: best overlap {mag:.6g} at index {idx}",
            idx,
            mag,
        )
    return idx, mag
