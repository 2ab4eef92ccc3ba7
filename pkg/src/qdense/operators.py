"""Unitary factories for the dense-coding protocol.

The single-particle alphabet is the shift/clock family X^j Z^k on d levels
(X|l> = |(l+1) mod d>, Z|l> = w^l |l>, w = exp(2 pi i / d)). After the
channel split, branch k keeps only the top r = d - k levels, so the sender
alphabet shrinks to shifts times r-th-root phases supported on those
levels. This module also builds the splitting unitary itself and the
orthonormal bases of encoded states the receiver measures against.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .states import StateVector, UnitaryMatrix, apply_unitary

if TYPE_CHECKING:  # pragma: no cover
    from .protocol import ChannelSpec

MAX_LEVELS = 16


def _check_levels(d: int) -> None:
    if not 2 <= d <= MAX_LEVELS:
        raise ValueError(f"level count must be in [2, {MAX_LEVELS}], got {d}")


def _check_branch(d: int, k_branch: int) -> None:
    _check_levels(d)
    if not 0 <= k_branch < d:
        raise ValueError(f"branch index must be in [0, {d}), got {k_branch}")


@dataclass(frozen=True)
class WeylLabel:
    """Label (j, k) of a shift-by-j, clock-power-k operator on d levels."""

    d: int
    j: int
    k: int

    def __post_init__(self):
        _check_levels(self.d)
        if not (0 <= self.j < self.d and 0 <= self.k < self.d):
            raise ValueError(f"Weyl label ({self.j}, {self.k}) out of range for d={self.d}")


@dataclass(frozen=True)
class BranchLabel:
    """A split-measurement outcome k; r = d - k levels survive."""

    d: int
    k: int

    def __post_init__(self):
        _check_branch(self.d, self.k)

    @property
    def r(self) -> int:
        return self.d - self.k


@dataclass(frozen=True)
class MessageLabel:
    """Two-party message: sender-A shift m, sender-A phase t, sender-B shift n."""

    m: int
    t: int
    n: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.m, self.t, self.n)


def validate_message(d: int, k_branch: int, msg: MessageLabel) -> None:
    _check_branch(d, k_branch)
    r = d - k_branch
    if not 0 <= msg.m < d:
        raise ValueError(f"shift m={msg.m} out of range for d={d}")
    if not 0 <= msg.t < r:
        raise ValueError(f"phase t={msg.t} out of range for branch {k_branch} (r={r})")
    if not 0 <= msg.n < d:
        raise ValueError(f"shift n={msg.n} out of range for d={d}")


@functools.lru_cache(maxsize=None)
def weyl(d: int, j: int, k: int) -> UnitaryMatrix:
    """Shift-and-clock operator: |l> -> w^(k l) |(l+j) mod d>."""
    WeylLabel(d, j, k)
    mat = np.zeros((d, d), dtype=np.complex128)
    for level in range(d):
        mat[(level + j) % d, level] = np.exp(2j * np.pi * ((k * level) % d) / d)
    return UnitaryMatrix.from_array(mat)


@functools.lru_cache(maxsize=None)
def phase_op(d: int, k_branch: int, t: int) -> UnitaryMatrix:
    """Diagonal r-th-root phases on the branch's surviving levels.

    Level l >= k_branch picks up exp(2 pi i t (l - k_branch) / r); levels
    below the branch cut are left alone. At k_branch = 0 this is exactly
    the clock operator weyl(d, 0, t).
    """
    _check_branch(d, k_branch)
    r = d - k_branch
    if not 0 <= t < r:
        raise ValueError(f"phase power t={t} out of range for branch {k_branch} (r={r})")
    diag = np.ones(d, dtype=np.complex128)
    for level in range(k_branch, d):
        diag[level] = np.exp(2j * np.pi * ((t * (level - k_branch)) % r) / r)
    return UnitaryMatrix.from_array(np.diag(diag))


@functools.lru_cache(maxsize=None)
def alice_op(d: int, k_branch: int, m: int, t: int) -> UnitaryMatrix:
    """Sender-A encoding operator: branch phase first, then cyclic shift by m."""
    shift = weyl(d, m, 0)
    phase = phase_op(d, k_branch, t)
    return UnitaryMatrix.from_array(shift.entries @ phase.entries)


def bob_op(d: int, n: int) -> UnitaryMatrix:
    """Sender-B encoding operator: plain cyclic shift by n."""
    return weyl(d, n, 0)


@functools.lru_cache(maxsize=None)
def branch_channel_state(d: int, k_branch: int) -> StateVector:
    """Post-split channel state (1/sqrt(r)) sum_{s=k}^{d-1} |sss>."""
    _check_branch(d, k_branch)
    r = d - k_branch
    amps = np.zeros(d**3, dtype=np.complex128)
    diag_stride = d * d + d + 1
    for s in range(k_branch, d):
        amps[s * diag_stride] = 1.0 / math.sqrt(r)
    return StateVector.from_amplitudes((d, d, d), amps)


def message_index(d: int, k_branch: int, msg: MessageLabel) -> int:
    """Position of a message in the (m, t, n)-lexicographic branch order."""
    validate_message(d, k_branch, msg)
    r = d - k_branch
    return (msg.m * r + msg.t) * d + msg.n


def message_from_index(d: int, k_branch: int, index: int) -> MessageLabel:
    _check_branch(d, k_branch)
    r = d - k_branch
    if not 0 <= index < d * d * r:
        raise ValueError(f"message index {index} out of range for branch {k_branch}")
    n = index % d
    t = (index // d) % r
    m = index // (d * r)
    return MessageLabel(m, t, n)


def branch_messages(d: int, k_branch: int) -> Iterator[MessageLabel]:
    """All d*d*r messages of a branch in (m, t, n)-lexicographic order."""
    _check_branch(d, k_branch)
    r = d - k_branch
    for m in range(d):
        for t in range(r):
            for n in range(d):
                yield MessageLabel(m, t, n)


def encoded_state(spec: "ChannelSpec", k_branch: int, msg: MessageLabel) -> StateVector:
    """The branch channel state after both senders apply their operators."""
    d = spec.d
    validate_message(d, k_branch, msg)
    state = branch_channel_state(d, k_branch)
    state = apply_unitary(alice_op(d, k_branch, msg.m, msg.t), state, (0,))
    return apply_unitary(bob_op(d, msg.n), state, (1,))


@functools.lru_cache(maxsize=None)
def _encoded_family(d: int, k_branch: int) -> tuple[tuple[StateVector, ...], np.ndarray]:
    base_state = branch_channel_state(d, k_branch)
    states = []
    for msg in branch_messages(d, k_branch):
        s = apply_unitary(alice_op(d, k_branch, msg.m, msg.t), base_state, (0,))
        s = apply_unitary(bob_op(d, msg.n), s, (1,))
        states.append(s)
    matrix = np.vstack([s.amps for s in states])
    matrix.setflags(write=False)
    return tuple(states), matrix


def encoded_basis(spec: "ChannelSpec", k_branch: int) -> list[StateVector]:
    """Orthonormal decoding basis of a branch, (m, t, n)-lexicographic."""
    return list(_encoded_family(spec.d, k_branch)[0])


def encoded_basis_matrix(d: int, k_branch: int) -> np.ndarray:
    """Row-stacked amplitudes of the branch basis (cached, read-only)."""
    return _encoded_family(d, k_branch)[1]


def complete_to_unitary(fixed_columns: dict[int, np.ndarray], dim: int) -> np.ndarray:
    """Extend orthonormal columns to a full unitary, deterministically.

    Each free column takes the canonical basis vector with the largest
    residual outside the accepted span (ties resolve to the lowest basis
    label), orthogonalized with two Gram-Schmidt passes and normalized.
    The chosen residual norm is bounded below by 1/sqrt(dim), so the
    construction never divides by a vanishing number. The fixed columns
    must already be mutually orthonormal.
    """
    out = np.zeros((dim, dim), dtype=np.complex128)
    fixed_positions = set(fixed_columns)
    accepted = np.zeros((dim, 0), dtype=np.complex128)
    row_load = np.zeros(dim)
    for pos in sorted(fixed_columns):
        col = np.asarray(fixed_columns[pos], dtype=np.complex128)
        if col.shape != (dim,):
            raise ValueError(f"fixed column {pos} has shape {col.shape}, expected ({dim},)")
        gram = accepted.conj().T @ col
        if abs(np.linalg.norm(col) - 1.0) > 1e-10 or (gram.size and np.abs(gram).max() > 1e-10):
            raise ValueError(f"fixed column {pos} is not orthonormal to the earlier columns")
        out[:, pos] = col
        accepted = np.concatenate([accepted, col[:, None]], axis=1)
        row_load += np.abs(col) ** 2
    consumed = np.zeros(dim, dtype=bool)
    for pos in range(dim):
        if pos in fixed_positions:
            continue
        score = np.where(consumed, -np.inf, 1.0 - row_load)
        cand = int(np.argmax(score))
        vec = -accepted @ np.conj(accepted[cand])
        vec[cand] += 1.0
        vec -= accepted @ (accepted.conj().T @ vec)
        vec /= np.linalg.norm(vec)
        out[:, pos] = vec
        accepted = np.concatenate([accepted, vec[:, None]], axis=1)
        row_load += np.abs(vec) ** 2
        consumed[cand] = True
    return out


@functools.lru_cache(maxsize=None)
def build_usim(spec: "ChannelSpec") -> UnitaryMatrix:
    """Splitting unitary on the (sender-A particle, ancilla) pair.

    Constrained columns: for coefficient x_j > 0,

        U |j,0> = (x_0 |j,0> + sum_{k=1..j} sqrt(x_k^2 - x_{k-1}^2) |j,k>) / x_j,

    and a zero-coefficient column stays |j,0>. The remaining columns are a
    deterministic orthonormal completion, so the matrix is a pure function
    of the channel coefficients.
    """
    d = spec.d
    dim = d * d
    x = spec.coeffs
    fixed: dict[int, np.ndarray] = {}
    for j in range(d):
        col = np.zeros(dim, dtype=np.complex128)
        if x[j] > 0:
            col[j * d] = x[0]
            for k in range(1, j + 1):
                col[j * d + k] = math.sqrt(x[k] * x[k] - x[k - 1] * x[k - 1])
            col /= x[j]
        else:
            col[j * d] = 1.0
        fixed[j * d] = col
    return UnitaryMatrix.from_array(complete_to_unitary(fixed, dim))


def usim_reference_d3(spec: "ChannelSpec") -> UnitaryMatrix:
    """Closed-form 9x9 splitting unitary for three-level channels.

    An independent cross-check of build_usim: the two agree on the
    constrained columns but complete the free ones differently. Written
    with cosine/sine-style ratios c_jk = x_0/x_j and the per-gap sines.
    """
    if spec.d != 3:
        raise ValueError(f"reference construction is for d=3, got d={spec.d}")
    x0, x1, x2 = spec.coeffs
    if x1 > 0:
        c10 = x0 / x1
        s10 = math.sqrt(x1 * x1 - x0 * x0) / x1
    else:
        c10, s10 = 1.0, 0.0
    c20 = x0 / x2
    s21 = math.sqrt(x1 * x1 - x0 * x0) / x2
    s22 = math.sqrt(x2 * x2 - x1 * x1) / x2
    u = np.eye(9, dtype=np.complex128)
    u[3, 3] = c10
    u[3, 4] = s10
    u[4, 3] = s10
    u[4, 4] = -c10
    u[5, 5] = c20
    u[5, 7] = s22
    u[5, 8] = -s21
    u[6, 6] = c20
    u[6, 7] = s21
    u[6, 8] = s22
    u[7, 5] = s22
    u[7, 6] = s21
    u[7, 7] = -c20
    u[8, 5] = -s21
    u[8, 6] = s22
    u[8, 8] = -c20
    u[7, 8] = 0.0
    u[8, 7] = 0.0
    return UnitaryMatrix.from_array(u)
