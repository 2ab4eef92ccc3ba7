"""Shared helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np

from qdense.protocol import ChannelSpec


def random_spec(d: int, rng: np.random.Generator) -> ChannelSpec:
    """A valid channel spec with sorted, strictly positive coefficients."""
    squares = np.sort(rng.random(d) + 1e-3)
    squares /= squares.sum()
    coeffs = tuple(float(v) for v in np.sqrt(squares))
    return ChannelSpec(d, coeffs)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """A normalized complex amplitude vector."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary from a QR decomposition with phase-fixed columns."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def ket(dims: tuple[int, ...], *digits: int) -> np.ndarray:
    """Amplitudes of a computational basis state for the given digit string."""
    amps = np.zeros(math.prod(dims), dtype=np.complex128)
    amps[np.ravel_multi_index(digits, dims)] = 1.0
    return amps
