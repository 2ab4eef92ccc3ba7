"""Head-to-head timing of the numpy and compiled kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Shapes mirror what the protocol actually does: a d^2 x d^2 unitary applied
to registers (0, 3) of a four-register state, digit probabilities and
collapse on the ancilla, and the overlap scan against a full encoded basis.
Each timing is the best of ``repeat`` passes; both implementations are
checked against each other before anything is timed.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from qdense import _pykernels
from qdense import kernels
from qdense.operators import build_usim, encoded_basis_matrix
from qdense.protocol import ChannelSpec, run_batch

try:
    from qdense import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_dimension(d: int, repeat: int) -> list[tuple[str, float, float]]:
    rng = np.random.default_rng(d)
    dims = (d, d, d, d)
    raw = rng.standard_normal(d**4) + 1j * rng.standard_normal(d**4)
    amps = raw / np.linalg.norm(raw)
    squares = np.sort(rng.random(d) + 1e-3)
    squares /= squares.sum()
    spec = ChannelSpec(d, tuple(float(v) for v in np.sqrt(squares)))
    usim = build_usim(spec).entries
    basis = encoded_basis_matrix(d, 0)
    encoded = basis[int(rng.integers(basis.shape[0]))]

    cases = {
        "apply_matrix (0,3)": lambda k: k.apply_matrix(amps, dims, usim, (0, 3)),
        "register_probs": lambda k: k.register_probs(amps, dims, 3),
        "collapse_register": lambda k: k.collapse_register(amps, dims, 3, 0),
        "best_overlap": lambda k: k.best_overlap(basis, encoded),
    }

    rows = []
    for name, call in cases.items():
        py_out = call(_pykernels)
        cy_out = call(_ckernels)
        check_pair(name, py_out, cy_out)
        t_py = best_of(lambda: [call(_pykernels) for _ in range(50)], repeat) / 50
        t_cy = best_of(lambda: [call(_ckernels) for _ in range(50)], repeat) / 50
        rows.append((f"d={d} {name}", t_py, t_cy))
    return rows


def check_pair(name: str, py_out, cy_out) -> None:
    if isinstance(py_out, tuple):
        for a, b in zip(py_out, cy_out):
            check_pair(name, a, b)
        return
    a = np.asarray(py_out)
    b = np.asarray(cy_out)
    gap = float(np.abs(a - b).max()) if a.shape else abs(float(a) - float(b))
    if gap > 1e-12:
        raise SystemExit(f"backend disagreement in {name}: {gap:.3e}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if _ckernels is None:
        raise SystemExit("compiled kernels are not built; reinstall with the extension")

    print(f"active backend for qdense.kernels: {kernels.BACKEND}")
    print(f"{'case':34s} {'numpy':>12s} {'compiled':>12s} {'speedup':>9s}")
    for d in (3, 5, 8):
        for name, t_py, t_cy in bench_dimension(d, args.repeat):
            print(f"{name:34s} {t_py * 1e6:10.1f}us {t_cy * 1e6:10.1f}us {t_py / t_cy:8.2f}x")

    spec = ChannelSpec(3, (0.4, 0.5, math.sqrt(0.59)))
    trials = 20_000
    started = time.perf_counter()
    stats = run_batch(spec, trials, 1)
    elapsed = time.perf_counter() - started
    print(
        f"\nend-to-end: {trials} protocol runs in {elapsed:.2f}s under the "
        f"'{kernels.BACKEND}' backend ({trials / elapsed:,.0f} runs/s, "
        f"{stats.failures} decode failures)"
    )


if __name__ == "__main__":
    main()
