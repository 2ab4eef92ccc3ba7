"""Closed-form information accounting and Monte Carlo comparison.

Branch k fires with probability p_k = (d - k)(x_k^2 - x_{k-1}^2) and, when
it does, the senders convey log2(d^2 (d - k)) bits. The average over
branches is the channel's expected information per run; the classical
broadcast that makes the run work costs a further 2 log2(d) bits, reported
separately and never netted against the quantum figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .protocol import BatchStats, ChannelSpec

Z_LIMIT = 5.0
EXACT_SLACK = 1e-12


def branch_probabilities(spec: ChannelSpec) -> tuple[float, ...]:
    """p_k = (d - k) * (x_k^2 - x_{k-1}^2) for k = 0..d-1."""
    return tuple((spec.d - k) * gap for k, gap in enumerate(spec.gaps()))


def branch_capacity_bits(d: int, k: int) -> float:
    """Bits conveyed when branch k fires: log2(d^2 (d - k))."""
    if not 0 <= k < d:
        raise ValueError(f"branch index must be in [0, {d}), got {k}")
    return math.log2(d * d * (d - k))


def average_information(spec: ChannelSpec) -> float:
    """Expected bits per run, sum_k p_k log2(d^2 (d - k))."""
    return math.fsum(
        p * branch_capacity_bits(spec.d, k)
        for k, p in enumerate(branch_probabilities(spec))
    )


def classical_overhead(d: int) -> float:
    """Bits of classical broadcast consumed per run: 2 log2(d)."""
    if d < 2:
        raise ValueError(f"need at least two levels, got d={d}")
    return 2.0 * math.log2(d)


@dataclass(frozen=True)
class EmpiricalSection:
    trials: int
    frequencies: tuple[float, ...]
    bits_per_run: float


@dataclass(frozen=True)
class InfoReport:
    """Analytic per-branch accounting, optionally with an empirical section."""

    spec: ChannelSpec
    probabilities: tuple[float, ...]
    capacities_bits: tuple[float, ...]
    i_aver_bits: float
    overhead_bits: float
    empirical: Optional[EmpiricalSection] = None

    def to_dict(self) -> dict:
        doc = {
            "d": self.spec.d,
            "coeffs": list(self.spec.coeffs),
            "p": list(self.probabilities),
            "capacity_bits": list(self.capacities_bits),
            "i_aver_bits": self.i_aver_bits,
            "overhead_bits": self.overhead_bits,
        }
        if self.empirical is not None:
            doc["empirical"] = {
                "trials": self.empirical.trials,
                "freq": list(self.empirical.frequencies),
                "bits_per_run": self.empirical.bits_per_run,
            }
        return doc


def build_report(spec: ChannelSpec, stats: Optional[BatchStats] = None) -> InfoReport:
    """Assemble the report; zero-probability branches are kept, with p = 0."""
    probabilities = branch_probabilities(spec)
    capacities = tuple(branch_capacity_bits(spec.d, k) for k in range(spec.d))
    empirical = None
    if stats is not None:
        if stats.spec != spec:
            raise ValueError("batch statistics come from a different channel spec")
        empirical = EmpiricalSection(stats.trials, stats.frequencies, stats.bits_per_run)
    return InfoReport(
        spec=spec,
        probabilities=probabilities,
        capacities_bits=capacities,
        i_aver_bits=average_information(spec),
        overhead_bits=classical_overhead(spec.d),
        empirical=empirical,
    )


@dataclass(frozen=True)
class ComparisonVerdict:
    """Agreement between a batch and the analytic law.

    z_scores compare per-branch frequencies against the binomial standard
    error sqrt(p (1 - p) / N); the bits gap is measured against five sample
    standard errors of the per-run bits. A branch whose analytic probability
    is 0 or 1 has no binomial spread, so its z is 0 when the frequency
    matches to within float-representation slack and infinite otherwise
    (p itself carries rounding noise of a few ulps, e.g. 3 * (1/sqrt(3))**2).
    """

    z_scores: tuple[float, ...]
    max_abs_z: float
    bits_gap: float
    bits_tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        def finite(v):
            return v if math.isfinite(v) else None

        return {
            "z": [finite(z) for z in self.z_scores],
            "max_abs_z": finite(self.max_abs_z),
            "bits_gap": self.bits_gap,
            "bits_tolerance": self.bits_tolerance,
            "passed": self.passed,
        }


def compare_empirical(report: InfoReport, stats: BatchStats) -> ComparisonVerdict:
    """Check a batch against the report's analytic probabilities and bits."""
    if stats.spec != report.spec:
        raise ValueError("batch statistics come from a different channel spec")
    if stats.trials < 1:
        raise ValueError("cannot compare an empty batch")
    n = stats.trials
    z_scores = []
    for p, f in zip(report.probabilities, stats.frequencies):
        spread = math.sqrt(max(p * (1.0 - p), 0.0) / n)
        if spread == 0.0:
            z_scores.append(0.0 if abs(f - p) <= EXACT_SLACK else math.inf)
        else:
            z_scores.append((f - p) / spread)
    max_abs_z = max(abs(z) for z in z_scores)

    mean_bits = math.fsum(f * c for f, c in zip(stats.frequencies, report.capacities_bits))
    mean_sq = math.fsum(f * c * c for f, c in zip(stats.frequencies, report.capacities_bits))
    bits_se = math.sqrt(max(mean_sq - mean_bits * mean_bits, 0.0) / n)
    bits_gap = abs(stats.bits_per_run - report.i_aver_bits)
    bits_tolerance = Z_LIMIT * bits_se
    passed = max_abs_z <= Z_LIMIT and bits_gap <= max(bits_tolerance, EXACT_SLACK)
    return ComparisonVerdict(
        z_scores=tuple(z_scores),
        max_abs_z=max_abs_z,
        bits_gap=bits_gap,
        bits_tolerance=bits_tolerance,
        passed=passed,
    )
