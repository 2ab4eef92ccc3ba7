import math

import numpy as np
import pytest

from qdense.info import (
    average_information,
    branch_capacity_bits,
    branch_probabilities,
    build_report,
    classical_overhead,
    compare_empirical,
)
from qdense.protocol import BatchStats, ChannelSpec, run_batch


SPEC3 = ChannelSpec(3, (0.4, 0.5, math.sqrt(0.59)))
SPEC4 = ChannelSpec(4, (0.3, 0.4, 0.5, math.sqrt(0.5)))


def test_branch_probabilities_reference_values():
    assert branch_probabilities(SPEC3) == pytest.approx((0.48, 0.18, 0.34), abs=1e-12)
    assert branch_probabilities(SPEC4) == pytest.approx((0.36, 0.21, 0.18, 0.25), abs=1e-12)


def test_branch_probabilities_equal_coefficients():
    # all the coefficient gaps vanish, so the first branch takes everything
    assert branch_probabilities(ChannelSpec.uniform(3)) == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)


def test_branch_probabilities_always_sum_to_one():
    rng = np.random.default_rng(2)
    for d in range(2, 9):
        squares = np.sort(rng.random(d))
        squares /= squares.sum()
        spec = ChannelSpec(d, tuple(float(v) for v in np.sqrt(squares)))
        assert math.fsum(branch_probabilities(spec)) == pytest.approx(1.0, abs=1e-12)


def test_branch_capacity_values():
    assert branch_capacity_bits(3, 0) == pytest.approx(math.log2(27), abs=1e-15)
    assert branch_capacity_bits(3, 1) == pytest.approx(math.log2(18), abs=1e-15)
    assert branch_capacity_bits(3, 2) == pytest.approx(math.log2(9), abs=1e-15)
    with pytest.raises(ValueError):
        branch_capacity_bits(3, 3)


def test_average_information_reference_values():
    assert average_information(SPEC3) == pytest.approx(4.110707001788468, abs=1e-12)
    assert average_information(SPEC4) == pytest.approx(5.232842125151443, abs=1e-12)


@pytest.mark.parametrize("d", range(2, 9))
def test_uniform_channel_reaches_full_capacity(d):
    spec = ChannelSpec.uniform(d)
    assert average_information(spec) == pytest.approx(3 * math.log2(d), abs=1e-12)


def test_average_information_bounds():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(2, 7))
        squares = np.sort(rng.random(d) + 1e-6)
        squares /= squares.sum()
        spec = ChannelSpec(d, tuple(float(v) for v in np.sqrt(squares)))
        i_aver = average_information(spec)
        assert 2 * math.log2(d) - 1e-12 <= i_aver <= 3 * math.log2(d) + 1e-12


def test_information_grows_as_the_channel_evens_out():
    # move squared weight from the top coefficient to the bottom one while
    # keeping the middle at 1/3; the average information must not decrease
    previous = None
    for w in np.linspace(0.0, 1.0, 100):
        lo = w / 3
        hi = 2 / 3 - lo
        coeffs = tuple(math.sqrt(v) for v in (lo, 1 / 3, hi))
        spec = ChannelSpec(3, coeffs)
        value = average_information(spec)
        if previous is not None:
            assert value >= previous - 1e-12
        previous = value
    assert previous == pytest.approx(3 * math.log2(3), abs=1e-12)


def test_classical_overhead():
    assert classical_overhead(3) == pytest.approx(2 * math.log2(3), abs=1e-15)
    assert classical_overhead(2) == pytest.approx(2.0, abs=1e-15)
    assert classical_overhead(5) == pytest.approx(2 * math.log2(5), abs=1e-15)
    with pytest.raises(ValueError):
        classical_overhead(1)


def test_report_schema():
    doc = build_report(SPEC3).to_dict()
    assert list(doc) == ["d", "coeffs", "p", "capacity_bits", "i_aver_bits", "overhead_bits"]
    assert doc["d"] == 3
    assert doc["p"] == pytest.approx([0.48, 0.18, 0.34], abs=1e-12)


def test_report_with_empirical_section():
    stats = run_batch(SPEC3, 500, 5)
    report = build_report(SPEC3, stats)
    doc = report.to_dict()
    assert doc["empirical"]["trials"] == 500
    assert doc["empirical"]["freq"] == pytest.approx(list(stats.frequencies))
    assert doc["empirical"]["bits_per_run"] == pytest.approx(stats.bits_per_run)


def test_report_rejects_foreign_stats():
    stats = run_batch(SPEC3, 50, 5)
    other = ChannelSpec.uniform(3)
    with pytest.raises(ValueError):
        build_report(other, stats)


def test_compare_empirical_passes_honest_sampling():
    stats = run_batch(SPEC3, 4000, 11)
    report = build_report(SPEC3, stats)
    verdict = compare_empirical(report, stats)
    assert verdict.passed
    assert verdict.max_abs_z <= 5.0
    assert len(verdict.z_scores) == 3


def test_compare_empirical_flags_impossible_counts():
    # hand-built batch whose branch counts sit far outside binomial spread
    capacities = [math.log2(9 * (3 - k)) for k in range(3)]
    freq = (0.6, 0.2, 0.2)
    fake = BatchStats(
        spec=SPEC3,
        trials=4000,
        base_seed=0,
        counts=(2400, 800, 800),
        frequencies=freq,
        bits_per_run=math.fsum(f * c for f, c in zip(freq, capacities)),
        failures=0,
        records=np.zeros((4000, 5), dtype=np.int32),
    )
    verdict = compare_empirical(build_report(SPEC3), fake)
    assert not verdict.passed
    assert verdict.max_abs_z > 5.0


def test_compare_empirical_rejects_empty_sample():
    empty = BatchStats(
        spec=SPEC3,
        trials=0,
        base_seed=0,
        counts=(0, 0, 0),
        frequencies=(0.0, 0.0, 0.0),
        bits_per_run=0.0,
        failures=0,
        records=np.zeros((0, 5), dtype=np.int32),
    )
    with pytest.raises(ValueError):
        compare_empirical(build_report(SPEC3), empty)


def test_compare_empirical_zero_probability_branch_exact():
    spec = ChannelSpec.uniform(3)
    stats = run_batch(spec, 300, 1)
    verdict = compare_empirical(build_report(spec, stats), stats)
    # branches 1 and 2 have analytic probability zero and empirical count
    # zero: that is an exact match, not a division blow-up
    assert verdict.passed
    assert verdict.z_scores[1] == 0.0
    assert verdict.z_scores[2] == 0.0


def test_verdict_dict_is_json_friendly():
    stats = run_batch(SPEC3, 200, 2)
    verdict = compare_empirical(build_report(SPEC3, stats), stats)
    doc = verdict.to_dict()
    assert set(doc) == {"z", "max_abs_z", "bits_gap", "bits_tolerance", "passed"}
    assert isinstance(doc["passed"], bool)
    assert all(z is None or isinstance(z, float) for z in doc["z"])
