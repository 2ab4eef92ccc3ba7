import json
import math

import numpy as np
import pytest

from qdense.operators import MessageLabel, branch_channel_state, branch_messages
from qdense.protocol import (
    EVENT_ORDER,
    BranchOutcome,
    ChannelSpec,
    FixedMessages,
    RecordingChannel,
    UniformMessages,
    decode,
    encode,
    prepare_channel,
    run_batch,
    run_trial,
    split_channel,
)
from qdense.states import BasisMismatchError, StateVector

from helpers import ket


SPEC3 = ChannelSpec(3, (0.4, 0.5, math.sqrt(0.59)))


class TestChannelSpec:
    def test_valid_spec_normalizes_metadata(self):
        assert SPEC3.d == 3
        assert SPEC3.gaps() == pytest.approx((0.16, 0.09, 0.34), abs=1e-12)

    def test_uniform(self):
        spec = ChannelSpec.uniform(4)
        assert spec.coeffs == pytest.approx((0.5,) * 4)
        assert spec.gaps() == pytest.approx((0.25, 0.0, 0.0, 0.0), abs=1e-12)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="3 coefficients"):
            ChannelSpec(3, (1.0,))

    def test_rejects_descending_order(self):
        with pytest.raises(ValueError, match="ascending"):
            ChannelSpec(2, (0.8, 0.6))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="nonnegative"):
            ChannelSpec(2, (-0.6, 0.8))

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="normalized"):
            ChannelSpec(2, (0.6, 0.9))

    def test_rejects_tiny_and_huge_d(self):
        with pytest.raises(ValueError):
            ChannelSpec(1, (1.0,))
        with pytest.raises(ValueError):
            ChannelSpec.uniform(17)


def test_prepare_channel_is_the_diagonal_superposition():
    state = prepare_channel(SPEC3)
    expected = (
        0.4 * ket((3, 3, 3), 0, 0, 0)
        + 0.5 * ket((3, 3, 3), 1, 1, 1)
        + math.sqrt(0.59) * ket((3, 3, 3), 2, 2, 2)
    )
    assert np.allclose(state.amps, expected, atol=1e-14)


def test_split_channel_branch_statistics():
    state = prepare_channel(SPEC3)
    rng = np.random.default_rng(99)
    counts = [0, 0, 0]
    for _ in range(6000):
        outcome = split_channel(state, SPEC3, rng)
        counts[outcome.k] += 1
        assert outcome.r == 3 - outcome.k
    freq = [c / 6000 for c in counts]
    assert freq[0] == pytest.approx(0.48, abs=0.03)
    assert freq[1] == pytest.approx(0.18, abs=0.03)
    assert freq[2] == pytest.approx(0.34, abs=0.03)


def test_split_channel_post_state_and_probability():
    state = prepare_channel(SPEC3)
    seen = set()
    for seed in range(40):
        outcome = split_channel(state, SPEC3, np.random.default_rng(seed))
        seen.add(outcome.k)
        expected_p = (3 - outcome.k) * SPEC3.gaps()[outcome.k]
        assert outcome.probability == pytest.approx(expected_p, abs=1e-10)
        ref = branch_channel_state(3, outcome.k)
        assert np.abs(outcome.post_state.amps - ref.amps).max() < 1e-10
    assert seen == {0, 1, 2}


def test_exhaustive_round_trip_small_dimensions():
    for d in (2, 3, 4):
        spec = ChannelSpec.uniform(d)
        for k_branch in range(d):
            outcome = BranchOutcome(
                k=k_branch,
                r=d - k_branch,
                probability=1.0,
                post_state=branch_channel_state(d, k_branch),
            )
            for msg in branch_messages(d, k_branch):
                decoded, overlap = decode(encode(outcome, msg), spec, k_branch)
                assert decoded == msg
                assert overlap == pytest.approx(1.0, abs=1e-10)


def test_decode_rejects_state_outside_the_family():
    # |012> has no diagonal component, so it cannot be an encoded state of
    # branch 0; its best overlap against that family is exactly 1/sqrt(3).
    stranger = StateVector.basis_state((3, 3, 3), (0, 1, 2))
    with pytest.raises(BasisMismatchError) as err:
        decode(stranger, SPEC3, 0)
    assert err.value.best_overlap == pytest.approx(1 / math.sqrt(3), abs=1e-12)


def test_decode_validates_branch_and_dims():
    state = branch_channel_state(3, 0)
    with pytest.raises(ValueError):
        decode(state, SPEC3, 3)
    with pytest.raises(ValueError):
        decode(StateVector.basis_state((2, 2, 2), (0, 0, 0)), SPEC3, 0)


def test_trace_event_order_and_payloads():
    trace = run_trial(SPEC3, UniformMessages(), 1234)
    assert tuple(e.name for e in trace.events) == EVENT_ORDER
    assert [e.step for e in trace.events] == list(range(8))
    by_name = {e.name: e.payload for e in trace.events}
    assert by_name["Prepared"]["d"] == 3
    assert by_name["ClassicalBroadcast"]["bits"] == pytest.approx(2 * math.log2(3))
    assert by_name["AncillaMeasured"]["branch"] == trace.summary.branch
    assert by_name["Decoded"]["overlap"] == pytest.approx(1.0, abs=1e-10)
    sent = trace.summary.sent
    assert by_name["Encoded"] == {"m": sent.m, "t": sent.t, "n": sent.n}


def test_trial_summary_accounting():
    trace = run_trial(SPEC3, UniformMessages(), 77)
    r = 3 - trace.summary.branch
    assert trace.summary.succeeded
    assert trace.summary.message_bits == pytest.approx(math.log2(9 * r))
    assert trace.summary.broadcast_bits == pytest.approx(2 * math.log2(3))


def test_run_trial_is_deterministic_in_the_seed():
    a = run_trial(SPEC3, UniformMessages(), (5, 0))
    b = run_trial(SPEC3, UniformMessages(), (5, 0))
    assert a == b
    c = run_trial(SPEC3, UniformMessages(), (5, 1))
    assert a.seed != c.seed


def test_fixed_policy_reports_the_declared_message():
    table = (MessageLabel(1, 2, 0), MessageLabel(2, 1, 1), MessageLabel(0, 0, 2))
    trace = run_trial(SPEC3, FixedMessages(table), 9)
    assert trace.summary.sent == table[trace.summary.branch]
    assert trace.summary.succeeded


def test_fixed_policy_validates_table():
    # t = 2 is out of range once branch 1 only has r = 2 phases
    table = (MessageLabel(0, 0, 0), MessageLabel(0, 2, 0), MessageLabel(0, 0, 0))
    spec = SPEC3
    bad_seed = None
    for seed in range(50):
        if run_trial(spec, UniformMessages(), seed).summary.branch == 1:
            bad_seed = seed
            break
    assert bad_seed is not None
    with pytest.raises(ValueError):
        run_trial(spec, FixedMessages(table), bad_seed)


def test_trace_jsonl_shape():
    trace = run_trial(SPEC3, UniformMessages(), 4321)
    text = trace.to_jsonl()
    assert text.endswith("\n")
    lines = text.splitlines()
    assert len(lines) == 8
    docs = [json.loads(line) for line in lines]
    assert [doc["step"] for doc in docs] == list(range(8))
    assert [doc["name"] for doc in docs] == list(EVENT_ORDER)
    assert docs[0]["payload"]["coeffs"] == pytest.approx(list(SPEC3.coeffs))


def test_run_batch_aggregates_counts():
    stats = run_batch(SPEC3, 400, 17)
    assert sum(stats.counts) == 400
    assert stats.failures == 0
    assert stats.records.shape == (400, 5)
    assert all(f == c / 400 for f, c in zip(stats.frequencies, stats.counts))


def test_run_batch_thread_count_never_changes_results():
    one = run_batch(SPEC3, 600, 23, threads=1)
    four = run_batch(SPEC3, 600, 23, threads=4)
    assert np.array_equal(one.records, four.records)
    assert one.counts == four.counts
    assert one.bits_per_run == four.bits_per_run


def test_run_batch_matches_individual_trials():
    stats = run_batch(SPEC3, 25, 31)
    for i in range(25):
        summary = run_trial(SPEC3, UniformMessages(), (31, i)).summary
        row = stats.records[i]
        assert tuple(int(v) for v in row) == (
            summary.branch,
            summary.sent.m,
            summary.sent.t,
            summary.sent.n,
            1 if summary.succeeded else 0,
        )


def test_uniform_channel_always_lands_in_branch_zero():
    spec = ChannelSpec.uniform(3)
    stats = run_batch(spec, 200, 3)
    assert stats.counts == (200, 0, 0)
    assert stats.bits_per_run == pytest.approx(math.log2(27), abs=1e-12)


def test_degenerate_spec_always_lands_in_branch_one():
    # x_0 = 0 kills branch 0; the (0, s, s) channel is a two-term
    # maximally entangled state and always reports branch 1.
    s = 1 / math.sqrt(2)
    spec = ChannelSpec(3, (0.0, s, s))
    ref = branch_channel_state(3, 1)
    for seed in range(30):
        outcome = split_channel(prepare_channel(spec), spec, np.random.default_rng(seed))
        assert outcome.k == 1
        assert outcome.probability == pytest.approx(1.0, abs=1e-10)
        assert np.abs(outcome.post_state.amps - ref.amps).max() < 1e-10


def test_single_term_spec_always_lands_in_last_branch():
    # Only x_2 survives, so the split can do nothing but report the
    # one-term branch and hand back |222>.
    spec = ChannelSpec(3, (0.0, 0.0, 1.0))
    for seed in range(30):
        outcome = split_channel(prepare_channel(spec), spec, np.random.default_rng(seed))
        assert outcome.k == 2
        assert outcome.r == 1
        assert outcome.probability == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(outcome.post_state.amps, ket((3, 3, 3), 2, 2, 2), atol=1e-10)


def test_explicit_broadcast_channel_hears_exactly_one_announcement():
    channel = RecordingChannel()
    trace = run_trial(SPEC3, UniformMessages(), 55, channel=channel)
    assert channel.broadcasts == [(trace.summary.branch, 2 * math.log2(3))]
