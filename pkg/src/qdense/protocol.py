"""Three-party probabilistic dense-coding protocol over a GHZ-class channel.

One run: prepare the shared three-qudit channel, split it by attaching a
zero ancilla to sender A's particle, applying the splitting unitary and
measuring the ancilla, broadcast the branch index classically, encode a
two-party message on the sender particles, transmit them, and decode with
the branch's orthonormal basis. Every step lands in an ordered event trace.

Seeds: ``run_trial`` builds its generator from the seed value it is given;
``run_batch`` derives trial i's seed as (base_seed, i), so batch results are
independent of execution order and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels, operators
from .operators import (
    MAX_LEVELS,
    MessageLabel,
    encoded_basis_matrix,
    message_from_index,
    validate_message,
)
from .states import (
    MEMBERSHIP_TOL,
    NORM_TOL,
    BasisMismatchError,
    StateVector,
    apply_unitary,
    measure_register,
    tensor_product,
)
from .textfmt import dumps

SeedLike = Union[int, Sequence[int]]

EVENT_ORDER = (
    "Prepared",
    "AncillaAttached",
    "UsimApplied",
    "AncillaMeasured",
    "ClassicalBroadcast",
    "Encoded",
    "ParticlesSent",
    "Decoded",
)


@dataclass(frozen=True)
class ChannelSpec:
    """Channel dimension d and its ascending, normalized coefficients."""

    d: int
    coeffs: tuple[float, ...]

    def __post_init__(self):
        d = int(self.d)
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "coeffs", coeffs)
        if d < 2:
            raise ValueError(f"channel needs at least two levels, got d={d}")
        if d > MAX_LEVELS:
            raise ValueError(f"channel dimension {d} above the supported maximum {MAX_LEVELS}")
        if len(coeffs) != d:
            raise ValueError(f"expected {d} coefficients, got {len(coeffs)}")
        if any(c < 0 for c in coeffs):
            raise ValueError(f"coefficients must be nonnegative, got {coeffs}")
        if any(b < a for a, b in zip(coeffs, coeffs[1:])):
            raise ValueError(f"coefficients must be ascending, got {coeffs}")
        total = math.fsum(c * c for c in coeffs)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"coefficients not normalized: sum of squares is {total!r}")

    @classmethod
    def uniform(cls, d: int) -> "ChannelSpec":
        return cls(d, (1.0 / math.sqrt(d),) * d)

    def gaps(self) -> tuple[float, ...]:
        """Consecutive squared-coefficient gaps x_k^2 - x_{k-1}^2 (x_{-1} = 0)."""
        out = []
        prev = 0.0
        for c in self.coeffs:
            sq = c * c
            out.append(sq - prev)
            prev = sq
        return tuple(out)


@dataclass(frozen=True)
class BranchOutcome:
    """A split-measurement result: branch k, r = d - k surviving terms."""

    k: int
    r: int
    probability: float
    post_state: StateVector


@dataclass(frozen=True)
class TraceEvent:
    step: int
    name: str
    payload: dict


@dataclass(frozen=True)
class TrialSummary:
    branch: int
    sent: MessageLabel
    decoded: MessageLabel
    succeeded: bool
    message_bits: float
    broadcast_bits: float


@dataclass(frozen=True)
class ProtocolTrace:
    spec: ChannelSpec
    seed: object
    events: tuple[TraceEvent, ...]
    summary: TrialSummary

    def to_jsonl(self) -> str:
        """One event per line: {"step": i, "name": ..., "payload": {...}}."""
        lines = [
            dumps({"step": ev.step, "name": ev.name, "payload": ev.payload})
            for ev in self.events
        ]
        return "\n".join(lines) + "\n"


class ClassicalChannel:
    """Broadcast interface sender A uses to announce the branch index."""

    def broadcast(self, branch: int, d: int) -> float:
        """Announce the branch to everyone; returns the bits charged."""
        raise NotImplementedError


class RecordingChannel(ClassicalChannel):
    """In-process recorder charging 2 log2(d) bits per announcement."""

    def __init__(self):
        self.broadcasts: list[tuple[int, float]] = []

    def broadcast(self, branch: int, d: int) -> float:
        bits = 2.0 * math.log2(d)
        self.broadcasts.append((branch, bits))
        return bits


class MessagePolicy:
    """Chooses the message the senders encode for a given branch."""

    def choose(self, spec: ChannelSpec, k_branch: int, rng: np.random.Generator) -> MessageLabel:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformMessages(MessagePolicy):
    """Draw uniformly among the branch's d*d*r messages (one rng call)."""

    def choose(self, spec, k_branch, rng):
        r = spec.d - k_branch
        index = int(rng.integers(spec.d * spec.d * r))
        return message_from_index(spec.d, k_branch, index)


@dataclass(frozen=True)
class FixedMessages(MessagePolicy):
    """One predeclared message per branch; consumes no randomness."""

    table: tuple[MessageLabel, ...]

    def choose(self, spec, k_branch, rng):
        if len(self.table) != spec.d:
            raise ValueError(f"fixed-message table needs {spec.d} entries, got {len(self.table)}")
        msg = self.table[k_branch]
        validate_message(spec.d, k_branch, msg)
        return msg


def prepare_channel(spec: ChannelSpec) -> StateVector:
    """The shared channel state sum_j x_j |jjj> on registers (A, B, C)."""
    d = spec.d
    amps = np.zeros(d**3, dtype=np.complex128)
    diag_stride = d * d + d + 1
    for j, c in enumerate(spec.coeffs):
        amps[j * diag_stride] = c
    return StateVector._make((d, d, d), amps)


def _drop_register(state: StateVector, target: int, digit: int) -> StateVector:
    # Exact removal of a register whose digit is fixed: every amplitude with
    # a different digit there is exactly zero after the collapse.
    tensor = state.amps.reshape(state.dims)
    sel: list = [slice(None)] * len(state.dims)
    sel[target] = digit
    sub = np.ascontiguousarray(tensor[tuple(sel)].reshape(-1))
    new_dims = state.dims[:target] + state.dims[target + 1 :]
    return StateVector._make(new_dims, sub)


def split_channel(state: StateVector, spec: ChannelSpec, rng: np.random.Generator) -> BranchOutcome:
    """Attach a zero ancilla, apply the splitting unitary, measure the ancilla.

    Branch k fires with probability (d - k) * (x_k^2 - x_{k-1}^2) and leaves
    the three-qudit state (1/sqrt(r)) sum_{s=k}^{d-1} |sss>.
    """
    d = spec.d
    if state.dims != (d, d, d):
        raise ValueError(f"channel state must have dims {(d, d, d)}, got {state.dims}")
    joint = tensor_product(state, StateVector.basis_state((d,), (0,)))
    joint = apply_unitary(operators.build_usim(spec), joint, (0, 3))
    outcome = measure_register(joint, 3, rng)
    reduced = _drop_register(outcome.post_state, 3, outcome.index)
    return BranchOutcome(outcome.index, d - outcome.index, outcome.probability, reduced)


def encode(branch: BranchOutcome, msg: MessageLabel) -> StateVector:
    """Both senders apply their encoding operators to the branch state."""
    d = branch.post_state.dims[0]
    validate_message(d, branch.k, msg)
    state = apply_unitary(operators.alice_op(d, branch.k, msg.m, msg.t), branch.post_state, (0,))
    return apply_unitary(operators.bob_op(d, msg.n), state, (1,))


def decode(state: StateVector, spec: ChannelSpec, k_branch: int) -> tuple[MessageLabel, float]:
    """Project onto the branch's encoded basis; returns (message, overlap).

    Raises BasisMismatchError when the state is outside the encoded family
    (best overlap below 1 - 1e-6).
    """
    d = spec.d
    if not 0 <= k_branch < d:
        raise ValueError(f"branch index must be in [0, {d}), got {k_branch}")
    if state.dims != (d, d, d):
        raise ValueError(f"encoded state must have dims {(d, d, d)}, got {state.dims}")
    matrix = encoded_basis_matrix(d, k_branch)
    idx, mag = kernels.best_overlap(matrix, state.amps)
    if mag < 1.0 - MEMBERSHIP_TOL:
        raise BasisMismatchError(
            f"state is outside the branch-{k_branch} encoded family: best overlap {mag:.6g} at index {idx}",
            idx,
            mag,
        )
    return message_from_index(d, k_branch, idx), mag


def run_trial(
    spec: ChannelSpec,
    policy: MessagePolicy,
    seed: SeedLike,
    channel: Optional[ClassicalChannel] = None,
) -> ProtocolTrace:
    """One complete noise-free protocol run with a full event trace.

    An identical seed reproduces the trace bit for bit. The trial consumes
    one draw for the split measurement and, for random policies, one more
    for the message.
    """
    rng = np.random.default_rng(seed)
    broadcast_channel = RecordingChannel() if channel is None else channel
    events: list[TraceEvent] = []

    def log(name: str, **payload) -> None:
        events.append(TraceEvent(len(events), name, payload))

    d = spec.d
    state = prepare_channel(spec)
    log("Prepared", d=d, coeffs=list(spec.coeffs))
    outcome = split_channel(state, spec, rng)
    # The three interior steps of split_channel, in protocol order.
    log("AncillaAttached", dims=[d, d, d, d])
    log("UsimApplied", targets=[0, 3])
    log("AncillaMeasured", branch=outcome.k, probability=outcome.probability)
    bits_broadcast = broadcast_channel.broadcast(outcome.k, d)
    log("ClassicalBroadcast", branch=outcome.k, bits=bits_broadcast)
    msg = policy.choose(spec, outcome.k, rng)
    encoded = encode(outcome, msg)
    log("Encoded", m=msg.m, t=msg.t, n=msg.n)
    log("ParticlesSent", particles=["A", "B"])
    decoded, overlap = decode(encoded, spec, outcome.k)
    log("Decoded", m=decoded.m, t=decoded.t, n=decoded.n, overlap=overlap)

    summary = TrialSummary(
        branch=outcome.k,
        sent=msg,
        decoded=decoded,
        succeeded=decoded == msg,
        message_bits=math.log2(d * d * outcome.r),
        broadcast_bits=bits_broadcast,
    )
    seed_value = tuple(seed) if isinstance(seed, (list, tuple)) else seed
    return ProtocolTrace(spec, seed_value, tuple(events), summary)


@dataclass(frozen=True)
class BatchStats:
    """Order-independent aggregate of a trial batch.

    ``records`` keeps one row per trial, (branch, m, t, n, succeeded), in
    trial order; aggregates are computed from counts so they cannot depend
    on scheduling.
    """

    spec: ChannelSpec
    trials: int
    base_seed: int
    counts: tuple[int, ...]
    frequencies: tuple[float, ...]
    bits_per_run: float
    failures: int
    records: np.ndarray

    def branch_bits(self, k: int) -> float:
        return math.log2(self.spec.d * self.spec.d * (self.spec.d - k))


def run_batch(
    spec: ChannelSpec,
    trials: int,
    base_seed: int,
    policy: Optional[MessagePolicy] = None,
    threads: int = 1,
) -> BatchStats:
    """Aggregate ``trials`` independent runs; trial i is seeded (base_seed, i)."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    chosen_policy = UniformMessages() if policy is None else policy
    records = np.zeros((trials, 5), dtype=np.int32)

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            summary = run_trial(spec, chosen_policy, (base_seed, i)).summary
            records[i, 0] = summary.branch
            records[i, 1] = summary.sent.m
            records[i, 2] = summary.sent.t
            records[i, 3] = summary.sent.n
            records[i, 4] = 1 if summary.succeeded else 0

    if threads == 1:
        fill(0, trials)
    else:
        chunk = max(1, -(-trials // (threads * 8)))
        bounds = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: fill(*b), bounds))

    counts = np.bincount(records[:, 0], minlength=spec.d)
    frequencies = counts / trials
    capacities = [math.log2(spec.d * spec.d * (spec.d - k)) for k in range(spec.d)]
    bits_per_run = math.fsum(f * c for f, c in zip(frequencies, capacities))
    failures = trials - int(records[:, 4].sum())
    records.setflags(write=False)
    return BatchStats(
        spec=spec,
        trials=trials,
        base_seed=base_seed,
        counts=tuple(int(c) for c in counts),
        frequencies=tuple(float(f) for f in frequencies),
        bits_per_run=bits_per_run,
        failures=failures,
        records=records,
    )
