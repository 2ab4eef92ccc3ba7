"""Probabilistic dense coding over three-qudit GHZ-class channels.

A simulation and analysis library: dense qudit state vectors, the
shift/clock operator families and branch-restricted encodings, the
channel-splitting unitary, the full three-party protocol with event
traces, and closed-form information accounting with Monte Carlo
cross-checks.
"""

from .info import (
    ComparisonVerdict,
    EmpiricalSection,
    InfoReport,
    average_information,
    branch_capacity_bits,
    branch_probabilities,
    build_report,
    classical_overhead,
    compare_empirical,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .operators import (
    BranchLabel,
    MessageLabel,
    WeylLabel,
    alice_op,
    bob_op,
    branch_channel_state,
    branch_messages,
    build_usim,
    complete_to_unitary,
    encoded_basis,
    encoded_state,
    message_from_index,
    message_index,
    phase_op,
    usim_reference_d3,
    validate_message,
    weyl,
)
from .protocol import (
    BatchStats,
    BranchOutcome,
    ChannelSpec,
    ClassicalChannel,
    FixedMessages,
    MessagePolicy,
    ProtocolTrace,
    RecordingChannel,
    TraceEvent,
    TrialSummary,
    UniformMessages,
    decode,
    encode,
    prepare_channel,
    run_batch,
    run_trial,
    split_channel,
)
from .states import (
    BasisMismatchError,
    MeasurementOutcome,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    inner_product,
    measure_register,
    project_onto_basis,
    tensor_product,
)

__version__ = "0.1.0"

__all__ = [
    "BasisMismatchError",
    "BatchStats",
    "BranchLabel",
    "BranchOutcome",
    "ChannelSpec",
    "ClassicalChannel",
    "ComparisonVerdict",
    "EmpiricalSection",
    "FixedMessages",
    "InfoReport",
    "KERNEL_BACKEND",
    "MeasurementOutcome",
    "MessageLabel",
    "MessagePolicy",
    "ProtocolTrace",
    "RecordingChannel",
    "StateVector",
    "TraceEvent",
    "TrialSummary",
    "UniformMessages",
    "UnitaryMatrix",
    "WeylLabel",
    "alice_op",
    "apply_unitary",
    "average_information",
    "bob_op",
    "branch_capacity_bits",
    "branch_channel_state",
    "branch_messages",
    "branch_probabilities",
    "build_report",
    "build_usim",
    "classical_overhead",
    "compare_empirical",
    "complete_to_unitary",
    "decode",
    "encode",
    "encoded_basis",
    "encoded_state",
    "inner_product",
    "measure_register",
    "message_from_index",
    "message_index",
    "phase_op",
    "prepare_channel",
    "project_onto_basis",
    "run_batch",
    "run_trial",
    "split_channel",
    "tensor_product",
    "usim_reference_d3",
    "validate_message",
    "weyl",
    "__version__",
]
