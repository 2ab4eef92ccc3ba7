"""Command-line front end.

Subcommands: ``info`` (analytic report), ``run`` (Monte Carlo batch with a
statistical verdict), ``verify`` (self-check suites over a dimension
range), ``basis`` (dump a branch's encoded basis as state records).

Exit codes: 0 success, 1 a verification or statistical check failed,
2 usage or configuration error. Outputs contain no timestamps or runtime
details, so identical arguments and seed produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import info as info_mod
from . import operators, protocol
from .operators import MessageLabel
from .protocol import ChannelSpec
from .states import UNITARY_TOL
from .textfmt import dumps, sig6, sig17

VERIFY_MIN_D = 2
VERIFY_MAX_D = 8
BASIS_GRAM_TOL = 1e-10
COLUMN_TOL = 1e-12
AMPLITUDE_TOL = 1e-10


class CliError(Exception):
    """Configuration or usage problem; maps to exit code 2."""


@dataclass(frozen=True)
class CliConfig:
    """Resolved common options shared by the subcommands."""

    d: int
    coeffs: tuple[float, ...]
    seed: int
    trials: int
    fmt: str
    out: Optional[str]
    threads: int


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdense",
        description="Probabilistic dense coding over three-qudit GHZ-class channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_info = sub.add_parser("info", help="analytic branch probabilities and information report")
    _add_channel_options(p_info)
    _add_output_options(p_info)
    p_info.set_defaults(func=cmd_info)

    p_run = sub.add_parser("run", help="Monte Carlo batch with a statistical verdict")
    _add_channel_options(p_run)
    _add_output_options(p_run)
    p_run.add_argument("--trials", type=int, default=10000, help="number of protocol runs")
    p_run.add_argument("--seed", type=int, default=0, help="base seed; trial i uses (seed, i)")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads (never changes results)")
    p_run.add_argument(
        "--policy",
        choices=("random", "fixed"),
        default="random",
        help="message selection: uniform-random or a fixed per-branch table",
    )
    p_run.add_argument(
        "--messages",
        default=None,
        help="fixed policy table: d semicolon-separated m,t,n triples, one per branch",
    )
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run the self-check suites")
    p_verify.add_argument("--d", default="3", help="dimension or range, e.g. 3 or 2..5 (within [2, 8])")
    p_verify.add_argument("--seed", type=int, default=0, help="seed for the randomized spec draws")
    p_verify.set_defaults(func=cmd_verify)

    p_basis = sub.add_parser("basis", help="dump a branch's encoded basis as state records")
    p_basis.add_argument("--d", type=int, required=True, help="channel dimension")
    p_basis.add_argument("--branch", type=int, required=True, help="branch index k in [0, d)")
    p_basis.add_argument("--out", default=None, help="output path (default: stdout)")
    p_basis.set_defaults(func=cmd_basis)

    return parser


def _add_channel_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, required=True, help="channel dimension")
    p.add_argument(
        "--coeffs",
        required=True,
        help="comma-separated coefficients; the last may be 'auto' to complete the norm",
    )
    p.add_argument(
        "--sort",
        action="store_true",
        help="sort the coefficients ascending instead of rejecting unsorted input",
    )


def _add_output_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def parse_coeffs(text: str, sort: bool = False) -> tuple[float, ...]:
    """Parse '0.4,0.5,auto', completing a trailing 'auto' from the norm."""
    tokens = [t.strip() for t in text.split(",")]
    if any(not t for t in tokens):
        raise CliError(f"empty coefficient in {text!r}")
    values: list[float] = []
    for i, tok in enumerate(tokens):
        if tok == "auto":
            if i != len(tokens) - 1:
                raise CliError("'auto' is only allowed as the last coefficient")
            used = math.fsum(v * v for v in values)
            if used > 1.0 + 1e-10:
                raise CliError(
                    f"cannot complete 'auto': the other squared coefficients already sum to {used:.6g} > 1"
                )
            values.append(math.sqrt(max(1.0 - used, 0.0)))
        else:
            try:
                values.append(float(tok))
            except ValueError:
                raise CliError(f"invalid coefficient {tok!r}") from None
    if sort:
        values.sort()
    return tuple(values)


def resolve_spec(d: int, coeffs_text: str, sort: bool = False) -> ChannelSpec:
    coeffs = parse_coeffs(coeffs_text, sort=sort)
    if len(coeffs) != d:
        raise CliError(f"expected {d} coefficients for --d {d}, got {len(coeffs)}")
    try:
        return ChannelSpec(d, coeffs)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- info


def _info_table(report: info_mod.InfoReport) -> str:
    lines = []
    coeffs = ", ".join(sig6(c) for c in report.spec.coeffs)
    lines.append(f"channel: d={report.spec.d}, coeffs = {coeffs}")
    lines.append("branch  r  probability  capacity_bits  contribution_bits")
    for k, (p, c) in enumerate(zip(report.probabilities, report.capacities_bits)):
        r = report.spec.d - k
        lines.append(f"{k:<7d} {r:<2d} {sig6(p):<12s} {sig6(c):<14s} {sig6(p * c)}")
    lines.append(f"i_aver_bits    {sig6(report.i_aver_bits)}")
    lines.append(f"overhead_bits  {sig6(report.overhead_bits)}")
    if report.empirical is not None:
        emp = report.empirical
        freq = ", ".join(sig6(f) for f in emp.frequencies)
        lines.append(f"empirical      trials={emp.trials} freq=[{freq}] bits_per_run={sig6(emp.bits_per_run)}")
    return "\n".join(lines) + "\n"


def _info_csv(report: info_mod.InfoReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["branch", "r", "probability", "capacity_bits", "contribution_bits"])
    for k, (p, c) in enumerate(zip(report.probabilities, report.capacities_bits)):
        writer.writerow([k, report.spec.d - k, sig17(p), sig17(c), sig17(p * c)])
    return buf.getvalue()


def cmd_info(args) -> int:
    spec = resolve_spec(args.d, args.coeffs, sort=args.sort)
    report = info_mod.build_report(spec)
    if args.format == "json":
        text = dumps(report.to_dict()) + "\n"
    elif args.format == "csv":
        text = _info_csv(report)
    else:
        text = _info_table(report)
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------- run


def _parse_message_table(text: str, d: int) -> protocol.FixedMessages:
    entries = [e.strip() for e in text.split(";")]
    if len(entries) != d:
        raise CliError(f"--messages needs {d} semicolon-separated triples, got {len(entries)}")
    table = []
    for k, entry in enumerate(entries):
        parts = entry.split(",")
        if len(parts) != 3:
            raise CliError(f"message {entry!r} is not an m,t,n triple")
        try:
            m, t, n = (int(p) for p in parts)
        except ValueError:
            raise CliError(f"message {entry!r} is not an integer triple") from None
        msg = MessageLabel(m, t, n)
        try:
            operators.validate_message(d, k, msg)
        except ValueError as exc:
            raise CliError(f"branch {k}: {exc}") from None
        table.append(msg)
    return protocol.FixedMessages(tuple(table))


def _run_doc(stats: protocol.BatchStats, report: info_mod.InfoReport, verdict) -> dict:
    return {
        "d": stats.spec.d,
        "coeffs": list(stats.spec.coeffs),
        "trials": stats.trials,
        "seed": stats.base_seed,
        "counts": list(stats.counts),
        "freq": list(stats.frequencies),
        "bits_per_run": stats.bits_per_run,
        "failures": stats.failures,
        "analytic": {
            "p": list(report.probabilities),
            "capacity_bits": list(report.capacities_bits),
            "i_aver_bits": report.i_aver_bits,
            "overhead_bits": report.overhead_bits,
        },
        "comparison": verdict.to_dict(),
    }


def _run_table(stats: protocol.BatchStats, report: info_mod.InfoReport, verdict) -> str:
    lines = []
    coeffs = ", ".join(sig6(c) for c in stats.spec.coeffs)
    lines.append(f"channel: d={stats.spec.d}, coeffs = {coeffs}")
    lines.append(f"trials: {stats.trials}  seed: {stats.base_seed}  failures: {stats.failures}")
    lines.append("branch  count     freq      p_analytic  z")
    for k, (count, f, p, z) in enumerate(
        zip(stats.counts, stats.frequencies, report.probabilities, verdict.z_scores)
    ):
        z_text = sig6(z) if math.isfinite(z) else "inf"
        lines.append(f"{k:<7d} {count:<9d} {sig6(f):<9s} {sig6(p):<11s} {z_text}")
    lines.append(f"bits_per_run   {sig6(stats.bits_per_run)}  (analytic {sig6(report.i_aver_bits)})")
    lines.append(f"overhead_bits  {sig6(report.overhead_bits)}")
    lines.append(f"verdict        {'PASS' if verdict.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _run_csv(stats: protocol.BatchStats) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "branch", "m", "t", "n", "decoded_ok", "bits"])
    for i in range(stats.trials):
        branch, m, t, n, ok = (int(v) for v in stats.records[i])
        writer.writerow([i, branch, m, t, n, ok, sig17(stats.branch_bits(branch))])
    return buf.getvalue()


def cmd_run(args) -> int:
    spec = resolve_spec(args.d, args.coeffs, sort=args.sort)
    if args.trials < 1:
        raise CliError(f"--trials must be >= 1, got {args.trials}")
    if args.threads < 1:
        raise CliError(f"--threads must be >= 1, got {args.threads}")
    if args.policy == "fixed":
        if args.messages is None:
            raise CliError("--policy fixed needs --messages")
        policy: protocol.MessagePolicy = _parse_message_table(args.messages, spec.d)
    else:
        if args.messages is not None:
            raise CliError("--messages only applies to --policy fixed")
        policy = protocol.UniformMessages()
    stats = protocol.run_batch(spec, args.trials, args.seed, policy=policy, threads=args.threads)
    report = info_mod.build_report(spec, stats)
    verdict = info_mod.compare_empirical(report, stats)
    if args.format == "json":
        text = dumps(_run_doc(stats, report, verdict)) + "\n"
    elif args.format == "csv":
        text = _run_csv(stats)
    else:
        text = _run_table(stats, report, verdict)
    _emit(text, args.out)
    return 0 if verdict.passed and stats.failures == 0 else 1


# ---------------------------------------------------------------- verify


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    detail: str
    sublines: tuple[str, ...] = ()


def _parse_d_range(text: str) -> list[int]:
    text = text.strip()
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
        else:
            lo = hi = int(text)
    except ValueError:
        raise CliError(f"invalid dimension range {text!r}; use e.g. 3 or 2..5") from None
    if lo > hi:
        raise CliError(f"empty dimension range {text!r}")
    if lo < VERIFY_MIN_D or hi > VERIFY_MAX_D:
        raise CliError(f"dimension range must lie within [{VERIFY_MIN_D}, {VERIFY_MAX_D}], got {text!r}")
    return list(range(lo, hi + 1))


def _verify_specs(d: int, seed: int) -> list[ChannelSpec]:
    specs = [ChannelSpec.uniform(d)]
    graded = np.sqrt(np.arange(1, d + 1) / (d * (d + 1) / 2))
    specs.append(ChannelSpec(d, tuple(float(v) for v in graded)))
    rng = np.random.default_rng((seed, d))
    for _ in range(3):
        raw = np.sort(rng.random(d) + 0.05)
        raw = raw / math.sqrt(math.fsum(v * v for v in raw))
        specs.append(ChannelSpec(d, tuple(float(v) for v in raw)))
    return specs


def _suite_unitarity(d_values: list[int], seed: int) -> SuiteResult:
    checked = 0
    for d in d_values:
        for j in range(d):
            for k in range(d):
                u = operators.weyl(d, j, k)
                checked += 1
                if u.unitarity_defect() > UNITARY_TOL:
                    return SuiteResult(
                        "unitarity", False, checked,
                        f"shift/clock ({d},{j},{k}) defect {u.unitarity_defect():.3e}",
                    )
        for k_branch in range(d):
            for m in range(d):
                for t in range(d - k_branch):
                    u = operators.alice_op(d, k_branch, m, t)
                    checked += 1
                    if u.unitarity_defect() > UNITARY_TOL:
                        return SuiteResult(
                            "unitarity", False, checked,
                            f"sender-A op (d={d}, branch {k_branch}, m={m}, t={t}) defect {u.unitarity_defect():.3e}",
                        )
        for spec in _verify_specs(d, seed):
            u = operators.build_usim(spec)
            checked += 1
            if u.unitarity_defect() > UNITARY_TOL:
                return SuiteResult(
                    "unitarity", False, checked,
                    f"splitting unitary for {spec} defect {u.unitarity_defect():.3e}",
                )
    return SuiteResult("unitarity", True, checked, f"{checked} matrices within {UNITARY_TOL:g}")


def _suite_weyl_composition(d_values: list[int]) -> SuiteResult:
    checked = 0
    for d in d_values:
        omega = np.exp(2j * np.pi / d)
        for j1 in range(d):
            for k1 in range(d):
                for j2 in range(d):
                    for k2 in range(d):
                        left = operators.weyl(d, j1, k1).entries @ operators.weyl(d, j2, k2).entries
                        right = omega ** (k1 * j2) * operators.weyl(d, (j1 + j2) % d, (k1 + k2) % d).entries
                        checked += 1
                        dev = float(np.abs(left - right).max())
                        if dev > 1e-10:
                            return SuiteResult(
                                "weyl-composition", False, checked,
                                f"d={d}: ({j1},{k1})*({j2},{k2}) deviates by {dev:.3e}",
                            )
    return SuiteResult("weyl-composition", True, checked, f"{checked} operator pairs")


def _suite_bases(d_values: list[int]) -> SuiteResult:
    checked = 0
    sublines = []
    for d in d_values:
        for k_branch in range(d):
            matrix = operators.encoded_basis_matrix(d, k_branch)
            expected = d * d * (d - k_branch)
            if matrix.shape[0] != expected:
                return SuiteResult(
                    "encoded-bases", False, checked,
                    f"d={d} branch {k_branch}: {matrix.shape[0]} states, expected {expected}",
                )
            gram = matrix.conj() @ matrix.T
            dev = float(np.abs(gram - np.eye(matrix.shape[0])).max())
            checked += matrix.shape[0]
            if dev > BASIS_GRAM_TOL:
                return SuiteResult(
                    "encoded-bases", False, checked,
                    f"d={d} branch {k_branch}: Gram deviation {dev:.3e}",
                )
            sublines.append(f"{expected}-basis orthonormal (d={d}, branch {k_branch})")
    return SuiteResult("encoded-bases", True, checked, f"{checked} basis states", tuple(sublines))


def _suite_usim_columns(d_values: list[int], seed: int) -> SuiteResult:
    checked = 0
    for d in d_values:
        for spec in _verify_specs(d, seed):
            u = operators.build_usim(spec).entries
            x = spec.coeffs
            for j in range(d):
                expected = np.zeros(d * d, dtype=np.complex128)
                if x[j] > 0:
                    expected[j * d] = x[0]
                    for k in range(1, j + 1):
                        expected[j * d + k] = math.sqrt(x[k] * x[k] - x[k - 1] * x[k - 1])
                    expected /= x[j]
                else:
                    expected[j * d] = 1.0
                checked += 1
                dev = float(np.abs(u[:, j * d] - expected).max())
                if dev > COLUMN_TOL:
                    return SuiteResult(
                        "usim-columns", False, checked,
                        f"d={d} column |{j},0> deviates by {dev:.3e} for coeffs {spec.coeffs}",
                    )
            if d == 3:
                ref = operators.usim_reference_d3(spec).entries
                for j in range(d):
                    checked += 1
                    dev = float(np.abs(u[:, j * d] - ref[:, j * d]).max())
                    if dev > COLUMN_TOL:
                        return SuiteResult(
                            "usim-columns", False, checked,
                            f"d=3 reference disagrees on column |{j},0> by {dev:.3e}",
                        )
    return SuiteResult("usim-columns", True, checked, f"{checked} constrained columns")


def _suite_roundtrip(d_values: list[int]) -> SuiteResult:
    checked = 0
    for d in d_values:
        spec = ChannelSpec.uniform(d)
        for k_branch in range(d):
            gap = 1.0 / (d - k_branch) if k_branch == 0 else 0.0
            outcome = protocol.BranchOutcome(
                k=k_branch,
                r=d - k_branch,
                probability=(d - k_branch) * gap,
                post_state=operators.branch_channel_state(d, k_branch),
            )
            for msg in operators.branch_messages(d, k_branch):
                encoded = protocol.encode(outcome, msg)
                decoded, overlap = protocol.decode(encoded, spec, k_branch)
                checked += 1
                if decoded != msg or overlap < 1.0 - 1e-10:
                    return SuiteResult(
                        "round-trip", False, checked,
                        f"d={d} branch {k_branch} message {msg.as_tuple()} decoded as {decoded.as_tuple()} (overlap {overlap:.12g})",
                    )
    return SuiteResult("round-trip", True, checked, f"{checked} messages decoded exactly")


def cmd_verify(args) -> int:
    d_values = _parse_d_range(args.d)
    suites = [
        _suite_unitarity(d_values, args.seed),
        _suite_weyl_composition(d_values),
        _suite_bases(d_values),
        _suite_usim_columns(d_values, args.seed),
        _suite_roundtrip(d_values),
    ]
    all_passed = True
    for suite in suites:
        status = "PASS" if suite.passed else "FAIL"
        print(f"{status} {suite.name}: {suite.detail}")
        for line in suite.sublines:
            print(f"  {line}")
        if not suite.passed:
            all_passed = False
    return 0 if all_passed else 1


# ---------------------------------------------------------------- basis


def cmd_basis(args) -> int:
    if not VERIFY_MIN_D <= args.d <= operators.MAX_LEVELS:
        raise CliError(f"--d must be in [{VERIFY_MIN_D}, {operators.MAX_LEVELS}], got {args.d}")
    if not 0 <= args.branch < args.d:
        raise CliError(f"--branch must be in [0, {args.d}), got {args.branch}")
    spec = ChannelSpec.uniform(args.d)
    states = operators.encoded_basis(spec, args.branch)
    text = "".join(s.to_record() + "\n" for s in states)
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------- entry


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
