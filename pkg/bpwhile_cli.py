#!/usr/bin/env python3
"""Command-line front end for the BPWhile privacy and termination verifier."""

from __future__ import annotations

import logging
import sys
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

import click
import typer
from rich.console import Console

from bpwhile import __version__
from bpwhile.chain import build_chain, dump_chain, normalize_chain, zero_recurrent
from bpwhile.corpus import corpus_run, list_entries, report_record
from bpwhile.desugar import load_program
from bpwhile.dist import SOLVERS, conditional_distribution, output_distribution
from bpwhile.divergence import INDETERMINATE, GapParams, check_gap_cdp, check_gap_rdp, check_gap_tcdp
from bpwhile.dpcheck import INSENSITIVE, SENSITIVE, NeighborRelation, PrivacyParams, check_approx_dp, check_pure_dp
from bpwhile.errors import EXIT_USAGE, SolverInvariantError, VerifierError
from bpwhile.qbf import parse_qbf
from bpwhile.reach import ast_check
from bpwhile.records import OK, RationalValue, VerdictRecord, ast_record, dist_details, dp_record, gap_record
from bpwhile.reductions import KINDS, TQBF, ReductionSpec, apply_reduction
from bpwhile.semantics import run_sample
from bpwhile.syntax import Program, format_output, pretty_print, program_size
from bpwhile.utils.config import VerifierLimits, get_log_level, load_limits
from bpwhile.utils.logging_utils import configure_json_logging
from bpwhile.utils.rationals import format_rational, parse_dyadic, parse_rational

logger = logging.getLogger("bpwhile.cli")

TEXT = "text"
JSON = "json"

app = typer.Typer(
    name="bpwhile",
    help="Exact differential-privacy and termination verifier for boolean probabilistic while programs.",
    no_args_is_help=True,
    add_completion=False,
)
corpus_app = typer.Typer(help="List and run the bundled corpus.", no_args_is_help=True)
app.add_typer(corpus_app, name="corpus")

diagnostics = Console(stderr=True, markup=False, highlight=False, emoji=False, soft_wrap=True)


@dataclass
class Session:
    output_format: str
    limits: VerifierLimits


def _session(ctx: typer.Context) -> Session:
    session = ctx.find_root().obj
    if session is None:
        return Session(TEXT, load_limits())
    return session


@app.callback()
def configure(
    ctx: typer.Context,
    output_format: str = typer.Option(TEXT, "--format", help="Record format: text or json."),
    jobs: Optional[int] = typer.Option(None, "--jobs", min=1, help="Worker processes for per-input work."),
    max_states: Optional[int] = typer.Option(None, "--max-states", min=1, help="Chain state budget."),
    max_precision: Optional[int] = typer.Option(None, "--max-precision", min=64, help="Divergence precision cap in bits."),
    max_alpha_grid: Optional[int] = typer.Option(None, "--max-alpha-grid", min=1, help="Alpha-grid budget."),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Log level for the JSON log on stderr."),
) -> None:
    if output_format not in (TEXT, JSON):
        raise typer.BadParameter(f"expected text or json, got {output_format!r}", param_hint="--format")
    configure_json_logging(log_level or get_log_level())
    overrides = {
        "jobs": jobs,
        "max_states": max_states,
        "max_precision_bits": max_precision,
        "max_alpha_grid": max_alpha_grid,
    }
    limits = replace(load_limits(), **{key: value for key, value in overrides.items() if value is not None})
    logger.debug("limits: %s", limits)
    ctx.obj = Session(output_format, limits)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _rational_line(label: str, value: dict | RationalValue | None) -> str | None:
    if value is None:
        return None
    if isinstance(value, RationalValue):
        return f"  {label}: {value.exact} (~{value.approx})"
    return f"  {label}: {value['exact']} (~{value['approx']})"


def render_text(record: VerdictRecord) -> str:
    lines = [f"decision: {record.decision}"]
    witness = record.witness
    if witness is not None:
        pair = witness.input_bits if witness.neighbor_bits is None else f"{witness.input_bits} vs {witness.neighbor_bits}"
        lines.append(f"witness: {pair}")
        if witness.outcomes:
            lines.append(f"  outcomes: {', '.join(witness.outcomes)}")
        if witness.state:
            lines.append(f"  state: {witness.state}")
        if witness.reason:
            lines.append(f"  reason: {witness.reason}")
        for label, value in (
            ("alpha", witness.alpha),
            ("lhs", witness.lhs),
            ("rhs", witness.rhs),
            ("lower", witness.interval_lower),
            ("upper", witness.interval_upper),
        ):
            line = _rational_line(label, value)
            if line:
                lines.append(line)
    for key, value in record.details.items():
        if isinstance(value, dict) and "exact" in value:
            lines.append(_rational_line(key, value))
        elif isinstance(value, str) and "\n" in value:
            lines.append(f"{key}:")
            lines.extend(f"  {row}" for row in value.rstrip("\n").splitlines())
        elif key != "entries":
            lines.append(f"{key}: {value}")
    if record.precision_bits is not None:
        lines.append(f"precision: {record.precision_bits} bits")
    return "\n".join(lines)


def _status(decision: str, exit_code: int) -> str:
    if decision == INDETERMINATE:
        return f"⚠️ {decision}"
    return f"✅ {decision}" if exit_code == 0 else f"❌ {decision}"


def emit(ctx: typer.Context, record: VerdictRecord, started: float) -> None:
    """Write the record to stdout and exit with the decision's code."""
    session = _session(ctx)
    record.elapsed_seconds = time.perf_counter() - started
    if session.output_format == JSON:
        typer.echo(record.to_json())
    else:
        typer.echo(render_text(record))
        diagnostics.print(_status(record.decision, record.exit_code))
    raise typer.Exit(record.exit_code)


def _command(ctx: typer.Context) -> list[str]:
    """Echo of the invocation: command path plus the options that were set."""
    words = ctx.command_path.split()
    for key, value in ctx.params.items():
        if value is None or value is False:
            continue
        words.append(f"--{key.replace('_', '-')}" if value is True else f"{key}={value}")
    return words


def _load(path: Path) -> Program:
    prog = load_program(path)
    logger.info("loaded %s: %s inputs, %s lines", path, prog.input_length, prog.line_count)
    return prog


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@app.command("parse")
def parse_command(
    ctx: typer.Context,
    program: Path = typer.Argument(..., help="Program file (.bpw core or .bpwx extended)."),
) -> None:
    """Parse (and desugar) a program and print its canonical core text."""
    started = time.perf_counter()
    prog = _load(program)
    details = {
        "inputs": list(prog.input_vars),
        "outputs": [format_output(item) for item in prog.outputs],
        "lines": prog.line_count,
        "size": program_size(prog),
        "program": pretty_print(prog),
    }
    emit(ctx, VerdictRecord(_command(ctx), OK, details=details), started)


@app.command("dist")
def dist_command(
    ctx: typer.Context,
    program: Path = typer.Argument(..., help="Program file."),
    input_bits: str = typer.Option("", "--input", help="Input bit string, most significant variable first."),
    conditional: bool = typer.Option(False, "--conditional", help="Condition on termination."),
    solver: str = typer.Option("auto", "--solver", help="auto, dense or sparse."),
) -> None:
    """Print the exact output distribution for one input."""
    if solver not in SOLVERS:
        raise typer.BadParameter(f"expected one of {', '.join(SOLVERS)}", param_hint="--solver")
    started = time.perf_counter()
    session = _session(ctx)
    prog = _load(program)
    dist = output_distribution(prog, input_bits, session.limits, solver=solver)
    if conditional:
        dist = conditional_distribution(dist, input_bits)
    details = {"input": input_bits, "distribution": dist_details(dist)}
    if session.output_format == TEXT:
        details["distribution"] = "\n".join(
            f"{outcome} {format_rational(p)} (~{RationalValue.of(p).approx})" for outcome, p in dist.items()
        )
    emit(ctx, VerdictRecord(_command(ctx), OK, details=details), started)


@app.command("ast-check")
def ast_check_command(
    ctx: typer.Context,
    program: Path = typer.Argument(..., help="Program file."),
) -> None:
    """Decide almost-sure termination on every input."""
    started = time.perf_counter()
    prog = _load(program)
    verdict = ast_check(prog, _session(ctx).limits)
    emit(ctx, ast_record(_command(ctx), verdict, len(prog.all_vars)), started)


def _selected_check(flags: dict[str, bool]) -> str:
    chosen = [name for name, enabled in flags.items() if enabled]
    if len(chosen) != 1:
        raise click.UsageError("choose exactly one of --pure, --approx, --rdp, --cdp, --tcdp")
    return chosen[0]


def _require(value: Optional[str], flag: str, check: str) -> str:
    if value is None:
        raise click.UsageError(f"--{check} needs {flag}")
    return value


@app.command("verify")
def verify_command(
    ctx: typer.Context,
    program: Path = typer.Argument(..., help="Program file."),
    pure: bool = typer.Option(False, "--pure", help="Pure DP: Pr[P(x)=o] <= e_eps * Pr[P(y)=o]."),
    approx: bool = typer.Option(False, "--approx", help="Approximate (e_eps, delta) DP."),
    rdp: bool = typer.Option(False, "--rdp", help="Gap Renyi DP at one order alpha."),
    cdp: bool = typer.Option(False, "--cdp", help="Gap concentrated DP."),
    tcdp: bool = typer.Option(False, "--tcdp", help="Gap truncated concentrated DP."),
    eeps: Optional[str] = typer.Option(None, "--eeps", help="e^epsilon as a rational a/b."),
    delta: Optional[str] = typer.Option(None, "--delta", help="delta as a dyadic a/2^m."),
    alpha: Optional[str] = typer.Option(None, "--alpha", help="Renyi order (dyadic, > 1)."),
    rho: Optional[str] = typer.Option(None, "--rho", help="Divergence budget rho (dyadic)."),
    omega: Optional[str] = typer.Option(None, "--omega", help="tCDP truncation order (dyadic, > 1)."),
    eta: int = typer.Option(0, "--eta", min=0, help="Gap exponent: gap = 2^-eta."),
    insensitive: bool = typer.Option(False, "--insensitive", help="Condition each distribution on termination."),
    neighbor: str = typer.Option("hamming1", "--neighbor", help="hamming1, int-adj:<block> or int-adj:<start>:<width>."),
) -> None:
    """Verify a privacy property over all neighboring input pairs."""
    check = _selected_check({"pure": pure, "approx": approx, "rdp": rdp, "cdp": cdp, "tcdp": tcdp})
    started = time.perf_counter()
    limits = _session(ctx).limits
    prog = _load(program)
    nb = NeighborRelation.parse(neighbor, prog)
    mode = INSENSITIVE if insensitive else SENSITIVE

    if check == "pure":
        e_eps = parse_rational(_require(eeps, "--eeps", check))
        record = dp_record(_command(ctx), check_pure_dp(prog, e_eps, nb, mode, limits), neighbor=nb.label, mode=mode)
    elif check == "approx":
        params = PrivacyParams(parse_rational(_require(eeps, "--eeps", check)), parse_dyadic(_require(delta, "--delta", check), "delta"))
        record = dp_record(_command(ctx), check_approx_dp(prog, params, nb, mode, limits), neighbor=nb.label, mode=mode)
    else:
        params = GapParams(
            rho=parse_dyadic(_require(rho, "--rho", check), "rho"),
            eta=eta,
            alpha=parse_dyadic(_require(alpha, "--alpha", check), "alpha") if check == "rdp" else None,
            omega=parse_dyadic(_require(omega, "--omega", check), "omega") if check == "tcdp" else None,
        )
        decide = {"rdp": check_gap_rdp, "cdp": check_gap_cdp, "tcdp": check_gap_tcdp}[check]
        record = gap_record(_command(ctx), decide(prog, params, nb, mode, limits), neighbor=nb.label, mode=mode)
    emit(ctx, record, started)


@app.command("reduce")
def reduce_command(
    ctx: typer.Context,
    kind: str = typer.Argument(..., help=f"One of {', '.join(KINDS)}."),
    program: Optional[Path] = typer.Argument(None, help="Program file (not used by tqbf)."),
    delta: Optional[str] = typer.Option(None, "--delta", help="delta as a dyadic a/2^m."),
    eeps: Optional[str] = typer.Option(None, "--eeps", help="e^epsilon as a rational a/b."),
    m: int = typer.Option(1, "--m", min=0, help="Amplification exponent."),
    formula: Optional[str] = typer.Option(None, "--formula", help="Prenex QBF, e.g. 'A x E y : x | y'."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write the emitted program here."),
) -> None:
    """Emit the program produced by one of the hardness reductions."""
    if kind not in KINDS:
        raise typer.BadParameter(f"expected one of {', '.join(KINDS)}", param_hint="KIND")
    started = time.perf_counter()
    spec = ReductionSpec(
        kind=kind,
        delta=parse_dyadic(delta, "delta") if delta is not None else None,
        m=m,
        e_eps=parse_rational(eeps) if eeps is not None else None,
        formula=parse_qbf(formula) if formula is not None else None,
    )
    if kind != TQBF and program is None:
        raise click.UsageError(f"reduce {kind} needs a program file")
    prog = _load(program) if program is not None else None
    emitted, derived = apply_reduction(spec, prog)
    text = pretty_print(emitted)
    details = {key: format_rational(value) if isinstance(value, Fraction) else value for key, value in derived.items()}
    details["lines"] = emitted.line_count
    if output is not None:
        output.write_text(text, encoding="utf-8")
        details["written"] = str(output)
    else:
        details["program"] = text
    emit(ctx, VerdictRecord(_command(ctx), OK, details=details), started)


@app.command("sample")
def sample_command(
    ctx: typer.Context,
    program: Path = typer.Argument(..., help="Program file."),
    input_bits: str = typer.Option("", "--input", help="Input bit string."),
    seed: int = typer.Option(0, "--seed", help="Random seed."),
    runs: int = typer.Option(1, "--runs", min=1, help="Number of independent runs."),
    max_steps: int = typer.Option(100_000, "--max-steps", min=1, help="Steps before reporting TIMEOUT."),
) -> None:
    """Run the program with pseudo-random coins (display only, never a verdict)."""
    started = time.perf_counter()
    prog = _load(program)
    outcomes = [run_sample(prog, input_bits, seed + i, max_steps) for i in range(runs)]
    counts: dict[str, int] = {}
    for outcome in outcomes:
        counts[outcome] = counts.get(outcome, 0) + 1
    details = {"input": input_bits, "seed": seed, "counts": dict(sorted(counts.items()))}
    emit(ctx, VerdictRecord(_command(ctx), OK, details=details), started)


@app.command("dump-chain")
def dump_chain_command(
    ctx: typer.Context,
    program: Path = typer.Argument(..., help="Program file."),
    input_bits: str = typer.Option("", "--input", help="Input bit string."),
    normalize: bool = typer.Option(False, "--normalize", help="Rewrite to only-1/2 transitions by duplicating states."),
    zero: bool = typer.Option(False, "--zero", help="Drop edges out of states that cannot reach a final."),
) -> None:
    """Dump the reachable Markov chain for one input."""
    started = time.perf_counter()
    prog = _load(program)
    chain = build_chain(prog, input_bits, _session(ctx).limits)
    if normalize:
        chain = normalize_chain(chain)
    if zero:
        chain = zero_recurrent(chain)
    details = {"states": len(chain), "chain": dump_chain(chain)}
    emit(ctx, VerdictRecord(_command(ctx), OK, details=details), started)


@corpus_app.command("list")
def corpus_list_command(ctx: typer.Context) -> None:
    """List bundled corpus entries."""
    started = time.perf_counter()
    entries = list_entries()
    listing = {entry.name: f"{len(entry.checks)} checks. {entry.description}".strip() for entry in entries}
    emit(ctx, VerdictRecord(_command(ctx), OK, details=listing), started)


@corpus_app.command("run")
def corpus_run_command(
    ctx: typer.Context,
    name: Optional[str] = typer.Argument(None, help="Corpus entry name."),
    run_all: bool = typer.Option(False, "--all", help="Run every entry."),
) -> None:
    """Run an entry's checks and compare with the stored verdicts."""
    if (name is None) == (not run_all):
        raise click.UsageError("give an entry name or --all, not both")
    started = time.perf_counter()
    limits = _session(ctx).limits
    names = [entry.name for entry in list_entries()] if run_all else [name]
    reports = [corpus_run(entry, limits) for entry in names]
    record = report_record(_command(ctx), reports)
    for report in reports:
        status = "✅" if report.passed else "❌"
        diagnostics.print(f"{status} {report.entry}: {len(report.results) - len(report.failures)}/{len(report.results)} checks")
        for failure in report.failures:
            diagnostics.print(f"   {failure.kind}: expected {failure.expected}, got {failure.record.decision}")
    record.details["summary"] = f"{sum(report.passed for report in reports)}/{len(reports)} entries passed"
    emit(ctx, record, started)


@app.command("version")
def version_command() -> None:
    """Print the tool version."""
    typer.echo(__version__)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    """Run one invocation; return the process exit code."""
    args = list(sys.argv[1:] if argv is None else argv)
    command = typer.main.get_command(app)
    try:
        result = command.main(args=args, prog_name="bpwhile", standalone_mode=False)
    except click.UsageError as exc:
        diagnostics.print(f"❌ usage: {exc.format_message()}")
        return EXIT_USAGE
    except click.Abort:
        diagnostics.print("❌ aborted")
        return EXIT_USAGE
    except SolverInvariantError as exc:
        logger.error("solver invariant violated: %s", exc)
        diagnostics.print(f"❌ {exc}")
        return exc.exit_code
    except VerifierError as exc:
        prefix = "⚠️" if exc.exit_code != EXIT_USAGE else "❌"
        diagnostics.print(f"{prefix} {type(exc).__name__}: {exc}")
        return exc.exit_code
    except OSError as exc:
        diagnostics.print(f"❌ {exc}")
        return EXIT_USAGE
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
