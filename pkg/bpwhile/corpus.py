"""Bundled corpus: YAML entries pairing a program with checks and expected verdicts.

An entry names its program either as a file next to the YAML document
(``program: rr.bpw``) or as a generator (``generator: {kind: geometric, n: 2,
k: 2}``). Each check states the expected decision, so ``corpus run`` doubles
as a regression suite.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from .desugar import desugar, load_program
from .dist import output_distribution
from .divergence import GapParams, check_gap_cdp, check_gap_rdp, check_gap_tcdp
from .dpcheck import SENSITIVE, NeighborRelation, PrivacyParams, check_approx_dp, check_pure_dp
from .errors import CorpusError
from .mechanisms import geometric_mechanism_source, randomized_response_source
from .parser import parse
from .qbf import evaluate_qbf, parse_qbf
from .reach import ast_check
from .records import FAILED, OK, PASSED, VerdictRecord, ast_record, dist_details, dp_record, gap_record
from .reductions import tqbf_to_bpwhile
from .syntax import Program
from .utils.config import VerifierLimits, corpus_directory, load_limits
from .utils.rationals import parse_dyadic, parse_rational

logger = logging.getLogger("bpwhile.corpus")

CHECK_KINDS = ("dist", "ast", "pure", "approx", "rdp", "cdp", "tcdp", "tqbf")


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    path: Path
    description: str = ""
    program_file: str | None = None
    generator: dict[str, Any] | None = None
    checks: tuple[dict[str, Any], ...] = ()

    @property
    def has_program(self) -> bool:
        return self.program_file is not None or self.generator is not None


@dataclass
class CheckResult:
    kind: str
    expected: str
    record: VerdictRecord
    passed: bool


@dataclass
class CorpusReport:
    entry: str
    results: list[CheckResult] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [result for result in self.results if not result.passed]


def _entry_from_yaml(path: Path) -> CorpusEntry:
    try:
        payload = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise CorpusError(f"corpus entry {path.name} is not valid YAML: {exc}") from exc
    if not isinstance(payload, dict) or "name" not in payload:
        raise CorpusError(f"corpus entry {path.name} needs a top-level 'name'")
    checks = payload.get("checks") or []
    for check in checks:
        if check.get("check") not in CHECK_KINDS:
            raise CorpusError(f"corpus entry {payload['name']}: unknown check {check.get('check')!r}")
    return CorpusEntry(
        name=str(payload["name"]),
        path=path,
        description=str(payload.get("description", "")).strip(),
        program_file=payload.get("program"),
        generator=payload.get("generator"),
        checks=tuple(checks),
    )


def list_entries(directory: Path | None = None) -> list[CorpusEntry]:
    directory = directory or corpus_directory()
    if not directory.is_dir():
        raise CorpusError(f"corpus directory {directory} does not exist")
    entries = [_entry_from_yaml(path) for path in sorted(directory.glob("*.yaml"))]
    return sorted(entries, key=lambda entry: entry.name)


def load_entry(name: str, directory: Path | None = None) -> CorpusEntry:
    for entry in list_entries(directory):
        if entry.name == name:
            return entry
    raise CorpusError(f"unknown corpus entry {name!r}")


def entry_program(entry: CorpusEntry) -> Program:
    if entry.program_file is not None:
        return load_program(entry.path.parent / entry.program_file)
    if entry.generator is None:
        raise CorpusError(f"corpus entry {entry.name} has no program")
    kind = entry.generator.get("kind")
    if kind == "geometric":
        return desugar(geometric_mechanism_source(int(entry.generator["n"]), int(entry.generator["k"])))
    if kind == "randomized-response":
        return parse(randomized_response_source())
    raise CorpusError(f"corpus entry {entry.name}: unknown generator {kind!r}")


def _neighbor(check: dict[str, Any], prog: Program) -> NeighborRelation:
    return NeighborRelation.parse(str(check.get("neighbor", "hamming1")), prog)


def _gap_params(check: dict[str, Any]) -> GapParams:
    def dyadic(key: str) -> Fraction | None:
        return parse_dyadic(str(check[key]), key) if key in check else None

    if "rho" not in check:
        raise CorpusError(f"{check['check']} check needs rho")
    return GapParams(rho=dyadic("rho"), eta=int(check.get("eta", 0)), alpha=dyadic("alpha"), omega=dyadic("omega"))


def run_check(
    prog: Program | None,
    check: dict[str, Any],
    limits: VerifierLimits | None = None,
) -> CheckResult:
    """Evaluate one check and compare with its ``expect`` field."""
    limits = limits or load_limits()
    kind = check["check"]
    command = ["corpus", kind] + [f"{key}={value}" for key, value in check.items() if key not in ("check", "expect")]
    mode = str(check.get("mode", SENSITIVE))
    expected = check.get("expect")

    if kind == "tqbf":
        formula = parse_qbf(str(check["formula"]))
        verdict = ast_check(tqbf_to_bpwhile(formula), limits)
        truth = evaluate_qbf(formula)
        record = ast_record(command, verdict, formula=str(formula), truth=truth)
        return CheckResult(kind, str(expected), record, verdict.terminates == bool(expected) == truth)

    if prog is None:
        raise CorpusError(f"check {kind} needs a program")
    if kind == "dist":
        dist = output_distribution(prog, str(check["input"]), limits)
        record = VerdictRecord(command, OK, details=dist_details(dist))
        wanted = {outcome: parse_rational(str(value)) for outcome, value in (expected or {}).items()}
        matches = all(dist.get(outcome) == p for outcome, p in wanted.items()) and dist.total() == 1
        return CheckResult(kind, str(expected), record, matches)
    if kind == "ast":
        record = ast_record(command, ast_check(prog, limits), len(prog.all_vars))
    elif kind == "pure":
        verdict = check_pure_dp(prog, parse_rational(str(check["e_eps"])), _neighbor(check, prog), mode, limits)
        record = dp_record(command, verdict)
    elif kind == "approx":
        params = PrivacyParams.parse(str(check["e_eps"]), str(check["delta"]))
        record = dp_record(command, check_approx_dp(prog, params, _neighbor(check, prog), mode, limits))
    else:
        decide = {"rdp": check_gap_rdp, "cdp": check_gap_cdp, "tcdp": check_gap_tcdp}[kind]
        record = gap_record(command, decide(prog, _gap_params(check), _neighbor(check, prog), mode, limits))
    return CheckResult(kind, str(expected), record, record.decision == str(expected))


def corpus_run(name: str, limits: VerifierLimits | None = None, directory: Path | None = None) -> CorpusReport:
    """Run every bundled check of one entry."""
    entry = load_entry(name, directory)
    started = time.perf_counter()
    prog = entry_program(entry) if entry.has_program else None
    report = CorpusReport(entry.name)
    for check in entry.checks:
        result = run_check(prog, check, limits)
        status = "passed" if result.passed else "FAILED"
        logger.info("corpus %s: %s check %s (expected %s, got %s)", entry.name, result.kind, status, result.expected, result.record.decision)
        report.results.append(result)
    report.elapsed_seconds = time.perf_counter() - started
    return report


def report_record(command: list[str], reports: list[CorpusReport]) -> VerdictRecord:
    """Fold corpus reports into a single record; any failed check fails the run."""
    entries = []
    for report in reports:
        checks = [
            {
                "kind": result.kind,
                "expected": result.expected,
                "decision": result.record.decision,
                "passed": result.passed,
                "witness": result.record.to_dict()["witness"],
            }
            for result in report.results
        ]
        entries.append({"entry": report.entry, "passed": report.passed, "elapsed_seconds": report.elapsed_seconds, "checks": checks})
    decision = PASSED if all(report.passed for report in reports) else FAILED
    elapsed = sum(report.elapsed_seconds for report in reports)
    return VerdictRecord(command, decision, details={"entries": entries}, elapsed_seconds=elapsed)
