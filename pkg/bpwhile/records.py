"""Verdict records written by the command line, one JSON document per invocation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any

from . import __version__
from .dist import Dist
from .divergence import INDETERMINATE, NO, YES, BinInterval, GapVerdict
from .dpcheck import NOT_PRIVATE, PRIVATE, DPVerdict
from .reach import DOES_NOT, TERMINATES, ASTVerdict
from .utils.rationals import decimal_approximation, format_rational, parse_rational

OK = "ok"
PASSED = "passed"
FAILED = "failed"

DECISION_EXIT_CODES = {
    OK: 0,
    PASSED: 0,
    PRIVATE: 0,
    YES: 0,
    TERMINATES: 0,
    NOT_PRIVATE: 1,
    NO: 1,
    DOES_NOT: 1,
    FAILED: 1,
    INDETERMINATE: 2,
}


@dataclass
class RationalValue:
    """Exact ``num/den`` plus a display-only decimal."""

    exact: str
    approx: str

    @classmethod
    def of(cls, value: Fraction) -> "RationalValue":
        return cls(format_rational(value), decimal_approximation(value))

    @property
    def value(self) -> Fraction:
        return parse_rational(self.exact)


def _optional_rational(value: Fraction | None) -> RationalValue | None:
    return None if value is None else RationalValue.of(value)


def _restore_rational(payload: dict[str, str] | None) -> RationalValue | None:
    return None if payload is None else RationalValue(**payload)


@dataclass
class WitnessBlock:
    input_bits: str
    neighbor_bits: str | None = None
    outcomes: list[str] = field(default_factory=list)
    lhs: RationalValue | None = None
    rhs: RationalValue | None = None
    alpha: RationalValue | None = None
    interval_lower: RationalValue | None = None
    interval_upper: RationalValue | None = None
    state: str | None = None
    reason: str | None = None

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "WitnessBlock":
        rationals = ("lhs", "rhs", "alpha", "interval_lower", "interval_upper")
        values = {key: _restore_rational(payload.get(key)) for key in rationals}
        return cls(
            input_bits=payload.get("input_bits", ""),
            neighbor_bits=payload.get("neighbor_bits"),
            outcomes=list(payload.get("outcomes", [])),
            state=payload.get("state"),
            reason=payload.get("reason"),
            **values,
        )


@dataclass
class VerdictRecord:
    command: list[str]
    decision: str
    witness: WitnessBlock | None = None
    details: dict[str, Any] = field(default_factory=dict)
    precision_bits: int | None = None
    elapsed_seconds: float = 0.0
    tool_version: str = __version__
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def exit_code(self) -> int:
        return DECISION_EXIT_CODES.get(self.decision, 0)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "VerdictRecord":
        witness = payload.get("witness")
        return cls(
            command=list(payload.get("command", [])),
            decision=payload.get("decision", ""),
            witness=WitnessBlock.from_dict(witness) if witness else None,
            details=payload.get("details", {}) or {},
            precision_bits=payload.get("precision_bits"),
            elapsed_seconds=payload.get("elapsed_seconds", 0.0),
            tool_version=payload.get("tool_version", __version__),
            created_at=payload.get("created_at", datetime.now(timezone.utc).isoformat()),
        )

    @classmethod
    def from_json(cls, text: str) -> "VerdictRecord":
        return cls.from_dict(json.loads(text))


def dist_details(dist: Dist) -> dict[str, Any]:
    return {outcome: asdict(RationalValue.of(p)) for outcome, p in dist.entries}


def dp_record(command: list[str], verdict: DPVerdict, **details: Any) -> VerdictRecord:
    witness = None
    if verdict.witness is not None:
        found = verdict.witness
        witness = WitnessBlock(
            input_bits=found.input_bits,
            neighbor_bits=found.neighbor_bits,
            outcomes=list(found.outcomes),
            lhs=RationalValue.of(found.lhs),
            rhs=RationalValue.of(found.rhs),
        )
    return VerdictRecord(command, verdict.decision, witness, details)


def _interval_bounds(interval: BinInterval) -> tuple[RationalValue | None, RationalValue | None]:
    return _optional_rational(interval.lower), _optional_rational(interval.upper)


def gap_record(command: list[str], verdict: GapVerdict, **details: Any) -> VerdictRecord:
    witness = None
    if verdict.witness is not None:
        found = verdict.witness
        lower, upper = _interval_bounds(found.interval)
        witness = WitnessBlock(
            input_bits=found.input_bits,
            neighbor_bits=found.neighbor_bits,
            alpha=_optional_rational(found.alpha),
            rhs=RationalValue.of(found.threshold),
            interval_lower=lower,
            interval_upper=upper,
            reason=found.reason,
        )
    if verdict.grid_size is not None:
        details = {**details, "alpha_points": verdict.grid_size}
    return VerdictRecord(command, verdict.decision, witness, details, precision_bits=verdict.precision)


def ast_record(command: list[str], verdict: ASTVerdict, width: int = 0, **details: Any) -> VerdictRecord:
    witness = None
    if verdict.witness is not None:
        found = verdict.witness
        witness = WitnessBlock(input_bits=found.input_bits, state=found.state.describe(width))
    return VerdictRecord(command, verdict.decision, witness, details)
