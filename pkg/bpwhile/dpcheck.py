"""Pure and approximate differential-privacy deciders.

Both deciders work pointwise over outcomes. For e^eps = a/b the pure check is
``b * p <= a * q`` per outcome. The approximate check sums
``max(b * p - a * q, 0)`` per neighbor pair and compares with ``b * delta``.
That sum equals the worst-case subset violation, so no subset enumeration is
needed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .dist import Dist, conditional_distribution, outcome_space, output_distribution, output_distributions
from .errors import InvalidParameterError
from .syntax import Program
from .utils.config import VerifierLimits, load_limits
from .utils.rationals import format_rational, parse_rational
from .utils.workers import all_inputs

logger = logging.getLogger("bpwhile.dpcheck")

PRIVATE = "private"
NOT_PRIVATE = "not-private"

SENSITIVE = "sensitive"
INSENSITIVE = "insensitive"
MODES = (SENSITIVE, INSENSITIVE)

HAMMING1 = "hamming1"
INTEGER_ADJACENT = "int-adj"
CUSTOM = "custom"


@dataclass(frozen=True)
class PrivacyParams:
    e_eps: Fraction
    delta: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.e_eps < 0:
            raise InvalidParameterError(f"e_eps must be nonnegative, got {format_rational(self.e_eps)}")
        if not 0 <= self.delta <= 1:
            raise InvalidParameterError(f"delta must lie in [0, 1], got {format_rational(self.delta)}")

    @classmethod
    def parse(cls, e_eps: str | Fraction, delta: str | Fraction = "0") -> "PrivacyParams":
        return cls(parse_rational(e_eps), parse_rational(delta))


@dataclass(frozen=True)
class NeighborRelation:
    """Which ordered input pairs count as neighbors.

    ``int-adj`` relations compare the unsigned value of ``width`` input bits
    starting at position ``start`` (most significant first) and require the
    remaining bits to agree.
    """

    kind: str = HAMMING1
    start: int = 0
    width: int = 0
    predicate: Callable[[str, str], bool] | None = field(default=None, compare=False)
    label: str = HAMMING1

    @classmethod
    def hamming1(cls) -> "NeighborRelation":
        return cls()

    @classmethod
    def integer_adjacent(cls, start: int, width: int, label: str | None = None) -> "NeighborRelation":
        if start < 0 or width < 1:
            raise InvalidParameterError(f"invalid integer-adjacent window start={start} width={width}")
        return cls(INTEGER_ADJACENT, start, width, label=label or f"{INTEGER_ADJACENT}:{start}:{width}")

    @classmethod
    def custom(cls, predicate: Callable[[str, str], bool], label: str = CUSTOM) -> "NeighborRelation":
        return cls(CUSTOM, predicate=predicate, label=label)

    @classmethod
    def parse(cls, text: str, prog: Program | None = None) -> "NeighborRelation":
        """Parse ``hamming1``, ``int-adj:<start>:<width>`` or ``int-adj:<block>``."""
        text = text.strip()
        if text == HAMMING1:
            return cls.hamming1()
        kind, _, rest = text.partition(":")
        if kind != INTEGER_ADJACENT or not rest:
            raise InvalidParameterError(f"unknown neighbor relation {text!r}; use hamming1 or int-adj:<block>")
        parts = rest.split(":")
        if len(parts) == 2 and all(part.isdigit() for part in parts):
            return cls.integer_adjacent(int(parts[0]), int(parts[1]), label=text)
        if len(parts) == 1:
            if prog is None:
                raise InvalidParameterError(f"neighbor relation {text!r} names a block; a program is required")
            return block_adjacency(prog, parts[0])
        raise InvalidParameterError(f"malformed neighbor relation {text!r}")

    def holds(self, x: str, y: str) -> bool:
        if len(x) != len(y) or x == y:
            return False
        if self.kind == HAMMING1:
            return sum(a != b for a, b in zip(x, y)) == 1
        if self.kind == INTEGER_ADJACENT:
            end = self.start + self.width
            if x[: self.start] != y[: self.start] or x[end:] != y[end:]:
                return False
            return abs(int(x[self.start:end], 2) - int(y[self.start:end], 2)) == 1
        assert self.predicate is not None
        return bool(self.predicate(x, y))


def block_adjacency(prog: Program, block: str) -> NeighborRelation:
    """Integer adjacency on an input block declared in extended syntax."""
    prefix = f"{block}__"
    positions = [i for i, name in enumerate(prog.input_vars) if name.startswith(prefix)]
    if not positions:
        raise InvalidParameterError(f"no input block named {block!r}")
    if positions != list(range(positions[0], positions[0] + len(positions))):
        raise InvalidParameterError(f"input block {block!r} is not contiguous")
    return NeighborRelation.integer_adjacent(positions[0], len(positions), label=f"{INTEGER_ADJACENT}:{block}")


def neighbor_pairs(n: int, nb: NeighborRelation) -> Iterator[tuple[str, str]]:
    """Every ordered neighbor pair, lexicographically by (x, x')."""
    if n < 1:
        raise InvalidParameterError("neighbor pairs need at least one input bit")
    if nb.kind == INTEGER_ADJACENT and nb.start + nb.width > n:
        raise InvalidParameterError(f"integer-adjacent window {nb.label} exceeds {n} input bits")
    for x in all_inputs(n):
        if nb.kind == HAMMING1:
            candidates = [x[:i] + ("1" if x[i] == "0" else "0") + x[i + 1:] for i in range(n)]
        elif nb.kind == INTEGER_ADJACENT:
            end = nb.start + nb.width
            value = int(x[nb.start:end], 2)
            candidates = [
                x[: nb.start] + format(other, f"0{nb.width}b") + x[end:]
                for other in (value - 1, value + 1)
                if 0 <= other < 1 << nb.width
            ]
        else:
            candidates = [y for y in all_inputs(n) if nb.holds(x, y)]
        yield from ((x, y) for y in sorted(candidates))


@dataclass(frozen=True)
class DPWitness:
    """A neighbor pair and outcome set with Pr[C(x) in O] = lhs > rhs."""

    input_bits: str
    neighbor_bits: str
    outcomes: tuple[str, ...]
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class DPVerdict:
    decision: str
    witness: DPWitness | None = None

    @property
    def private(self) -> bool:
        return self.decision == PRIVATE


class DistributionCache:
    """Per-input distributions, conditioned on termination in insensitive mode."""

    def __init__(self, prog: Program, mode: str = SENSITIVE, limits: VerifierLimits | None = None) -> None:
        if mode not in MODES:
            raise InvalidParameterError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
        self.prog = prog
        self.mode = mode
        self.limits = limits or load_limits()
        self._cache: dict[str, Dist] = {}

    def _finish(self, input_bits: str, dist: Dist) -> Dist:
        if self.mode == INSENSITIVE:
            return conditional_distribution(dist, input_bits)
        return dist

    def prefetch(self, inputs: list[str]) -> None:
        missing = [x for x in dict.fromkeys(inputs) if x not in self._cache]
        if self.limits.jobs > 1 and len(missing) > 1:
            for x, dist in output_distributions(self.prog, missing, self.limits).items():
                self._cache[x] = self._finish(x, dist)

    def __getitem__(self, input_bits: str) -> Dist:
        dist = self._cache.get(input_bits)
        if dist is None:
            dist = self._finish(input_bits, output_distribution(self.prog, input_bits, self.limits))
            self._cache[input_bits] = dist
        return dist


def _pairs(prog: Program, nb: NeighborRelation, cache: DistributionCache) -> list[tuple[str, str]]:
    pairs = list(neighbor_pairs(prog.input_length, nb))
    cache.prefetch([x for pair in pairs for x in pair])
    return pairs


def check_pure_dp(
    prog: Program,
    e_eps: Fraction,
    nb: NeighborRelation | None = None,
    mode: str = SENSITIVE,
    limits: VerifierLimits | None = None,
) -> DPVerdict:
    """Decide Pr[C(x)=o] <= e_eps * Pr[C(x')=o] for every neighbor pair and outcome."""
    e_eps = Fraction(e_eps)
    if e_eps < 0:
        raise InvalidParameterError("e_eps must be nonnegative")
    nb = nb or NeighborRelation.hamming1()
    a, b = e_eps.numerator, e_eps.denominator
    cache = DistributionCache(prog, mode, limits)
    for x, y in _pairs(prog, nb, cache):
        p_dist, q_dist = cache[x], cache[y]
        for outcome in outcome_space(p_dist, q_dist):
            p, q = p_dist.get(outcome), q_dist.get(outcome)
            if b * p > a * q:
                logger.info("pure dp violated on (%s, %s) at outcome %s", x, y, outcome)
                return DPVerdict(NOT_PRIVATE, DPWitness(x, y, (outcome,), p, e_eps * q))
        logger.debug("pure dp holds on pair (%s, %s)", x, y)
    return DPVerdict(PRIVATE)


def pointwise_excess(p_dist: Dist, q_dist: Dist, e_eps: Fraction, bound: Fraction | None = None) -> Fraction:
    """Sum over outcomes of max(p - e_eps * q, 0), stopping early once it exceeds ``bound``."""
    a, b = e_eps.numerator, e_eps.denominator
    scaled_bound = None if bound is None else b * bound
    total = Fraction(0)
    for outcome in outcome_space(p_dist, q_dist):
        gap = b * p_dist.get(outcome) - a * q_dist.get(outcome)
        if gap > 0:
            total += gap
            if scaled_bound is not None and total > scaled_bound:
                break
    return total / b


def check_approx_dp(
    prog: Program,
    params: PrivacyParams,
    nb: NeighborRelation | None = None,
    mode: str = SENSITIVE,
    limits: VerifierLimits | None = None,
) -> DPVerdict:
    """Decide (eps, delta)-DP through the pointwise excess of every neighbor pair."""
    nb = nb or NeighborRelation.hamming1()
    cache = DistributionCache(prog, mode, limits)
    for x, y in _pairs(prog, nb, cache):
        p_dist, q_dist = cache[x], cache[y]
        if pointwise_excess(p_dist, q_dist, params.e_eps, params.delta) <= params.delta:
            logger.debug("approximate dp holds on pair (%s, %s)", x, y)
            continue
        violating = tuple(
            outcome
            for outcome in outcome_space(p_dist, q_dist)
            if p_dist.get(outcome) > params.e_eps * q_dist.get(outcome)
        )
        lhs = sum((p_dist.get(o) for o in violating), Fraction(0))
        rhs = params.e_eps * sum((q_dist.get(o) for o in violating), Fraction(0)) + params.delta
        logger.info("approximate dp violated on (%s, %s): %s > %s", x, y, format_rational(lhs), format_rational(rhs))
        return DPVerdict(NOT_PRIVATE, DPWitness(x, y, violating, lhs, rhs))
    return DPVerdict(PRIVATE)
