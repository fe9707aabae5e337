"""Rényi divergence enclosures and the gap deciders for RDP, CDP and tCDP.

All logarithms are base 2. Transcendental steps run through mpmath's
low-level ``libmp`` routines with 32 guard bits, and every result is then
widened outward by a few units in the last requested place, so the returned
rationals always enclose the true value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from mpmath.libmp import (
    from_rational,
    mpf_div,
    mpf_exp,
    mpf_ln2,
    mpf_log,
    mpf_mul,
    mpf_sqrt,
    round_nearest,
    to_rational,
)

from .dist import Dist, outcome_space
from .dpcheck import SENSITIVE, DistributionCache, NeighborRelation, neighbor_pairs
from .errors import InvalidParameterError, ResourceBudgetExceeded
from .syntax import Program, program_size
from .utils.config import VerifierLimits, load_limits
from .utils.rationals import format_rational

logger = logging.getLogger("bpwhile.divergence")

YES = "yes"
NO = "no"
INDETERMINATE = "indeterminate"

GUARD_BITS = 32
MIN_PRECISION = 64


@dataclass(frozen=True)
class GapParams:
    rho: Fraction
    eta: int
    alpha: Fraction | None = None
    omega: Fraction | None = None

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise InvalidParameterError(f"rho must be positive, got {format_rational(self.rho)}")
        if self.eta < 0:
            raise InvalidParameterError(f"eta must be a nonnegative integer, got {self.eta}")
        if self.alpha is not None and self.alpha <= 1:
            raise InvalidParameterError(f"alpha must exceed 1, got {format_rational(self.alpha)}")
        if self.omega is not None and self.omega <= 1:
            raise InvalidParameterError(f"omega must exceed 1, got {format_rational(self.omega)}")

    @property
    def gap(self) -> Fraction:
        return Fraction(1, 1 << self.eta)


@dataclass(frozen=True)
class BinInterval:
    """Closed interval [lower, upper]; both bounds None stands for +infinity."""

    lower: Fraction | None
    upper: Fraction | None
    precision: int

    @classmethod
    def infinite(cls, precision: int) -> "BinInterval":
        return cls(None, None, precision)

    @property
    def is_infinite(self) -> bool:
        return self.lower is None

    @property
    def width(self) -> Fraction | None:
        if self.is_infinite:
            return None
        return self.upper - self.lower

    def contains(self, value: Fraction) -> bool:
        if self.is_infinite:
            return False
        return self.lower <= value <= self.upper

    def describe(self) -> str:
        if self.is_infinite:
            return "+inf"
        return f"[{float(self.lower):.12g}, {float(self.upper):.12g}]"


def _to_fraction(value) -> Fraction:
    numerator, denominator = to_rational(value)
    return Fraction(numerator, denominator)


def _widen(value: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    slack = abs(value) / (1 << (prec - 2)) + Fraction(1, 1 << prec)
    return value - slack, value + slack


def _power_of_two_exponent(value: Fraction) -> int | None:
    numerator, denominator = value.numerator, value.denominator
    if numerator & (numerator - 1) or denominator & (denominator - 1):
        return None
    return numerator.bit_length() - denominator.bit_length()


def log2_enclosure(value: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Bounds on log2(value) for value > 0, exact for powers of two."""
    if value <= 0:
        raise InvalidParameterError("logarithm of a nonpositive value")
    exponent = _power_of_two_exponent(value)
    if exponent is not None:
        return Fraction(exponent), Fraction(exponent)
    working = prec + GUARD_BITS
    natural = mpf_log(from_rational(value.numerator, value.denominator, working, round_nearest), working, round_nearest)
    estimate = mpf_div(natural, mpf_ln2(working, round_nearest), working, round_nearest)
    return _widen(_to_fraction(estimate), prec)


def exp2_enclosure(exponent: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Bounds on 2**exponent; relative widening keeps the lower bound positive."""
    if exponent.denominator == 1:
        exact = Fraction(2) ** int(exponent)
        return exact, exact
    working = prec + GUARD_BITS
    scaled = mpf_mul(
        from_rational(exponent.numerator, exponent.denominator, working, round_nearest),
        mpf_ln2(working, round_nearest),
        working,
        round_nearest,
    )
    estimate = _to_fraction(mpf_exp(scaled, working, round_nearest))
    relative = Fraction(1, 1 << (prec - 2))
    return estimate * (1 - relative), estimate * (1 + relative)


def sqrt_upper(value: Fraction, prec: int) -> Fraction:
    if value < 0:
        raise InvalidParameterError("square root of a negative value")
    root = math.isqrt(value.numerator * value.denominator)
    if root * root == value.numerator * value.denominator:
        return Fraction(root, value.denominator)
    working = prec + GUARD_BITS
    estimate = _to_fraction(
        mpf_sqrt(from_rational(value.numerator, value.denominator, working, round_nearest), working, round_nearest)
    )
    return _widen(estimate, prec)[1]


def renyi_divergence(p_dist: Dist, q_dist: Dist, alpha: Fraction, precision: int = MIN_PRECISION) -> BinInterval:
    """Enclose D_alpha(P || Q) = log2(sum p^alpha / q^(alpha - 1)) / (alpha - 1)."""
    alpha = Fraction(alpha)
    if alpha <= 1:
        raise InvalidParameterError(f"alpha must exceed 1, got {format_rational(alpha)}")
    order = alpha - 1
    terms = [(p_dist.get(o), q_dist.get(o)) for o in outcome_space(p_dist, q_dist)]
    terms = [(p, q) for p, q in terms if p]
    if any(q == 0 for _, q in terms):
        return BinInterval.infinite(precision)

    if alpha.denominator == 1:
        power = int(alpha)
        total = sum((p**power / q ** (power - 1) for p, q in terms), Fraction(0))
        low_sum = high_sum = total
    else:
        low_sum = high_sum = Fraction(0)
        for p, q in terms:
            if p == q:
                low_sum += p
                high_sum += p
                continue
            log_low, log_high = log2_enclosure(p / q, precision)
            low_sum += p * exp2_enclosure(log_low * order, precision)[0]
            high_sum += p * exp2_enclosure(log_high * order, precision)[1]

    lower = log2_enclosure(low_sum, precision)[0] / order
    upper = log2_enclosure(high_sum, precision)[1] / order
    return BinInterval(lower, upper, precision)


def alpha_grid(
    rho: Fraction,
    eta: int,
    denominator_bits: int,
    omega: Fraction | None = None,
    max_points: int | None = None,
) -> list[Fraction]:
    """Orders 1 + j * 2^(-eta-1) / rho (j >= 1) below 1 + denominator_bits / rho, and below omega if given."""
    rho = Fraction(rho)
    step = Fraction(1, 1 << (eta + 1)) / rho
    bound = Fraction(denominator_bits) / rho
    if omega is not None:
        bound = min(bound, Fraction(omega) - 1)
    if bound <= 0:
        return []
    count = math.ceil(bound / step) - 1
    if max_points is not None and count > max_points:
        raise ResourceBudgetExceeded(
            "alpha-grid", max_points, f"alpha grid needs {count} points, above the budget of {max_points}"
        )
    return [1 + j * step for j in range(1, count + 1)]


@dataclass(frozen=True)
class GapWitness:
    input_bits: str
    neighbor_bits: str
    alpha: Fraction | None
    interval: BinInterval
    threshold: Fraction
    reason: str = "divergence"


@dataclass(frozen=True)
class GapVerdict:
    decision: str
    witness: GapWitness | None = None
    precision: int = MIN_PRECISION
    grid_size: int | None = None


def starting_precision(prog: Program, eta: int) -> int:
    return max(MIN_PRECISION, eta + 3 * program_size(prog))


def decide_against_threshold(
    p_dist: Dist,
    q_dist: Dist,
    alpha: Fraction,
    threshold: Fraction,
    gap: Fraction,
    start_precision: int,
    max_precision: int,
) -> tuple[str, BinInterval]:
    """Refine the enclosure until it clears ``threshold`` or reaches ``threshold + gap``."""
    precision = min(start_precision, max_precision)
    while True:
        interval = renyi_divergence(p_dist, q_dist, alpha, precision)
        if interval.is_infinite or interval.lower >= threshold + gap:
            return NO, interval
        if interval.upper <= threshold:
            return YES, interval
        if interval.lower > threshold and interval.upper < threshold + gap:
            return INDETERMINATE, interval
        if precision >= max_precision:
            return INDETERMINATE, interval
        precision = min(2 * precision, max_precision)
        logger.debug("refining divergence at alpha=%s to %s bits", format_rational(alpha), precision)


def _support_violation(p_dist: Dist, q_dist: Dist) -> bool:
    return any(p_dist.get(o) and not q_dist.get(o) for o in outcome_space(p_dist, q_dist))


AlphaSource = Callable[[DistributionCache, list[tuple[str, str]], VerifierLimits], list[Fraction]]


def _check_grid(
    prog: Program,
    alphas_for: AlphaSource,
    rho: Fraction,
    gap: Fraction,
    eta: int,
    nb: NeighborRelation | None,
    mode: str,
    limits: VerifierLimits | None,
) -> GapVerdict:
    limits = limits or load_limits()
    nb = nb or NeighborRelation.hamming1()
    cache = DistributionCache(prog, mode, limits)
    pairs = list(neighbor_pairs(prog.input_length, nb))
    cache.prefetch([x for pair in pairs for x in pair])
    alphas = alphas_for(cache, pairs, limits)
    start = starting_precision(prog, eta)
    used = start
    pending: GapWitness | None = None

    for x, y in pairs:
        p_dist, q_dist = cache[x], cache[y]
        if _support_violation(p_dist, q_dist):
            first = alphas[0] if alphas else None
            threshold = rho * first if first is not None else rho
            logger.info("gap check: support violation on (%s, %s)", x, y)
            witness = GapWitness(x, y, first, BinInterval.infinite(start), threshold, "support")
            return GapVerdict(NO, witness, used, len(alphas))
        for alpha in alphas:
            threshold = rho * alpha
            decision, interval = decide_against_threshold(
                p_dist, q_dist, alpha, threshold, gap, start, limits.max_precision_bits
            )
            used = max(used, interval.precision)
            if decision == NO:
                logger.info("gap check: (%s, %s) exceeds %s at alpha=%s", x, y, format_rational(threshold), alpha)
                return GapVerdict(NO, GapWitness(x, y, alpha, interval, threshold), used, len(alphas))
            if decision == INDETERMINATE and pending is None:
                pending = GapWitness(x, y, alpha, interval, threshold, "inside-gap")
    if pending is not None:
        return GapVerdict(INDETERMINATE, pending, used, len(alphas))
    return GapVerdict(YES, None, used, len(alphas))


def check_gap_rdp(
    prog: Program,
    params: GapParams,
    nb: NeighborRelation | None = None,
    mode: str = SENSITIVE,
    limits: VerifierLimits | None = None,
) -> GapVerdict:
    """Yes when every D_alpha <= rho * alpha, no when some D_alpha >= rho * alpha + 2^-eta."""
    if params.alpha is None:
        raise InvalidParameterError("the RDP check needs alpha")
    return _check_grid(
        prog, lambda cache, pairs, limits: [params.alpha], params.rho, params.gap, params.eta, nb, mode, limits
    )


def _denominator_bits(cache: DistributionCache, pairs: list[tuple[str, str]]) -> int:
    inputs = dict.fromkeys(x for pair in pairs for x in pair)
    return max((cache[x].common_denominator_bits() for x in inputs), default=0)


def _concentrated(
    prog: Program,
    params: GapParams,
    omega: Fraction | None,
    nb: NeighborRelation | None,
    mode: str,
    limits: VerifierLimits | None,
) -> GapVerdict:
    def grid(cache: DistributionCache, pairs: list[tuple[str, str]], limits: VerifierLimits) -> list[Fraction]:
        bits = _denominator_bits(cache, pairs)
        alphas = alpha_grid(params.rho, params.eta, bits, omega, limits.max_alpha_grid)
        logger.info("concentrated check: %s alpha points (denominator bits %s)", len(alphas), bits)
        return alphas

    return _check_grid(prog, grid, params.rho, params.gap / 2, params.eta, nb, mode, limits)


def check_gap_cdp(
    prog: Program,
    params: GapParams,
    nb: NeighborRelation | None = None,
    mode: str = SENSITIVE,
    limits: VerifierLimits | None = None,
) -> GapVerdict:
    """Gap-RDP with gap 2^(-eta-1) at every grid order below 1 + log2(m) / rho."""
    return _concentrated(prog, params, None, nb, mode, limits)


def check_gap_tcdp(
    prog: Program,
    params: GapParams,
    nb: NeighborRelation | None = None,
    mode: str = SENSITIVE,
    limits: VerifierLimits | None = None,
) -> GapVerdict:
    """As :func:`check_gap_cdp` with the grid cut off at omega."""
    if params.omega is None:
        raise InvalidParameterError("the tCDP check needs omega")
    return _concentrated(prog, params, params.omega, nb, mode, limits)


def _check_delta(delta: Fraction) -> Fraction:
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {format_rational(delta)}")
    return delta


def rdp_to_approx_dp(alpha: Fraction, rho: Fraction, delta: Fraction, precision: int = MIN_PRECISION) -> Fraction:
    """Upper bound on e^eps = 2^(rho*alpha + log2(1/delta)/(alpha-1)) for an RDP guarantee."""
    delta = _check_delta(delta)
    alpha, rho = Fraction(alpha), Fraction(rho)
    if alpha <= 1:
        raise InvalidParameterError("alpha must exceed 1")
    log_inverse = log2_enclosure(1 / delta, precision)[1]
    return exp2_enclosure(rho * alpha + log_inverse / (alpha - 1), precision)[1]


def cdp_to_approx_dp(rho: Fraction, delta: Fraction, precision: int = MIN_PRECISION) -> Fraction:
    """Upper bound on e^eps = 2^(rho + 2*sqrt(rho*log2(1/delta))) for a CDP guarantee."""
    delta = _check_delta(delta)
    rho = Fraction(rho)
    log_inverse = log2_enclosure(1 / delta, precision)[1]
    return exp2_enclosure(rho + 2 * sqrt_upper(rho * log_inverse, precision), precision)[1]


def tcdp_to_approx_dp(rho: Fraction, omega: Fraction, delta: Fraction, precision: int = MIN_PRECISION) -> Fraction:
    """CDP bound, valid for truncated CDP only while log2(1/delta) <= (omega - 1)^2 * rho."""
    delta = _check_delta(delta)
    rho, omega = Fraction(rho), Fraction(omega)
    if log2_enclosure(1 / delta, precision)[1] > (omega - 1) ** 2 * rho:
        raise InvalidParameterError(
            f"delta={format_rational(delta)} is too small for omega={format_rational(omega)}, rho={format_rational(rho)}"
        )
    return cdp_to_approx_dp(rho, delta, precision)
