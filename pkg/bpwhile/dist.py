"""Exact output distributions from hitting probabilities.

With Q the transitions among live non-final states, the expected visit
counts x solve (I - Q)^T x = e_start, and the probability of ending in
final f is the sum over u of x_u * p(u, f). One solve covers every final.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Iterable, Iterator, Mapping

from .chain import Chain, build_chain, normalize_chain, zero_recurrent
from .errors import InvalidParameterError, SolverInvariantError, UndefinedConditioningError
from .semantics import BOTTOM, Machine
from .solvers import bareiss_solve, sparse_solve
from .syntax import Program
from .utils.config import VerifierLimits, load_limits
from .utils.rationals import decimal_approximation, format_rational
from .utils.workers import ordered_map

logger = logging.getLogger("bpwhile.dist")

SOLVERS = ("auto", "dense", "sparse")


def _outcome_key(outcome: str) -> tuple[bool, str]:
    return (outcome == BOTTOM, outcome)


@dataclass(frozen=True)
class Dist:
    """Outcome -> probability, canonically sorted, zero-mass labels dropped.

    Output distributions always carry ``BOTTOM``; conditioned ones never do.
    """

    entries: tuple[tuple[str, Fraction], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Fraction], keep_bottom: bool = True) -> "Dist":
        items = [
            (outcome, Fraction(p))
            for outcome, p in mapping.items()
            if p or (outcome == BOTTOM and keep_bottom)
        ]
        if keep_bottom and all(outcome != BOTTOM for outcome, _ in items):
            items.append((BOTTOM, Fraction(0)))
        return cls(tuple(sorted(items, key=lambda item: _outcome_key(item[0]))))

    def __getitem__(self, outcome: str) -> Fraction:
        return self.get(outcome)

    def get(self, outcome: str) -> Fraction:
        for key, p in self.entries:
            if key == outcome:
                return p
        return Fraction(0)

    def __iter__(self) -> Iterator[str]:
        return (outcome for outcome, _ in self.entries)

    def items(self) -> tuple[tuple[str, Fraction], ...]:
        return self.entries

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.entries)

    @property
    def bottom(self) -> Fraction:
        return self.get(BOTTOM)

    @property
    def has_bottom(self) -> bool:
        return any(outcome == BOTTOM for outcome, _ in self.entries)

    def total(self) -> Fraction:
        return sum((p for _, p in self.entries), Fraction(0))

    def support(self) -> tuple[str, ...]:
        return tuple(outcome for outcome, p in self.entries if p)

    def common_denominator_bits(self) -> int:
        """Bit length of the least common denominator of all entries."""
        return math.lcm(*(p.denominator for _, p in self.entries)).bit_length()

    def describe(self) -> list[str]:
        return [f"{outcome}: {format_rational(p)} (~{decimal_approximation(p)})" for outcome, p in self.entries]


def outcome_space(*dists: Dist) -> list[str]:
    """Sorted union of the outcomes listed by any of the distributions."""
    return sorted({outcome for dist in dists for outcome in dist}, key=_outcome_key)


def _transient_system(chain: Chain) -> tuple[list[int], dict[int, int]]:
    transient = [i for i in range(len(chain)) if not chain.is_final(i) and chain.edges[i]]
    return transient, {state: position for position, state in enumerate(transient)}


def hitting_probabilities(
    chain: Chain,
    limits: VerifierLimits | None = None,
    solver: str = "auto",
) -> dict[int, Fraction]:
    """Probability of reaching each final from the start, as exact rationals."""
    if not chain.recurrent_zeroed:
        raise SolverInvariantError("hitting probabilities need a chain with recurrent states zeroed")
    if solver not in SOLVERS:
        raise InvalidParameterError(f"unknown solver {solver!r}; expected one of {', '.join(SOLVERS)}")
    finals = {index: Fraction(0) for index in chain.finals}
    if chain.is_final(chain.start):
        finals[chain.start] = Fraction(1)
        return finals
    if not chain.edges[chain.start]:
        return finals

    transient, position = _transient_system(chain)
    size = len(transient)
    dense_limit = (limits or load_limits()).dense_solver_limit
    use_dense = solver == "dense" or (solver == "auto" and size <= dense_limit)
    start = position[chain.start]

    # Scaled by 2 so every coefficient is an integer.
    if use_dense:
        matrix = [[0] * size for _ in range(size)]
        for column, source in enumerate(transient):
            matrix[column][column] += 2
            for target, p in chain.edges[source]:
                row = position.get(target)
                if row is not None:
                    matrix[row][column] -= int(2 * p)
        rhs = [0] * size
        rhs[start] = 2
        visits = bareiss_solve(matrix, rhs)
    else:
        rows: list[dict[int, Fraction]] = [defaultdict(Fraction) for _ in range(size)]
        for column, source in enumerate(transient):
            rows[column][column] += 2
            for target, p in chain.edges[source]:
                row = position.get(target)
                if row is not None:
                    rows[row][column] -= 2 * p
        rhs_sparse = [Fraction(0)] * size
        rhs_sparse[start] = Fraction(2)
        visits = sparse_solve([dict(row) for row in rows], rhs_sparse)

    for column, source in enumerate(transient):
        if not visits[column]:
            continue
        for target, p in chain.edges[source]:
            if target in finals:
                finals[target] += visits[column] * p
    logger.debug("solved %s transient states with the %s solver", size, "dense" if use_dense else "sparse")
    return finals


def distribution_from_chain(
    chain: Chain,
    limits: VerifierLimits | None = None,
    solver: str = "auto",
) -> Dist:
    if not chain.recurrent_zeroed:
        chain = zero_recurrent(chain)
    masses: dict[str, Fraction] = defaultdict(Fraction)
    for index, p in hitting_probabilities(chain, limits, solver).items():
        masses[chain.finals[index]] += p
    terminated = sum(masses.values(), Fraction(0))
    if terminated > 1:
        raise SolverInvariantError(f"final masses sum to {terminated} > 1")
    masses[BOTTOM] = 1 - terminated
    return Dist.from_mapping(masses)


def output_distribution(
    prog: Program,
    input_bits: str,
    limits: VerifierLimits | None = None,
    solver: str = "auto",
    normalize: bool = False,
) -> Dist:
    """Exact distribution of outcomes (including ``BOTTOM``) on one input."""
    chain = build_chain(prog, input_bits, limits)
    if normalize:
        chain = normalize_chain(chain)
    return distribution_from_chain(zero_recurrent(chain), limits, solver)


def _distribution_for(input_bits: str, prog: Program, limits: VerifierLimits) -> Dist:
    return output_distribution(prog, input_bits, limits)


def output_distributions(
    prog: Program,
    inputs: Iterable[str],
    limits: VerifierLimits | None = None,
) -> dict[str, Dist]:
    """Distributions for many inputs, keyed by input; parallel when ``limits.jobs > 1``."""
    limits = limits or load_limits()
    ordered = list(dict.fromkeys(inputs))
    results = ordered_map(partial(_distribution_for, prog=prog, limits=limits), ordered, limits.jobs)
    return dict(zip(ordered, results))


def conditional_distribution(dist: Dist, input_bits: str | None = None) -> Dist:
    """Condition on termination: drop ``BOTTOM`` and renormalize."""
    halting = 1 - dist.bottom
    if halting == 0:
        where = f" on input {input_bits!r}" if input_bits is not None else ""
        raise UndefinedConditioningError(f"program never terminates{where}; cannot condition on termination", input_bits)
    return Dist.from_mapping(
        {outcome: p / halting for outcome, p in dist.entries if outcome != BOTTOM},
        keep_bottom=False,
    )


def exhaustive_distribution(prog: Program, input_bits: str, max_coins: int = 12) -> Dist:
    """Brute force over coin sequences; for programs whose runs use at most ``max_coins`` coins.

    A coin-free cycle counts as non-termination.
    """
    machine = Machine(prog)
    masses: dict[str, Fraction] = defaultdict(Fraction)
    pending = [(machine.start_state(input_bits), Fraction(1), 0)]
    while pending:
        state, mass, used = pending.pop()
        seen = set()
        while True:
            if state.is_final:
                masses[machine.label(state)] += mass
                break
            options = machine.successors(state)
            if len(options) == 1:
                if state in seen:
                    masses[BOTTOM] += mass
                    break
                seen.add(state)
                state = options[0][0]
                continue
            if used == max_coins:
                raise InvalidParameterError(f"a run on input {input_bits!r} needs more than {max_coins} coins")
            mass /= 2
            used += 1
            pending.append((options[1][0], mass, used))
            state = options[0][0]
            seen = set()
    return Dist.from_mapping(masses)
