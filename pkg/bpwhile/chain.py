"""Discrete-time Markov chain of a program on one input.

The explicit chain enumerates every reachable state breadth first and then
indexes them in sorted (line, memory, pending) order, so identical
(program, input) pairs always produce identical indexing. The edge oracle
answers single-edge queries without materializing the chain.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Hashable, Iterable, NamedTuple

from .errors import ResourceBudgetExceeded
from .semantics import HALF, ONE, Machine, ProgState
from .syntax import Program
from .utils.config import VerifierLimits, load_limits
from .utils.rationals import format_rational

logger = logging.getLogger("bpwhile.chain")

Edge = tuple[int, Fraction]


class CopyState(NamedTuple):
    """A state of a normalized chain: original state plus copy number (1 or 2)."""

    state: ProgState
    copy: int

    def describe(self, width: int) -> str:
        return f"{self.state.describe(width)}#{self.copy}"


@dataclass(frozen=True, eq=False)
class Chain:
    states: tuple[Hashable, ...]
    start: int
    finals: dict[int, str]
    edges: tuple[tuple[Edge, ...], ...]
    width: int
    input_length: int
    output_length: int
    mode: str = "explicit"
    recurrent_zeroed: bool = False

    def __len__(self) -> int:
        return len(self.states)

    def is_final(self, index: int) -> bool:
        return index in self.finals

    def outgoing_mass(self, index: int) -> Fraction:
        return sum((p for _, p in self.edges[index]), Fraction(0))

    def predecessors(self) -> list[list[int]]:
        incoming: list[list[int]] = [[] for _ in self.states]
        for source, out in enumerate(self.edges):
            for target, p in out:
                if p:
                    incoming[target].append(source)
        return incoming


def build_chain(prog: Program, input_bits: str, limits: VerifierLimits | None = None) -> Chain:
    """Enumerate the reachable configuration graph of ``prog`` on ``input_bits``."""
    budget = (limits or load_limits()).max_states
    machine = Machine(prog)
    start = machine.start_state(input_bits)
    successors: dict[ProgState, list[tuple[ProgState, Fraction]]] = {}
    queue: deque[ProgState] = deque([start])
    successors[start] = []
    while queue:
        state = queue.popleft()
        out = machine.successors(state)
        successors[state] = out
        for target, _ in out:
            if target not in successors:
                if len(successors) >= budget:
                    raise ResourceBudgetExceeded(
                        "states", budget, f"chain for input {input_bits!r} exceeds the state budget of {budget}"
                    )
                successors[target] = []
                queue.append(target)

    ordered = sorted(successors)
    index = {state: position for position, state in enumerate(ordered)}
    edges = tuple(
        tuple(sorted((index[target], p) for target, p in successors[state])) for state in ordered
    )
    finals = {index[state]: machine.label(state) for state in ordered if state.is_final}
    logger.info("built chain: input=%s states=%s finals=%s", input_bits, len(ordered), len(finals))
    return Chain(
        states=tuple(ordered),
        start=index[start],
        finals=finals,
        edges=edges,
        width=machine.width,
        input_length=prog.input_length,
        output_length=prog.output_length,
    )


def normalize_chain(chain: Chain) -> Chain:
    """Rewrite to only-1/2 edges by duplicating states.

    A 1/2 edge a->b becomes a1->b1 and a2->b2; a probability-1 edge a->b
    becomes the cross edges a_c->b1 and a_c->b2. The start state keeps a
    single copy unless something points back at it.
    """
    start_has_in_edges = any(target == chain.start for out in chain.edges for target, _ in out)
    new_index: dict[tuple[int, int], int] = {}
    new_states: list[CopyState] = []
    for original, state in enumerate(chain.states):
        copies = (1,) if original == chain.start and not start_has_in_edges else (1, 2)
        for copy in copies:
            new_index[(original, copy)] = len(new_states)
            new_states.append(CopyState(state, copy))

    edges: list[tuple[Edge, ...]] = []
    finals: dict[int, str] = {}
    for (original, copy), position in new_index.items():
        if chain.is_final(original):
            finals[position] = chain.finals[original]
            edges.append(((position, ONE),))
            continue
        out: list[Edge] = []
        for target, p in chain.edges[original]:
            if p == ONE:
                out.extend((new_index[(target, c)], HALF) for c in (1, 2))
            else:
                out.append((new_index[(target, copy)], HALF))
        edges.append(tuple(sorted(out)))

    logger.debug("normalized chain: states %s -> %s", len(chain), len(new_states))
    return replace(
        chain,
        states=tuple(new_states),
        start=new_index[(chain.start, 1)],
        finals=finals,
        edges=tuple(edges),
    )


def states_reaching_finals(chain: Chain) -> frozenset[int]:
    """One backward sweep from the finals over positive-probability edges."""
    incoming = chain.predecessors()
    live = set(chain.finals)
    queue = deque(live)
    while queue:
        target = queue.popleft()
        for source in incoming[target]:
            if source not in live:
                live.add(source)
                queue.append(source)
    return frozenset(live)


class EdgeOracle:
    """Answers p(u, w) on demand from the program, never building the chain."""

    mode = "oracle"

    def __init__(self, program: Program, input_bits: str, zero_recurrent: bool = False) -> None:
        self.program = program
        self.input_bits = input_bits
        self.zero_recurrent = zero_recurrent
        self._machine = Machine(program)
        self.start = self._machine.start_state(input_bits)
        self._reach_cache: dict[ProgState, bool] = {}

    def label(self, state: ProgState) -> str:
        return self._machine.label(state)

    def can_reach_final(self, state: ProgState) -> bool:
        cached = self._reach_cache.get(state)
        if cached is not None:
            return cached
        seen = {state}
        queue = deque([state])
        found = False
        while queue and not found:
            current = queue.popleft()
            if current.is_final:
                found = True
                break
            for target, _ in self._machine.successors(current):
                if self._reach_cache.get(target):
                    found = True
                    break
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
        if not found:
            # Everything explored is trapped as well.
            for explored in seen:
                self._reach_cache[explored] = False
        self._reach_cache[state] = found
        return found

    def successors(self, state: ProgState) -> list[tuple[ProgState, Fraction]]:
        out = self._machine.successors(state)
        if not self.zero_recurrent:
            return out
        if not self.can_reach_final(state):
            return []
        return [(target, p) for target, p in out if self.can_reach_final(target)]

    def probability(self, source: ProgState, target: ProgState) -> Fraction:
        for candidate, p in self.successors(source):
            if candidate == target:
                return p
        return Fraction(0)

    def reachable_states(self) -> Iterable[ProgState]:
        """Stream reachable states breadth first (no indexing)."""
        seen = {self.start}
        queue = deque([self.start])
        while queue:
            state = queue.popleft()
            yield state
            for target, _ in self._machine.successors(state):
                if target not in seen:
                    seen.add(target)
                    queue.append(target)


def zero_recurrent(chain: Chain | EdgeOracle) -> Chain | EdgeOracle:
    """Drop every edge touching a non-final state that cannot reach a final."""
    if isinstance(chain, EdgeOracle):
        return EdgeOracle(chain.program, chain.input_bits, zero_recurrent=True)
    live = states_reaching_finals(chain)
    edges = tuple(
        tuple((target, p) for target, p in out if target in live) if source in live else ()
        for source, out in enumerate(chain.edges)
    )
    dead = len(chain) - len(live)
    if dead:
        logger.debug("zeroed %s states that cannot reach a final", dead)
    return replace(chain, edges=edges, recurrent_zeroed=True)


def dump_chain(chain: Chain) -> str:
    """Header ``n v l count`` then one ``u w num/den`` line per edge."""
    names = [state.describe(chain.width) for state in chain.states]
    lines = [f"{chain.input_length} {chain.width} {chain.output_length} {len(chain)}"]
    for source, out in enumerate(chain.edges):
        for target, p in out:
            lines.append(f"{names[source]} {names[target]} {format_rational(p)}")
    return "\n".join(lines) + "\n"
