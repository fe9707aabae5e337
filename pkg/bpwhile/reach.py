"""Reachability queries and the almost-sure-termination decision.

A program terminates almost surely on every input iff every state reachable
from the start can still reach a final state.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import partial

from .chain import Chain, build_chain, states_reaching_finals
from .semantics import ProgState
from .syntax import Program
from .utils.config import VerifierLimits, load_limits
from .utils.workers import all_inputs, ordered_map

logger = logging.getLogger("bpwhile.reach")

TERMINATES = "terminates-a.s."
DOES_NOT = "does-not"


@dataclass(frozen=True)
class ASTWitness:
    input_bits: str
    state_index: int
    state: ProgState


@dataclass(frozen=True)
class ASTVerdict:
    decision: str
    witness: ASTWitness | None = None

    @property
    def terminates(self) -> bool:
        return self.decision == TERMINATES


def can_reach_final(chain: Chain, index: int) -> bool:
    """Forward search over positive-probability edges from ``index``."""
    if not 0 <= index < len(chain):
        raise IndexError(f"state index {index} out of range")
    seen = {index}
    queue = deque([index])
    while queue:
        current = queue.popleft()
        if chain.is_final(current):
            return True
        for target, p in chain.edges[current]:
            if p and target not in seen:
                seen.add(target)
                queue.append(target)
    return False


def first_trapped_state(chain: Chain) -> int | None:
    """Smallest-index reachable state with no path to a final, if any."""
    live = states_reaching_finals(chain)
    for index in range(len(chain)):
        if index not in live:
            return index
    return None


def _check_input(input_bits: str, prog: Program, limits: VerifierLimits) -> ASTWitness | None:
    chain = build_chain(prog, input_bits, limits)
    trapped = first_trapped_state(chain)
    if trapped is None:
        return None
    return ASTWitness(input_bits, trapped, chain.states[trapped])


def ast_check(prog: Program, limits: VerifierLimits | None = None) -> ASTVerdict:
    """Decide almost-sure termination over all 2^n inputs."""
    limits = limits or load_limits()
    check = partial(_check_input, prog=prog, limits=limits)
    if limits.jobs > 1:
        witnesses = ordered_map(check, all_inputs(prog.input_length), limits.jobs)
        failures = [witness for witness in witnesses if witness is not None]
        witness = failures[0] if failures else None
    else:
        witness = next((w for w in map(check, all_inputs(prog.input_length)) if w is not None), None)
    if witness is None:
        logger.info("ast check: all %s inputs terminate almost surely", 2 ** prog.input_length)
        return ASTVerdict(TERMINATES)
    logger.info("ast check: input %s traps state %s", witness.input_bits, witness.state_index)
    return ASTVerdict(DOES_NOT, witness)
