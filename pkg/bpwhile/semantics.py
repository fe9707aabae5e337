"""Small-step probabilistic semantics.

A state is a program counter plus a bit vector over ``all_vars`` (first
variable in the most significant position). Lines whose expression draws
k >= 1 coins take k micro-steps; the coins resolved so far ride along in
``pending`` until the last one is drawn and the command executes.
"""

from __future__ import annotations

import logging
import random
from fractions import Fraction
from typing import Callable, Iterator, NamedTuple, Sequence

from .errors import InputLengthError, InvalidLineError
from .syntax import FINAL, And, Assign, BExpr, Cmd, Coin, Const, If, Not, Or, Program, Skip, Var, While, coin_count

logger = logging.getLogger("bpwhile.semantics")

HALF = Fraction(1, 2)
ONE = Fraction(1)
BOTTOM = "⊥"
TIMEOUT = "TIMEOUT"

Evaluator = Callable[[int, Iterator[bool]], bool]


class ProgState(NamedTuple):
    """Vertex of the configuration graph; tuple order is the canonical sort order."""

    line: int
    memory: int
    pending: tuple[bool, ...] = ()

    @property
    def is_final(self) -> bool:
        return self.line == FINAL

    def describe(self, width: int) -> str:
        """``line:hexmemory`` with a ``+bits`` suffix for resolved coins."""
        digits = max(1, (width + 3) // 4)
        text = f"{'F' if self.is_final else self.line}:{self.memory:0{digits}x}"
        if self.pending:
            text += "+" + "".join("1" if bit else "0" for bit in self.pending)
        return text


class _Step(NamedTuple):
    coins: int
    run: Callable[[int, Iterator[bool]], tuple[int, int]]


def _compile_expr(expr: BExpr, shifts: dict[str, int]) -> Evaluator:
    # Operands are always both evaluated, left first, so coin order is syntactic.
    if isinstance(expr, Const):
        value = expr.value
        return lambda memory, coins: value
    if isinstance(expr, Coin):
        return lambda memory, coins: next(coins)
    if isinstance(expr, Var):
        shift = shifts[expr.name]
        return lambda memory, coins: (memory >> shift) & 1 == 1
    if isinstance(expr, Not):
        inner = _compile_expr(expr.operand, shifts)
        return lambda memory, coins: not inner(memory, coins)
    left = _compile_expr(expr.left, shifts)
    right = _compile_expr(expr.right, shifts)
    if isinstance(expr, And):
        return lambda memory, coins: left(memory, coins) & right(memory, coins)
    if isinstance(expr, Or):
        return lambda memory, coins: left(memory, coins) | right(memory, coins)
    raise TypeError(f"unknown expression node {expr!r}")


class Machine:
    """Compiled step table for one program."""

    def __init__(self, program: Program) -> None:
        self.program = program
        self.width = len(program.all_vars)
        self._shifts = {name: self.width - 1 - position for position, name in enumerate(program.all_vars)}
        self._steps: dict[int, _Step] = {}
        self.start_line = self._compile_body(program.body, FINAL)
        self._output_readers = [self._output_reader(item) for item in program.outputs]

    def _output_reader(self, item: Var | Const) -> Callable[[int], str]:
        if isinstance(item, Const):
            bit = "1" if item.value else "0"
            return lambda memory: bit
        shift = self._shifts[item.name]
        return lambda memory: "1" if (memory >> shift) & 1 else "0"

    def _compile_body(self, body: tuple[Cmd, ...], follow: int) -> int:
        """Compile a statement list ending in ``follow``; return its entry line."""
        entry = follow
        for command in reversed(body):
            entry = self._compile_command(command, entry)
        return entry

    def _compile_command(self, command: Cmd, follow: int) -> int:
        line = command.line
        if isinstance(command, Skip):
            self._steps[line] = _Step(0, lambda memory, coins: (memory, follow))
        elif isinstance(command, Assign):
            shift = self._shifts[command.target]
            mask = ~(1 << shift)
            value = _compile_expr(command.expr, self._shifts)

            def assign(memory: int, coins: Iterator[bool]) -> tuple[int, int]:
                bit = value(memory, coins)
                return (memory & mask) | (int(bit) << shift), follow

            self._steps[line] = _Step(coin_count(command.expr), assign)
        elif isinstance(command, If):
            then_entry = self._compile_body(command.then_body, follow)
            else_entry = self._compile_body(command.else_body, follow)
            cond = _compile_expr(command.cond, self._shifts)
            self._steps[line] = _Step(
                coin_count(command.cond),
                lambda memory, coins: (memory, then_entry if cond(memory, coins) else else_entry),
            )
        elif isinstance(command, While):
            body_entry = self._compile_body(command.body, line)
            cond = _compile_expr(command.cond, self._shifts)
            self._steps[line] = _Step(
                coin_count(command.cond),
                lambda memory, coins: (memory, body_entry if cond(memory, coins) else follow),
            )
        else:  # pragma: no cover
            raise TypeError(f"unknown command {command!r}")
        return line

    def start_state(self, input_bits: str) -> ProgState:
        n = self.program.input_length
        if len(input_bits) != n or any(bit not in "01" for bit in input_bits):
            raise InputLengthError(f"input must be a bit string of length {n}, got {input_bits!r}")
        memory = int(input_bits, 2) << (self.width - n) if n else 0
        return ProgState(self.start_line, memory)

    def label(self, state: ProgState) -> str:
        return "".join(read(state.memory) for read in self._output_readers)

    def successors(self, state: ProgState) -> list[tuple[ProgState, Fraction]]:
        if state.line == FINAL:
            return [(state, ONE)]
        step = self._steps.get(state.line)
        if step is None:
            raise InvalidLineError(f"no command at line {state.line}")
        if state.pending and len(state.pending) >= step.coins:
            raise InvalidLineError(f"line {state.line} draws {step.coins} coins, state holds {len(state.pending)}")
        if step.coins == 0:
            memory, line = step.run(state.memory, iter(()))
            return [(ProgState(line, memory), ONE)]
        if len(state.pending) < step.coins - 1:
            return [(ProgState(state.line, state.memory, state.pending + (bit,)), HALF) for bit in (False, True)]
        outcomes = []
        for bit in (False, True):
            memory, line = step.run(state.memory, iter(state.pending + (bit,)))
            outcomes.append(ProgState(line, memory))
        if outcomes[0] == outcomes[1]:
            return [(outcomes[0], ONE)]
        return [(outcomes[0], HALF), (outcomes[1], HALF)]


def transitions(prog: Program, state: ProgState) -> list[tuple[ProgState, Fraction]]:
    """Successors of ``state`` with probabilities in {1/2, 1}."""
    return Machine(prog).successors(state)


def run_sample(prog: Program, input_bits: str, seed: int, max_steps: int) -> str:
    """Sample one trajectory; return the outcome label or ``TIMEOUT``."""
    if max_steps < 1:
        raise InputLengthError("max_steps must be at least 1")
    machine = Machine(prog)
    rng = random.Random(seed)
    state = machine.start_state(input_bits)
    for _ in range(max_steps):
        if state.is_final:
            return machine.label(state)
        options = machine.successors(state)
        state = options[0][0] if len(options) == 1 else options[rng.getrandbits(1)][0]
    if state.is_final:
        return machine.label(state)
    logger.debug("sample on input %s with seed %s hit the %s-step limit", input_bits, seed, max_steps)
    return TIMEOUT


def run_with_coins(prog: Program, input_bits: str, coins: Sequence[bool], max_steps: int = 100_000) -> str | None:
    """Run with a fixed coin sequence.

    Returns the outcome label, ``BOTTOM`` when the run enters a coin-free
    cycle, or ``None`` when the supplied coins run out first.
    """
    machine = Machine(prog)
    state = machine.start_state(input_bits)
    used = 0
    seen_since_coin: set[ProgState] = set()
    for _ in range(max_steps):
        if state.is_final:
            return machine.label(state)
        options = machine.successors(state)
        if len(options) == 1:
            if state in seen_since_coin:
                return BOTTOM
            seen_since_coin.add(state)
            state = options[0][0]
            continue
        if used == len(coins):
            return None
        state = options[int(bool(coins[used]))][0]
        used += 1
        seen_since_coin.clear()
    return machine.label(state) if state.is_final else None
