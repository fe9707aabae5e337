"""Abstract syntax of BPWhile programs and the canonical pretty printer."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Union

from .errors import DuplicateInputError

logger = logging.getLogger("bpwhile.syntax")

FINAL = 0  # pseudo-line of every state after return


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Coin:
    """The ``random`` atom: an independent fair coin per occurrence."""


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    operand: BExpr


@dataclass(frozen=True)
class And:
    left: BExpr
    right: BExpr


@dataclass(frozen=True)
class Or:
    left: BExpr
    right: BExpr


BExpr = Union[Const, Coin, Var, Not, And, Or]

TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Skip:
    line: int = 0


@dataclass(frozen=True)
class Assign:
    target: str
    expr: BExpr
    line: int = 0


@dataclass(frozen=True)
class If:
    cond: BExpr
    then_body: tuple[Cmd, ...]
    else_body: tuple[Cmd, ...]
    line: int = 0


@dataclass(frozen=True)
class While:
    cond: BExpr
    body: tuple[Cmd, ...]
    line: int = 0


Cmd = Union[Skip, Assign, If, While]


@dataclass(frozen=True)
class Program:
    """A line-numbered program.

    ``outputs`` holds variables or the literals ``0``/``1`` (as constants);
    the outcome label of a final state is the bit string read off them.
    """

    input_vars: tuple[str, ...]
    body: tuple[Cmd, ...]
    outputs: tuple[Var | Const, ...]
    all_vars: tuple[str, ...]
    line_count: int

    @property
    def input_length(self) -> int:
        return len(self.input_vars)

    @property
    def output_length(self) -> int:
        return len(self.outputs)

    @property
    def output_vars(self) -> tuple[str, ...]:
        return tuple(item.name for item in self.outputs if isinstance(item, Var))


# ---------------------------------------------------------------------------
# Expression helpers
# ---------------------------------------------------------------------------


def coin_count(expr: BExpr) -> int:
    if isinstance(expr, Coin):
        return 1
    if isinstance(expr, Not):
        return coin_count(expr.operand)
    if isinstance(expr, (And, Or)):
        return coin_count(expr.left) + coin_count(expr.right)
    return 0


def expr_vars(expr: BExpr) -> Iterator[str]:
    """Yield variable names in left-to-right order (with repeats)."""
    if isinstance(expr, Var):
        yield expr.name
    elif isinstance(expr, Not):
        yield from expr_vars(expr.operand)
    elif isinstance(expr, (And, Or)):
        yield from expr_vars(expr.left)
        yield from expr_vars(expr.right)


def mk_not(operand: BExpr) -> BExpr:
    if isinstance(operand, Const):
        return Const(not operand.value)
    if isinstance(operand, Not):
        return operand.operand
    return Not(operand)


def mk_and(left: BExpr, right: BExpr) -> BExpr:
    # Folding never drops an operand that draws coins.
    for a, b in ((left, right), (right, left)):
        if isinstance(a, Const):
            if a.value:
                return b
            if coin_count(b) == 0:
                return FALSE
    return And(left, right)


def mk_or(left: BExpr, right: BExpr) -> BExpr:
    for a, b in ((left, right), (right, left)):
        if isinstance(a, Const):
            if not a.value:
                return b
            if coin_count(b) == 0:
                return TRUE
    return Or(left, right)


def mk_all(items: Iterable[BExpr]) -> BExpr:
    result: BExpr = TRUE
    for item in items:
        result = mk_and(result, item)
    return result


def mk_iff(left: BExpr, right: BExpr) -> BExpr:
    return mk_or(mk_and(left, right), mk_and(mk_not(left), mk_not(right)))


def mk_xor(left: BExpr, right: BExpr) -> BExpr:
    return mk_or(mk_and(left, mk_not(right)), mk_and(mk_not(left), right))


# ---------------------------------------------------------------------------
# Commands and program assembly
# ---------------------------------------------------------------------------


def iter_commands(body: Iterable[Cmd]) -> Iterator[Cmd]:
    """Pre-order walk: a branch head comes before its bodies."""
    for command in body:
        yield command
        if isinstance(command, If):
            yield from iter_commands(command.then_body)
            yield from iter_commands(command.else_body)
        elif isinstance(command, While):
            yield from iter_commands(command.body)


def command_expr(command: Cmd) -> BExpr | None:
    if isinstance(command, Assign):
        return command.expr
    if isinstance(command, (If, While)):
        return command.cond
    return None


def _number(body: Iterable[Cmd], counter: list[int]) -> tuple[Cmd, ...]:
    numbered: list[Cmd] = []
    for command in body:
        counter[0] += 1
        line = counter[0]
        if isinstance(command, If):
            then_body = _number(command.then_body, counter)
            else_body = _number(command.else_body, counter)
            numbered.append(replace(command, line=line, then_body=then_body, else_body=else_body))
        elif isinstance(command, While):
            numbered.append(replace(command, line=line, body=_number(command.body, counter)))
        else:
            numbered.append(replace(command, line=line))
    return tuple(numbered)


def assemble_program(
    input_vars: Iterable[str],
    body: Iterable[Cmd],
    outputs: Iterable[Var | Const],
) -> Program:
    """Number lines and collect variables: inputs, then first assignment, then read-only names."""
    inputs = tuple(input_vars)
    seen: set[str] = set()
    for name in inputs:
        if name in seen:
            raise DuplicateInputError(f"duplicate input variable {name!r}")
        seen.add(name)
    counter = [0]
    numbered = _number(body, counter)
    output_items = tuple(outputs)

    ordered: dict[str, None] = dict.fromkeys(inputs)
    for command in iter_commands(numbered):
        if isinstance(command, Assign) and command.target not in ordered:
            ordered[command.target] = None
    read_only: dict[str, None] = {}
    for command in iter_commands(numbered):
        expr = command_expr(command)
        if expr is None:
            continue
        for name in expr_vars(expr):
            if name not in ordered:
                read_only[name] = None
    for item in output_items:
        if isinstance(item, Var) and item.name not in ordered:
            read_only[item.name] = None
    if read_only:
        logger.warning("variables read but never assigned default to false: %s", ", ".join(read_only))
    ordered.update(read_only)

    return Program(
        input_vars=inputs,
        body=numbered,
        outputs=output_items,
        all_vars=tuple(ordered),
        line_count=counter[0],
    )


def program_size(prog: Program) -> int:
    """Count AST nodes; drives the divergence precision schedule."""

    def expr_size(expr: BExpr) -> int:
        if isinstance(expr, Not):
            return 1 + expr_size(expr.operand)
        if isinstance(expr, (And, Or)):
            return 1 + expr_size(expr.left) + expr_size(expr.right)
        return 1

    total = len(prog.input_vars) + len(prog.outputs)
    for command in iter_commands(prog.body):
        expr = command_expr(command)
        total += 1 + (expr_size(expr) if expr is not None else 0)
    return total


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_ATOM = 1, 2, 3, 4
INDENT = "    "


def _precedence(expr: BExpr) -> int:
    if isinstance(expr, Or):
        return _PREC_OR
    if isinstance(expr, And):
        return _PREC_AND
    if isinstance(expr, Not):
        return _PREC_NOT
    return _PREC_ATOM


def format_expr(expr: BExpr, minimum: int = _PREC_OR) -> str:
    if isinstance(expr, Const):
        text = "true" if expr.value else "false"
    elif isinstance(expr, Coin):
        text = "random"
    elif isinstance(expr, Var):
        text = expr.name
    elif isinstance(expr, Not):
        text = "!" + format_expr(expr.operand, _PREC_NOT)
    else:
        prec = _precedence(expr)
        operator = " || " if isinstance(expr, Or) else " && "
        # Left-associative: the right operand needs strictly higher precedence.
        text = format_expr(expr.left, prec) + operator + format_expr(expr.right, prec + 1)
    if _precedence(expr) < minimum:
        return f"({text})"
    return text


def format_output(item: Var | Const) -> str:
    if isinstance(item, Var):
        return item.name
    return "1" if item.value else "0"


def format_body(body: tuple[Cmd, ...], depth: int) -> list[str]:
    lines: list[str] = []
    pad = INDENT * depth
    for command in body:
        if isinstance(command, Skip):
            lines.append(f"{pad}skip;")
        elif isinstance(command, Assign):
            lines.append(f"{pad}{command.target} := {format_expr(command.expr)};")
        elif isinstance(command, If):
            lines.append(f"{pad}if {format_expr(command.cond)} then {{")
            lines.extend(format_body(command.then_body, depth + 1))
            lines.append(f"{pad}}} else {{")
            lines.extend(format_body(command.else_body, depth + 1))
            lines.append(f"{pad}}};")
        else:
            lines.append(f"{pad}while {format_expr(command.cond)} then {{")
            lines.extend(format_body(command.body, depth + 1))
            lines.append(f"{pad}}};")
    return lines


def pretty_print(prog: Program) -> str:
    """Canonical text: one statement per line, 4-space indents, bodies always braced."""
    lines = [f"input({', '.join(prog.input_vars)});"]
    lines.extend(format_body(prog.body, 0))
    lines.append(f"return({', '.join(format_output(item) for item in prog.outputs)})")
    return "\n".join(lines) + "\n"
