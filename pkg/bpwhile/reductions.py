"""Program transformations that turn termination questions into privacy questions.

BPWhile has no procedure calls, so a subprogram is inlined: its variables
get a fresh prefix, its inputs are copied in from the caller and every other
variable is reset to false at the start of each copy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .desugar import bit_name, compare_bits, constant_bits, desugar
from .errors import InvalidParameterError
from .qbf import EXISTS, QBF
from .syntax import (
    FALSE,
    TRUE,
    And,
    Assign,
    BExpr,
    Cmd,
    Coin,
    Const,
    If,
    Not,
    Or,
    Program,
    Skip,
    Var,
    While,
    assemble_program,
    format_body,
)
from .utils.rationals import dyadic_exponent, format_rational, is_dyadic

logger = logging.getLogger("bpwhile.reductions")

WRAP_PURE = "wrap-pure"
WRAP_APPROX = "wrap-approx"
AMPLIFY = "amplify"
DISTINGUISH = "distinguish"
TQBF = "tqbf"
KINDS = (WRAP_PURE, WRAP_APPROX, AMPLIFY, DISTINGUISH, TQBF)

MAX_AMPLIFY_EXPONENT = 16

HANG: Cmd = While(TRUE, (Skip(),))


# ---------------------------------------------------------------------------
# Renaming and inlining
# ---------------------------------------------------------------------------


def fresh_name(base: str, taken: Iterable[str]) -> str:
    used = set(taken)
    if base not in used:
        return base
    suffix = 1
    while f"{base}{suffix}" in used:
        suffix += 1
    return f"{base}{suffix}"


def fresh_prefix(taken: Iterable[str], base: str = "_c") -> str:
    """A prefix no existing name starts with."""
    names = list(taken)
    suffix = 0
    while True:
        prefix = f"{base}{suffix or ''}_"
        if not any(name.startswith(prefix) for name in names):
            return prefix
        suffix += 1


def rename_expr(expr: BExpr, mapping: dict[str, str]) -> BExpr:
    if isinstance(expr, Var):
        return Var(mapping.get(expr.name, expr.name))
    if isinstance(expr, Not):
        return Not(rename_expr(expr.operand, mapping))
    if isinstance(expr, And):
        return And(rename_expr(expr.left, mapping), rename_expr(expr.right, mapping))
    if isinstance(expr, Or):
        return Or(rename_expr(expr.left, mapping), rename_expr(expr.right, mapping))
    return expr


def rename_body(body: Sequence[Cmd], mapping: dict[str, str]) -> tuple[Cmd, ...]:
    renamed: list[Cmd] = []
    for command in body:
        if isinstance(command, Assign):
            renamed.append(Assign(mapping.get(command.target, command.target), rename_expr(command.expr, mapping)))
        elif isinstance(command, If):
            renamed.append(
                If(
                    rename_expr(command.cond, mapping),
                    rename_body(command.then_body, mapping),
                    rename_body(command.else_body, mapping),
                )
            )
        elif isinstance(command, While):
            renamed.append(While(rename_expr(command.cond, mapping), rename_body(command.body, mapping)))
        else:
            renamed.append(Skip())
    return tuple(renamed)


def inline(prog: Program, prefix: str, arguments: Sequence[BExpr] | None = None) -> tuple[Cmd, ...]:
    """Commands running ``prog`` on ``arguments`` (default: caller variables of the same names)."""
    if arguments is None:
        arguments = [Var(name) for name in prog.input_vars]
    if len(arguments) != prog.input_length:
        raise InvalidParameterError(f"inlining needs {prog.input_length} arguments, got {len(arguments)}")
    mapping = {name: prefix + name for name in prog.all_vars}
    setup: list[Cmd] = [Assign(mapping[name], argument) for name, argument in zip(prog.input_vars, arguments)]
    setup.extend(Assign(mapping[name], FALSE) for name in prog.all_vars if name not in prog.input_vars)
    return tuple(setup) + rename_body(prog.body, mapping) or (Skip(),)


def _guard_name(prog: Program) -> str:
    return fresh_name("b", prog.all_vars)


def _guarded(prog: Program, then_body: tuple[Cmd, ...], guard: str) -> Program:
    body = (If(Var(guard), then_body, (Skip(),)),)
    return assemble_program(list(prog.input_vars) + [guard], body, [Const(True)])


# ---------------------------------------------------------------------------
# Reductions to pure and approximate DP
# ---------------------------------------------------------------------------


def wrap_pure(prog: Program) -> Program:
    """``input(x, b); if b then C(x) else skip; return(1)``."""
    guard = _guard_name(prog)
    prefix = fresh_prefix(list(prog.all_vars) + [guard])
    wrapped = _guarded(prog, inline(prog, prefix), guard)
    logger.info("wrap-pure: %s lines -> %s lines", prog.line_count, wrapped.line_count)
    return wrapped


def _check_delta(delta: Fraction) -> Fraction:
    delta = Fraction(delta)
    if not is_dyadic(delta):
        raise InvalidParameterError(f"delta must be dyadic (a/2^m), got {format_rational(delta)}")
    if not 0 < delta < 1:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {format_rational(delta)}")
    return delta


def delta_rand_commands(delta: Fraction, prefix: str, target: str) -> tuple[Cmd, ...]:
    """Set ``target`` to 1 with probability 1 - delta using m fair coins."""
    delta = _check_delta(delta)
    m = dyadic_exponent(delta)
    draws = [f"{prefix}d{i}" for i in range(m)]
    coins = tuple(Assign(name, Coin()) for name in draws)
    # draws[i] is bit i; the value is below a with probability a / 2^m.
    below = compare_bits("<", [Var(name) for name in draws], constant_bits(delta.numerator, m))
    return coins + (Assign(target, Not(below)),)


def delta_rand(delta: Fraction) -> Program:
    """Stand-alone subprogram: output 1 with probability 1 - delta, else 0."""
    body = delta_rand_commands(delta, "", "r")
    return assemble_program([], body, [Var("r")])


def wrap_approx(prog: Program, delta: Fraction) -> Program:
    """Run C when b is set, then loop forever with probability delta."""
    guard = _guard_name(prog)
    prefix = fresh_prefix(list(prog.all_vars) + [guard])
    coins = fresh_prefix(list(prog.all_vars) + [guard], base="_d")
    flag = f"{coins}r"
    tail = delta_rand_commands(delta, coins, flag) + (If(Not(Var(flag)), (HANG,), (Skip(),)),)
    wrapped = _guarded(prog, inline(prog, prefix) + tail, guard)
    logger.info("wrap-approx: delta=%s, %s lines", format_rational(Fraction(delta)), wrapped.line_count)
    return wrapped


# ---------------------------------------------------------------------------
# Loss amplification and the distinguishing reduction
# ---------------------------------------------------------------------------


def amplify_source(prog: Program, m: int) -> str:
    """Extended source of the retry loop: halt once 2^m coin flips all come up heads."""
    if m < 1:
        raise InvalidParameterError(f"amplification exponent must be at least 1, got {m}")
    if m > MAX_AMPLIFY_EXPONENT:
        raise InvalidParameterError(f"amplification exponent {m} exceeds {MAX_AMPLIFY_EXPONENT}")
    taken = set(prog.all_vars)
    counter, heads, coin, done = (fresh_name(base, taken) for base in ("_cnt", "_bb", "_a", "_done"))
    taken.update((counter, heads, coin, done))
    taken.update(bit_name(block, i) for block in (counter, heads) for i in range(m + 1))
    prefix = fresh_prefix(taken)
    limit = 1 << m
    run = format_body(inline(prog, prefix), 4)
    lines = [
        f"input({', '.join(prog.input_vars)});",
        f"block {counter}[{m + 1}], {heads}[{m + 1}];",
        f"{done} := false;",
        f"while !{done} then {{",
        f"    {heads} := 0;",
        f"    {counter} := 0;",
        f"    while {counter} < {limit} && !{done} then {{",
        f"        {counter} := {counter} + 1;",
        f"        {coin} := random;",
        f"        if {coin} then {{",
        f"            {heads} := {heads} + 1;",
        f"            if {heads} < {limit} then {{",
        *run,
        "            } else {",
        f"                {done} := true;",
        "            };",
        "        } else {",
        "            skip;",
        "        };",
        "    };",
        "};",
        "return(1)",
    ]
    return "\n".join(lines) + "\n"


def amplify(prog: Program, m: int = 1) -> Program:
    """A.s.-terminating if ``prog`` is; otherwise halts with probability below 1/2."""
    amplified = desugar(amplify_source(prog, m))
    logger.info("amplify: m=%s, %s lines", m, amplified.line_count)
    return amplified


def repetitions_for(e_eps: Fraction, delta: Fraction) -> int:
    """Smallest m >= 1 with e_eps * 2^-m + delta < 1."""
    e_eps, delta = Fraction(e_eps), Fraction(delta)
    if e_eps < 0:
        raise InvalidParameterError("e_eps must be nonnegative")
    if not 0 <= delta < 1:
        raise InvalidParameterError(f"delta must lie in [0, 1), got {format_rational(delta)}")
    m = 1
    while e_eps / (1 << m) + delta >= 1:
        m += 1
    return m


def wrap_distinguish(prog: Program, e_eps: Fraction, delta: Fraction) -> tuple[Program, int]:
    """(0,0)-DP if ``prog`` terminates a.s., else not (e_eps, delta)-DP; returns the repetition count too."""
    m = repetitions_for(e_eps, delta)
    amplified = amplify(prog, 1)
    guard = _guard_name(amplified)
    prefix = fresh_prefix(list(amplified.all_vars) + [guard])
    runs = inline(amplified, prefix) * m
    wrapped = _guarded(amplified, runs, guard)
    logger.info("distinguish: e_eps=%s delta=%s m=%s", e_eps, delta, m)
    return wrapped, m


# ---------------------------------------------------------------------------
# Quantified boolean formulas as termination questions
# ---------------------------------------------------------------------------


def _matrix_source(expr: BExpr, blocks: dict[str, str]) -> str:
    if isinstance(expr, Const):
        return "true" if expr.value else "false"
    if isinstance(expr, Var):
        return f"({blocks[expr.name]} == 1)"
    if isinstance(expr, Not):
        return f"!{_matrix_source(expr.operand, blocks)}"
    operator = "&&" if isinstance(expr, And) else "||"
    return f"({_matrix_source(expr.left, blocks)} {operator} {_matrix_source(expr.right, blocks)})"


def tqbf_source(formula: QBF) -> str:
    """Nested loops over each quantified variable; loop forever iff the formula is false."""
    if not formula.prefix:
        raise InvalidParameterError("formula has no quantifiers")
    t = len(formula.prefix)
    values = {name: f"qx{i}" for i, (_, name) in enumerate(formula.prefix, start=1)}

    def accepts(level: int) -> str:
        kind = formula.prefix[level - 1][0]
        return f"qc{level} >= 1" if kind == EXISTS else f"qc{level} == 2"

    def loop(level: int, depth: int) -> list[str]:
        pad = "    " * depth
        inner = "    " * (depth + 1)
        lines = [f"{pad}qc{level} := 0;", f"{pad}qx{level} := 0;", f"{pad}while qx{level} <= 1 then {{"]
        if level == t:
            lines += [
                f"{inner}if {_matrix_source(formula.matrix, values)} then {{",
                f"{inner}    qc{level} := qc{level} + 1;",
                f"{inner}}} else {{",
                f"{inner}    skip;",
                f"{inner}}};",
            ]
        else:
            lines += loop(level + 1, depth + 1)
            lines += [
                f"{inner}if {accepts(level + 1)} then {{",
                f"{inner}    qc{level} := qc{level} + 1;",
                f"{inner}}} else {{",
                f"{inner}    skip;",
                f"{inner}}};",
            ]
        lines += [f"{inner}qx{level} := qx{level} + 1;", f"{pad}}};"]
        return lines

    declarations = ", ".join(f"qx{i}[2], qc{i}[2]" for i in range(1, t + 1))
    lines = ["input(b);", f"block {declarations};"]
    lines += loop(1, 0)
    lines += [
        f"if !({accepts(1)}) then {{",
        "    while true then {",
        "        skip;",
        "    };",
        "} else {",
        "    skip;",
        "};",
        "return(1)",
    ]
    return "\n".join(lines) + "\n"


def tqbf_to_bpwhile(formula: QBF) -> Program:
    """Terminates almost surely exactly when the formula is true; the input bit is ignored."""
    program = desugar(tqbf_source(formula))
    logger.info("tqbf: %s quantifiers -> %s lines", len(formula.prefix), program.line_count)
    return program


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionSpec:
    kind: str
    delta: Fraction | None = None
    m: int = 1
    e_eps: Fraction | None = None
    formula: QBF | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown reduction {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind == WRAP_APPROX and self.delta is None:
            raise InvalidParameterError("wrap-approx needs delta")
        if self.kind == DISTINGUISH and (self.delta is None or self.e_eps is None):
            raise InvalidParameterError("distinguish needs e_eps and delta")
        if self.kind == TQBF and self.formula is None:
            raise InvalidParameterError("tqbf needs a formula")


def apply_reduction(spec: ReductionSpec, prog: Program | None = None) -> tuple[Program, dict[str, object]]:
    """Run one reduction; the dict carries derived parameters worth reporting."""
    if spec.kind == TQBF:
        return tqbf_to_bpwhile(spec.formula), {"quantifiers": len(spec.formula.prefix)}
    if prog is None:
        raise InvalidParameterError(f"{spec.kind} needs a program")
    if spec.kind == WRAP_PURE:
        return wrap_pure(prog), {}
    if spec.kind == WRAP_APPROX:
        return wrap_approx(prog, spec.delta), {"delta": spec.delta}
    if spec.kind == AMPLIFY:
        return amplify(prog, spec.m), {"m": spec.m}
    program, m = wrap_distinguish(prog, spec.e_eps, spec.delta)
    return program, {"m": m}

