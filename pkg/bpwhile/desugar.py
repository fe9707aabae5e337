"""Fixed-width unsigned integer sugar (``.bpwx``) lowered to core BPWhile.

A block ``u[w]`` becomes boolean variables ``u__0`` .. ``u__{w-1}`` (bit 0
least significant). Inputs, outputs and assignments list block bits most
significant first. Arithmetic is unsigned: ``+`` is exact (one extra carry
bit), ``-`` wraps modulo 2^w of its widest operand, and assigning a wider
value to a block keeps the low bits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedToken

from .errors import DesugarError, DuplicateInputError, ProgramSyntaxError
from .parser import parse, run_transformer, translate_lark_error
from .syntax import (
    FALSE,
    TRUE,
    Assign,
    BExpr,
    Cmd,
    Coin,
    Const,
    If,
    Program,
    Skip,
    Var,
    While,
    assemble_program,
    mk_and,
    mk_all,
    mk_iff,
    mk_not,
    mk_or,
    mk_xor,
)
from .utils.path_utils import read_source

logger = logging.getLogger("bpwhile.desugar")

EXTENDED_GRAMMAR = r"""
    start: "input" "(" [input_list] ")" ";" statements "return" "(" [output_list] ")" ";"?

    statements: (statement ";")*

    input_list: input_item ("," input_item)*
    input_item: NAME ["[" INT "]"]
    output_list: output ("," output)*
    ?output: NAME -> output_var
           | INT -> output_literal
           | "true" -> output_true
           | "false" -> output_false

    ?statement: "skip" -> skip
              | "block" decl ("," decl)* -> declare
              | NAME ":=" "uniform" "(" INT "," INT "]" -> uniform
              | NAME ":=" expr -> assign
              | "if" expr "then" body "else" body -> if_
              | "while" expr "then" body -> while_

    decl: NAME "[" INT "]"

    body: statement
        | "{" statement (";" statement)* ";"? "}"
        | "(" statement (";" statement)* ";"? ")"

    ?expr: expr "||" conj -> or_
         | conj
    ?conj: conj "&&" unary -> and_
         | unary
    ?unary: "!" unary -> not_
          | comparison
    ?comparison: sum CMP sum -> compare
               | sum
    ?sum: sum "+" term -> add
        | sum "-" term -> sub
        | sum MULOP term -> unsupported
        | term
    ?term: "true" -> true
         | "false" -> false
         | "random" -> coin
         | NAME -> name
         | INT -> int
         | "(" expr ")"

    CMP: "<=" | ">=" | "==" | "!=" | "<" | ">"
    MULOP: "*" | "/" | "%"
    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    INT: /[0-9]+/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""


# ---------------------------------------------------------------------------
# Intermediate tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class XName:
    token: Token


@dataclass(frozen=True)
class XInt:
    token: Token

    @property
    def value(self) -> int:
        return int(self.token)


@dataclass(frozen=True)
class XBool:
    value: bool


@dataclass(frozen=True)
class XCoin:
    pass


@dataclass(frozen=True)
class XUnary:
    operand: "XExpr"


@dataclass(frozen=True)
class XBinary:
    op: str  # "&&", "||", "+", "-"
    left: "XExpr"
    right: "XExpr"


@dataclass(frozen=True)
class XCompare:
    op: Token
    left: "XExpr"
    right: "XExpr"


XExpr = Union[XName, XInt, XBool, XCoin, XUnary, XBinary, XCompare]


@dataclass(frozen=True)
class XDeclare:
    blocks: tuple[tuple[Token, int], ...]


@dataclass(frozen=True)
class XAssign:
    target: Token
    expr: XExpr


@dataclass(frozen=True)
class XUniform:
    target: Token
    low: int
    high: int


@dataclass(frozen=True)
class XIf:
    cond: XExpr
    then_body: tuple
    else_body: tuple


@dataclass(frozen=True)
class XWhile:
    cond: XExpr
    body: tuple


@dataclass(frozen=True)
class XProgram:
    inputs: tuple[tuple[Token, int | None], ...]
    statements: tuple
    outputs: tuple


@v_args(inline=True)
class ExtendedBuilder(Transformer):
    def start(self, inputs, statements, outputs):
        return XProgram(tuple(inputs or ()), statements, tuple(outputs or ()))

    def input_list(self, *items):
        return list(items)

    def input_item(self, name, width):
        return (name, int(width) if width is not None else None)

    def output_list(self, *items):
        return list(items)

    def output_var(self, token):
        return token

    def output_literal(self, token):
        if str(token) not in ("0", "1"):
            raise ProgramSyntaxError(f"return literal must be 0 or 1, got {token}", token.line, token.column)
        return Const(str(token) == "1")

    def output_true(self):
        return TRUE

    def output_false(self):
        return FALSE

    def statements(self, *items):
        return tuple(items)

    def body(self, *items):
        return tuple(items)

    def skip(self):
        return Skip()

    def declare(self, *decls):
        return XDeclare(tuple(decls))

    def decl(self, name, width):
        return (name, int(width))

    def uniform(self, target, low, high):
        return XUniform(target, int(low), int(high))

    def assign(self, target, expr):
        return XAssign(target, expr)

    def if_(self, cond, then_body, else_body):
        return XIf(cond, then_body, else_body)

    def while_(self, cond, body):
        return XWhile(cond, body)

    def or_(self, left, right):
        return XBinary("||", left, right)

    def and_(self, left, right):
        return XBinary("&&", left, right)

    def not_(self, operand):
        return XUnary(operand)

    def compare(self, left, op, right):
        return XCompare(op, left, right)

    def add(self, left, right):
        return XBinary("+", left, right)

    def sub(self, left, right):
        return XBinary("-", left, right)

    def unsupported(self, left, op, right):
        kind = {"*": "multiplication", "/": "division", "%": "modulo"}[str(op)]
        raise DesugarError(f"{kind} is not supported on blocks", op.line, op.column)

    def true(self):
        return XBool(True)

    def false(self):
        return XBool(False)

    def coin(self):
        return XCoin()

    def name(self, token):
        return XName(token)

    def int(self, token):
        return XInt(token)


_EXTENDED_PARSER = Lark(EXTENDED_GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=True)


# ---------------------------------------------------------------------------
# Bit-level circuits
# ---------------------------------------------------------------------------

Bits = list[BExpr]  # least significant first


def constant_bits(value: int, width: int) -> Bits:
    return [TRUE if (value >> i) & 1 else FALSE for i in range(width)]


def resize(bits: Bits, width: int) -> Bits:
    return bits[:width] + [FALSE] * (width - len(bits))


def add_bits(left: Bits, right: Bits, width: int) -> Bits:
    a, b = resize(left, width), resize(right, width)
    carry: BExpr = FALSE
    out: Bits = []
    for x, y in zip(a, b):
        out.append(mk_xor(mk_xor(x, y), carry))
        carry = mk_or(mk_and(x, y), mk_and(mk_or(x, y), carry))
    return out


def sub_bits(left: Bits, right: Bits, width: int) -> Bits:
    a, b = resize(left, width), resize(right, width)
    borrow: BExpr = FALSE
    out: Bits = []
    for x, y in zip(a, b):
        out.append(mk_xor(mk_xor(x, y), borrow))
        borrow = mk_or(mk_and(mk_not(x), y), mk_and(mk_iff(x, y), borrow))
    return out


def less_than(left: Bits, right: Bits) -> BExpr:
    width = max(len(left), len(right))
    a, b = resize(left, width), resize(right, width)
    result: BExpr = FALSE
    for x, y in zip(a, b):
        # Scanning upward: a higher differing bit overrides everything below.
        result = mk_or(mk_and(mk_not(x), y), mk_and(mk_iff(x, y), result))
    return result


def equal(left: Bits, right: Bits) -> BExpr:
    width = max(len(left), len(right))
    return mk_all(mk_iff(x, y) for x, y in zip(resize(left, width), resize(right, width)))


def compare_bits(op: str, left: Bits, right: Bits) -> BExpr:
    if op == "<":
        return less_than(left, right)
    if op == ">":
        return less_than(right, left)
    if op == "<=":
        return mk_not(less_than(right, left))
    if op == ">=":
        return mk_not(less_than(left, right))
    if op == "==":
        return equal(left, right)
    return mk_not(equal(left, right))


def bit_name(block: str, index: int) -> str:
    return f"{block}__{index}"


# ---------------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------------


def _located(token: Token) -> tuple[int | None, int | None]:
    return getattr(token, "line", None), getattr(token, "column", None)


class Desugarer:
    """Lower one extended program; tracks declared block widths."""

    def __init__(self) -> None:
        self.blocks: dict[str, int] = {}
        self.booleans: dict[str, Token] = {}

    def declare(self, token: Token, width: int) -> None:
        name = str(token)
        if width < 1:
            raise DesugarError(f"block {name!r} needs a positive width", *_located(token))
        if name in self.blocks:
            raise DesugarError(f"block {name!r} declared twice", *_located(token))
        self.blocks[name] = width

    def block_bits(self, name: str) -> Bits:
        return [Var(bit_name(name, i)) for i in range(self.blocks[name])]

    # expressions -----------------------------------------------------------

    def natural_width(self, expr: XExpr) -> int:
        if isinstance(expr, XInt):
            return max(1, expr.value.bit_length())
        if isinstance(expr, XName):
            return self.blocks.get(str(expr.token), 1)
        if isinstance(expr, XBinary) and expr.op in ("+", "-"):
            widest = max(self.natural_width(expr.left), self.natural_width(expr.right))
            return widest + 1 if expr.op == "+" else widest
        raise self._type_error(expr, "integer")

    def integer(self, expr: XExpr) -> Bits:
        """Bits of an integer expression at its natural width."""
        if isinstance(expr, XInt):
            return constant_bits(expr.value, self.natural_width(expr))
        if isinstance(expr, XName):
            name = str(expr.token)
            if name in self.blocks:
                return self.block_bits(name)
            self.booleans.setdefault(name, expr.token)
            return [Var(name)]  # a boolean reads as a 1-bit integer
        if isinstance(expr, XBinary) and expr.op in ("+", "-"):
            width = self.natural_width(expr)
            left, right = self.integer(expr.left), self.integer(expr.right)
            return add_bits(left, right, width) if expr.op == "+" else sub_bits(left, right, width)
        raise self._type_error(expr, "integer")

    def boolean(self, expr: XExpr) -> BExpr:
        if isinstance(expr, XBool):
            return Const(expr.value)
        if isinstance(expr, XCoin):
            return Coin()
        if isinstance(expr, XName):
            name = str(expr.token)
            if name in self.blocks:
                raise DesugarError(f"block {name!r} used as a boolean; compare it instead", *_located(expr.token))
            self.booleans.setdefault(name, expr.token)
            return Var(name)
        if isinstance(expr, XUnary):
            return mk_not(self.boolean(expr.operand))
        if isinstance(expr, XBinary) and expr.op in ("&&", "||"):
            left, right = self.boolean(expr.left), self.boolean(expr.right)
            return mk_and(left, right) if expr.op == "&&" else mk_or(left, right)
        if isinstance(expr, XCompare):
            return compare_bits(str(expr.op), self.integer(expr.left), self.integer(expr.right))
        raise self._type_error(expr, "boolean")

    def _type_error(self, expr: XExpr, wanted: str) -> DesugarError:
        token = getattr(expr, "token", None) or getattr(expr, "op", None)
        line, column = _located(token) if isinstance(token, Token) else (None, None)
        return DesugarError(f"expected a {wanted} expression, got {type(expr).__name__[1:].lower()}", line, column)

    # statements ------------------------------------------------------------

    def statements(self, items) -> list[Cmd]:
        lowered: list[Cmd] = []
        for item in items:
            lowered.extend(self.statement(item))
        return lowered

    def body(self, items) -> tuple[Cmd, ...]:
        return tuple(self.statements(items)) or (Skip(),)

    def statement(self, item) -> list[Cmd]:
        if isinstance(item, Skip):
            return [item]
        if isinstance(item, XDeclare):
            for token, width in item.blocks:
                self.declare(token, width)
            return []
        if isinstance(item, XAssign):
            return self.assignment(item)
        if isinstance(item, XUniform):
            return self.uniform(item)
        if isinstance(item, XIf):
            return [If(self.boolean(item.cond), self.body(item.then_body), self.body(item.else_body))]
        if isinstance(item, XWhile):
            return [While(self.boolean(item.cond), self.body(item.body))]
        raise TypeError(f"unknown statement {item!r}")  # pragma: no cover

    def assignment(self, item: XAssign) -> list[Cmd]:
        name = str(item.target)
        if name not in self.blocks:
            self.booleans.setdefault(name, item.target)
            return [Assign(name, self.boolean(item.expr))]
        width = self.blocks[name]
        self._check_constants(item.expr, name, width)
        bits = resize(self.integer(item.expr), width)
        # High bits first: bit i of a sum or difference only reads bits <= i.
        return [Assign(bit_name(name, i), bits[i]) for i in reversed(range(width))]

    def _check_constants(self, expr: XExpr, name: str, width: int) -> None:
        """Reject constants anywhere in the right-hand side that the target block cannot hold."""
        if isinstance(expr, XInt) and expr.value > (1 << width) - 1:
            raise DesugarError(
                f"constant {expr.value} does not fit block {name!r} of width {width}", *_located(expr.token)
            )
        if isinstance(expr, XBinary) and expr.op in ("+", "-"):
            self._check_constants(expr.left, name, width)
            self._check_constants(expr.right, name, width)

    def uniform(self, item: XUniform) -> list[Cmd]:
        name = str(item.target)
        if name not in self.blocks:
            raise DesugarError(f"uniform target {name!r} is not a block", *_located(item.target))
        width = self.blocks[name]
        if item.high > (1 << width) - 1:
            raise DesugarError(
                f"uniform bound {item.high} does not fit block {name!r} of width {width}", *_located(item.target)
            )
        if item.low >= item.high:
            raise DesugarError(f"uniform range ({item.low}, {item.high}] is empty", *_located(item.target))
        value = self.block_bits(name)
        in_range = mk_and(
            less_than(constant_bits(item.low, width), value),
            mk_not(less_than(constant_bits(item.high, width), value)),
        )
        clear = [Assign(bit_name(name, i), FALSE) for i in reversed(range(width))]
        redraw = tuple(Assign(bit_name(name, i), Coin()) for i in reversed(range(width)))
        # Zero is outside (low, high], so the loop always draws at least once.
        return clear + [While(mk_not(in_range), redraw)]

    # program -------------------------------------------------------------

    def program(self, tree: XProgram) -> Program:
        inputs: list[str] = []
        seen: set[str] = set()
        for token, width in tree.inputs:
            name = str(token)
            if name in seen:
                raise DuplicateInputError(f"duplicate input variable {name!r}", *_located(token))
            seen.add(name)
            if width is None:
                self.booleans.setdefault(name, token)
                inputs.append(name)
            else:
                self.declare(token, width)
                inputs.extend(bit_name(name, i) for i in reversed(range(width)))
        body = self.statements(tree.statements)
        outputs: list[Var | Const] = []
        for item in tree.outputs:
            if isinstance(item, Const):
                outputs.append(item)
            elif str(item) in self.blocks:
                outputs.extend(Var(bit_name(str(item), i)) for i in reversed(range(self.blocks[str(item)])))
            else:
                outputs.append(Var(str(item)))
        generated = {bit_name(block, i) for block, width in self.blocks.items() for i in range(width)}
        for name, token in self.booleans.items():
            if name in generated:
                raise DesugarError(f"variable {name!r} collides with a block bit", *_located(token))
        return assemble_program(inputs, body, outputs)


def desugar(text: str) -> Program:
    """Parse extended source and lower it to a core Program."""
    try:
        tree = _EXTENDED_PARSER.parse(text)
    except (UnexpectedCharacters, UnexpectedToken, UnexpectedEOF) as exc:
        raise translate_lark_error(exc) from None
    extended = run_transformer(tree, ExtendedBuilder())
    desugarer = Desugarer()
    program = desugarer.program(extended)
    logger.info(
        "desugared program: blocks=%s lines=%s vars=%s", desugarer.blocks, program.line_count, len(program.all_vars)
    )
    return program


def load_program(path: str | Path) -> Program:
    """Load ``.bpw`` (core) or ``.bpwx`` (extended) source from disk."""
    text = read_source(path)
    if Path(path).suffix == ".bpwx":
        return desugar(text)
    return parse(text)
