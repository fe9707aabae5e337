"""Prenex quantified boolean formulas: parsing and brute-force evaluation.

Text format: ``A x1 E x2 : (x1 & x2) | (!x1 & !x2)``. ``A``/``∀`` is
universal and ``E``/``∃`` existential. The matrix uses ``!``, ``&``, ``|``
(``&&`` and ``||`` are accepted too), parentheses, ``true`` and ``false``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedToken

from .errors import QBFError
from .parser import run_transformer, translate_lark_error
from .syntax import FALSE, TRUE, And, BExpr, Const, Not, Or, Var, expr_vars, format_expr

logger = logging.getLogger("bpwhile.qbf")

FORALL = "A"
EXISTS = "E"

QBF_GRAMMAR = r"""
    start: quantifier+ ":" expr

    quantifier: QUANT NAME

    ?expr: expr ("|" | "||") conj -> or_
         | conj
    ?conj: conj ("&" | "&&") unary -> and_
         | unary
    ?unary: "!" unary -> not_
          | atom
    ?atom: "true" -> true
         | "false" -> false
         | NAME -> var
         | "(" expr ")"

    QUANT: /[AE∀∃]/
    NAME: /[A-Za-z_][A-Za-z0-9_]*/

    %import common.WS
    %ignore WS
"""

_SYMBOLS = {"∀": FORALL, "∃": EXISTS}


@dataclass(frozen=True)
class QBF:
    prefix: tuple[tuple[str, str], ...]
    matrix: BExpr

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(name for _, name in self.prefix)

    def __str__(self) -> str:
        quantifiers = " ".join(f"{kind} {name}" for kind, name in self.prefix)
        return f"{quantifiers} : {format_expr(self.matrix)}"


@v_args(inline=True)
class QBFBuilder(Transformer):
    def start(self, *items):
        *prefix, matrix = items
        return build_qbf(prefix, matrix)

    def quantifier(self, kind: Token, name: Token):
        return _SYMBOLS.get(str(kind), str(kind)), name

    def or_(self, left, right):
        return Or(left, right)

    def and_(self, left, right):
        return And(left, right)

    def not_(self, operand):
        return Not(operand)

    def true(self):
        return TRUE

    def false(self):
        return FALSE

    def var(self, token):
        return Var(str(token))


def build_qbf(prefix, matrix: BExpr) -> QBF:
    """Check that the formula is closed and no variable is bound twice."""
    bound: set[str] = set()
    ordered: list[tuple[str, str]] = []
    for kind, token in prefix:
        name = str(token)
        if name in bound:
            raise QBFError(f"variable {name!r} quantified twice", getattr(token, "line", None), getattr(token, "column", None))
        bound.add(name)
        ordered.append((kind, name))
    free = sorted(set(expr_vars(matrix)) - bound)
    if free:
        raise QBFError(f"open formula: unquantified variables {', '.join(free)}")
    return QBF(tuple(ordered), matrix)


_QBF_PARSER = Lark(QBF_GRAMMAR, parser="lalr", propagate_positions=True)


def parse_qbf(text: str) -> QBF:
    try:
        tree = _QBF_PARSER.parse(text)
    except (UnexpectedCharacters, UnexpectedToken, UnexpectedEOF) as exc:
        raise translate_lark_error(exc, QBFError) from None
    formula = run_transformer(tree, QBFBuilder())
    logger.debug("parsed qbf with %s quantifiers", len(formula.prefix))
    return formula


def evaluate_matrix(expr: BExpr, assignment: Mapping[str, bool]) -> bool:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return assignment[expr.name]
    if isinstance(expr, Not):
        return not evaluate_matrix(expr.operand, assignment)
    if isinstance(expr, And):
        return evaluate_matrix(expr.left, assignment) and evaluate_matrix(expr.right, assignment)
    if isinstance(expr, Or):
        return evaluate_matrix(expr.left, assignment) or evaluate_matrix(expr.right, assignment)
    raise QBFError(f"unsupported matrix node {type(expr).__name__}")


def evaluate_qbf(formula: QBF) -> bool:
    """Truth value by trying both values of every quantified variable."""

    def solve(depth: int, assignment: dict[str, bool]) -> bool:
        if depth == len(formula.prefix):
            return evaluate_matrix(formula.matrix, assignment)
        kind, name = formula.prefix[depth]
        branches = (solve(depth + 1, {**assignment, name: value}) for value in (False, True))
        return all(branches) if kind == FORALL else any(branches)

    return solve(0, {})
