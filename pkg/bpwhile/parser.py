"""Parser for core BPWhile source (``.bpw``)."""

from __future__ import annotations

import logging

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from .errors import DuplicateInputError, LexicalError, ProgramSyntaxError, SourceError
from .syntax import FALSE, TRUE, And, Assign, Coin, Const, If, Not, Or, Program, Skip, Var, While, assemble_program

logger = logging.getLogger("bpwhile.parser")

CORE_GRAMMAR = r"""
    start: "input" "(" [name_list] ")" ";" statements "return" "(" [output_list] ")" ";"?

    statements: (statement ";")*

    name_list: NAME ("," NAME)*
    output_list: output ("," output)*
    ?output: NAME -> output_var
           | INT -> output_literal
           | "true" -> output_true
           | "false" -> output_false

    ?statement: "skip" -> skip
              | NAME ":=" expr -> assign
              | "if" expr "then" body "else" body -> if_
              | "while" expr "then" body -> while_

    body: statement
        | "{" statement (";" statement)* ";"? "}"
        | "(" statement (";" statement)* ";"? ")"

    ?expr: expr "||" conj -> or_
         | conj
    ?conj: conj "&&" unary -> and_
         | unary
    ?unary: "!" unary -> not_
          | atom
    ?atom: "true" -> true
         | "false" -> false
         | "random" -> coin
         | NAME -> var
         | "(" expr ")"

    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    INT: /[0-9]+/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_KEYWORD_HINTS = {
    "INPUT": "missing input(...) declaration",
    "RETURN": "missing return(...) statement",
}


def _position(value: object) -> int | None:
    return value if isinstance(value, int) and value > 0 else None


def translate_lark_error(exc: UnexpectedInput, kind: type[SourceError] = ProgramSyntaxError) -> SourceError:
    """Turn a lark failure into one of our located source errors."""
    line, column = _position(getattr(exc, "line", None)), _position(getattr(exc, "column", None))
    if isinstance(exc, UnexpectedCharacters):
        return LexicalError(f"unexpected character {exc.char!r}", line, column)
    expected = sorted(getattr(exc, "expected", ()) or ())
    if isinstance(exc, UnexpectedToken):
        found = "end of input" if exc.token.type == "$END" else repr(str(exc.token))
    else:
        found = "end of input"
    for terminal, hint in _KEYWORD_HINTS.items():
        if expected == [terminal]:
            return kind(f"{hint}, found {found}", line, column)
    listed = ", ".join(expected[:8]) or "nothing"
    return kind(f"unexpected {found}, expected one of: {listed}", line, column)


@v_args(inline=True)
class CoreBuilder(Transformer):
    """Build syntax objects from the core parse tree."""

    def start(self, names, statements, outputs):
        name_tokens = list(names or [])
        seen: dict[str, Token] = {}
        for token in name_tokens:
            if str(token) in seen:
                raise DuplicateInputError(f"duplicate input variable {str(token)!r}", token.line, token.column)
            seen[str(token)] = token
        return assemble_program([str(token) for token in name_tokens], statements, list(outputs or []))

    def name_list(self, *names):
        return list(names)

    def output_list(self, *items):
        return list(items)

    def statements(self, *commands):
        return tuple(commands)

    def body(self, *commands):
        return tuple(commands)

    def output_var(self, token):
        return Var(str(token))

    def output_literal(self, token):
        if str(token) not in ("0", "1"):
            raise ProgramSyntaxError(f"return literal must be 0 or 1, got {token}", token.line, token.column)
        return Const(str(token) == "1")

    def output_true(self):
        return TRUE

    def output_false(self):
        return FALSE

    def skip(self):
        return Skip()

    def assign(self, target, expr):
        return Assign(str(target), expr)

    def if_(self, cond, then_body, else_body):
        return If(cond, then_body, else_body)

    def while_(self, cond, body):
        return While(cond, body)

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

    def coin(self):
        return Coin()

    def var(self, token):
        return Var(str(token))


_CORE_PARSER = Lark(CORE_GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=True)


def run_transformer(tree, transformer: Transformer):
    try:
        return transformer.transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, SourceError):
            raise exc.orig_exc from None
        raise


def parse(text: str) -> Program:
    """Parse core source into a line-numbered Program."""
    try:
        tree = _CORE_PARSER.parse(text)
    except (UnexpectedCharacters, UnexpectedToken, UnexpectedEOF) as exc:
        raise translate_lark_error(exc) from None
    program = run_transformer(tree, CoreBuilder())
    logger.debug("parsed program: inputs=%s lines=%s vars=%s", program.input_vars, program.line_count, len(program.all_vars))
    return program
