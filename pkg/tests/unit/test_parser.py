"""Unit tests for bpwhile.parser."""

import pytest

from bpwhile.errors import DuplicateInputError, LexicalError, ProgramSyntaxError, SourceError
from bpwhile.parser import parse
from bpwhile.syntax import Assign, Coin, Const, Skip, Var, While


class TestParseExamples:
    def test_identity(self, p_id):
        assert p_id.input_vars == ("x",)
        assert p_id.input_length == 1 and p_id.output_length == 1
        assert p_id.body == (Skip(line=1),)

    def test_coin(self, p_coin):
        assert p_coin.all_vars == ("x", "y")
        assert p_coin.body == (Assign("y", Coin(), line=1),)

    def test_loop_parses(self, p_loop):
        (loop,) = p_loop.body
        assert isinstance(loop, While)
        assert loop.cond == Const(True)
        assert loop.body == (Skip(line=2),)

    def test_comments_and_trailing_semicolon(self):
        prog = parse("# header\ninput(x); # the input\nskip;\nreturn(x);")
        assert prog.line_count == 1

    def test_literal_outputs(self):
        prog = parse("input(); return(1, 0, true)")
        assert prog.outputs == (Const(True), Const(False), Const(True))
        assert prog.input_length == 0


class TestParseErrors:
    def test_unexpected_character_is_lexical(self):
        with pytest.raises(LexicalError) as info:
            parse("input(x);\ny := x $ x;\nreturn(y)")
        assert info.value.line == 2
        assert info.value.column is not None

    def test_missing_return(self):
        with pytest.raises(ProgramSyntaxError):
            parse("input(x); skip;")

    def test_missing_semicolon_reports_location(self):
        with pytest.raises(ProgramSyntaxError) as info:
            parse("input(x);\nskip\nskip;\nreturn(x)")
        assert info.value.line == 3

    def test_duplicate_input(self):
        with pytest.raises(DuplicateInputError) as info:
            parse("input(x, y, x); return(x)")
        assert "x" in str(info.value)

    def test_return_literal_must_be_a_bit(self):
        with pytest.raises(ProgramSyntaxError):
            parse("input(x); return(2)")

    def test_all_errors_share_the_source_base(self):
        with pytest.raises(SourceError):
            parse("")

    def test_reads_of_unassigned_variables_default_to_false(self):
        prog = parse("input(x); y := z; return(y)")
        assert prog.all_vars == ("x", "y", "z")
        assert prog.body == (Assign("y", Var("z"), line=1),)
