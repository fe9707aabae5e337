"""Unit tests for bpwhile.qbf."""

import random

import pytest

from bpwhile.errors import QBFError
from bpwhile.qbf import EXISTS, FORALL, evaluate_matrix, evaluate_qbf, parse_qbf
from bpwhile.syntax import And, Not, Var
from tests.support import random_qbf


class TestParseQBF:
    def test_prefix_and_matrix(self):
        formula = parse_qbf("A x E y : x & !y")
        assert formula.prefix == ((FORALL, "x"), (EXISTS, "y"))
        assert formula.matrix == And(Var("x"), Not(Var("y")))
        assert formula.variables == ("x", "y")

    def test_unicode_quantifiers_and_double_operators(self):
        assert parse_qbf("∀ x ∃ y : x || !y") == parse_qbf("A x E y : x | !y")

    def test_printed_form_parses_back(self):
        rng = random.Random(5)
        for _ in range(20):
            formula = random_qbf(rng)
            assert parse_qbf(str(formula)) == formula

    def test_variable_bound_twice(self):
        with pytest.raises(QBFError, match="quantified twice"):
            parse_qbf("A x E x : x")

    def test_open_formula(self):
        with pytest.raises(QBFError, match="unquantified variables y"):
            parse_qbf("A x : x & y")

    @pytest.mark.parametrize("text", ["x : x", "A x x", "A x : (x", "A x : x $ x"])
    def test_syntax_errors(self, text):
        with pytest.raises(QBFError):
            parse_qbf(text)


class TestEvaluate:
    @pytest.mark.parametrize(
        "text, truth",
        [
            ("E x : x", True),
            ("A x : x", False),
            ("A x E y : (x | y) & (!x | !y)", True),
            ("E x A y : (x | y) & (!x | !y)", False),
            ("A x A y : x | !x", True),
            ("E x : false", False),
        ],
    )
    def test_truth_values(self, text, truth):
        assert evaluate_qbf(parse_qbf(text)) is truth

    def test_matrix_under_assignment(self):
        matrix = parse_qbf("A a A b : a & !b").matrix
        assert evaluate_matrix(matrix, {"a": True, "b": False})
        assert not evaluate_matrix(matrix, {"a": True, "b": True})
