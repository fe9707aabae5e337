"""Unit tests for bpwhile.mechanisms."""

from fractions import Fraction

import pytest

from bpwhile.desugar import desugar
from bpwhile.dist import output_distribution
from bpwhile.dpcheck import NOT_PRIVATE, PRIVATE, NeighborRelation, check_pure_dp
from bpwhile.errors import InvalidParameterError
from bpwhile.mechanisms import (
    geometric_mechanism_distribution,
    geometric_mechanism_source,
    geometric_privacy,
    k_for_epsilon,
    randomized_response_source,
)
from bpwhile.parser import parse
from bpwhile.reach import ast_check


@pytest.fixture(scope="module")
def geometric():
    return desugar(geometric_mechanism_source(2, 2))


class TestKForEpsilon:
    @pytest.mark.parametrize("eps, k", [(Fraction(1), 1), (Fraction(1, 2), 2), (Fraction(1, 3), 3), (Fraction(3), 0)])
    def test_values(self, eps, k):
        assert k_for_epsilon(eps) == k

    def test_nonpositive(self):
        with pytest.raises(InvalidParameterError):
            k_for_epsilon(Fraction(0))

    def test_achieved_privacy(self):
        assert geometric_privacy(2) == Fraction(5, 4)


class TestGeometricDistribution:
    @pytest.mark.parametrize(
        "count, masses",
        [
            (0, (25, 4, 16)),
            (1, (20, 5, 20)),
            (2, (16, 4, 25)),
            (3, (16, 4, 25)),
        ],
    )
    def test_closed_form(self, count, masses):
        dist = geometric_mechanism_distribution(2, 2, count)
        assert [dist.get(label) for label in ("00", "01", "10")] == [Fraction(m, 45) for m in masses]
        assert dist.total() == 1

    @pytest.mark.parametrize("bits", ["00", "01", "10", "11"])
    def test_program_matches_closed_form(self, geometric, bits, limits):
        assert output_distribution(geometric, bits, limits) == geometric_mechanism_distribution(2, 2, int(bits, 2))

    def test_terminates(self, geometric, limits):
        assert ast_check(geometric, limits).terminates

    def test_privacy_is_exactly_one_plus_two_to_minus_k(self, geometric, limits):
        nb = NeighborRelation.parse("int-adj:c", geometric)
        assert check_pure_dp(geometric, Fraction(5, 4), nb, limits=limits).decision == PRIVATE
        assert check_pure_dp(geometric, Fraction(1310719, 1048576), nb, limits=limits).decision == NOT_PRIVATE

    @pytest.mark.parametrize("n, k, count", [(0, 1, 0), (2, -1, 0), (2, 1, -1)])
    def test_invalid_arguments(self, n, k, count):
        with pytest.raises(InvalidParameterError):
            geometric_mechanism_distribution(n, k, count)

    def test_single_count(self, limits):
        prog = desugar(geometric_mechanism_source(1, 1))
        for bits in ("0", "1"):
            assert output_distribution(prog, bits, limits) == geometric_mechanism_distribution(1, 1, int(bits, 2))


def test_randomized_response_flips_with_probability_a_quarter(limits):
    dist = output_distribution(parse(randomized_response_source()), "1", limits)
    assert dist.get("0") == Fraction(1, 4)
