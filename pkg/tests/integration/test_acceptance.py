"""Acceptance properties over random programs, the bundled corpus and the reductions.

Sweeps at full size are marked slow; each has a smaller unmarked sibling.
"""

import random
from fractions import Fraction

import pytest

from bpwhile.corpus import entry_program, list_entries, run_check
from bpwhile.desugar import desugar
from bpwhile.dist import Dist, output_distribution
from bpwhile.divergence import (
    YES,
    alpha_grid,
    cdp_to_approx_dp,
    log2_enclosure,
    rdp_to_approx_dp,
    renyi_divergence,
    tcdp_to_approx_dp,
)
from bpwhile.dpcheck import NeighborRelation, PrivacyParams, check_approx_dp, check_pure_dp, neighbor_pairs
from bpwhile.errors import InvalidParameterError
from bpwhile.mechanisms import geometric_mechanism_source
from bpwhile.qbf import evaluate_qbf
from bpwhile.reach import ast_check
from bpwhile.reductions import amplify, tqbf_to_bpwhile, wrap_approx, wrap_pure
from bpwhile.semantics import BOTTOM
from bpwhile.utils.rationals import parse_dyadic
from bpwhile.utils.workers import all_inputs
from tests.support import random_program, random_qbf, subset_violation

TWO_TO_MINUS_20 = Fraction(1, 1 << 20)


def corpus_programs():
    return [(entry.name, entry_program(entry)) for entry in list_entries() if entry.has_program]


def random_programs(count: int, seed: int = 1234, **kwargs):
    rng = random.Random(seed)
    return [random_program(rng, **kwargs) for _ in range(count)]


def check_mass_and_termination(programs, limits):
    for prog in programs:
        bottoms = []
        for bits in all_inputs(prog.input_length):
            dist = output_distribution(prog, bits, limits)
            assert dist.total() == 1
            bottoms.append(dist.bottom)
        assert ast_check(prog, limits).terminates == all(b == 0 for b in bottoms)


class TestGeometricBoundary:
    def test_pure_privacy_is_exactly_five_quarters(self, limits):
        prog = desugar(geometric_mechanism_source(2, 2))
        nb = NeighborRelation.parse("int-adj:c", prog)
        assert check_pure_dp(prog, Fraction(5, 4), nb, limits=limits).private
        assert not check_pure_dp(prog, Fraction(5, 4) - TWO_TO_MINUS_20, nb, limits=limits).private


class TestRandomizedResponseBoundary:
    def test_accepted_at_three_rejected_just_below(self, p_rr, limits):
        assert check_pure_dp(p_rr, Fraction(3), limits=limits).private
        verdict = check_pure_dp(p_rr, 3 - TWO_TO_MINUS_20, limits=limits)
        assert not verdict.private
        witness = verdict.witness
        assert (witness.input_bits, witness.neighbor_bits, witness.outcomes) == ("0", "1", ("0",))

    def test_witness_revalidates(self, p_rr, limits):
        e_eps = 3 - TWO_TO_MINUS_20
        witness = check_pure_dp(p_rr, e_eps, limits=limits).witness
        p = output_distribution(p_rr, witness.input_bits, limits).get(witness.outcomes[0])
        q = output_distribution(p_rr, witness.neighbor_bits, limits).get(witness.outcomes[0])
        assert p == witness.lhs
        assert p > e_eps * q


class TestMassConservationAndTermination:
    def test_corpus(self, limits):
        check_mass_and_termination([prog for _, prog in corpus_programs()], limits)

    def test_random_programs(self, limits):
        check_mass_and_termination(random_programs(25), limits)

    @pytest.mark.slow
    def test_random_programs_full(self, limits):
        check_mass_and_termination(random_programs(200, seed=2), limits)


def compare_with_subsets(count: int, seed: int, limits):
    rng = random.Random(seed)
    for prog in random_programs(count, seed=seed, max_vars=5, max_lines=10, max_outputs=3):
        dists = {bits: output_distribution(prog, bits, limits) for bits in all_inputs(prog.input_length)}
        pairs = list(neighbor_pairs(prog.input_length, NeighborRelation.hamming1()))
        for _ in range(5):
            params = PrivacyParams(Fraction(rng.randint(2, 16), 4), Fraction(rng.randint(0, 8), 16))
            expected = not any(subset_violation(dists[x], dists[y], params.e_eps, params.delta) for x, y in pairs)
            assert check_approx_dp(prog, params, limits=limits).private == expected


class TestPointwiseMatchesSubsets:
    def test_random_programs(self, limits):
        compare_with_subsets(10, 41, limits)

    @pytest.mark.slow
    def test_random_programs_full(self, limits):
        compare_with_subsets(50, 42, limits)


def random_full_support_pair(rng: random.Random) -> tuple[Dist, Dist]:
    def one(size: int) -> Dist:
        weights = [rng.randint(1, 8) for _ in range(size)]
        total = 1 << (sum(weights).bit_length())
        masses = {format(i, "02b"): Fraction(w, total) for i, w in enumerate(weights)}
        masses[BOTTOM] = 1 - sum(masses.values())
        return Dist.from_mapping(masses)

    size = rng.randint(2, 4)
    return one(size), one(size)


class TestRenyiExactness:
    def test_randomized_response_pair(self):
        p_dist = Dist.from_mapping({"0": Fraction(3, 4), "1": Fraction(1, 4)})
        q_dist = Dist.from_mapping({"0": Fraction(1, 4), "1": Fraction(3, 4)})
        interval = renyi_divergence(p_dist, q_dist, Fraction(2), 64)
        assert interval.width <= Fraction(1, 1 << 40)
        assert (interval.lower, interval.upper) == log2_enclosure(Fraction(7, 3), 64)

    def test_integer_orders_match_exact_sums(self):
        rng = random.Random(6)
        for _ in range(20):
            p_dist, q_dist = random_full_support_pair(rng)
            alpha = rng.randint(2, 5)
            exact = sum(
                (p_dist.get(o) ** alpha / q_dist.get(o) ** (alpha - 1) for o in p_dist.support()),
                Fraction(0),
            )
            lower, upper = log2_enclosure(exact, 64)
            interval = renyi_divergence(p_dist, q_dist, Fraction(alpha), 64)
            assert (interval.lower, interval.upper) == (lower / (alpha - 1), upper / (alpha - 1))

    def test_enclosures_grow_with_the_order(self):
        rng = random.Random(8)
        for _ in range(20):
            p_dist, q_dist = random_full_support_pair(rng)
            grid = alpha_grid(Fraction(1, 2), 1, 5)
            intervals = [renyi_divergence(p_dist, q_dist, alpha, 64) for alpha in grid]
            slack = 2 * Fraction(1, 1 << 64)
            for smaller, larger in zip(intervals, intervals[1:]):
                assert larger.upper + slack >= smaller.lower


def check_reductions(programs, limits):
    delta = Fraction(1, 4)
    for prog in programs:
        terminates = ast_check(prog, limits).terminates
        assert check_pure_dp(wrap_pure(prog), Fraction(1), limits=limits).private == terminates
        wrapped = wrap_approx(prog, delta)
        assert check_approx_dp(wrapped, PrivacyParams(Fraction(1), delta), limits=limits).private == terminates


class TestReductionSoundness:
    def test_random_programs(self, limits):
        check_reductions(random_programs(6, seed=5, max_vars=3, max_lines=6, max_inputs=1), limits)

    @pytest.mark.slow
    def test_random_programs_full(self, limits):
        check_reductions(random_programs(50, seed=9, max_vars=4, max_lines=8, max_inputs=1), limits)

    def test_amplified_halting_probability(self, c_half, limits):
        q = Fraction(1, 4)
        halting = 1 - output_distribution(amplify(c_half, 1), "0", limits).bottom
        assert halting < Fraction(1, 2)
        assert halting <= (1 - q) / (2 - q)


class TestQBFOracle:
    @pytest.mark.slow
    def test_thirty_random_formulas(self, limits):
        """Full sweep; test_reductions.py keeps a twelve-formula sample in the default run."""
        rng = random.Random(77)
        for _ in range(30):
            formula = random_qbf(rng, max_vars=3)
            assert ast_check(tqbf_to_bpwhile(formula), limits).terminates == evaluate_qbf(formula)


def implied_e_eps(check: dict, delta: Fraction) -> Fraction | None:
    rho = parse_dyadic(str(check["rho"]))
    if check["check"] == "rdp":
        return rdp_to_approx_dp(parse_dyadic(str(check["alpha"])), rho, delta)
    if check["check"] == "cdp":
        return cdp_to_approx_dp(rho, delta)
    try:
        return tcdp_to_approx_dp(rho, parse_dyadic(str(check["omega"])), delta)
    except InvalidParameterError:
        return None


class TestImplicationConsistency:
    def test_gap_yes_verdicts_imply_approximate_privacy(self, limits):
        delta = Fraction(1, 4)
        checked = 0
        for entry in list_entries():
            if not entry.has_program:
                continue
            prog = entry_program(entry)
            for check in entry.checks:
                if check["check"] not in ("rdp", "cdp", "tcdp"):
                    continue
                if run_check(prog, check, limits).record.decision != YES:
                    continue
                e_eps = implied_e_eps(check, delta)
                if e_eps is None:
                    continue
                assert check_approx_dp(prog, PrivacyParams(e_eps, delta), limits=limits).private, (entry.name, check)
                checked += 1
        assert checked >= 2
