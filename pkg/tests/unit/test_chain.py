"""Unit tests for bpwhile.chain."""

import random
from fractions import Fraction

import pytest

from bpwhile.chain import CopyState, EdgeOracle, build_chain, dump_chain, normalize_chain, states_reaching_finals, zero_recurrent
from bpwhile.errors import ResourceBudgetExceeded
from bpwhile.semantics import HALF, ONE, ProgState
from bpwhile.utils.config import VerifierLimits
from tests.support import random_program


class TestBuildChain:
    def test_coin_chain_is_indexed_in_sorted_order(self, p_coin, limits):
        chain = build_chain(p_coin, "0", limits)
        assert chain.states == (ProgState(0, 0), ProgState(0, 1), ProgState(1, 0))
        assert chain.start == 2
        assert chain.finals == {0: "0", 1: "1"}
        assert chain.edges[2] == ((0, HALF), (1, HALF))

    def test_finals_carry_a_self_loop(self, p_coin, limits):
        chain = build_chain(p_coin, "0", limits)
        for index in chain.finals:
            assert chain.edges[index] == ((index, ONE),)

    def test_every_row_is_stochastic(self, p_rr, limits):
        chain = build_chain(p_rr, "1", limits)
        assert all(chain.outgoing_mass(index) == 1 for index in range(len(chain)))

    def test_loop_without_finals(self, p_loop, limits):
        chain = build_chain(p_loop, "0", limits)
        assert len(chain) == 2
        assert chain.finals == {}

    def test_rebuilding_gives_identical_indexing(self, p_rr, limits):
        first, second = build_chain(p_rr, "0", limits), build_chain(p_rr, "0", limits)
        assert first.states == second.states
        assert first.edges == second.edges

    def test_state_budget(self, p_rr):
        with pytest.raises(ResourceBudgetExceeded) as excinfo:
            build_chain(p_rr, "0", VerifierLimits(max_states=2))
        assert excinfo.value.resource == "states"
        assert excinfo.value.exit_code == 4


class TestNormalizeChain:
    def test_unreferenced_start_keeps_one_copy(self, p_coin, limits):
        chain = normalize_chain(build_chain(p_coin, "0", limits))
        assert len(chain) == 5
        assert chain.states[chain.start] == CopyState(ProgState(1, 0), 1)

    def test_only_half_edges_leave_non_finals(self, p_rr, limits):
        chain = normalize_chain(build_chain(p_rr, "0", limits))
        for index, out in enumerate(chain.edges):
            if chain.is_final(index):
                assert out == ((index, ONE),)
            else:
                assert [p for _, p in out] == [HALF, HALF]

    def test_deterministic_edge_splits_across_both_copies(self, p_id, limits):
        chain = normalize_chain(build_chain(p_id, "1", limits))
        targets = [chain.states[target] for target, _ in chain.edges[chain.start]]
        assert targets == [CopyState(ProgState(0, 1), 1), CopyState(ProgState(0, 1), 2)]

    def test_loop_back_to_start_duplicates_it(self, p_loop, limits):
        chain = normalize_chain(build_chain(p_loop, "0", limits))
        assert len(chain) == 4


class TestZeroRecurrent:
    def test_trapped_states_lose_their_edges(self, p_trap, limits):
        chain = build_chain(p_trap, "0", limits)
        assert chain.states[3] == ProgState(2, 1)
        live = states_reaching_finals(chain)
        assert live == frozenset({0, 1, 2, 6})
        zeroed = zero_recurrent(chain)
        assert zeroed.recurrent_zeroed
        assert zeroed.edges[1] == ((2, HALF),)
        assert all(zeroed.edges[index] == () for index in (3, 4, 5))

    def test_live_chain_is_unchanged(self, p_coin, limits):
        chain = build_chain(p_coin, "0", limits)
        assert zero_recurrent(chain).edges == chain.edges


class TestEdgeOracle:
    def test_probability_matches_the_chain(self, p_trap):
        oracle = EdgeOracle(p_trap, "0")
        assert oracle.probability(ProgState(1, 0), ProgState(2, 1)) == HALF
        assert oracle.probability(ProgState(1, 0), ProgState(5, 0)) == Fraction(0)

    def test_zeroed_oracle_drops_edges_into_traps(self, p_trap):
        oracle = zero_recurrent(EdgeOracle(p_trap, "0"))
        assert isinstance(oracle, EdgeOracle)
        assert not oracle.can_reach_final(ProgState(3, 1))
        assert oracle.probability(ProgState(1, 0), ProgState(2, 1)) == Fraction(0)
        assert oracle.probability(ProgState(1, 0), ProgState(2, 0)) == HALF
        assert oracle.successors(ProgState(4, 1)) == []

    def test_streams_the_same_states(self, p_rr, limits):
        chain = build_chain(p_rr, "1", limits)
        assert sorted(EdgeOracle(p_rr, "1").reachable_states()) == list(chain.states)

    @pytest.mark.parametrize("zeroed", [False, True])
    def test_agrees_with_the_chain_on_random_programs(self, zeroed, limits):
        rng = random.Random(4242 + zeroed)
        for _ in range(100):
            prog = random_program(rng, max_vars=3, max_lines=6)
            inputs = "".join(rng.choice("01") for _ in range(prog.input_length))
            chain, oracle = build_chain(prog, inputs, limits), EdgeOracle(prog, inputs)
            if zeroed:
                chain, oracle = zero_recurrent(chain), zero_recurrent(oracle)
            for source, u in enumerate(chain.states):
                masses = dict(chain.edges[source])
                for target, w in enumerate(chain.states):
                    assert oracle.probability(u, w) == masses.get(target, 0), (prog, inputs, u, w)


def test_dump_chain(p_coin, limits):
    text = dump_chain(build_chain(p_coin, "0", limits))
    assert text.splitlines() == [
        "1 2 1 3",
        "F:0 F:0 1/1",
        "F:1 F:1 1/1",
        "1:0 F:0 1/2",
        "1:0 F:1 1/2",
    ]
