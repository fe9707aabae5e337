"""Exact privacy and termination verifier for boolean probabilistic while programs."""

__version__ = "0.1.0"

from .chain import Chain, EdgeOracle, build_chain, dump_chain, normalize_chain, zero_recurrent
from .corpus import corpus_run, list_entries
from .desugar import desugar, load_program
from .dist import (
    Dist,
    conditional_distribution,
    exhaustive_distribution,
    hitting_probabilities,
    output_distribution,
    output_distributions,
)
from .divergence import (
    BinInterval,
    GapParams,
    GapVerdict,
    alpha_grid,
    cdp_to_approx_dp,
    check_gap_cdp,
    check_gap_rdp,
    check_gap_tcdp,
    rdp_to_approx_dp,
    renyi_divergence,
    tcdp_to_approx_dp,
)
from .dpcheck import DPVerdict, NeighborRelation, PrivacyParams, check_approx_dp, check_pure_dp, neighbor_pairs
from .errors import ResourceBudgetExceeded, VerifierError
from .mechanisms import geometric_mechanism_distribution, geometric_mechanism_source, k_for_epsilon
from .parser import parse
from .qbf import QBF, evaluate_qbf, parse_qbf
from .reach import ASTVerdict, ast_check, can_reach_final
from .reductions import amplify, delta_rand, tqbf_to_bpwhile, wrap_approx, wrap_distinguish, wrap_pure
from .semantics import BOTTOM, Machine, ProgState, run_sample, run_with_coins, transitions
from .syntax import Program, pretty_print, program_size

__all__ = [
    "ASTVerdict",
    "BOTTOM",
    "BinInterval",
    "Chain",
    "DPVerdict",
    "Dist",
    "EdgeOracle",
    "GapParams",
    "GapVerdict",
    "Machine",
    "NeighborRelation",
    "PrivacyParams",
    "ProgState",
    "Program",
    "QBF",
    "ResourceBudgetExceeded",
    "VerifierError",
    "__version__",
    "alpha_grid",
    "amplify",
    "ast_check",
    "build_chain",
    "can_reach_final",
    "cdp_to_approx_dp",
    "check_approx_dp",
    "check_gap_cdp",
    "check_gap_rdp",
    "check_gap_tcdp",
    "check_pure_dp",
    "conditional_distribution",
    "corpus_run",
    "delta_rand",
    "desugar",
    "dump_chain",
    "evaluate_qbf",
    "exhaustive_distribution",
    "geometric_mechanism_distribution",
    "geometric_mechanism_source",
    "hitting_probabilities",
    "k_for_epsilon",
    "list_entries",
    "load_program",
    "neighbor_pairs",
    "normalize_chain",
    "output_distribution",
    "output_distributions",
    "parse",
    "parse_qbf",
    "pretty_print",
    "program_size",
    "rdp_to_approx_dp",
    "renyi_divergence",
    "run_sample",
    "run_with_coins",
    "tcdp_to_approx_dp",
    "tqbf_to_bpwhile",
    "transitions",
    "wrap_approx",
    "wrap_distinguish",
    "wrap_pure",
    "zero_recurrent",
]
