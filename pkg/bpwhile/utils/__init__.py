"""Utility helpers for configuration, logging, paths and rationals."""

from .config import VerifierLimits, corpus_directory, get_directory_from_env, get_int_from_env, get_log_level, load_limits
from .logging_utils import configure_json_logging
from .path_utils import read_source, verify_path_exists
from .rationals import (
    decimal_approximation,
    dyadic_exponent,
    format_rational,
    is_dyadic,
    parse_dyadic,
    parse_rational,
)

__all__ = [
    "VerifierLimits",
    "configure_json_logging",
    "corpus_directory",
    "decimal_approximation",
    "dyadic_exponent",
    "format_rational",
    "get_directory_from_env",
    "get_int_from_env",
    "get_log_level",
    "is_dyadic",
    "load_limits",
    "parse_dyadic",
    "parse_rational",
    "read_source",
    "verify_path_exists",
]
