"""Configuration helpers for verifier budgets and shared paths."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from ..errors import InvalidParameterError

REPO_ROOT = Path(__file__).resolve().parents[2]


@dataclass(frozen=True)
class VerifierLimits:
    """Resource budgets. Exceeding any of them is an error, never a truncated answer."""

    max_states: int = 2_000_000
    max_precision_bits: int = 1 << 20
    max_alpha_grid: int = 4096
    jobs: int = 1
    dense_solver_limit: int = 48


def get_int_from_env(env_name: str, default: int, minimum: int = 1) -> int:
    """Return a positive integer setting from env, falling back to the default."""
    raw = os.environ.get(env_name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw, 0)
    except ValueError as exc:
        raise InvalidParameterError(f"{env_name} must be an integer, got {raw!r}") from exc
    if value < minimum:
        raise InvalidParameterError(f"{env_name} must be at least {minimum}, got {value}")
    return value


def get_directory_from_env(env_name: str, default_path: str | Path, create: bool = False) -> Path:
    """Return a directory path from env, optionally ensuring it exists."""
    configured = os.environ.get(env_name, "").strip() or str(default_path)
    directory = Path(configured)
    if create:
        directory.mkdir(parents=True, exist_ok=True)
    return directory


def get_log_level(default: str = "WARNING") -> str:
    return os.environ.get("BPW_LOG_LEVEL", "").strip().upper() or default


def load_limits() -> VerifierLimits:
    """Build budgets from ``BPW_*`` environment variables."""
    defaults = VerifierLimits()
    return VerifierLimits(
        max_states=get_int_from_env("BPW_MAX_STATES", defaults.max_states),
        max_precision_bits=get_int_from_env("BPW_MAX_PRECISION_BITS", defaults.max_precision_bits, minimum=64),
        max_alpha_grid=get_int_from_env("BPW_MAX_ALPHA_GRID", defaults.max_alpha_grid),
        jobs=get_int_from_env("BPW_JOBS", defaults.jobs),
        dense_solver_limit=get_int_from_env("BPW_DENSE_SOLVER_LIMIT", defaults.dense_solver_limit, minimum=0),
    )


def corpus_directory() -> Path:
    return get_directory_from_env("BPW_CORPUS_DIR", REPO_ROOT / "corpus")
