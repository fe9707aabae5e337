"""Shared fixtures: the small reference programs used across the suite."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from bpwhile.mechanisms import RANDOMIZED_RESPONSE  # noqa: E402
from bpwhile.parser import parse  # noqa: E402
from bpwhile.utils.config import VerifierLimits  # noqa: E402

ID_SOURCE = "input(x); skip; return(x)"
COIN_SOURCE = "input(x); y := random; return(y)"
LOOP_SOURCE = "input(x); while true then skip; return(x)"
GEO_SOURCE = "input(x); c := random; while c then c := random; return(x)"
TRAP_SOURCE = "input(x); c := random; if c then while true then skip else skip; return(1)"
HALF_SOURCE = "input(x); c := random; if c then while true then skip else skip; return(x)"
SKEWED_SOURCE = """
input(x);
a := random && random && random && random;
b := a && random && random && random && random && random && random;
if x then r := a else r := b;
return(r)
"""


@pytest.fixture()
def p_id():
    return parse(ID_SOURCE)


@pytest.fixture()
def p_coin():
    return parse(COIN_SOURCE)


@pytest.fixture()
def p_loop():
    return parse(LOOP_SOURCE)


@pytest.fixture()
def p_geo():
    return parse(GEO_SOURCE)


@pytest.fixture()
def p_rr():
    return parse(RANDOMIZED_RESPONSE)


@pytest.fixture()
def p_trap():
    return parse(TRAP_SOURCE)


@pytest.fixture()
def c_half():
    """Halts with probability 1/2 and then releases its input."""
    return parse(HALF_SOURCE)


@pytest.fixture()
def p_skewed():
    """Outputs 1 with probability 1/16 on x=1 and 1/1024 on x=0."""
    return parse(SKEWED_SOURCE)


@pytest.fixture()
def limits():
    return VerifierLimits()


@pytest.fixture(autouse=True)
def _isolated_environment(monkeypatch):
    for name in ("BPW_MAX_STATES", "BPW_MAX_PRECISION_BITS", "BPW_MAX_ALPHA_GRID", "BPW_JOBS", "BPW_DENSE_SOLVER_LIMIT"):
        monkeypatch.delenv(name, raising=False)
