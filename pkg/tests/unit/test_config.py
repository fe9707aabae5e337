"""Unit tests for configuration and rational parsing helpers."""

from fractions import Fraction

import pytest

from bpwhile.errors import InvalidParameterError
from bpwhile.utils.config import VerifierLimits, corpus_directory, get_int_from_env, get_log_level, load_limits
from bpwhile.utils.rationals import dyadic_exponent, format_rational, is_dyadic, parse_dyadic, parse_rational


class TestLoadLimits:
    def test_defaults(self):
        assert load_limits() == VerifierLimits()

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("BPW_MAX_STATES", "0x100")
        monkeypatch.setenv("BPW_JOBS", "3")
        limits = load_limits()
        assert limits.max_states == 256
        assert limits.jobs == 3

    @pytest.mark.parametrize("raw", ["many", "0"])
    def test_rejects_bad_values(self, monkeypatch, raw):
        monkeypatch.setenv("BPW_MAX_STATES", raw)
        with pytest.raises(InvalidParameterError):
            load_limits()

    def test_precision_floor(self, monkeypatch):
        monkeypatch.setenv("BPW_MAX_PRECISION_BITS", "32")
        with pytest.raises(InvalidParameterError):
            load_limits()

    def test_blank_value_falls_back(self, monkeypatch):
        monkeypatch.setenv("BPW_TEST_INT", "  ")
        assert get_int_from_env("BPW_TEST_INT", 7) == 7


def test_log_level(monkeypatch):
    monkeypatch.setenv("BPW_LOG_LEVEL", "debug")
    assert get_log_level() == "DEBUG"
    monkeypatch.delenv("BPW_LOG_LEVEL")
    assert get_log_level() == "WARNING"


def test_corpus_directory_override(monkeypatch, tmp_path):
    monkeypatch.setenv("BPW_CORPUS_DIR", str(tmp_path))
    assert corpus_directory() == tmp_path


class TestRationals:
    @pytest.mark.parametrize(
        "text, value",
        [
            ("3/4", Fraction(3, 4)),
            ("3145727/2^20", Fraction(3145727, 1048576)),
            ("2", Fraction(2)),
            ("0.125", Fraction(1, 8)),
            (" -1 / 2 ", Fraction(-1, 2)),
        ],
    )
    def test_parse(self, text, value):
        assert parse_rational(text) == value

    @pytest.mark.parametrize("text", ["1/0", "half", ""])
    def test_parse_errors(self, text):
        with pytest.raises(InvalidParameterError):
            parse_rational(text)

    def test_dyadic(self):
        assert is_dyadic(Fraction(3, 8))
        assert not is_dyadic(Fraction(1, 3))
        assert dyadic_exponent(Fraction(3, 8)) == 3
        with pytest.raises(InvalidParameterError, match="delta must be dyadic"):
            parse_dyadic("1/3", "delta")

    def test_format(self):
        assert format_rational(Fraction(6, 4)) == "3/2"
        assert format_rational(Fraction(2)) == "2/1"
