"""End-to-end tests of the bpwhile command line through ``main``."""

import json
from pathlib import Path

import pytest

from bpwhile.mechanisms import RANDOMIZED_RESPONSE
from bpwhile.records import VerdictRecord
from bpwhile_cli import main, render_text

CORPUS = Path(__file__).resolve().parents[2] / "corpus"


def program(name: str) -> str:
    return str(CORPUS / name)


def run_json(capsys, *args: str) -> tuple[int, VerdictRecord]:
    code = main(["--format", "json", *args])
    return code, VerdictRecord.from_json(capsys.readouterr().out)


class TestVerify:
    def test_randomized_response_is_private_at_three(self, capsys):
        assert main(["verify", program("rr.bpw"), "--pure", "--eeps", "3/1"]) == 0
        captured = capsys.readouterr()
        assert "decision: private" in captured.out
        assert "✅ private" in captured.err

    def test_identity_is_not_private(self, capsys):
        assert main(["verify", program("id.bpw"), "--pure", "--eeps", "10/1"]) == 1
        out = capsys.readouterr().out
        assert "decision: not-private" in out
        assert "witness: 0 vs 1" in out

    def test_json_record(self, capsys):
        code, record = run_json(capsys, "verify", program("rr.bpw"), "--pure", "--eeps", "3145727/2^20")
        assert code == 1
        assert record.decision == "not-private"
        assert (record.witness.input_bits, record.witness.neighbor_bits, record.witness.outcomes) == ("0", "1", ["0"])
        assert record.command[:2] == ["bpwhile", "verify"]
        assert record.details == {"neighbor": "hamming1", "mode": "sensitive"}

    def test_approx_needs_a_dyadic_delta(self, capsys):
        assert main(["verify", program("rr.bpw"), "--approx", "--eeps", "2", "--delta", "1/3"]) == 3
        assert "InvalidParameterError" in capsys.readouterr().err

    def test_gap_check(self, capsys):
        code, record = run_json(capsys, "verify", program("rr.bpw"), "--cdp", "--rho", "2", "--eta", "2")
        assert code == 0
        assert record.decision == "yes"
        assert record.details["alpha_points"] == 23

    def test_geometric_block_neighbors(self, capsys, tmp_path):
        source = tmp_path / "count.bpwx"
        source.write_text("input(c[2]); block r[2]; r := c; return(r)\n", encoding="utf-8")
        code, record = run_json(capsys, "verify", str(source), "--pure", "--eeps", "100", "--neighbor", "int-adj:c")
        assert code == 1
        assert record.details["neighbor"] == "int-adj:c"
        assert record.witness.neighbor_bits == "01"

    @pytest.mark.parametrize(
        "args",
        [
            ["--pure"],
            ["--pure", "--approx", "--eeps", "2"],
            ["--rdp", "--rho", "1/4"],
        ],
    )
    def test_usage_errors(self, capsys, args):
        assert main(["verify", program("rr.bpw"), *args]) == 3
        assert "usage" in capsys.readouterr().err

    def test_same_record_with_workers(self, capsys):
        _, serial = run_json(capsys, "verify", program("rr.bpw"), "--approx", "--eeps", "2", "--delta", "1/8")
        _, parallel = run_json(capsys, "--jobs", "2", "verify", program("rr.bpw"), "--approx", "--eeps", "2", "--delta", "1/8")
        assert parallel.decision == serial.decision
        assert parallel.witness == serial.witness


class TestOtherCommands:
    def test_parse_prints_canonical_text(self, capsys):
        code, record = run_json(capsys, "parse", program("rr.bpw"))
        assert code == 0
        assert record.details["program"] == RANDOMIZED_RESPONSE
        assert record.details["inputs"] == ["x"]
        assert record.details["outputs"] == ["r"]

    def test_dist_text(self, capsys):
        assert main(["dist", program("coin.bpw"), "--input", "0"]) == 0
        out = capsys.readouterr().out
        assert "  0 1/2 (~0.5)" in out
        assert "  ⊥ 0/1 (~0)" in out

    def test_conditional_dist_on_a_loop(self, capsys):
        assert main(["dist", program("loop.bpw"), "--input", "1", "--conditional"]) == 3
        assert "UndefinedConditioningError" in capsys.readouterr().err

    def test_ast_check_reports_the_trapped_state(self, capsys):
        assert main(["ast-check", program("loop.bpw")]) == 1
        out = capsys.readouterr().out
        assert "decision: does-not" in out
        assert "state: 1:0" in out

    def test_state_budget_exit_code(self, capsys):
        assert main(["--max-states", "1", "dist", program("rr.bpw"), "--input", "0"]) == 4
        assert "ResourceBudgetExceeded" in capsys.readouterr().err

    def test_missing_program(self, capsys, tmp_path):
        assert main(["ast-check", str(tmp_path / "absent.bpw")]) == 3

    def test_syntax_error_exit_code(self, capsys, tmp_path):
        broken = tmp_path / "broken.bpw"
        broken.write_text("input(x); x := ; return(x)\n", encoding="utf-8")
        assert main(["parse", str(broken)]) == 3
        assert "line 1" in capsys.readouterr().err

    def test_reduce_writes_a_program(self, capsys, tmp_path):
        target = tmp_path / "wrapped.bpw"
        code, record = run_json(capsys, "reduce", "wrap-approx", program("coin.bpw"), "--delta", "1/4", "-o", str(target))
        assert code == 0
        assert record.details["delta"] == "1/4"
        assert target.is_file()
        assert main(["ast-check", str(target)]) == 1

    def test_reduce_tqbf(self, capsys):
        code, record = run_json(capsys, "reduce", "tqbf", "--formula", "A x : x | !x")
        assert code == 0
        assert record.details["quantifiers"] == 1
        assert record.details["program"].startswith("input(b);")

    def test_reduce_needs_a_program(self, capsys):
        assert main(["reduce", "amplify"]) == 3

    def test_unknown_reduction(self, capsys):
        assert main(["reduce", "shuffle", program("coin.bpw")]) == 3

    def test_sample_counts(self, capsys):
        code, record = run_json(capsys, "sample", program("coin.bpw"), "--input", "0", "--runs", "20", "--seed", "4")
        assert code == 0
        assert sum(record.details["counts"].values()) == 20
        assert set(record.details["counts"]) <= {"0", "1"}

    def test_dump_chain(self, capsys):
        code, record = run_json(capsys, "dump-chain", program("coin.bpw"), "--input", "0")
        assert code == 0
        assert record.details["states"] == 3
        assert record.details["chain"].splitlines()[0] == "1 2 1 3"

    def test_version(self, capsys):
        assert main(["version"]) == 0
        assert capsys.readouterr().out.strip() == "0.1.0"

    def test_bad_format(self, capsys):
        assert main(["--format", "yaml", "version"]) == 3


class TestCorpusCommands:
    def test_list(self, capsys):
        code, record = run_json(capsys, "corpus", "list")
        assert code == 0
        assert "coin" in record.details

    def test_run_one_entry(self, capsys):
        assert main(["corpus", "run", "coin"]) == 0
        captured = capsys.readouterr()
        assert "decision: passed" in captured.out
        assert "✅ coin: 7/7 checks" in captured.err

    def test_run_needs_a_name_or_all(self, capsys):
        assert main(["corpus", "run"]) == 3
        assert main(["corpus", "run", "coin", "--all"]) == 3

    def test_unknown_entry(self, capsys):
        assert main(["corpus", "run", "nope"]) == 3

    @pytest.mark.slow
    def test_run_all(self, capsys):
        code = main(["--format", "json", "corpus", "run", "--all"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0, payload["details"]["entries"]
        assert payload["decision"] == "passed"


def test_render_text_lists_details():
    record = VerdictRecord(["x"], "ok", details={"lines": 3, "program": "a\nb\n"})
    assert render_text(record).splitlines() == ["decision: ok", "lines: 3", "program:", "  a", "  b"]
