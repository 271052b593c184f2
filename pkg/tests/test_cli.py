"""Tests for the ci-lab command line: output, JSON mode and exit codes."""

import json

import pytest

from ci_lab.claims import build_ce1
from ci_lab.claims.instance import instance_to_json
from ci_lab.cli.commands import EXIT_INPUT, EXIT_NO_WITNESS, EXIT_OK, EXIT_USAGE, run
from ci_lab.cli.grammar import parse_assignment, parse_ci_statement, parse_groups
from ci_lab.exceptions import ParseException
from ci_lab.prob_core import table_to_json


@pytest.fixture
def ce1_table_file(tmp_path):
    path = tmp_path / "ce1.json"
    path.write_text(table_to_json(build_ce1().table))
    return path


class TestGrammar:
    """CI statement text grammar."""

    def test_full_statement(self):
        s = parse_ci_statement("A1,A2 _||_ W | Z")
        assert s.x == frozenset({"A1", "A2"})
        assert s.y == frozenset({"W"})
        assert s.given == frozenset({"Z"})

    @pytest.mark.parametrize("text", ["A1 _||_ A2 |", "A1 _||_ A2 | -", "A1 _||_ A2", "A1_||_A2"])
    def test_empty_given(self, text):
        assert parse_ci_statement(text).given == frozenset()

    def test_missing_operator(self):
        with pytest.raises(ParseException) as exc_info:
            parse_ci_statement("A1 W")
        assert exc_info.value.position == 4

    def test_repeated_operator(self):
        with pytest.raises(ParseException) as exc_info:
            parse_ci_statement("A _||_ B _||_ C")
        assert exc_info.value.position == 9

    def test_two_bars(self):
        with pytest.raises(ParseException):
            parse_ci_statement("A _||_ B | C | D")

    def test_bad_name(self):
        with pytest.raises(ParseException):
            parse_ci_statement("A, _||_ B")

    def test_groups_and_assignment(self):
        assert parse_groups("A1;A2,A3") == [["A1"], ["A2", "A3"]]
        assert parse_assignment("A1=0, A2=1") == {"A1": "0", "A2": "1"}
        with pytest.raises(ParseException):
            parse_groups("A1")
        with pytest.raises(ParseException):
            parse_assignment("A1=0,A1=1")


class TestVerifyCounterexamples:
    def test_human_output(self, capsys):
        assert run(["verify-paper"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "ce1: ClaimRefuted"
        assert out[1] == "  premise (1)(i):  A1=true A2=true"
        assert out[2] == "  premise (1)(ii): A1=true A2=true"
        assert out[5] == "  conclusion (3):  false"
        assert "ce2: ClaimRefuted" in out
        assert "overlap-variant: ClaimRefuted" in out

    def test_json_output(self, capsys):
        assert run(["verify-paper", "--json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) == {"ce1", "ce2", "overlap-variant"}
        assert all(r["verdict"] == "ClaimRefuted" for r in payload.values())


class TestCheck:
    def test_ci_statements(self, ce1_table_file, capsys):
        code = run(["check", "--table", str(ce1_table_file), "--ci", "A1,A2 _||_ W | Z"])
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == "A1,A2 _||_ W | Z: false"

    def test_mutual(self, ce1_table_file, capsys):
        code = run(
            ["check", "--table", str(ce1_table_file), "--mutual", "A1;A2", "--given", "Z", "--json"]
        )
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out) == [{"statement": "mutual(A1 ; A2) | Z", "holds": True}]

    def test_missing_file(self, tmp_path, capsys):
        code = run(["check", "--table", str(tmp_path / "nope.json"), "--ci", "A _||_ B"])
        assert code == EXIT_INPUT
        assert capsys.readouterr().err.startswith("Error:")

    def test_malformed_statement(self, ce1_table_file):
        assert run(["check", "--table", str(ce1_table_file), "--ci", "A1 W"]) == EXIT_USAGE

    def test_unknown_variable(self, ce1_table_file):
        assert run(["check", "--table", str(ce1_table_file), "--ci", "A1 _||_ Q"]) == EXIT_INPUT

    def test_bad_table(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"variables": [{"name": "A", "support": ["0"]}], "entries": []}')
        assert run(["check", "--table", str(path), "--ci", "A _||_ A"]) == EXIT_INPUT

    def test_claim_file_loads_as_table(self, tmp_path):
        path = tmp_path / "claim.json"
        path.write_text(instance_to_json(build_ce1()))
        # Claim files carry roles, which a plain table document rejects.
        assert run(["check", "--table", str(path), "--ci", "A1 _||_ A2"]) == EXIT_INPUT


class TestSearch:
    def test_preset_found(self, capsys):
        assert run(["search", "--preset", "transitivity", "--seed", "0"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "witness:" in out
        assert "A _||_ C |: false" in out

    def test_no_witness_exit_code(self, capsys):
        assert run(["search", "--preset", "tautology"]) == EXIT_NO_WITNESS
        assert "witness: none (none exists)" in capsys.readouterr().out

    def test_query_file(self, tmp_path, capsys):
        path = tmp_path / "query.yaml"
        path.write_text(
            "variables:\n"
            "  - {name: A, support: ['0', '1']}\n"
            "  - {name: B, support: ['0', '1']}\n"
            "  - {name: C, support: ['0', '1']}\n"
            "premises:\n"
            "  - 'A _||_ B | C'\n"
            "conclusion: 'A _||_ B'\n"
        )
        code = run(["search", "--query", str(path), "--mode", "exhaustive_grid", "--grid-denominator", "4", "--json"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["found"] is True
        assert payload["config"]["grid_denominator"] == 4

    def test_malformed_statement_in_query_file(self, tmp_path, capsys):
        path = tmp_path / "query.yaml"
        path.write_text(
            "variables:\n"
            "  - {name: A, support: ['0', '1']}\n"
            "  - {name: B, support: ['0', '1']}\n"
            "premises:\n"
            "  - 'A B'\n"
            "conclusion: 'A _||_ B'\n"
        )
        assert run(["search", "--query", str(path)]) == EXIT_INPUT
        err = capsys.readouterr().err
        assert err.startswith("Error:")
        assert "query.yaml" in err

    def test_bad_mode(self):
        assert run(["search", "--preset", "transitivity", "--mode", "bogus"]) == EXIT_USAGE

    def test_unknown_preset(self):
        assert run(["search", "--preset", "nope"]) == EXIT_USAGE

    def test_bad_integer(self):
        assert run(["search", "--preset", "transitivity", "--seed", "x"]) == EXIT_USAGE


class TestDeconf:
    def test_exact_ce1(self, capsys):
        assert run(["deconf", "--dgp", "ce1", "--exact"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "psi=0  E[W]=1/2  gap=-1/2" in out
        assert "mode: exact" in out

    def test_exact_json(self, capsys):
        assert run(["deconf", "--dgp", "ce2", "--exact", "--target", "A1=1,A2=1", "--json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["adjustment"]["degenerate_strata"] == ["1"]
        assert payload["adjustment"]["psi"] is None

    def test_save_samples(self, tmp_path):
        path = tmp_path / "samples.csv"
        code = run(["deconf", "--dgp", "ce1", "--n", "200", "--save-samples", str(path)])
        assert code == EXIT_OK
        assert path.read_text().splitlines()[0] == "A1,A2"

    def test_dgp_file(self, tmp_path, capsys):
        path = tmp_path / "ce1.json"
        path.write_text(instance_to_json(build_ce1()))
        assert run(["deconf", "--dgp", str(path), "--exact"]) == EXIT_OK
        assert "gap=-1/2" in capsys.readouterr().out

    def test_missing_dgp(self, tmp_path):
        assert run(["deconf", "--dgp", str(tmp_path / "missing.json")]) == EXIT_INPUT

    def test_bad_target(self):
        assert run(["deconf", "--dgp", "ce1", "--exact", "--target", "A1=0"]) == EXIT_INPUT


class TestDispatch:
    def test_no_arguments(self, capsys):
        assert run([]) == EXIT_USAGE
        assert "Usage: ci-lab" in capsys.readouterr().err

    def test_unknown_command(self):
        assert run(["frobnicate"]) == EXIT_USAGE

    def test_unknown_option(self):
        assert run(["verify-paper", "--bogus"]) == EXIT_USAGE

    def test_version(self, capsys):
        assert run(["version"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("ci-lab v")

    def test_verbose_flag_ignored(self):
        assert run(["verify-paper", "-v"]) == EXIT_OK
