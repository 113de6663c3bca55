"""Command-line surface: payloads, exit codes, determinism."""

import json

from hahn_forge.cli import run_cli


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return code, payload, captured.out


class TestEval:
    def test_exp_example(self, capsys):
        code, payload, _ = run(capsys, "eval", "--prec", "4", "exp(x)", "--at", "t^(1)")
        assert code == 0
        assert payload == {"value": "1 + 1*t^(1) + 1/2*t^(2) + 1/6*t^(3) + O(t^(4))"}

    def test_global_flag_before_subcommand(self, capsys):
        code, payload, _ = run(capsys, "--prec", "3", "eval", "1/(1-x)", "--at", "t^(1)")
        assert code == 0
        assert payload == {"value": "1 + 1*t^(1) + 1*t^(2) + O(t^(3))"}

    def test_parse_error_exit_code(self, capsys):
        code, payload, _ = run(capsys, "eval", "exp(x", "--at", "t^(1)")
        assert code == 2 and payload is None

    def test_domain_error_is_usage(self, capsys):
        code, _, _ = run(capsys, "eval", "exp(x)", "--at", "1")
        assert code == 2


class TestAlgebraCommands:
    def test_rv(self, capsys):
        code, payload, _ = run(capsys, "rv", "--lambda", "1", "3*t^(2) + 5*t^(3) + 7*t^(4)")
        assert code == 0
        assert payload == {"rv": {"gamma": "2", "jet": "3 + 5*t^(1)"}, "lambda": "1"}

    def test_divide(self, capsys):
        code, payload, _ = run(
            capsys, "divide", "[1]*x1^2 + [-1*t^(1)]", "[1]*x1^3", "--var", "1", "--degree", "3"
        )
        assert code == 0
        assert payload == {"Q": "[1]*x1", "R": ["[0]", "[1*t^(1)]"]}

    def test_split(self, capsys):
        code, payload, _ = run(capsys, "split", "[1]*x1*x2")
        assert code == 0
        assert payload["f1"] == "[1]*x2"
        assert payload["Q"] == "[1]"

    def test_hensel(self, capsys):
        code, payload, _ = run(capsys, "hensel", "--prec", "4", "1*t^(1)")
        assert code == 0
        assert payload == {"root": "-1 - 1*t^(1) - 2*t^(2) - 5*t^(3) + O(t^(4))"}

    def test_implicit(self, capsys):
        code, payload, _ = run(capsys, "implicit", "[1]*x2 + [1]*x2^2 + [-1]*x1", "--degree", "4")
        assert code == 0
        assert payload == {"r": "[1]*x1 + [-1]*x1^2 + [2]*x1^3 + [-5]*x1^4"}

    def test_roots_and_polygon(self, capsys):
        code, payload, _ = run(capsys, "polygon", "x^2 - t^(1)")
        assert code == 0
        assert payload == {"polygon": [{"slope": "1/2", "multiplicity": 2}]}
        code, payload, _ = run(capsys, "roots", "x^2 - t^(1)", "--depth", "3")
        assert code == 0
        assert len(payload["roots"]) == 2
        assert {r["branch"][0]["coeff"] for r in payload["roots"]} == {"1", "-1"}


class TestVerificationCommands:
    def test_prepare_passes(self, capsys):
        code, payload, _ = run(capsys, "prepare", "--lambda", "0", "x^2 - t^(1)", "--trials", "200")
        assert code == 0
        series = {p["series"] for p in payload["preparing_set"]["points"]}
        assert {"1*t^(1/2)", "-1*t^(1/2)", "0"} <= series
        assert payload["report"]["verdict"] == "pass"

    def test_verify_undersized_fails(self, capsys):
        code, payload, _ = run(
            capsys, "verify", "--lambda", "0", "x^2 - t^(1)", "--with-C", "0", "--trials", "400"
        )
        assert code == 1
        assert payload["report"]["verdict"] == "fail"
        assert payload["report"]["violations"]

    def test_jacobian(self, capsys):
        code, payload, _ = run(capsys, "jacobian", "x^2", "--with-C", "0", "--trials", "150")
        assert code == 0
        assert payload["report"]["verdict"] == "pass"
        assert payload["report"]["shifts"]

    def test_probe_unit(self, capsys):
        code, payload, _ = run(
            capsys,
            "probe-unit",
            "--center",
            "0",
            "--inner",
            "t^(2)",
            "--outer",
            "1",
            "--h",
            "exp",
            "--h-scale",
            "t^(1)",
            "--trials",
            "100",
        )
        assert code == 0
        assert payload["report"]["verdict"] == "pass"


class TestDeterminism:
    def test_byte_identical_reruns(self, capsys):
        argv = ["prepare", "--lambda", "1", "x^2 - t^(1)", "--seed", "5", "--trials", "120"]
        _, _, first = run(capsys, *argv)
        _, _, second = run(capsys, *argv)
        assert first == second

    def test_env_seed_override(self, capsys, monkeypatch):
        argv = ["verify", "x^2 - t^(1)", "--with-C", "0", "--seed", "1", "--trials", "60"]
        _, first, _ = run(capsys, *argv)
        monkeypatch.setenv("HAHN_FORGE_SEED", "99")
        _, second, _ = run(capsys, *argv)
        assert second["report"]["seed"] == 99
        assert first["report"]["seed"] == 1


class TestMoreSurface:
    def test_precision_error_exit_code(self, capsys):
        code, _, _ = run(capsys, "rv", "--lambda", "2", "1*t^(1) + O(t^(2))")
        assert code == 3

    def test_inv_zero_convention_flag(self, capsys):
        code, _, _ = run(capsys, "eval", "1/x", "--at", "0")
        assert code == 2
        code, payload, _ = run(capsys, "eval", "--inv-zero-is-zero", "1/x", "--at", "0")
        assert code == 0 and payload == {"value": "0"}

    def test_verify_report_schema(self, capsys):
        code, payload, _ = run(capsys, "verify", "x", "--with-C", "0", "--trials", "30")
        assert code == 0
        assert list(payload["report"].keys()) == ["op", "lambda", "trials", "seed", "violations", "verdict"]
