import json
import os
import subprocess
import sys

import pytest

from qveneziano.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_proc(*argv, env=None):
    full = {**os.environ, **(env or {})}
    return subprocess.run([sys.executable, "-m", "qveneziano", *argv], capture_output=True, text=True, env=full)


class TestGamma:
    def test_morita_residue(self, capsys):
        code, out, _ = run(capsys, "gamma", "--kind", "p", "--p", "7", "--x", "8", "--prec", "6")
        assert code == 0 and "residue 720 mod 7^6" in out

    def test_koblitz_at_one(self, capsys):
        code, out, _ = run(capsys, "gamma", "--kind", "pq", "--p", "5", "--q", "6", "--x", "1", "--json")
        rec = json.loads(out)
        assert code == 0 and rec["residue"] == -1 and rec["verified_digits"] == 8

    def test_classical(self, capsys):
        code, out, _ = run(capsys, "gamma", "--kind", "q", "--x", "3", "--q", "0.5")
        assert code == 0 and out.strip() == "3/2"

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "gamma", "--kind", "p", "--p", "3", "--x", "2", "--format", "csv")
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("kind,p,x,value") and len(lines) == 2

    def test_padic_literal(self, capsys):
        code, out, _ = run(capsys, "gamma", "--kind", "p", "--p", "5", "--x", "5^0 * (3 + 0*5) + O(5^2)", "--prec", "2")
        assert code == 0 and "residue -2 mod 5^2" in out


class TestExitCodes:
    def test_non_prime(self, capsys):
        code, out, err = run(capsys, "gamma", "--kind", "p", "--p", "4", "--x", "2")
        assert code == 1 and out == "" and err.startswith("error: domain:") and err.count("\n") == 1

    def test_outside_zp(self, capsys):
        code, _, err = run(capsys, "gamma", "--kind", "p", "--p", "7", "--x", "3/7")
        assert code == 1 and "domain" in err

    def test_missing_flag(self, capsys):
        code, out, err = run(capsys, "gamma", "--kind", "p", "--p", "7")
        assert code == 3 and out == "" and err.startswith("error: usage:")

    def test_no_subcommand(self, capsys):
        assert run(capsys)[0] == 3

    def test_cost_ceiling(self, capsys):
        code, out, err = run(capsys, "gamma", "--kind", "p", "--p", "7", "--x", "1/2", "--prec", "8", "--cost-ceiling", "100")
        assert code == 2 and out == "" and "precision" in err

    def test_cost_ceiling_env(self):
        r = run_proc("gamma", "--kind", "p", "--p", "7", "--x", "1/2", env={"QVENEZIANO_COST_CEILING": "100"})
        assert r.returncode == 2 and r.stdout == ""

    def test_truncation_failure(self, capsys):
        code, _, err = run(capsys, "amp", "--mode", "q-ratio", "--alpha-s", "1.5", "--alpha-t", "2",
                           "--q", "0.999", "--max-terms", "32")
        assert code == 2 and "precision" in err

    def test_pole(self, capsys):
        code, _, _ = run(capsys, "amp", "--mode", "q-ratio", "--alpha-s", "-1", "--alpha-t", "2", "--q", "0.5")
        assert code == 1


class TestAmp:
    def test_spot_value(self, capsys):
        code, out, _ = run(capsys, "amp", "--mode", "padic", "--p", "3", "--alpha-s", "2", "--alpha-t", "3")
        assert code == 0 and "rational 1/4" in out

    def test_dual_forms(self, capsys):
        base = ["--alpha-s", "1.5", "--alpha-t", "2.5", "--q", "0.3", "--json"]
        _, a, _ = run(capsys, "amp", "--mode", "q-ratio", *base)
        _, b, _ = run(capsys, "amp", "--mode", "q-sum", *base)
        x, y = float(json.loads(a)["value"]), float(json.loads(b)["value"])
        assert abs(x - y) < 1e-12 * abs(x)

    def test_kinematics_input(self, capsys, tmp_path):
        f = tmp_path / "kin.json"
        f.write_text(json.dumps({"momenta": [[0, 1, 1, 0], [0, 1, -1, 0], [0, -1, -1, 0], [0, -1, 1, 0]]}))
        code, out, _ = run(capsys, "amp", "--mode", "padic", "--p", "5", "--input", str(f), "--json")
        assert code == 0 and json.loads(out)["mode"] == "arithmetic_p"

    def test_npoint_matches_four_point(self, capsys, tmp_path):
        f = tmp_path / "n4.json"
        f.write_text(json.dumps({"n": 4, "alphas": {"1,2": "1.5", "2,3": "2.5"}, "q": "0.3", "max_level": 40}))
        _, a, _ = run(capsys, "amp", "--mode", "n-point", "--input", str(f), "--json")
        _, b, _ = run(capsys, "amp", "--mode", "q-sum", "--alpha-s", "1.5", "--alpha-t", "2.5", "--q", "0.3",
                      "--levels", "40", "--json")
        assert json.loads(a)["value"] == json.loads(b)["value"]

    def test_pq(self, capsys):
        code, out, _ = run(capsys, "amp", "--mode", "pq", "--p", "3", "--q", "4", "--alpha-s", "1", "--alpha-t", "1", "--json")
        assert code == 0 and json.loads(out)["residue"] == 1


class TestScan:
    def test_flags(self, capsys):
        code, out, _ = run(capsys, "scan", "--p", "3", "--from", "-10", "--to", "2", "--json")
        rows = json.loads(out)["rows"]
        assert code == 0 and [r["alpha"] for r in rows if r["flagged"]] == [-10, -8, -7, -5, -4, -2, -1]

    def test_empty_range(self, capsys):
        code, out, _ = run(capsys, "scan", "--p", "3", "--from", "5", "--to", "1", "--json")
        assert code == 0 and json.loads(out) == {"p": 3, "rows": []}

    def test_slope(self, capsys):
        code, out, _ = run(capsys, "scan", "--p", "5", "--from", "-4", "--to", "-2", "--slope", "1", "--format", "csv")
        assert code == 0 and out.splitlines()[0] == "s,alpha,flagged"


class TestConfig:
    def test_config_supplies_required(self, capsys, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"kind": "p", "p": 7, "x": 8, "prec": 6}))
        code, out, _ = run(capsys, "gamma", "--config", str(f))
        assert code == 0 and "residue 720 mod 7^6" in out

    def test_flag_overrides_config(self, capsys, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"kind": "p", "p": 7, "x": 8, "prec": 6}))
        code, out, _ = run(capsys, "gamma", "--config", str(f), "--prec", "2")
        assert code == 0 and "mod 7^2" in out

    def test_unknown_key(self, capsys, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"bogus": 1}))
        assert run(capsys, "gamma", "--config", str(f))[0] == 3


class TestVerify:
    def test_suite_json(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "qbinomial", "--json")
        lines = [json.loads(x) for x in out.splitlines()]
        assert code == 0 and lines[-1]["summary"]["status"] == "pass"
        assert all(set(c) >= {"check", "inputs", "status", "metric"} for c in lines[:-1])

    def test_deterministic(self, capsys):
        a = run(capsys, "verify", "--suite", "recursions", "--seed", "3", "--json")
        b = run(capsys, "verify", "--suite", "recursions", "--seed", "3", "--json")
        assert a == b and a[0] == 0

    def test_text(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "kinematics")
        assert code == 0 and out.splitlines()[-1].endswith("checks passed")


@pytest.mark.slow
def test_pure_python_backend_agrees():
    argv = ["gamma", "--kind", "pq", "--p", "5", "--q", "6", "--x", "1/3", "--prec", "5", "--json"]
    fast = run_proc(*argv)
    slow = run_proc(*argv, env={"QVENEZIANO_PURE_PYTHON": "1"})
    assert fast.returncode == slow.returncode == 0 and fast.stdout == slow.stdout
