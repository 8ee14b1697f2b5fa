import json
import math
import subprocess
import sys

import numpy as np
import pytest

from constrained_bsc import cli
from constrained_bsc.markov import MarkovChain, dump_chain, random_positive_chain, two_state_chain

LAM = (1 + math.sqrt(5)) / 2


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out)


@pytest.fixture
def chain_file(tmp_path):
    def write(X, name="chain.json"):
        path = tmp_path / name
        path.write_text(dump_chain(X), encoding="utf-8")
        return str(path)
    return write


def test_capacity(capsys, tmp_path):
    r = run_json(capsys, "capacity", "--rll", "1,inf")
    assert r["C0"] == pytest.approx(0.481212, abs=1e-6)
    assert r["c_log"] == pytest.approx(-0.552786, abs=1e-6)
    assert r["lambda"] == pytest.approx(LAM) and r["rho0"] == pytest.approx(1 / LAM)
    assert run_json(capsys, "capacity", "--rll", "1,2")["c_log"] == pytest.approx(0.0, abs=1e-12)
    empty = tmp_path / "empty.txt"
    empty.write_text("", encoding="utf-8")
    r = run_json(capsys, "capacity", "--forbidden", str(empty))
    assert r["C0"] == pytest.approx(math.log(2)) and r["c_log"] == pytest.approx(-1) and r["c_lin"] == pytest.approx(-1)
    bits = run_json(capsys, "capacity", "--rll", "1,inf", "--bits", "--noiseless")
    assert set(bits) == {"C0", "units"} and bits["C0"] == pytest.approx(math.log2(LAM))


def test_invalid_inputs(capsys, tmp_path):
    assert run(capsys, "capacity", "--rll", "3,1")[0] == 2
    assert run(capsys, "capacity", "--rll", "x")[0] == 2
    red = tmp_path / "red.txt"
    red.write_text("01\n10\n", encoding="utf-8")
    assert run(capsys, "capacity", "--forbidden", str(red))[0] == 2
    assert run(capsys, "capacity", "--rll", "1,inf", "--forbidden", str(red))[0] == 2
    assert run(capsys, "capacity")[0] == 2
    assert run(capsys, "coeffs", "--chain", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"order": 1, "contexts": ["0", "1"], "kernel": [[0.5, 0.6], [1, 0]]}), encoding="utf-8")
    assert run(capsys, "coeffs", "--chain", str(bad))[0] == 2
    assert run(capsys, "entropy", "--rll", "1,inf", "--eps", "0.7")[0] == 2


def test_numerical_failure_exit(capsys):
    assert run(capsys, "entropy", "--rll", "1,inf", "--eps", "0.1", "--n", "40")[0] == 3


def test_coeffs(capsys, chain_file, golden_parry):
    r = run_json(capsys, "coeffs", "--chain", chain_file(golden_parry))
    assert r["f"] == pytest.approx(0.447214, abs=1e-6)
    assert r["stability"]["f_spread"] <= 1e-12 and r["stability"]["g_spread"] <= 1e-12
    r = run_json(capsys, "coeffs", "--chain", chain_file(random_positive_chain(2, np.random.default_rng(0))))
    assert r["f"] == 0.0
    r = run_json(capsys, "coeffs", "--chain", chain_file(two_state_chain(0.25, 1.0)))
    assert r["f"] == pytest.approx(0.25 * 1.75 / 1.25, abs=1e-12)
    r = run_json(capsys, "coeffs", "--rll", "1,inf")
    assert r["H"] == pytest.approx(math.log(LAM), abs=1e-12)


def test_entropy(capsys):
    r = run_json(capsys, "entropy", "--rll", "1,inf", "--eps", "1e-3", "--n", "8")
    assert r["lower"] <= r["upper"] + 1e-13
    assert r["asymptotic"] == pytest.approx(r["upper"], abs=1e-5)


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--rll", "1,inf", "--n", "8", "--eps", "1e-2,1e-3,1e-4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "eps,lower,upper,asymptotic,residual"
    assert len(lines) == 5 and lines[-1].startswith("# fit ")
    row = [float(x) for x in lines[2].split(",")]
    assert row[0] == 1e-3 and row[4] == pytest.approx(0.5 * (row[1] + row[2]) - row[3], abs=1e-15)
    # byte-stable
    _, out2, _ = run(capsys, "sweep", "--rll", "1,inf", "--n", "8", "--eps", "1e-2,1e-3,1e-4")
    assert out2 == out


def test_sweep_rejects_zero(capsys):
    assert run(capsys, "sweep", "--rll", "1,inf", "--eps", "0,1e-3,1e-2")[0] == 2


def test_sweep_fair_coin(capsys, tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("", encoding="utf-8")
    code, out, _ = run(capsys, "sweep", "--forbidden", str(empty), "--n", "4")
    assert code == 0
    rows = [list(map(float, l.split(","))) for l in out.splitlines()[1:] if not l.startswith("#")]
    assert all(abs(r[4]) <= 1e-12 for r in rows)
    records = cli.sweep(cli.parry_chain(cli.FiniteTypeConstraint([])), [r[0] for r in rows], 4)
    a, b, c = cli.fit_coefficients(records)
    assert a == pytest.approx(math.log(2), abs=1e-9) and abs(b) <= 1e-6 and abs(c) <= 1e-5


def test_bounds(capsys):
    r = run_json(capsys, "bounds", "--rll", "1,inf", "--eps", "1e-3", "--m", "1", "--n", "3")
    assert r["lower"] <= r["upper"]
    assert r["expansion"] == pytest.approx(r["lower"], abs=2e-4)


def test_verify_passes(capsys, chain_file, golden_parry):
    code, out, _ = run(capsys, "verify", "--chain", chain_file(golden_parry))
    report = json.loads(out)
    assert code == 0 and report["failed"] == 0
    assert report["seconds"] < 60


def test_verify_detects_stale_stationary(golden_parry):
    X = golden_parry
    kernel = X.kernel.copy()
    kernel[0] = [kernel[0, 0] - 1e-6, kernel[0, 1] + 1e-6]
    corrupted = MarkovChain(X.order, X.contexts, kernel, X.stationary.copy())
    checks = cli.stability_checks([("corrupted", corrupted)])
    assert not all(ok for _, ok, _ in checks)
    assert any(not ok for _, ok, _ in cli.run_verify([("corrupted", corrupted)]))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "constrained_bsc", "capacity", "--rll", "1,inf", "--noiseless"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["C0"] == pytest.approx(math.log(LAM))
