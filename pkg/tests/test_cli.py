from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from mcrd.cli import main

TURING_FLAGS = ["--k_N", "2", "--k_I", "0.8", "--D_N", "0.01", "--D_I", "0.001", "--A", "8.8",
              "--L", "100"]


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_arguments_usage(capsys):
    code, _, err = _run(capsys)
    assert code == 2 and "usage" in err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mcrd"], capture_output=True, text=True)
    assert r.returncode == 2 and "usage" in r.stderr


def test_equilibria_json(capsys, tmp_path):
    code, out, _ = _run(capsys, "equilibria", "--kappa", "2", "--M", "10", "--out-dir", str(tmp_path))
    assert code == 0
    data = json.loads(out)
    assert data["u_plus"] == pytest.approx(5.23607, abs=1e-5)
    assert (tmp_path / "equilibria.txt").exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["subcommand"] == "equilibria" and man["status"] == "ok"
    assert len(man["outputs"]) == 2


def test_unknown_flag_names_it(capsys, tmp_path):
    code, _, err = _run(capsys, "equilibria", "--kappa", "2", "--Mass", "3")
    assert code == 2 and "--Mass" in err


def test_missing_parameter_lists_flag(capsys, tmp_path):
    code, _, err = _run(capsys, "stationary", "--M", "7.4", "--ell", "50", "--d", "0.1",
                        "--out-dir", str(tmp_path))
    assert code == 2 and "--kappa" in err


def test_numerical_failure_exit_1(capsys, tmp_path):
    code, _, err = _run(capsys, "stationary", "--M", "7.4", "--ell", "1", "--d", "0.1",
                        "--kappa", "2", "--out-dir", str(tmp_path))
    assert code == 1 and "numerical failure" in err
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["status"] == "numerical-failure"


def test_dispersion_turing_point(capsys, tmp_path):
    code, out, _ = _run(capsys, "dispersion", *TURING_FLAGS, "--n-sigma", "201",
                        "--out-dir", str(tmp_path))
    assert code == 0
    s = json.loads(out)
    assert s["kind"] == "S-and-W" and s["uniformStable"] and s["maxGrowth"] > 0
    lines = (tmp_path / "dispersion.csv").read_text().splitlines()
    assert lines[0].startswith("sigma [1/length^2],re_lambda1")
    assert len(lines) == 202


def test_config_merge_cli_wins(capsys, tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("k_N=2\nk_I=0.8\nD_N=0.01\nD_I=0.001\nA=8.8\nL=100\n")
    code, out, _ = _run(capsys, "dispersion", "--config", str(cfg), "--k_I", "1.5",
                        "--n-sigma", "51", "--out-dir", str(tmp_path))
    assert code == 0 and json.loads(out)["kind"] == "S"
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["parameters"]["tau"] == 1.5
    assert man["parameters"]["kappa"] == pytest.approx(2 / 1.5)


def test_stationary_csv_17_digits(capsys, tmp_path):
    code, out, _ = _run(capsys, "stationary", "--M", "7.403397229733034", "--ell", "30",
                        "--d", "0.1", "--kappa", "2", "--n", "256", "--out-dir", str(tmp_path))
    assert code == 0
    s = json.loads(out)
    assert abs(s["mass_residual"]) < 1e-8 and s["residual_spectral"] < 1e-8
    text = (tmp_path / "stationary.csv").read_text()
    assert "\r" not in text
    header, first = text.splitlines()[:2]
    assert header == "x [length],u [1],v [1],w [1]"
    digits = first.split(",")[1].split("e")[0].replace(".", "").lstrip("0")
    assert len(digits) <= 17
    data = np.loadtxt(tmp_path / "stationary.csv", delimiter=",", skiprows=1)
    assert data.shape == (256, 4)
    # 17 significant digits round-trip doubles exactly
    _run(capsys, "stationary", "--M", "7.403397229733034", "--ell", "30", "--d", "0.1",
         "--kappa", "2", "--n", "256", "--out", "json", "--out-dir", str(tmp_path / "j"))
    ref = json.loads((tmp_path / "j" / "stationary.json").read_text())
    assert np.array_equal(data[:, 1], np.array(ref["u"]))


def test_stationary_fixed_mu_front(capsys, tmp_path):
    from mcrd.equilibria import mu_bar

    code, out, _ = _run(capsys, "stationary", "--mu", repr(mu_bar(0.1, 2.0)), "--ell", "20",
                        "--d", "0.1", "--kappa", "2", "--branch", "front", "--n", "256",
                        "--out", "json", "--out-dir", str(tmp_path))
    assert code == 0 and json.loads(out)["branch"] == "front"
    assert len(json.loads((tmp_path / "stationary.json").read_text())["u"]) == 256


def test_multimode(capsys, tmp_path):
    code, out, _ = _run(capsys, "multimode", "--M", "7.4", "--ell", "25", "--d", "0.1",
                        "--kappa", "2", "--n", "256", "--pattern", "N", "--j", "2",
                        "--out-dir", str(tmp_path))
    assert code == 0
    s = json.loads(out)
    assert s["total_length"] == 125.0
    assert np.allclose(s["means"], s["base_means"], rtol=1e-12)


def test_simulate_reproducible(capsys, tmp_path):
    args = ["simulate", *TURING_FLAGS, "--n", "64", "--t-end", "2", "--seed", "7", "--snap", "1"]
    assert _run(capsys, *args, "--out-dir", str(tmp_path / "a"))[0] == 0
    assert _run(capsys, *args, "--out-dir", str(tmp_path / "b"))[0] == 0
    for name in ("final.csv", "snapshot_t1.csv", "mass.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    meta = json.loads((tmp_path / "a" / "simulate.json").read_text())
    assert meta["mass_drift"] < 1e-12 and meta["seed"] == 7
    assert json.loads((tmp_path / "a" / "manifest.json").read_text())["seed"] == 7


def test_simulate_from_file(capsys, tmp_path):
    _run(capsys, "simulate", *TURING_FLAGS, "--n", "64", "--t-end", "1", "--seed", "1",
         "--out-dir", str(tmp_path / "a"))
    code, out, _ = _run(capsys, "simulate", *TURING_FLAGS, "--n", "64", "--t-end", "1",
                        "--init", "file", "--init-file", str(tmp_path / "a" / "final.csv"),
                        "--out-dir", str(tmp_path / "b"))
    assert code == 0
    code, _, err = _run(capsys, "simulate", *TURING_FLAGS, "--n", "32", "--init", "file",
                        "--init-file", str(tmp_path / "a" / "final.csv"),
                        "--out-dir", str(tmp_path / "c"))
    assert code == 2 and "--init-file" in err


def test_simulate_needs_seed(capsys, tmp_path):
    code, _, err = _run(capsys, "simulate", *TURING_FLAGS, "--out-dir", str(tmp_path))
    assert code == 2 and "--seed" in err


def test_asymptote(capsys, tmp_path):
    code, out, _ = _run(capsys, "asymptote", "--ells", "10,20", "--n", "257",
                        "--out-dir", str(tmp_path))
    assert code == 0
    table = json.loads(out)["table"]
    assert table[1]["rel_error"] < table[0]["rel_error"]


def test_selftest(capsys, tmp_path):
    code, out, _ = _run(capsys, "selftest", "--out-dir", str(tmp_path))
    assert code == 0 and "FAIL" not in out and out.count("PASS") >= 7
