import json
import math
import pathlib
import subprocess
import sys

import numpy as np
import pytest

ROOT = pathlib.Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

BASE_TOML = """\
game = {game}

[market]
r = 0.01
b = {b}
sigma = {sigma}

[preferences]
alpha = 0.02
beta = 0.02
gamma = {gamma}
delta = 2.0
lambda = 1.0
mu = {mu}
{extra}
"""


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "pensiongame.cli", *args],
        capture_output=True,
        text=True,
        cwd=ROOT,
    )


def write_cfg(tmp_path, name="cfg.toml", game=1, b=0.144604, sigma=0.10748,
              gamma=2.0, mu=1.0, extra=""):
    p = tmp_path / name
    p.write_text(BASE_TOML.format(game=game, b=b, sigma=sigma, gamma=gamma,
                                  mu=mu, extra=extra))
    return p


def test_solve_game1_bull(tmp_path):
    r = run_cli("solve", "--config", str(CONFIGS / "bull_game1.toml"), "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    rec = json.loads((tmp_path / "solution.json").read_text())
    assert rec["feasible"] is True
    assert math.isclose(rec["solution"]["benefit_ratio"], 0.14570113839823966, rel_tol=1e-12)
    assert math.isclose(rec["solution"]["A"], 47.105770291586605, rel_tol=1e-12)
    # stdout carries the same record
    assert json.loads(r.stdout) == rec
    report = json.loads((tmp_path / "run_report.json").read_text())
    assert report["command"] == "solve"
    assert report["feasible"] is True
    assert set(report["outputs"]) == {"solution.json", "run_report.json"}
    assert report["wall_time_s"] >= 0.0
    assert report["config"]["game"] == 1


def test_solve_game2_bear(tmp_path):
    r = run_cli("solve", "--config", str(CONFIGS / "bear_game2.toml"), "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    rec = json.loads((tmp_path / "solution.json").read_text())
    assert math.isclose(rec["solution"]["omega"], 0.18293426010329934, rel_tol=1e-12)
    assert math.isclose(rec["solution"]["eta"], 0.092149177892554817, rel_tol=1e-12)


def test_solve_infeasible_exit_2(tmp_path):
    cfg = write_cfg(
        tmp_path, game=2, mu=0.1,
        extra="[barriers]\nl = 1.0\nv = 2.0\nx0 = 1.5\n",
    )
    r = run_cli("solve", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert r.returncode == 2
    rec = json.loads((tmp_path / "out" / "solution.json").read_text())
    assert rec["feasible"] is False
    assert rec["error"]["type"] == "EtaOutOfRange"
    report = json.loads((tmp_path / "out" / "run_report.json").read_text())
    assert report["feasible"] is False


def test_bad_config_exit_1(tmp_path):
    cfg = write_cfg(tmp_path, gamma=1.0)
    r = run_cli("solve", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert r.returncode == 1
    assert "config error" in r.stderr
    assert "gamma" in r.stderr


def test_missing_config_exit_1(tmp_path):
    r = run_cli("solve", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path))
    assert r.returncode == 1
    assert "config error" in r.stderr


def test_solve_pareto(tmp_path):
    cfg = write_cfg(tmp_path, game='"pareto"')
    r = run_cli("solve", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert r.returncode == 0, r.stderr
    rec = json.loads((tmp_path / "out" / "solution.json").read_text())
    assert math.isclose(rec["solution"]["A0"], 47.105770291586605, rel_tol=1e-12)


def test_sweep_writes_four_sheets_reproducibly(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    r1 = run_cli("sweep", "--config", str(CONFIGS / "sweep_default.toml"), "--out", str(out1))
    r2 = run_cli("sweep", "--config", str(CONFIGS / "sweep_default.toml"), "--out", str(out2))
    assert r1.returncode == 0, r1.stderr
    assert r2.returncode == 0
    names = ["game1_bull.csv", "game1_bear.csv", "game2_bull.csv", "game2_bear.csv"]
    for name in names:
        b1 = (out1 / name).read_bytes()
        b2 = (out2 / name).read_bytes()
        assert b1 == b2, name
        assert b1.count(b"\n") == 3601  # header + 60*60 cells
    header = (out1 / "game1_bull.csv").read_text().splitlines()[0]
    assert header == "gamma_delta,lambda_mu,benefit_ratio,invest_ratio,feasible,reason"
    report = json.loads((out1 / "run_report.json").read_text())
    assert set(report["outputs"]) == set(names) | {"run_report.json"}


def test_sweep_matches_library(tmp_path):
    from pensiongame import sweep, sweep_table_csv, validate_market
    from pensiongame.config import load_config

    out = tmp_path / "cli"
    r = run_cli("sweep", "--config", str(CONFIGS / "sweep_default.toml"), "--out", str(out))
    assert r.returncode == 0
    cfg = load_config(CONFIGS / "sweep_default.toml")
    table = sweep(
        validate_market(cfg.sweep.market_bull),
        validate_market(cfg.sweep.market_bear),
        cfg.preferences,
        cfg.sweep.axes,
        barriers=cfg.barriers,
    )
    want = sweep_table_csv(table, select={"game": 1, "market": "bull"})
    assert (out / "game1_bull.csv").read_text() == want


def test_sweep_without_table_exit_1(tmp_path):
    cfg = write_cfg(tmp_path)
    r = run_cli("sweep", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert r.returncode == 1
    assert "sweep" in r.stderr


def test_simulate_paths_csv(tmp_path):
    r = run_cli("simulate", "--config", str(CONFIGS / "simulate_paths.toml"), "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    lines = (tmp_path / "paths.csv").read_text().splitlines()
    assert lines[0] == "t,path_id,X"
    assert len(lines) == 1 + 10 * 12  # n_paths * n_steps, start row omitted
    t, pid, x = lines[1].split(",")
    assert pid == "0"
    assert float(t) == 0.08333333333333333
    assert float(x) > 0.0


def test_simulate_seed_override(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    base = str(CONFIGS / "simulate_paths.toml")
    assert run_cli("simulate", "--config", base, "--out", str(a)).returncode == 0
    assert run_cli("simulate", "--config", base, "--out", str(b)).returncode == 0
    assert run_cli("simulate", "--config", base, "--out", str(c), "--seed", "8").returncode == 0
    assert (a / "paths.csv").read_bytes() == (b / "paths.csv").read_bytes()
    assert (a / "paths.csv").read_bytes() != (c / "paths.csv").read_bytes()


def test_simulate_measure_shift(tmp_path):
    # same seed under two measures: log-paths differ by the drift gap times t
    extra_ref = (
        "[simulation]\nkind = \"paths\"\nmeasure = \"Reference\"\n"
        "x0 = 1.0\ndt = 0.08333333333333333\nn_steps = 12\nn_paths = 5\nseed = 21\n"
    )
    extra_wcu = extra_ref.replace("Reference", "WorstCaseUnion")
    cfg_ref = write_cfg(tmp_path, name="ref.toml", extra=extra_ref)
    cfg_wcu = write_cfg(tmp_path, name="wcu.toml", extra=extra_wcu)
    out_ref, out_wcu = tmp_path / "ref", tmp_path / "wcu"
    assert run_cli("simulate", "--config", str(cfg_ref), "--out", str(out_ref)).returncode == 0
    assert run_cli("simulate", "--config", str(cfg_wcu), "--out", str(out_wcu)).returncode == 0

    def parse(path):
        rows = [ln.split(",") for ln in path.read_text().splitlines()[1:]]
        return np.array([[float(t), float(x)] for t, _, x in rows])

    ref = parse(out_ref / "paths.csv")
    wcu = parse(out_wcu / "paths.csv")
    np.testing.assert_array_equal(ref[:, 0], wcu[:, 0])
    # frozen drift gap lam * theta^2 / (mu + delta)^2 at these preferences
    gap = 0.17426818453098621
    got = np.log(ref[:, 1]) - np.log(wcu[:, 1])
    np.testing.assert_allclose(got, gap * ref[:, 0], rtol=0, atol=1e-12)


def test_simulate_hitting_schema(tmp_path):
    extra = (
        "[barriers]\nl = 1.0\nv = 2.0\nx0 = 1.5\n\n"
        "[simulation]\nkind = \"hitting\"\ndt = 0.01\nn_paths = 800\nseed = 11\n"
    )
    cfg = write_cfg(tmp_path, game=2, b=0.014, sigma=0.2678, mu=0.1, extra=extra)
    out = tmp_path / "out"
    r = run_cli("simulate", "--config", str(cfg), "--out", str(out))
    assert r.returncode == 0, r.stderr
    rec = json.loads((out / "estimate.json").read_text())
    assert rec["n"] == 800
    assert rec["seed"] == 11
    assert 0.0 < rec["exit_probability"]["mean"] < 1.0
    assert rec["std_err"] > 0.0
    assert rec["censored_count"] == 0
    assert rec["mean_exit_time"] > 0.0
    assert rec["settings"]["kind"] == "hitting"
    assert rec["settings"]["dt"] == 0.01


def test_verify_game1_all_pass(tmp_path):
    r = run_cli("verify", "--config", str(CONFIGS / "bull_game1.toml"), "--out", str(tmp_path))
    assert r.returncode == 0, r.stdout + r.stderr
    lines = [ln for ln in r.stdout.splitlines() if ln]
    assert lines and all(ln.startswith("PASS ") for ln in lines)
    rec = json.loads((tmp_path / "verification.json").read_text())
    assert rec["all_pass"] is True
    names = {c["name"] for c in rec["checks"]}
    assert "payoff_identity_union" in names
    assert "hjbi_grid" in names
    assert "hjbi_negative_control" in names
    assert any(n.startswith("fd_gradient_") for n in names)


def test_verify_game2_all_pass(tmp_path):
    r = run_cli("verify", "--config", str(CONFIGS / "bear_game2.toml"), "--out", str(tmp_path))
    assert r.returncode == 0, r.stdout + r.stderr
    rec = json.loads((tmp_path / "verification.json").read_text())
    assert rec["all_pass"] is True
    names = {c["name"] for c in rec["checks"]}
    assert "mc_firm_payoff_barrier" in names
    assert "exit_probability" in names


def test_verify_pareto(tmp_path):
    cfg = write_cfg(tmp_path, game='"pareto"')
    r = run_cli("verify", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert r.returncode == 0, r.stdout + r.stderr
    assert "PASS pareto_matches_game_one_A" in r.stdout


def test_verify_detects_perturbed_coefficient(tmp_path):
    cfg = write_cfg(tmp_path, extra="[verify]\nunion_coeff_scale = 1.01\n")
    r = run_cli("verify", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert r.returncode == 3
    assert any(ln.startswith("FAIL ") for ln in r.stdout.splitlines())
    rec = json.loads((tmp_path / "out" / "verification.json").read_text())
    assert rec["all_pass"] is False
    by_name = {c["name"]: c for c in rec["checks"]}
    assert by_name["hjbi_grid"]["pass"] is False


def test_verify_infeasible_exit_2(tmp_path):
    cfg = write_cfg(
        tmp_path, game=2, mu=0.1,
        extra="[barriers]\nl = 1.0\nv = 2.0\nx0 = 1.5\n",
    )
    r = run_cli("verify", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert r.returncode == 2
    assert "infeasible" in r.stderr
    rec = json.loads((tmp_path / "out" / "verification.json").read_text())
    assert rec["feasible"] is False
    assert rec["error"]["type"] == "EtaOutOfRange"


def test_threads_flag_does_not_change_results(tmp_path):
    extra = (
        "[barriers]\nl = 1.0\nv = 2.0\nx0 = 1.5\n\n"
        "[simulation]\nkind = \"hitting\"\ndt = 0.01\nn_paths = 800\nseed = 11\n"
    )
    cfg = write_cfg(tmp_path, game=2, b=0.014, sigma=0.2678, mu=0.1, extra=extra)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("simulate", "--config", str(cfg), "--out", str(a), "--threads", "1").returncode == 0
    assert run_cli("simulate", "--config", str(cfg), "--out", str(b), "--threads", "4").returncode == 0
    ea = json.loads((a / "estimate.json").read_text())
    eb = json.loads((b / "estimate.json").read_text())
    assert ea["estimate"] == eb["estimate"]
    assert ea["std_err"] == eb["std_err"]
