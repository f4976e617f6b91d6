"""Command-line front end: solve / sweep / verify / simulate.

Exit codes are a stable contract: 0 success, 1 config parse or validation,
2 infeasible scenario, 3 verification failure. Every command writes a
run_report.json next to its artifacts; all numeric JSON uses 17 significant
digits and CSV floats round-trip exactly.
"""

from __future__ import annotations

import dataclasses
import sys
import time
from pathlib import Path

import click
import numpy as np

from .config import ScenarioConfig, SimulationSpec, config_echo, load_config
from .errors import (
    ConfigError,
    FeasibilityError,
    PropertyViolation,
    SimulationError,
    ValidationError,
)
from .game_one import solve_game_one, solve_pareto, value_functions_g1, wealth_law_g1
from .game_two import solve_game_two, value_functions_g2, wealth_law_g2
from .laws import MEASURE_TAGS, WORST_CASE_FIRM
from .market_model import Preferences, ValidatedMarket, validate_market
from .sensitivity import FD_PARAMS, benefit_ratio_gradient, fd_gradient, sweep, sweep_table_csv
from .serialize import csv_num, dumps, write_json
from .stochastics import (
    PathGrid,
    analytic_payoff_g1,
    exit_probability_gbm,
    gbm_moment,
    hjbi_grid_check,
    mc_firm_payoff_g2,
    mc_payoff_firm_g1,
    mc_payoff_union_g1,
    sample_paths,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3


def _common(fn):
    fn = click.option("--threads", type=int, default=1, show_default=True,
                      help="Worker threads; never changes results.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the config's simulation/verification seed.")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
                      show_default=True, help="Directory for output artifacts.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                      required=True, help="Scenario config (.toml or .json).")(fn)
    return fn


def _load(config_path: str) -> ScenarioConfig:
    try:
        return load_config(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _validated(cfg: ScenarioConfig) -> ValidatedMarket:
    try:
        return validate_market(cfg.market)
    except ValidationError as exc:
        click.echo(f"config error: market: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _write_report(out: Path, command: str, cfg: ScenarioConfig, outputs: list[str],
                  feasible: bool, t_start: float) -> None:
    report = {
        "command": command,
        "config": config_echo(cfg),
        "outputs": outputs + ["run_report.json"],
        "feasible": feasible,
        "wall_time_s": time.perf_counter() - t_start,
    }
    write_json(out / "run_report.json", report)


def _solution_record(cfg: ScenarioConfig, m: ValidatedMarket):
    if cfg.game == 1:
        sol = solve_game_one(m, cfg.preferences)
    elif cfg.game == 2:
        sol = solve_game_two(m, cfg.preferences, cfg.barriers)
    else:
        sol = solve_pareto(m, cfg.preferences)
    rec = {"game": cfg.game, "feasible": True, "solution": {}}
    for f in dataclasses.fields(sol):
        v = getattr(sol, f.name)
        rec["solution"][f.name] = v.tolist() if isinstance(v, np.ndarray) else v
    return rec


@click.group()
def main():
    """Closed-form robust pension-game solver with simulation verification."""


@main.command()
@_common
def solve(config_path, out_dir, seed, threads):
    """Solve the configured game and write the solution as JSON."""
    t0 = time.perf_counter()
    cfg = _load(config_path)
    m = _validated(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        rec = _solution_record(cfg, m)
    except FeasibilityError as exc:
        rec = {
            "game": cfg.game,
            "feasible": False,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        write_json(out / "solution.json", rec)
        _write_report(out, "solve", cfg, ["solution.json"], False, t0)
        click.echo(dumps(rec))
        sys.exit(EXIT_INFEASIBLE)
    write_json(out / "solution.json", rec)
    _write_report(out, "solve", cfg, ["solution.json"], True, t0)
    click.echo(dumps(rec))


@main.command(name="sweep")
@_common
def sweep_cmd(config_path, out_dir, seed, threads):
    """Run the configured parameter sweep and write one CSV per sheet."""
    t0 = time.perf_counter()
    cfg = _load(config_path)
    if cfg.sweep is None:
        click.echo("config error: sweep command needs a [sweep] table", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        m_bull = validate_market(cfg.sweep.market_bull)
        m_bear = validate_market(cfg.sweep.market_bear)
    except ValidationError as exc:
        click.echo(f"config error: sweep market: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = sweep(m_bull, m_bear, cfg.preferences, cfg.sweep.axes, barriers=cfg.barriers)
    names = [ax.name for ax in table.axes]
    outputs = []
    if "game" in names and "market" in names:
        for g in table.axis("game").values:
            for mkt in table.axis("market").values:
                csv_text = sweep_table_csv(table, select={"game": g, "market": mkt})
                fname = f"game{g}_{mkt}.csv"
                (out / fname).write_text(csv_text, encoding="utf-8")
                outputs.append(fname)
    else:
        (out / "sweep.csv").write_text(sweep_table_csv(table), encoding="utf-8")
        outputs.append("sweep.csv")
    _write_report(out, "sweep", cfg, outputs, True, t0)
    click.echo(f"wrote {len(outputs)} sweep sheet(s) to {out}")


def _check(name: str, target: float, achieved: float, tolerance: float) -> dict:
    return {
        "name": name,
        "target": target,
        "achieved": achieved,
        "tolerance": tolerance,
        "pass": bool(abs(achieved - target) <= tolerance),
    }


def _moment_checks(law_by_tag: dict, exponents, n_paths: int, seed: int, threads: int) -> list[dict]:
    checks = []
    grid = PathGrid(t0=0.0, dt=1.0 / 12, n_steps=12, n_paths=n_paths, seed=seed)
    for tag in MEASURE_TAGS:
        law = law_by_tag[tag]
        x1 = sample_paths(law, 1.0, grid)[:, -1]
        for m_exp in exponents:
            sample = x1**m_exp
            achieved = float(np.mean(sample))
            se = float(np.std(sample, ddof=1) / np.sqrt(n_paths))
            target = gbm_moment(law, 1.0, m_exp, 1.0)
            checks.append(_check(f"moment_{tag}_m{m_exp:g}", target, achieved, 4.0 * se))
    return checks


def _verify_game_one(cfg: ScenarioConfig, m: ValidatedMarket, seed: int, threads: int) -> list[dict]:
    p = cfg.preferences
    v = cfg.verify
    sol = solve_game_one(m, p)
    checks = []

    laws = {tag: wealth_law_g1(sol, m, p, tag) for tag in MEASURE_TAGS}
    exps = []
    for e in (1.0, 1.0 - p.gamma, 2.0 - 2.0 * p.gamma, 1.0 - p.delta, 2.0 - 2.0 * p.delta):
        if e not in exps:
            exps.append(e)
    checks += _moment_checks(laws, exps, v.moment_paths, seed, threads)

    x0 = 1.0
    wu, wf = value_functions_g1(sol, p, 0.0, x0)
    au = analytic_payoff_g1(sol, m, p, "union", 0.0, x0)
    af = analytic_payoff_g1(sol, m, p, "firm", 0.0, x0)
    checks.append(_check("payoff_identity_union", wu, au, 1e-9 * abs(wu)))
    checks.append(_check("payoff_identity_firm", wf, af, 1e-9 * abs(wf)))

    grid = PathGrid(
        t0=0.0,
        dt=v.payoff_dt,
        n_steps=max(1, round(v.payoff_horizon / v.payoff_dt)),
        n_paths=v.payoff_paths,
        seed=seed,
    )
    est_u = mc_payoff_union_g1(sol, m, p, x0, grid, threads=threads)
    est_f = mc_payoff_firm_g1(sol, m, p, x0, grid, threads=threads)
    checks.append(_check("mc_payoff_union", wu, est_u.mean, 3.0 * est_u.std_err))
    checks.append(_check("mc_payoff_firm", wf, est_f.mean, 3.0 * est_f.std_err))

    checks.append(_hjbi_checks(1, sol, m, p, None, cfg))
    checks.append(_negative_control(1, sol, m, p, None))

    grad = benefit_ratio_gradient(m, p)
    analytic = {
        "alpha": grad.d_alpha,
        "r": grad.d_r,
        "theta": grad.d_theta,
        "gamma": grad.d_gamma,
        "lambda": grad.d_lambda,
        "mu": grad.d_mu_delta,
        "delta": grad.d_mu_delta,
    }
    for param in FD_PARAMS:
        fd = fd_gradient(m, p, param)
        tol = 1e-6 * max(1.0, abs(analytic[param]))
        checks.append(_check(f"fd_gradient_{param}", analytic[param], fd, tol))
    return checks


def _verify_game_two(cfg: ScenarioConfig, m: ValidatedMarket, seed: int, threads: int) -> list[dict]:
    p = cfg.preferences
    v = cfg.verify
    bar = cfg.barriers
    sol = solve_game_two(m, p, bar)
    checks = []

    laws = {tag: wealth_law_g2(sol, m, p, tag) for tag in MEASURE_TAGS}
    exps = []
    for e in (1.0, 1.0 - p.gamma, 2.0 - 2.0 * p.gamma, 1.0 - p.delta, 2.0 - 2.0 * p.delta):
        if e not in exps:
            exps.append(e)
    checks += _moment_checks(laws, exps, v.moment_paths, seed, threads)

    _, wfb = value_functions_g2(sol, p, bar, 0.0, bar.x0)
    grid = PathGrid(t0=0.0, dt=v.hitting_dt, n_steps=1, n_paths=v.payoff_paths, seed=seed)
    res = mc_firm_payoff_g2(sol, m, p, bar, grid, threads=threads)
    checks.append(
        _check(
            "mc_firm_payoff_barrier",
            wfb,
            res.payoff.mean,
            max(3.0 * res.payoff.std_err, 0.005),
        )
    )
    p_exit = exit_probability_gbm(laws[WORST_CASE_FIRM], bar.l, bar.v, bar.x0)
    checks.append(
        _check(
            "exit_probability",
            p_exit,
            res.exit_probability.mean,
            3.0 * res.exit_probability.std_err,
        )
    )

    checks.append(_hjbi_checks(2, sol, m, p, bar, cfg))
    checks.append(_negative_control(2, sol, m, p, bar))
    return checks


def _hjbi_checks(which, sol, m, p, bar, cfg: ScenarioConfig) -> dict:
    scale = cfg.verify.union_coeff_scale
    try:
        rep = hjbi_grid_check(which, sol, m, p, bar, union_coeff_scale=scale)
        achieved = max(
            rep.max_abs_residual_at_candidate,
            -rep.min_over_h_slack,
            rep.max_over_controls_slack,
        )
        return _check("hjbi_grid", 0.0, achieved, 1e-9)
    except PropertyViolation as exc:
        return _check("hjbi_grid", 0.0, abs(exc.slack or 1.0), 1e-9)


def _negative_control(which, sol, m, p, bar) -> dict:
    # the check must have power: a 1% error in the union coefficient trips it
    try:
        hjbi_grid_check(which, sol, m, p, bar, union_coeff_scale=1.01)
        return {
            "name": "hjbi_negative_control",
            "target": 1e-9,
            "achieved": 0.0,
            "tolerance": 0.0,
            "pass": False,
        }
    except PropertyViolation as exc:
        achieved = abs(exc.slack or 0.0)
        return {
            "name": "hjbi_negative_control",
            "target": 1e-9,
            "achieved": achieved,
            "tolerance": 0.0,
            "pass": bool(achieved > 1e-9),
        }


@main.command()
@_common
def verify(config_path, out_dir, seed, threads):
    """Run the scenario's verification suite and write the check report."""
    t0 = time.perf_counter()
    cfg = _load(config_path)
    m = _validated(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    use_seed = cfg.verify.seed if seed is None else seed
    try:
        if cfg.game == 1:
            checks = _verify_game_one(cfg, m, use_seed, threads)
        elif cfg.game == 2:
            checks = _verify_game_two(cfg, m, use_seed, threads)
        else:
            par = solve_pareto(m, cfg.preferences)
            p = cfg.preferences
            matched = Preferences(
                alpha=p.alpha, beta=p.alpha, gamma=p.gamma, delta=p.gamma,
                lam=p.lam, mu=p.lam,
            )
            twin = solve_game_one(m, matched)
            checks = [_check("pareto_matches_game_one_A", twin.A, par.A0, 1e-12 * abs(twin.A))]
    except FeasibilityError as exc:
        rec = {
            "command": "verify",
            "feasible": False,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        write_json(out / "verification.json", rec)
        _write_report(out, "verify", cfg, ["verification.json"], False, t0)
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    all_pass = all(c["pass"] for c in checks)
    write_json(out / "verification.json", {"command": "verify", "all_pass": all_pass, "checks": checks})
    _write_report(out, "verify", cfg, ["verification.json"], True, t0)
    for c in checks:
        click.echo(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}")
    if not all_pass:
        sys.exit(EXIT_VERIFY)


def _paths_csv(law, x0: float, grid: PathGrid) -> str:
    x = sample_paths(law, x0, grid)
    times = grid.times()[1:]
    lines = ["t,path_id,X"]
    for i in range(grid.n_paths):
        for k, t in enumerate(times):
            lines.append(f"{csv_num(t)},{i},{csv_num(x[i, k + 1])}")
    return "\n".join(lines) + "\n"


@main.command()
@_common
def simulate(config_path, out_dir, seed, threads):
    """Sample paths or estimate a payoff, per the [simulation] table."""
    t0 = time.perf_counter()
    cfg = _load(config_path)
    m = _validated(cfg)
    if cfg.simulation is None:
        click.echo("config error: simulate command needs a [simulation] table", err=True)
        sys.exit(EXIT_CONFIG)
    sim = cfg.simulation
    p = cfg.preferences
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    use_seed = sim.seed if seed is None else seed
    outputs: list[str] = []
    try:
        if sim.kind == "hitting":
            sol = solve_game_two(m, p, cfg.barriers)
            grid = PathGrid(t0=sim.t0, dt=sim.dt, n_steps=1, n_paths=sim.n_paths, seed=use_seed)
            res = mc_firm_payoff_g2(
                sol, m, p, cfg.barriers, grid, horizon_cap=sim.horizon_cap, threads=threads
            )
            rec = {
                "estimate": res.payoff.mean,
                "std_err": res.payoff.std_err,
                "n": res.payoff.n,
                "seed": use_seed,
                "censored_count": res.censored_count,
                "mean_exit_time": res.mean_exit_time,
                "exit_probability": {
                    "mean": res.exit_probability.mean,
                    "std_err": res.exit_probability.std_err,
                },
                "settings": _sim_echo(sim, use_seed),
            }
            write_json(out / "estimate.json", rec)
            outputs.append("estimate.json")
        elif sim.kind in ("payoff_union", "payoff_firm"):
            sol = solve_game_one(m, p)
            x0 = sim.x0 if sim.x0 is not None else cfg.barriers.x0
            grid = PathGrid(t0=sim.t0, dt=sim.dt, n_steps=sim.n_steps, n_paths=sim.n_paths, seed=use_seed)
            est_fn = mc_payoff_union_g1 if sim.kind == "payoff_union" else mc_payoff_firm_g1
            est = est_fn(sol, m, p, x0, grid, tail=sim.tail, threads=threads)
            rec = {
                "mean": est.mean,
                "std_err": est.std_err,
                "n": est.n,
                "seed": est.seed,
                "settings": _sim_echo(sim, use_seed),
            }
            write_json(out / "estimate.json", rec)
            outputs.append("estimate.json")
        else:  # paths
            if cfg.game == 1:
                sol = solve_game_one(m, p)
                law = wealth_law_g1(sol, m, p, sim.measure)
            else:
                sol = solve_game_two(m, p, cfg.barriers)
                law = wealth_law_g2(sol, m, p, sim.measure)
            x0 = sim.x0 if sim.x0 is not None else cfg.barriers.x0
            grid = PathGrid(t0=sim.t0, dt=sim.dt, n_steps=sim.n_steps, n_paths=sim.n_paths, seed=use_seed)
            (out / "paths.csv").write_text(_paths_csv(law, x0, grid), encoding="utf-8")
            outputs.append("paths.csv")
    except FeasibilityError as exc:
        click.echo(f"infeasible: {exc}", err=True)
        _write_report(out, "simulate", cfg, outputs, False, t0)
        sys.exit(EXIT_INFEASIBLE)
    except SimulationError as exc:
        click.echo(f"simulation error: {type(exc).__name__}: {exc}", err=True)
        _write_report(out, "simulate", cfg, outputs, False, t0)
        sys.exit(EXIT_INFEASIBLE)
    _write_report(out, "simulate", cfg, outputs, True, t0)
    click.echo(f"wrote {', '.join(outputs)} to {out}")


def _sim_echo(sim: SimulationSpec, seed: int) -> dict:
    d = {
        "kind": sim.kind,
        "measure": sim.measure,
        "dt": sim.dt,
        "n_steps": sim.n_steps,
        "n_paths": sim.n_paths,
        "seed": seed,
        "t0": sim.t0,
        "horizon_cap": sim.horizon_cap,
        "tail": sim.tail,
    }
    if sim.x0 is not None:
        d["x0"] = sim.x0
    return d


if __name__ == "__main__":
    main()
