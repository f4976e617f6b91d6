import math

import numpy as np
import pytest
from scipy.special import ndtri

from pensiongame import (
    Preferences,
    WORST_CASE_FIRM,
    solve_game_one,
    value_functions_g1,
    value_functions_g2,
    wealth_law_g2,
)
from pensiongame.errors import (
    DivergentIntegral,
    ExcessiveCensoring,
    InadmissibleSolution,
    TailBoundNotMet,
)
from pensiongame.game_one import GameOneSolution
from pensiongame.stochastics import (
    PathGrid,
    analytic_payoff_g1,
    mc_firm_payoff_g2,
    mc_firm_payoff_g2_ladder,
    mc_payoff_firm_g1,
    mc_payoff_union_g1,
    path_substream,
)

from conftest import assert_close


# --- analytic payoff vs closed-form value ---------------------------------


@pytest.mark.parametrize("s,x0", [(0.0, 1.0), (0.0, 0.5), (2.5, 1.7), (10.0, 3.0)])
def test_analytic_payoff_reproduces_values(g1_anchor, bull, anchor_prefs, s, x0):
    w_u, w_f = value_functions_g1(g1_anchor, anchor_prefs, s, x0)
    got_u = analytic_payoff_g1(g1_anchor, bull, anchor_prefs, "union", s, x0)
    got_f = analytic_payoff_g1(g1_anchor, bull, anchor_prefs, "firm", s, x0)
    assert_close(got_u, w_u)
    assert_close(got_f, w_f)


def test_analytic_payoff_no_ambiguity(bull):
    p = Preferences(alpha=0.02, beta=0.02, gamma=2.0, delta=2.0, lam=0.0, mu=0.0)
    s = solve_game_one(bull, p)
    w_u, w_f = value_functions_g1(s, p, 0.0, 1.0)
    assert_close(analytic_payoff_g1(s, bull, p, "union", 0.0, 1.0), w_u)
    assert_close(analytic_payoff_g1(s, bull, p, "firm", 0.0, 1.0), w_f)


def test_analytic_payoff_bad_side(g1_anchor, bull, anchor_prefs):
    with pytest.raises(ValueError):
        analytic_payoff_g1(g1_anchor, bull, anchor_prefs, "regulator", 0.0, 1.0)


def test_divergent_integral_counterexample(bull):
    # the solver accepts these inputs (positive bracket) yet the discounted
    # payoff integral diverges; the guard must refuse to price it
    p = Preferences(alpha=0.02, beta=0.02, gamma=10.0, delta=10.0, lam=4.0, mu=4.0)
    s = solve_game_one(bull, p)
    assert s.bracket_A > 0.0
    with pytest.raises(DivergentIntegral):
        analytic_payoff_g1(s, bull, p, "union", 0.0, 1.0)
    grid = PathGrid(t0=0.0, dt=0.01, n_steps=10, n_paths=8, seed=1)
    with pytest.raises(DivergentIntegral):
        mc_payoff_union_g1(s, bull, p, 1.0, grid)


def test_inadmissible_solution_guard(g1_anchor, bull, anchor_prefs):
    bad = GameOneSolution(
        A=-1.0,
        B=g1_anchor.B,
        bracket_A=g1_anchor.bracket_A,
        bracket_B=g1_anchor.bracket_B,
        benefit_ratio=g1_anchor.benefit_ratio,
        invest_ratio_vec=np.array(g1_anchor.invest_ratio_vec),
        h_U_star=np.array(g1_anchor.h_U_star),
        h_F_star=np.array(g1_anchor.h_F_star),
    )
    grid = PathGrid(t0=0.0, dt=0.01, n_steps=10, n_paths=8, seed=1)
    with pytest.raises(InadmissibleSolution):
        mc_payoff_union_g1(bad, bull, anchor_prefs, 1.0, grid)
    with pytest.raises(InadmissibleSolution):
        analytic_payoff_g1(bad, bull, anchor_prefs, "union", 0.0, 1.0)


# --- game-one Monte-Carlo payoffs ------------------------------------------


def test_mc_union_payoff_consistent(g1_anchor, bull, anchor_prefs):
    grid = PathGrid(t0=0.0, dt=1.0 / 252, n_steps=504, n_paths=20_000, seed=99)
    est = mc_payoff_union_g1(g1_anchor, bull, anchor_prefs, 1.0, grid)
    w_u, _ = value_functions_g1(g1_anchor, anchor_prefs, 0.0, 1.0)
    assert est.n == 20_000
    assert est.std_err > 0.0
    assert abs(est.mean - w_u) < 4.0 * est.std_err


def test_mc_firm_payoff_consistent(g1_anchor, bull, anchor_prefs):
    grid = PathGrid(t0=0.0, dt=1.0 / 252, n_steps=504, n_paths=20_000, seed=99)
    est = mc_payoff_firm_g1(g1_anchor, bull, anchor_prefs, 1.0, grid)
    _, w_f = value_functions_g1(g1_anchor, anchor_prefs, 0.0, 1.0)
    assert abs(est.mean - w_f) < 4.0 * est.std_err


def test_mc_payoff_deterministic_given_seed(g1_anchor, bull, anchor_prefs):
    grid = PathGrid(t0=0.0, dt=0.02, n_steps=50, n_paths=5000, seed=7)
    a = mc_payoff_union_g1(g1_anchor, bull, anchor_prefs, 1.0, grid)
    b = mc_payoff_union_g1(g1_anchor, bull, anchor_prefs, 1.0, grid)
    assert a.mean == b.mean and a.std_err == b.std_err


def test_mc_payoff_thread_invariance(g1_anchor, bull, anchor_prefs):
    grid = PathGrid(t0=0.0, dt=0.02, n_steps=60, n_paths=9000, seed=13)
    one = mc_payoff_union_g1(g1_anchor, bull, anchor_prefs, 1.0, grid, threads=1)
    three = mc_payoff_union_g1(g1_anchor, bull, anchor_prefs, 1.0, grid, threads=3)
    assert one.mean == three.mean
    assert one.std_err == three.std_err


def test_deterministic_tail_bound_enforced(g1_anchor, bull, anchor_prefs):
    # at a 10-year horizon the closed-form tail is far above 0.1% of |W_U|
    grid = PathGrid(t0=0.0, dt=0.05, n_steps=200, n_paths=64, seed=3)
    with pytest.raises(TailBoundNotMet):
        mc_payoff_union_g1(g1_anchor, bull, anchor_prefs, 1.0, grid, tail="deterministic")


def test_bad_tail_mode(g1_anchor, bull, anchor_prefs):
    grid = PathGrid(t0=0.0, dt=0.05, n_steps=10, n_paths=8, seed=3)
    with pytest.raises(ValueError):
        mc_payoff_union_g1(g1_anchor, bull, anchor_prefs, 1.0, grid, tail="none")


# --- barrier engine brute-force reference ----------------------------------


def brute_force_barrier(law, bar, seed, n_paths, dt, strides, cap_steps, k):
    """Straight per-path mirror of the monitored barrier walk."""
    yl, yv, y0 = math.log(bar.l), math.log(bar.v), math.log(bar.x0)
    vol = math.sqrt(law.vol_sq)
    out = {s: {"pen": [], "upper": [], "exit_step": [], "censored": []} for s in strides}
    for i in range(n_paths):
        g = path_substream(seed, i)
        z = ndtri(g.random(cap_steps) + 2.0**-54)
        y = y0 + np.cumsum(law.log_drift * dt + vol * math.sqrt(dt) * z)
        for s in strides:
            checkpoints = np.arange(s - 1, cap_steps, s)
            ys = y[checkpoints]
            crossed = (ys <= yl) | (ys >= yv)
            pen = bar.x0**k
            if crossed.any():
                fc = int(np.argmax(crossed))
                pen += float(np.exp(k * ys[:fc]).sum())
                out[s]["exit_step"].append((fc + 1) * s)
                out[s]["upper"].append(bool(ys[fc] >= yv))
                out[s]["censored"].append(False)
            else:
                pen += float(np.exp(k * ys).sum())
                out[s]["exit_step"].append(0)
                out[s]["upper"].append(False)
                out[s]["censored"].append(True)
            out[s]["pen"].append(pen)
    return out


def test_barrier_engine_matches_brute_force(g2_anchor, bear, g2_prefs, barriers):
    sol, p = g2_anchor, g2_prefs
    dt = 0.003
    strides = (4, 2, 1)
    grid = PathGrid(t0=0.0, dt=dt, n_steps=1, n_paths=64, seed=31)
    ladder = mc_firm_payoff_g2_ladder(
        sol, bear, p, barriers, grid, horizon_cap=200.0, strides=strides
    )
    lcm = strides[0]
    cap_steps = int(math.ceil(200.0 / dt / lcm)) * lcm
    law = wealth_law_g2(sol, bear, p, WORST_CASE_FIRM)
    k = 1.0 - sol.eta
    q = float(sol.h_F_star @ sol.h_F_star) / (2.0 * p.mu)
    denom = barriers.v**k - barriers.l**k
    ref = brute_force_barrier(law, barriers, 31, 64, dt, strides, cap_steps, k)

    for est, s in zip(ladder, strides):
        r = ref[s]
        dt_m = s * dt
        payoff = np.array(r["upper"], dtype=float) + (q * dt_m / denom) * np.array(r["pen"])
        assert est.censored_count == sum(r["censored"])
        assert est.exit_probability.mean == np.mean(np.array(r["upper"], dtype=float))
        assert_close(est.payoff.mean, payoff.mean(), rtol=1e-12)
        exited = ~np.array(r["censored"])
        want_tau = np.array(r["exit_step"])[exited].mean() * dt
        assert_close(est.mean_exit_time, want_tau, rtol=1e-12)
        assert est.dt_monitor == dt_m


def test_ladder_exit_times_monotone(g2_anchor, bear, g2_prefs, barriers):
    # finer monitors see crossings no later than coarser ones, pathwise
    grid = PathGrid(t0=0.0, dt=1.0 / 200, n_steps=1, n_paths=2000, seed=41)
    ladder = mc_firm_payoff_g2_ladder(
        g2_anchor, bear, g2_prefs, barriers, grid, horizon_cap=200.0, strides=(4, 2, 1)
    )
    taus = [est.mean_exit_time for est in ladder]
    assert taus[0] >= taus[1] >= taus[2]
    # and exit probabilities stay consistent with the closed form
    law = wealth_law_g2(g2_anchor, bear, g2_prefs, WORST_CASE_FIRM)
    from pensiongame.stochastics import exit_probability_gbm

    want = exit_probability_gbm(law, barriers.l, barriers.v, barriers.x0)
    fine = ladder[-1]
    z = (fine.exit_probability.mean - want) / fine.exit_probability.std_err
    assert abs(z) < 4.0


def test_single_monitor_wrapper(g2_anchor, bear, g2_prefs, barriers):
    grid = PathGrid(t0=0.0, dt=0.01, n_steps=1, n_paths=500, seed=17)
    est = mc_firm_payoff_g2(g2_anchor, bear, g2_prefs, barriers, grid, horizon_cap=200.0)
    assert est.dt_monitor == 0.01
    assert est.payoff.n == 500
    assert 0.0 < est.payoff.mean < 1.5
    assert est.censored_count == 0


def test_barrier_thread_invariance(g2_anchor, bear, g2_prefs, barriers):
    grid = PathGrid(t0=0.0, dt=0.1, n_steps=1, n_paths=5000, seed=53)
    one = mc_firm_payoff_g2(
        g2_anchor, bear, g2_prefs, barriers, grid, horizon_cap=200.0, threads=1
    )
    two = mc_firm_payoff_g2(
        g2_anchor, bear, g2_prefs, barriers, grid, horizon_cap=200.0, threads=2
    )
    assert one.payoff.mean == two.payoff.mean
    assert one.payoff.std_err == two.payoff.std_err
    assert one.exit_probability.mean == two.exit_probability.mean
    assert one.censored_count == two.censored_count


def test_excessive_censoring_raises(g2_anchor, bear, g2_prefs, barriers):
    # a one-year cap leaves nearly every path alive (mean exit ~ 18 years)
    grid = PathGrid(t0=0.0, dt=0.01, n_steps=1, n_paths=200, seed=5)
    with pytest.raises(ExcessiveCensoring):
        mc_firm_payoff_g2(g2_anchor, bear, g2_prefs, barriers, grid, horizon_cap=1.0)


def test_ladder_stride_validation(g2_anchor, bear, g2_prefs, barriers):
    grid = PathGrid(t0=0.0, dt=0.01, n_steps=1, n_paths=8, seed=5)
    with pytest.raises(ValueError):
        mc_firm_payoff_g2_ladder(
            g2_anchor, bear, g2_prefs, barriers, grid, strides=(1, 2, 4)
        )
    with pytest.raises(ValueError):
        mc_firm_payoff_g2_ladder(
            g2_anchor, bear, g2_prefs, barriers, grid, strides=(6, 4, 1)
        )
