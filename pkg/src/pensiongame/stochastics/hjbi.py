"""Grid verification of the equilibrium HJBI properties.

For each game the two coupled PDEs are evaluated directly from the
closed-form value functions (no homogeneity shortcut: W, W_s, W_x, W_xx are
formed and combined through the generator term by term). Three properties
are checked on a surplus grid crossed with control grids:

  (i)   candidate controls with the hedge varied: the PDE operator stays
        >= 0, and its minimum over the hedge grid sits at the candidate
        hedge (the adversary cannot push the value below the solution);
  (ii)  hedge at the candidate with the player's own control varied: the
        operator stays <= 0 (no unilateral improvement);
  (iii) everything at the candidate: the residual vanishes.

Controls are varied along the candidate direction (factor grids), which is
exact for one asset and a directional check otherwise. Tolerances scale
with 1 + |W(x)| per grid point. A violation raises PropertyViolation with
the offending point; `union_coeff_scale` deliberately mis-scales the
union's value coefficient so the check's power can be demonstrated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import PropertyViolation
from ..game_one import GameOneSolution
from ..game_two import Barriers, GameTwoSolution
from ..market_model import Preferences, ValidatedMarket

_DEFAULT_TOL_SCALE = 1e-9


@dataclass(frozen=True)
class HjbiReport:
    """Worst normalized slacks over the verification grids.

    Residuals and slacks are divided by 1 + |W(x)| pointwise. A passing
    report has |max_abs_residual_at_candidate| <= tol, min_over_h_slack
    >= -tol and max_over_controls_slack <= +tol.
    """

    max_abs_residual_at_candidate: float
    min_over_h_slack: float
    max_over_controls_slack: float
    grid_size: dict


class _Accumulator:
    def __init__(self, tol_scale: float):
        self.tol = tol_scale
        self.cand = 0.0
        self.hmin = math.inf
        self.cmax = -math.inf

    def candidate(self, pde: str, x: np.ndarray, g: np.ndarray, absw: np.ndarray):
        r = g / (1.0 + absw)
        worst = int(np.argmax(np.abs(r)))
        self.cand = max(self.cand, abs(float(r[worst])))
        if abs(float(r[worst])) > self.tol:
            raise PropertyViolation(
                f"{pde}: residual at candidate controls is {float(r[worst])} "
                f"(normalized) at x={float(x[worst])}",
                point={"pde": pde, "property": "candidate_residual", "x": float(x[worst])},
                slack=float(r[worst]),
            )

    def hedge(self, pde: str, x: np.ndarray, f: np.ndarray, g: np.ndarray, absw: np.ndarray):
        r = g / (1.0 + absw[:, None])
        i, j = np.unravel_index(int(np.argmin(r)), r.shape)
        self.hmin = min(self.hmin, float(r[i, j]))
        if float(r[i, j]) < -self.tol:
            raise PropertyViolation(
                f"{pde}: operator drops to {float(r[i, j])} (normalized) below the "
                f"solution at x={float(x[i])}, hedge factor {float(f[j])}",
                point={
                    "pde": pde,
                    "property": "hedge_minimum",
                    "x": float(x[i]),
                    "factor": float(f[j]),
                },
                slack=float(r[i, j]),
            )

    def own_control(self, pde: str, x: np.ndarray, f: np.ndarray, g: np.ndarray, absw: np.ndarray):
        r = g / (1.0 + absw[:, None])
        i, j = np.unravel_index(int(np.argmax(r)), r.shape)
        self.cmax = max(self.cmax, float(r[i, j]))
        if float(r[i, j]) > self.tol:
            raise PropertyViolation(
                f"{pde}: operator rises to {float(r[i, j])} (normalized) above zero "
                f"at x={float(x[i])}, control factor {float(f[j])}",
                point={
                    "pde": pde,
                    "property": "own_control_maximum",
                    "x": float(x[i]),
                    "factor": float(f[j]),
                },
                slack=float(r[i, j]),
            )


def _market_scalars(m: ValidatedMarket, inv: np.ndarray, h_star: np.ndarray):
    c_ex = float(inv @ m.excess)
    c_h = float(inv @ (m.sigma @ h_star))
    c_qd = float(inv @ (m.Sigma @ inv))
    return c_ex, c_h, c_qd


def _check_power_union(
    acc: _Accumulator,
    pde: str,
    m: ValidatedMarket,
    x: np.ndarray,
    f: np.ndarray,
    *,
    coeff: float,
    discount: float,
    gamma: float,
    lam: float,
    benefit: float,
    inv: np.ndarray,
    h_star: np.ndarray,
    s: float,
):
    """Union-side PDE for a power-form value W = coeff e^{-ds} x^{1-g}/(1-g)."""
    c_ex, c_h, c_qd = _market_scalars(m, inv, h_star)
    h_sq = float(h_star @ h_star)
    disc = math.exp(-discount * s)
    wfac = coeff * disc
    xq = x ** (1.0 - gamma)
    w = wfac * xq / (1.0 - gamma)
    absw = np.abs(w)
    pen = 0.0 if lam == 0.0 else h_sq / (2.0 * lam)
    util_cand = disc * (benefit * x) ** (1.0 - gamma) / (1.0 - gamma)
    # x W_x = wfac x^{1-gamma}; x^2 W_xx = -gamma wfac x^{1-gamma}
    drift_cand = (m.r + c_ex - benefit - c_h) * wfac * xq
    quad = -0.5 * gamma * c_qd * wfac * xq
    g_cand = -discount * w + drift_cand + quad + util_cand + (1.0 - gamma) * pen * w
    acc.candidate(pde, x, g_cand, absw)
    # vary the hedge: linear drift piece in the factor, quadratic penalty
    g_h = (
        -discount * w[:, None]
        + ((m.r + c_ex - benefit) - c_h * f[None, :]) * (wfac * xq)[:, None]
        + quad[:, None]
        + util_cand[:, None]
        + (1.0 - gamma) * pen * w[:, None] * f[None, :] ** 2
    )
    acc.hedge(pde, x, f, g_h, absw)
    # vary the benefit control at the candidate hedge
    util_f = disc * (benefit * x[:, None] * f[None, :]) ** (1.0 - gamma) / (1.0 - gamma)
    g_b = (
        -discount * w[:, None]
        + ((m.r + c_ex - c_h) - benefit * f[None, :]) * (wfac * xq)[:, None]
        + quad[:, None]
        + util_f
        + (1.0 - gamma) * pen * w[:, None]
    )
    acc.own_control(pde, x, f, g_b, absw)


def _check_power_firm(
    acc: _Accumulator,
    pde: str,
    m: ValidatedMarket,
    x: np.ndarray,
    f: np.ndarray,
    *,
    coeff: float,
    discount: float,
    delta: float,
    mu: float,
    benefit: float,
    inv: np.ndarray,
    h_star: np.ndarray,
    s: float,
):
    """Firm-side PDE for a power-form value W = coeff e^{-ds} x^{1-d}/(1-d)."""
    c_ex, c_h, c_qd = _market_scalars(m, inv, h_star)
    h_sq = float(h_star @ h_star)
    disc = math.exp(-discount * s)
    wfac = coeff * disc
    xq = x ** (1.0 - delta)
    w = wfac * xq / (1.0 - delta)
    absw = np.abs(w)
    pen = 0.0 if mu == 0.0 else h_sq / (2.0 * mu)
    util = disc * xq / (1.0 - delta)
    drift_cand = (m.r + c_ex - benefit - c_h) * wfac * xq
    quad_cand = -0.5 * delta * c_qd * wfac * xq
    g_cand = -discount * w + drift_cand + quad_cand + util + (1.0 - delta) * pen * w
    acc.candidate(pde, x, g_cand, absw)
    g_h = (
        -discount * w[:, None]
        + ((m.r + c_ex - benefit) - c_h * f[None, :]) * (wfac * xq)[:, None]
        + quad_cand[:, None]
        + util[:, None]
        + (1.0 - delta) * pen * w[:, None] * f[None, :] ** 2
    )
    acc.hedge(pde, x, f, g_h, absw)
    # vary the portfolio along the candidate direction
    g_pi = (
        -discount * w[:, None]
        + ((m.r - benefit) + (c_ex - c_h) * f[None, :]) * (wfac * xq)[:, None]
        + quad_cand[:, None] * f[None, :] ** 2
        + util[:, None]
        + (1.0 - delta) * pen * w[:, None]
    )
    acc.own_control(pde, x, f, g_pi, absw)


def _check_barrier_firm(
    acc: _Accumulator,
    pde: str,
    m: ValidatedMarket,
    x: np.ndarray,
    f: np.ndarray,
    *,
    sol: GameTwoSolution,
    bar: Barriers,
    mu: float,
):
    """Firm-side PDE of the barrier game: W = (x^k - l^k)/(v^k - l^k)."""
    inv = sol.invest_ratio_vec
    h_star = sol.h_F_star
    c_ex, c_h, c_qd = _market_scalars(m, inv, h_star)
    h_sq = float(h_star @ h_star)
    k = 1.0 - sol.eta
    denom = bar.v**k - bar.l**k
    xk = x**k / denom
    w = xk - bar.l**k / denom
    absw = np.abs(w)
    pen = 0.0 if mu == 0.0 else h_sq / (2.0 * mu)
    # x W_x = k x^k / D; x^2 W_xx = k(k-1) x^k / D; W + c = x^k / D
    drift_cand = (m.r + c_ex - sol.benefit_ratio - c_h) * k * xk
    quad_cand = 0.5 * c_qd * k * (k - 1.0) * xk
    g_cand = drift_cand + quad_cand + pen * xk
    acc.candidate(pde, x, g_cand, absw)
    g_h = (
        ((m.r + c_ex - sol.benefit_ratio) - c_h * f[None, :]) * (k * xk)[:, None]
        + quad_cand[:, None]
        + pen * xk[:, None] * f[None, :] ** 2
    )
    acc.hedge(pde, x, f, g_h, absw)
    g_pi = (
        ((m.r - sol.benefit_ratio) + (c_ex - c_h) * f[None, :]) * (k * xk)[:, None]
        + quad_cand[:, None] * f[None, :] ** 2
        + pen * xk[:, None]
    )
    acc.own_control(pde, x, f, g_pi, absw)


def hjbi_grid_check(
    which_game: int,
    sol,
    m: ValidatedMarket,
    p: Preferences,
    barriers: Barriers | None = None,
    *,
    s: float = 0.0,
    n_x: int = 41,
    n_control: int = 41,
    control_span: float = 0.5,
    x_lo: float = 0.5,
    x_hi: float = 2.0,
    tol_scale: float = _DEFAULT_TOL_SCALE,
    union_coeff_scale: float = 1.0,
) -> HjbiReport:
    """Check both PDEs of a game on surplus-by-control grids.

    The surplus grid spans [x_lo, x_hi] (the barrier PDE instead uses the
    open interval between the barriers). Control grids multiply each
    candidate control by factors in [1-control_span, 1+control_span], with
    the middle factor snapped to exactly 1. Raises PropertyViolation at the
    first failing grid point, otherwise returns the worst slacks seen.
    """
    if not 0.0 < control_span < 1.0:
        raise ValueError(f"control_span must be in (0, 1), got {control_span}")
    if n_x < 3 or n_control < 3:
        raise ValueError("need at least 3 grid points per axis")
    x = np.linspace(x_lo, x_hi, n_x)
    f = np.linspace(1.0 - control_span, 1.0 + control_span, n_control)
    f[int(np.argmin(np.abs(f - 1.0)))] = 1.0
    acc = _Accumulator(tol_scale)

    if which_game == 1:
        if not isinstance(sol, GameOneSolution):
            raise TypeError("game 1 check needs a GameOneSolution")
        _check_power_union(
            acc,
            "union_pde_g1",
            m,
            x,
            f,
            coeff=sol.A * union_coeff_scale,
            discount=p.alpha,
            gamma=p.gamma,
            lam=p.lam,
            benefit=sol.benefit_ratio,
            inv=sol.invest_ratio_vec,
            h_star=sol.h_U_star,
            s=s,
        )
        _check_power_firm(
            acc,
            "firm_pde_g1",
            m,
            x,
            f,
            coeff=sol.B,
            discount=p.beta,
            delta=p.delta,
            mu=p.mu,
            benefit=sol.benefit_ratio,
            inv=sol.invest_ratio_vec,
            h_star=sol.h_F_star,
            s=s,
        )
    elif which_game == 2:
        if not isinstance(sol, GameTwoSolution):
            raise TypeError("game 2 check needs a GameTwoSolution")
        if barriers is None:
            raise ValueError("game 2 check needs barriers")
        _check_power_union(
            acc,
            "union_pde_g2",
            m,
            x,
            f,
            coeff=sol.E * union_coeff_scale,
            discount=p.alpha,
            gamma=p.gamma,
            lam=p.lam,
            benefit=sol.benefit_ratio,
            inv=sol.invest_ratio_vec,
            h_star=sol.h_U_star,
            s=s,
        )
        # interior grid strictly between the barriers
        pad = np.linspace(0.0, 1.0, n_x + 2)[1:-1]
        x_bar = barriers.l + (barriers.v - barriers.l) * pad
        _check_barrier_firm(
            acc, "firm_pde_g2", m, x_bar, f, sol=sol, bar=barriers, mu=p.mu
        )
    else:
        raise ValueError(f"which_game must be 1 or 2, got {which_game}")

    return HjbiReport(
        max_abs_residual_at_candidate=acc.cand,
        min_over_h_slack=acc.hmin,
        max_over_controls_slack=acc.cmax,
        grid_size={"x": n_x, "control": n_control},
    )
