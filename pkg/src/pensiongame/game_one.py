"""Closed-form robust Nash equilibrium of the benefit/investment game.

The union picks the supplementary benefit rate P, the firm picks the asset
allocation pi, each against its own worst-case measure with relative-entropy
penalties 1/(2 lambda) and 1/(2 mu). With power utilities (gamma for the
union, delta for the firm) the value functions are

    W_U(s, x) = A e^{-alpha s} x^{1-gamma} / (1-gamma),
    W_F(s, x) = B e^{-beta s}  x^{1-delta} / (1-delta),

and the equilibrium controls are linear in the surplus x: P* = A^{-1/gamma} x,
pi* = x/(mu+delta) Sigma^{-1}(b-r), with constant measure distortions
h_U* = lambda/(mu+delta) theta and h_F* = mu/(mu+delta) theta. The cooperative
(Pareto) benchmark maximizes the union objective alone and has the same shape
with gamma+lambda in place of mu+delta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InadmissibleA, InadmissibleA0, InadmissibleB, NonPositiveSurplus
from .laws import REFERENCE, WORST_CASE_FIRM, WORST_CASE_UNION, GbmLaw
from .market_model import Preferences, ValidatedMarket

# B -> infinity as its bracket crosses zero; treat a vanishing bracket as
# inadmissible rather than returning a huge coefficient.
_B_BRACKET_FLOOR = 1e-14


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GameOneSolution:
    A: float
    B: float
    bracket_A: float  # = A^(-1/gamma); kept to avoid precision loss for large gamma
    bracket_B: float
    benefit_ratio: float  # P*/x
    invest_ratio_vec: np.ndarray  # pi*/x
    h_U_star: np.ndarray
    h_F_star: np.ndarray

    def __post_init__(self):
        for name in ("A", "B", "bracket_A", "bracket_B", "benefit_ratio"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("invest_ratio_vec", "h_U_star", "h_F_star"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))


@dataclass(frozen=True)
class ParetoSolution:
    A0: float
    bracket_A0: float
    benefit_ratio: float
    invest_ratio_vec: np.ndarray
    h_0_star: np.ndarray

    def __post_init__(self):
        for name in ("A0", "bracket_A0", "benefit_ratio"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("invest_ratio_vec", "h_0_star"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))


def solve_game_one(m: ValidatedMarket, p: Preferences) -> GameOneSolution:
    """Evaluate the closed-form equilibrium; raise if A or B is inadmissible."""
    r = m.r
    th_sq = m.sharpe.theta_sq
    md = p.mu + p.delta

    bracket_A = p.alpha / p.gamma - ((1.0 - p.gamma) / p.gamma) * (
        r + (1.0 / md - (p.lam + p.gamma) / (2.0 * md * md)) * th_sq
    )
    if bracket_A <= 0.0:
        raise InadmissibleA(f"A bracket must be positive, got {bracket_A}")
    A = bracket_A ** (-p.gamma)

    bracket_B = (
        p.beta / (1.0 - p.delta)
        + (p.alpha - r) / p.gamma
        + (
            (1.0 - p.gamma) * (p.lam + p.gamma) / (2.0 * p.gamma * md * md)
            - (1.0 - p.gamma) / (p.gamma * md)
            - 1.0 / (2.0 * md)
        )
        * th_sq
    )
    if abs(bracket_B) < _B_BRACKET_FLOOR:
        raise InadmissibleB(f"B bracket vanishes, got {bracket_B}")
    B = 1.0 / ((1.0 - p.delta) * bracket_B)
    if B <= 0.0:
        raise InadmissibleB(f"B must be positive, got {B}")

    invest = m.Sigma_inv @ m.excess / md
    return GameOneSolution(
        A=A,
        B=B,
        bracket_A=bracket_A,
        bracket_B=bracket_B,
        benefit_ratio=bracket_A,
        invest_ratio_vec=invest,
        h_U_star=(p.lam / md) * m.sharpe.theta,
        h_F_star=(p.mu / md) * m.sharpe.theta,
    )


def solve_pareto(m: ValidatedMarket, p: Preferences) -> ParetoSolution:
    """Cooperative benchmark; uses only the union parameters alpha, gamma, lam."""
    gl = p.gamma + p.lam
    bracket = p.alpha / p.gamma - ((1.0 - p.gamma) / p.gamma) * (
        m.r + m.sharpe.theta_sq / (2.0 * gl)
    )
    if bracket <= 0.0:
        raise InadmissibleA0(f"A0 bracket must be positive, got {bracket}")
    return ParetoSolution(
        A0=bracket ** (-p.gamma),
        bracket_A0=bracket,
        benefit_ratio=bracket,
        invest_ratio_vec=m.Sigma_inv @ m.excess / gl,
        h_0_star=(p.lam / gl) * m.sharpe.theta,
    )


def value_functions_g1(
    sol: GameOneSolution, p: Preferences, s: float, x: float
) -> tuple[float, float]:
    """(W_U, W_F) at time s and surplus x > 0."""
    if x <= 0.0:
        raise NonPositiveSurplus(f"surplus must be positive, got {x}")
    w_u = sol.A * np.exp(-p.alpha * s) * x ** (1.0 - p.gamma) / (1.0 - p.gamma)
    w_f = sol.B * np.exp(-p.beta * s) * x ** (1.0 - p.delta) / (1.0 - p.delta)
    return float(w_u), float(w_f)


def wealth_law_g1(
    sol: GameOneSolution, m: ValidatedMarket, p: Preferences, measure_tag: str
) -> GbmLaw:
    """Lognormal law of the equilibrium surplus under the chosen measure."""
    th_sq = m.sharpe.theta_sq
    md = p.mu + p.delta
    log_drift = (
        m.r + th_sq / md - sol.benefit_ratio - th_sq / (2.0 * md * md)
    )
    if measure_tag == WORST_CASE_UNION:
        log_drift -= p.lam * th_sq / (md * md)
    elif measure_tag == WORST_CASE_FIRM:
        log_drift -= p.mu * th_sq / (md * md)
    elif measure_tag != REFERENCE:
        raise ValueError(f"unknown measure tag {measure_tag!r}")
    return GbmLaw(log_drift=log_drift, vol_vec=m.sharpe.theta / md, measure_tag=measure_tag)
