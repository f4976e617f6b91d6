"""Closed-form solution of the barrier variant of the game.

The union keeps the discounted-benefit objective; the firm instead maximizes
the worst-case probability that the surplus reaches the upper level v before
the lower level l. The equilibrium surplus is again an exact GBM. The firm's
value function is time-independent,

    W_Fbar(x) = (x^{1-eta} - l^{1-eta}) / (v^{1-eta} - l^{1-eta}),

with boundary values 0 at l and 1 at v, and the union's is
W_Ubar(s, x) = E e^{-alpha s} x^{1-gamma}/(1-gamma). The constants solve

    (alpha - r) omega^2 - (1-gamma/2) theta'theta omega
        + (1-gamma)(lambda+gamma) theta'theta / 2 = 0,

with the larger root omega taken, eta = (omega - mu)/(1 - mu) (equivalently
omega = mu(1-eta) + eta), and E = [r + theta'theta/(2 omega)]^{-gamma}.
Feasibility demands alpha > r, mu != 1, a positive discriminant, and
0 < eta < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EtaOutOfRange,
    InvalidBarriers,
    MuEqualsOne,
    NegativeDiscriminant,
    RequiresAlphaAboveR,
    SurplusOutsideBarriers,
)
from .laws import REFERENCE, WORST_CASE_FIRM, WORST_CASE_UNION, GbmLaw
from .market_model import Preferences, ValidatedMarket

# eta -> 1 collapses x^{1-eta} to a constant; the log-like boundary case is
# out of scope and rejected rather than approximated.
_ETA_ONE_TOL = 1e-10
_MU_ONE_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Barriers:
    """Lower exit level l, upper target v, and the starting surplus x0."""

    l: float
    v: float
    x0: float

    def __post_init__(self):
        for name in ("l", "v", "x0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (0.0 < self.l < self.x0 < self.v):
            raise InvalidBarriers(
                f"need 0 < l < x0 < v, got l={self.l}, x0={self.x0}, v={self.v}"
            )


@dataclass(frozen=True)
class GameTwoSolution:
    delta_disc: float  # discriminant of the omega quadratic
    omega: float
    eta: float
    E: float
    c: float
    benefit_ratio: float  # = E^(-1/gamma) = r + theta'theta/(2 omega)
    invest_ratio_vec: np.ndarray
    h_U_star: np.ndarray
    h_F_star: np.ndarray

    def __post_init__(self):
        for name in ("delta_disc", "omega", "eta", "E", "c", "benefit_ratio"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("invest_ratio_vec", "h_U_star", "h_F_star"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))


def solve_game_two(m: ValidatedMarket, p: Preferences, bar: Barriers) -> GameTwoSolution:
    """Evaluate the closed form; raise a typed error on each failed hypothesis.

    omega, eta, E and the strategies depend only on (market, alpha, r, gamma,
    lambda) plus mu through eta; they never depend on the barriers. The
    constant c = l^{1-eta}/(v^{1-eta}-l^{1-eta}) shifts the firm's value
    function so the entropy penalty stays proportional to W_Fbar + c.
    """
    th_sq = m.sharpe.theta_sq
    if p.alpha <= m.r:
        raise RequiresAlphaAboveR(
            f"need alpha > r, got alpha={p.alpha}, r={m.r}"
        )
    if abs(1.0 - p.mu) <= _MU_ONE_TOL:
        raise MuEqualsOne(f"eta is undefined at mu=1, got mu={p.mu}")
    half = (1.0 - p.gamma / 2.0) * th_sq
    disc = half * half - 2.0 * (p.alpha - m.r) * (1.0 - p.gamma) * (p.lam + p.gamma) * th_sq
    if disc <= 0.0:
        raise NegativeDiscriminant(f"omega discriminant must be positive, got {disc}")
    # the larger root; the smaller one does not satisfy the verification lemma
    omega = (half + math.sqrt(disc)) / (2.0 * (p.alpha - m.r))
    eta = (omega - p.mu) / (1.0 - p.mu)
    if not (0.0 < eta < 1.0) or abs(1.0 - eta) < _ETA_ONE_TOL:
        raise EtaOutOfRange(f"need 0 < eta < 1, got eta={eta} (omega={omega})")
    benefit = m.r + th_sq / (2.0 * omega)
    E = benefit ** (-p.gamma)
    k = 1.0 - eta
    c = bar.l**k / (bar.v**k - bar.l**k)
    return GameTwoSolution(
        delta_disc=disc,
        omega=omega,
        eta=eta,
        E=E,
        c=c,
        benefit_ratio=benefit,
        invest_ratio_vec=m.Sigma_inv @ m.excess / omega,
        h_U_star=(p.lam / omega) * m.sharpe.theta,
        h_F_star=(p.mu * (1.0 - eta) / omega) * m.sharpe.theta,
    )


def value_functions_g2(
    sol: GameTwoSolution, p: Preferences, bar: Barriers, s: float, x: float
) -> tuple[float, float]:
    """(W_Ubar, W_Fbar) at time s and surplus x; W_Fbar needs l <= x <= v."""
    if not (bar.l <= x <= bar.v):
        raise SurplusOutsideBarriers(
            f"W_Fbar is defined on [{bar.l}, {bar.v}], got x={x}"
        )
    w_u = sol.E * np.exp(-p.alpha * s) * x ** (1.0 - p.gamma) / (1.0 - p.gamma)
    k = 1.0 - sol.eta
    w_f = (x**k - bar.l**k) / (bar.v**k - bar.l**k)
    return float(w_u), float(w_f)


def wealth_law_g2(
    sol: GameTwoSolution, m: ValidatedMarket, p: Preferences, measure_tag: str
) -> GbmLaw:
    """Lognormal law of the equilibrium surplus under the chosen measure."""
    th_sq = m.sharpe.theta_sq
    om = sol.omega
    log_drift = m.r + th_sq / om - sol.benefit_ratio - th_sq / (2.0 * om * om)
    if measure_tag == WORST_CASE_UNION:
        log_drift -= p.lam * th_sq / (om * om)
    elif measure_tag == WORST_CASE_FIRM:
        log_drift -= p.mu * (1.0 - sol.eta) * th_sq / (om * om)
    elif measure_tag != REFERENCE:
        raise ValueError(f"unknown measure tag {measure_tag!r}")
    return GbmLaw(log_drift=log_drift, vol_vec=m.sharpe.theta / om, measure_tag=measure_tag)
