"""Analytic sensitivities of the benefit ratio, their finite-difference
verification, and parameter-grid sweeps over both games and markets.

The benefit ratio of the first game, written out as a scalar function,

    rho(alpha, r, theta, gamma, lambda, mu, delta)
        = alpha/gamma - ((1-gamma)/gamma) * (r + (1/(mu+delta)
          - (lambda+gamma)/(2 (mu+delta)^2)) theta^2),

has closed-form partials in each argument; mu and delta enter only through
their sum, so their partials coincide. The finite-difference oracle is an
independent check: centered differences with one Richardson extrapolation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    FeasibilityError,
    InadmissibleA,
    InfeasiblePerturbation,
    InvalidBarriers,
    ValidationError,
)
from .game_one import solve_game_one
from .game_two import Barriers, solve_game_two
from .market_model import Preferences, ValidatedMarket

# Default grids for the figure sweeps; gamma=1 is excluded by the model.
GAMMA_DELTA_GRID = tuple(np.linspace(1.05, 10.0, 60))
LAMBDA_MU_GRID = tuple(np.linspace(0.0, 4.0, 60))

AXIS_NAMES = ("gamma_delta", "lambda_mu", "lambda", "mu", "game", "market")
_VALUE_COLUMNS = ("benefit_ratio", "invest_ratio", "feasible", "reason")

FD_PARAMS = ("alpha", "r", "theta", "gamma", "lambda", "mu", "delta")


@dataclass(frozen=True)
class BenefitRatioGradient:
    """First-order partials of the game-one benefit ratio.

    d_theta is the partial in the scalar Sharpe ratio for single-asset
    markets; for n > 1 assets it holds the partial in theta'theta instead.
    d_mu_delta is the common value of the mu- and delta-partials.
    """

    d_alpha: float
    d_r: float
    d_theta: float
    d_mu_delta: float
    d_gamma: float
    d_lambda: float


def benefit_ratio_gradient(m: ValidatedMarket, p: Preferences) -> BenefitRatioGradient:
    th_sq = m.sharpe.theta_sq
    g = p.gamma
    md = p.mu + p.delta
    lg = p.lam + p.gamma
    if m.n_assets == 1:
        theta = float(m.sharpe.theta[0])
        d_theta = (1.0 - g) * (lg - 2.0 * md) * theta / (g * md * md)
    else:
        d_theta = -((1.0 - g) / g) * (1.0 / md - lg / (2.0 * md * md))
    return BenefitRatioGradient(
        d_alpha=1.0 / g,
        d_r=-(1.0 - g) / g,
        d_theta=d_theta,
        d_mu_delta=(1.0 - g) * (md - lg) * th_sq / (g * md**3),
        d_gamma=(m.r - p.alpha) / (g * g)
        + (2.0 * md - p.lam - g * g) * th_sq / (2.0 * g * g * md * md),
        d_lambda=(1.0 - g) * th_sq / (2.0 * g * md * md),
    )


def _benefit_ratio_scalar(
    alpha: float, r: float, theta: float, gamma: float, lam: float, mu: float, delta: float
) -> float:
    md = mu + delta
    bracket = alpha / gamma - ((1.0 - gamma) / gamma) * (
        r + (1.0 / md - (lam + gamma) / (2.0 * md * md)) * theta * theta
    )
    if bracket <= 0.0:
        raise InadmissibleA(f"A bracket must be positive, got {bracket}")
    return bracket


def fd_gradient(
    m: ValidatedMarket, p: Preferences, param_name: str, step: float = 1e-6
) -> float:
    """Richardson-extrapolated central difference of the benefit ratio.

    `step` is relative to the parameter value, floored at `step` itself so
    that near-zero parameters keep a representable stencil width.
    Raises InfeasiblePerturbation if any evaluation point loses A > 0.
    """
    if param_name not in FD_PARAMS:
        raise ValueError(f"param_name must be one of {FD_PARAMS}, got {param_name!r}")
    if m.n_assets != 1:
        raise ValidationError("fd_gradient requires a single-asset market (scalar theta)")
    args = {
        "alpha": p.alpha,
        "r": m.r,
        "theta": float(m.sharpe.theta[0]),
        "gamma": p.gamma,
        "lambda": p.lam,
        "mu": p.mu,
        "delta": p.delta,
    }

    def f(v: float) -> float:
        a = dict(args)
        a[param_name] = v
        return _benefit_ratio_scalar(
            a["alpha"], a["r"], a["theta"], a["gamma"], a["lambda"], a["mu"], a["delta"]
        )

    p0 = args[param_name]
    h = step * max(abs(p0), 1.0)

    def central(hh: float) -> float:
        try:
            return (f(p0 + hh) - f(p0 - hh)) / (2.0 * hh)
        except InadmissibleA as exc:
            raise InfeasiblePerturbation(
                f"perturbing {param_name} by ±{hh} left the admissible region"
            ) from exc

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


# --- parameter sweeps ----------------------------------------------------


@dataclass(frozen=True)
class AxisSpec:
    """One sweep axis: a parameter name and its grid of values."""

    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError(f"axis {self.name!r} has no values")


@dataclass(frozen=True)
class SweepCell:
    """One grid cell: coordinates plus the solved ratios or a failure reason."""

    coords: tuple
    feasible: bool
    reason: str
    benefit_ratio: float | None
    invest_ratio_vec: np.ndarray | None
    h_U_star: np.ndarray | None


@dataclass(frozen=True)
class SweepTable:
    axes: tuple[AxisSpec, ...]
    cells: tuple[SweepCell, ...]

    def axis(self, name: str) -> AxisSpec:
        for ax in self.axes:
            if ax.name == name:
                return ax
        raise KeyError(name)


def _cell_preferences(p_base: Preferences, overrides: dict) -> Preferences:
    vals = {
        "alpha": p_base.alpha,
        "beta": p_base.beta,
        "gamma": p_base.gamma,
        "delta": p_base.delta,
        "lam": p_base.lam,
        "mu": p_base.mu,
    }
    for name, v in overrides.items():
        if name == "gamma_delta":
            vals["gamma"] = vals["delta"] = v
        elif name == "lambda_mu":
            vals["lam"] = vals["mu"] = v
        elif name == "lambda":
            vals["lam"] = v
        elif name == "mu":
            vals["mu"] = v
    return Preferences(**vals)


def sweep(
    m_bull: ValidatedMarket,
    m_bear: ValidatedMarket,
    p_base: Preferences,
    axes: Sequence[AxisSpec],
    barriers: Barriers | None = None,
) -> SweepTable:
    """Solve every cell of the cartesian product of `axes`.

    Cells are enumerated in lexicographic order of the axis indices. A
    feasibility failure is recorded in the cell, never raised. Barriers are
    required as soon as any cell plays game 2 (the penalty constant c needs
    them, even though the swept ratios do not).
    """
    axes = tuple(axes)
    markets = {"bull": m_bull, "bear": m_bear}
    cells = []
    for combo in itertools.product(*(ax.values for ax in axes)):
        named = dict(zip((ax.name for ax in axes), combo))
        game = int(named.get("game", 1))
        market = markets[named.get("market", "bull")]
        pref_overrides = {k: v for k, v in named.items() if k not in ("game", "market")}
        try:
            p = _cell_preferences(p_base, pref_overrides)
            if game == 1:
                sol = solve_game_one(market, p)
            elif game == 2:
                if barriers is None:
                    raise InvalidBarriers("sweep over game 2 requires barriers")
                sol = solve_game_two(market, p, barriers)
            else:
                raise ValueError(f"game axis value must be 1 or 2, got {game}")
            cells.append(
                SweepCell(
                    coords=combo,
                    feasible=True,
                    reason="",
                    benefit_ratio=sol.benefit_ratio,
                    invest_ratio_vec=sol.invest_ratio_vec,
                    h_U_star=sol.h_U_star,
                )
            )
        except (FeasibilityError, ValidationError) as exc:
            cells.append(
                SweepCell(
                    coords=combo,
                    feasible=False,
                    reason=type(exc).__name__,
                    benefit_ratio=None,
                    invest_ratio_vec=None,
                    h_U_star=None,
                )
            )
    return SweepTable(axes=axes, cells=tuple(cells))


def _fmt(x: float) -> str:
    return repr(float(x))


def sweep_table_csv(table: SweepTable, select: dict | None = None) -> str:
    """Render the table (or the slice matching `select`) as CSV text.

    Header: non-selected axis names, then benefit_ratio, invest_ratio,
    feasible, reason. Infeasible cells leave the numeric fields empty. Rows
    keep the table's lexicographic order. Multi-asset invest ratios are
    ';'-joined.
    """
    select = select or {}
    kept = [i for i, ax in enumerate(table.axes) if ax.name not in select]
    header = [table.axes[i].name for i in kept] + list(_VALUE_COLUMNS)
    lines = [",".join(header)]
    sel_idx = {i: select[ax.name] for i, ax in enumerate(table.axes) if ax.name in select}
    for cell in table.cells:
        if any(cell.coords[i] != v for i, v in sel_idx.items()):
            continue
        row = [
            _fmt(cell.coords[i]) if isinstance(cell.coords[i], float) else str(cell.coords[i])
            for i in kept
        ]
        if cell.feasible:
            invest = ";".join(_fmt(v) for v in cell.invest_ratio_vec)
            row += [_fmt(cell.benefit_ratio), invest, "true", ""]
        else:
            row += ["", "", "false", cell.reason]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cells_where(table: SweepTable, **axis_values) -> Iterable[SweepCell]:
    """Iterate cells whose coordinates match the given axis values."""
    idx = {}
    for name, v in axis_values.items():
        for i, ax in enumerate(table.axes):
            if ax.name == name:
                idx[i] = v
                break
        else:
            raise KeyError(name)
    for cell in table.cells:
        if all(cell.coords[i] == v for i, v in idx.items()):
            yield cell
