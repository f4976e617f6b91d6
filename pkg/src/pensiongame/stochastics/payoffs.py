"""Monte-Carlo and analytic payoff estimators for both games.

Game one: the robust payoff is a discounted integral of X_t^{1-power} terms
(utility flow plus entropy-penalty flow), which collapses to a single
constant times the discounted power integral of the exact GBM. The MC
estimator integrates the trapezoid over [t0, T] and completes the tail
beyond T analytically. Two tail modes:

  pathwise      E[ integral beyond T | X_T ] per path (default) — unbiased
                for any horizon, and the tail's dispersion stays in the
                sample, so the standard error is honest;
  deterministic the unconditional tail constant; the horizon must then be
                long enough that the tail is below 0.1% of the target, or
                TailBoundNotMet is raised.

Game two: the firm's payoff is the indicator of reaching the upper barrier
first, plus a penalty integral along the way. Barriers are detected at grid
points only; accuracy is certified by a dt-refinement ladder driven by
common random numbers (coarser monitors subsample the same fine paths, so
ladder differences are bias, not noise).

All estimators are bit-reproducible: fixed path chunking, per-path
substreams, and reductions in path order regardless of thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ..errors import (
    DivergentIntegral,
    ExcessiveCensoring,
    InadmissibleSolution,
    InfeasibleSolution,
    NonPositiveStart,
    TailBoundNotMet,
)
from ..game_one import GameOneSolution, value_functions_g1, wealth_law_g1
from ..game_two import Barriers, GameTwoSolution, wealth_law_g2
from ..laws import WORST_CASE_FIRM, WORST_CASE_UNION, GbmLaw, moment_rate
from ..market_model import Preferences, ValidatedMarket
from .paths import PathGrid, path_substream

_U_SHIFT = 2.0**-54
_CHUNK_PATHS = 4096
# barrier engine block sizing: elements per block, block-length bounds
_TARGET_EL = 1 << 24
_BLOCK_MAX = 1 << 16

_TAIL_MODES = ("pathwise", "deterministic")
_DET_TAIL_BUDGET = 1e-3  # deterministic tail must stay below 0.1% of target
_CENSOR_LIMIT = 1e-3  # more than 0.1% capped paths voids the estimate


@dataclass(frozen=True)
class McEstimate:
    """A reproducible Monte-Carlo estimate."""

    mean: float
    std_err: float
    n: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "std_err", float(self.std_err))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))
        if self.std_err < 0:
            raise ValueError("std_err must be nonnegative")


@dataclass(frozen=True)
class BarrierPayoffEstimate:
    """Barrier-game estimate at one monitoring resolution.

    `payoff` is the full robust payoff (indicator + penalty integral);
    `exit_probability` is the penalty-free indicator alone, suitable for
    checking the barrier logic against the closed-form exit probability.
    Censored paths (alive at the horizon cap) contribute their accrued
    penalty and a zero indicator; their count is reported.
    """

    payoff: McEstimate
    exit_probability: McEstimate
    censored_count: int
    mean_exit_time: float
    dt_monitor: float


def _chunk_ranges(n_paths: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + _CHUNK_PATHS, n_paths)) for lo in range(0, n_paths, _CHUNK_PATHS)]


def _map_chunks(fn, chunks, threads: int) -> list:
    """Run fn over chunks, returning results in chunk order regardless of
    scheduling; chunk boundaries are fixed, so outputs are thread-invariant."""
    if threads <= 1 or len(chunks) <= 1:
        return [fn(lo, hi) for lo, hi in chunks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda c: fn(*c), chunks))


# --------------------------------------------------------------------------
# game one: discounted power-integral payoffs
# --------------------------------------------------------------------------


def _mc_power_integral(
    law: GbmLaw,
    x0: float,
    grid: PathGrid,
    power: float,
    discount: float,
    coeff: float,
    tail: str,
    threads: int,
) -> tuple[np.ndarray, float]:
    """Per-path samples of coeff * int_{t0}^inf e^{-discount t} X_t^power dt.

    Returns (samples over [t0, T] incl. any pathwise tail, deterministic tail
    constant to add to the mean). Trapezoidal in time; exact GBM steps.
    """
    growth = moment_rate(law, power)
    margin = discount - growth
    if margin <= 0.0:
        raise DivergentIntegral(
            f"moment growth {growth} does not decay against discount {discount}"
        )
    if x0 <= 0.0:
        raise NonPositiveStart(f"start value must be positive, got {x0}")

    n = grid.n_steps
    dt = grid.dt
    t = grid.t0 + dt * np.arange(1, n + 1)
    horizon = grid.t0 + n * dt
    w = np.full(n, dt)
    w[-1] = 0.5 * dt
    wd = w * np.exp(-discount * t)
    tail_const = 0.0
    if tail == "pathwise":
        # E[ tail | X_T ] = X_T^power e^{-discount T} / margin, folded into
        # the weight of the final grid point
        wd[-1] += np.exp(-discount * horizon) / margin
    else:
        tail_const = coeff * x0**power * math.exp(-discount * horizon + growth * (horizon - grid.t0)) / margin
    const0 = coeff * 0.5 * dt * math.exp(-discount * grid.t0) * x0**power

    vol = math.sqrt(law.vol_sq)
    scale = vol * math.sqrt(dt)
    shift = law.log_drift * dt
    logx0 = math.log(x0)

    def run_chunk(lo: int, hi: int) -> np.ndarray:
        u = np.empty((hi - lo, n))
        for j in range(hi - lo):
            u[j] = path_substream(grid.seed, lo + j).random(n)
        u += _U_SHIFT
        ndtri(u, out=u)
        u *= scale
        u += shift
        np.cumsum(u, axis=1, out=u)
        u += logx0
        u *= power
        np.exp(u, out=u)
        return coeff * (u @ wd) + const0

    parts = _map_chunks(run_chunk, _chunk_ranges(grid.n_paths), threads)
    return np.concatenate(parts), tail_const


def _estimate_from_samples(samples: np.ndarray, tail_const: float, seed: int) -> McEstimate:
    n = samples.size
    se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean=float(np.mean(samples)) + tail_const, std_err=se, n=n, seed=seed)


def mc_payoff_union_g1(
    sol: GameOneSolution,
    m: ValidatedMarket,
    p: Preferences,
    x0: float,
    grid: PathGrid,
    tail: str = "pathwise",
    threads: int = 1,
) -> McEstimate:
    """Simulate the union's robust payoff under its worst-case measure.

    Per-step integrand: e^{-alpha t} P*(t)^{1-gamma}/(1-gamma) plus the
    entropy-penalty flow (1-gamma) (h_U*'h_U*/(2 lambda)) W_U(t, X_t); both
    are proportional to X_t^{1-gamma}, and the penalty is zero when
    lambda = 0. Target: W_U(t0, x0)."""
    if tail not in _TAIL_MODES:
        raise ValueError(f"tail must be one of {_TAIL_MODES}, got {tail!r}")
    if sol.A <= 0.0 or sol.B <= 0.0:
        raise InadmissibleSolution(f"need A > 0 and B > 0, got A={sol.A}, B={sol.B}")
    law = wealth_law_g1(sol, m, p, WORST_CASE_UNION)
    pen = 0.0 if p.lam == 0.0 else float(sol.h_U_star @ sol.h_U_star) / (2.0 * p.lam)
    coeff = sol.benefit_ratio ** (1.0 - p.gamma) / (1.0 - p.gamma) + sol.A * pen
    samples, tail_const = _mc_power_integral(
        law, x0, grid, 1.0 - p.gamma, p.alpha, coeff, tail, threads
    )
    if tail == "deterministic":
        target, _ = value_functions_g1(sol, p, grid.t0, x0)
        if abs(tail_const) >= _DET_TAIL_BUDGET * abs(target):
            raise TailBoundNotMet(
                f"deterministic tail {tail_const} exceeds {_DET_TAIL_BUDGET:.1%} "
                f"of |target| {abs(target)}; lengthen the horizon"
            )
    return _estimate_from_samples(samples, tail_const, grid.seed)


def mc_payoff_firm_g1(
    sol: GameOneSolution,
    m: ValidatedMarket,
    p: Preferences,
    x0: float,
    grid: PathGrid,
    tail: str = "pathwise",
    threads: int = 1,
) -> McEstimate:
    """Firm-side mirror of mc_payoff_union_g1; target W_F(t0, x0)."""
    if tail not in _TAIL_MODES:
        raise ValueError(f"tail must be one of {_TAIL_MODES}, got {tail!r}")
    if sol.A <= 0.0 or sol.B <= 0.0:
        raise InadmissibleSolution(f"need A > 0 and B > 0, got A={sol.A}, B={sol.B}")
    law = wealth_law_g1(sol, m, p, WORST_CASE_FIRM)
    pen = 0.0 if p.mu == 0.0 else float(sol.h_F_star @ sol.h_F_star) / (2.0 * p.mu)
    coeff = 1.0 / (1.0 - p.delta) + sol.B * pen
    samples, tail_const = _mc_power_integral(
        law, x0, grid, 1.0 - p.delta, p.beta, coeff, tail, threads
    )
    if tail == "deterministic":
        _, target = value_functions_g1(sol, p, grid.t0, x0)
        if abs(tail_const) >= _DET_TAIL_BUDGET * abs(target):
            raise TailBoundNotMet(
                f"deterministic tail {tail_const} exceeds {_DET_TAIL_BUDGET:.1%} "
                f"of |target| {abs(target)}; lengthen the horizon"
            )
    return _estimate_from_samples(samples, tail_const, grid.seed)


def analytic_payoff_g1(
    sol: GameOneSolution,
    m: ValidatedMarket,
    p: Preferences,
    side: str,
    s: float,
    x0: float,
) -> float:
    """Deterministic payoff via the moment oracle and a geometric integral.

    Must reproduce the value function exactly; a mismatch flags a bug in
    either the law, the moment rate, or the closed form."""
    if x0 <= 0.0:
        raise NonPositiveStart(f"start value must be positive, got {x0}")
    if sol.A <= 0.0 or sol.B <= 0.0:
        raise InadmissibleSolution(f"need A > 0 and B > 0, got A={sol.A}, B={sol.B}")
    if side == "union":
        law = wealth_law_g1(sol, m, p, WORST_CASE_UNION)
        power, discount = 1.0 - p.gamma, p.alpha
        pen = 0.0 if p.lam == 0.0 else float(sol.h_U_star @ sol.h_U_star) / (2.0 * p.lam)
        coeff = sol.benefit_ratio**power / (1.0 - p.gamma) + sol.A * pen
    elif side == "firm":
        law = wealth_law_g1(sol, m, p, WORST_CASE_FIRM)
        power, discount = 1.0 - p.delta, p.beta
        pen = 0.0 if p.mu == 0.0 else float(sol.h_F_star @ sol.h_F_star) / (2.0 * p.mu)
        coeff = 1.0 / (1.0 - p.delta) + sol.B * pen
    else:
        raise ValueError(f"side must be 'union' or 'firm', got {side!r}")
    margin = discount - moment_rate(law, power)
    if margin <= 0.0:
        raise DivergentIntegral(
            f"moment growth {moment_rate(law, power)} does not decay against "
            f"discount {discount}"
        )
    return float(coeff * x0**power * math.exp(-discount * s) / margin)


# --------------------------------------------------------------------------
# game two: barrier hitting payoff with penalty integral
# --------------------------------------------------------------------------


def _barrier_samples(
    law: GbmLaw,
    bar: Barriers,
    grid: PathGrid,
    k: float,
    strides: tuple[int, ...],
    cap_steps: int,
    threads: int,
):
    """Core engine: one fine-grid pass, monitored at each stride.

    strides must be sorted descending; the coarsest monitor exits last
    (its checkpoints are a subset of every finer monitor's), so it drives
    the active set. Per monitor, per path: the left-endpoint penalty sum
    of X^k over pre-exit checkpoints, the exit type, and the exit step.
    """
    n_mon = len(strides)
    lcm = strides[0]
    vol = math.sqrt(law.vol_sq)
    scale = vol * math.sqrt(grid.dt)
    shift = law.log_drift * grid.dt
    yl, yv, y0 = math.log(bar.l), math.log(bar.v), math.log(bar.x0)

    def run_chunk(lo: int, hi: int):
        n_c = hi - lo
        gens = [path_substream(grid.seed, i) for i in range(lo, hi)]
        y = np.full(n_c, y0)
        alive = [np.ones(n_c, dtype=bool) for _ in range(n_mon)]
        pen_raw = [np.full(n_c, bar.x0**k) for _ in range(n_mon)]
        upper = [np.zeros(n_c, dtype=bool) for _ in range(n_mon)]
        exit_step = [np.zeros(n_c, dtype=np.int64) for _ in range(n_mon)]
        done = 0
        while done < cap_steps and alive[0].any():
            idx = np.nonzero(alive[0])[0]
            raw = max(lcm, (_TARGET_EL // idx.size) // lcm * lcm)
            block = min(cap_steps - done, min(raw, _BLOCK_MAX))
            u = np.empty((idx.size, block))
            for j, ii in enumerate(idx):
                u[j] = gens[ii].random(block)
            u += _U_SHIFT
            ndtri(u, out=u)
            u *= scale
            u += shift
            np.cumsum(u, axis=1, out=u)
            u += y[idx, None]
            y[idx] = u[:, -1]
            e = np.exp(k * u)
            for mi, s in enumerate(strides):
                rows = alive[mi][idx]
                ys = u[:, s - 1 :: s]
                es = e[:, s - 1 :: s]
                out = (ys <= yl) | (ys >= yv)
                hit = out.any(axis=1)
                keep = rows & ~hit
                if keep.any():
                    pen_raw[mi][idx[keep]] += es[keep].sum(axis=1)
                ex = np.nonzero(rows & hit)[0]
                if ex.size:
                    firsts = np.argmax(out[ex], axis=1)
                    for row, fc in zip(ex, firsts):
                        g = idx[row]
                        pen_raw[mi][g] += es[row, :fc].sum()
                        exit_step[mi][g] = done + (fc + 1) * s
                        upper[mi][g] = ys[row, fc] >= yv
                    alive[mi][idx[ex]] = False
            done += block
        return alive, pen_raw, upper, exit_step

    parts = _map_chunks(run_chunk, _chunk_ranges(grid.n_paths), threads)
    out = []
    for mi in range(n_mon):
        out.append(
            tuple(
                np.concatenate([part[field][mi] for part in parts])
                for field in range(4)
            )
        )
    return out  # per monitor: (censored_mask, pen_raw, upper, exit_step)


def mc_firm_payoff_g2_ladder(
    sol: GameTwoSolution,
    m: ValidatedMarket,
    p: Preferences,
    bar: Barriers,
    grid: PathGrid,
    horizon_cap: float = 200.0,
    strides: tuple[int, ...] = (4, 2, 1),
    threads: int = 1,
) -> tuple[BarrierPayoffEstimate, ...]:
    """Estimate the firm's barrier payoff at several coupled resolutions.

    grid.dt is the finest step; each stride s adds a monitor observing every
    s-th fine point (effective step s*dt). All monitors share the same fine
    paths, so differences along the ladder isolate the discretization bias.
    Results are ordered like `strides` (default coarse to fine).
    """
    if not (0.0 < sol.eta < 1.0) or sol.omega <= 0.0:
        raise InfeasibleSolution(f"solution infeasible: eta={sol.eta}, omega={sol.omega}")
    strides = tuple(int(s) for s in strides)
    if sorted(strides, reverse=True) != list(strides) or strides[-1] < 1:
        raise ValueError(f"strides must be positive and descending, got {strides}")
    if any(strides[0] % s for s in strides):
        raise ValueError(f"every stride must divide the largest one, got {strides}")
    law = wealth_law_g2(sol, m, p, WORST_CASE_FIRM)
    k = 1.0 - sol.eta
    denom = bar.v**k - bar.l**k
    q = 0.0 if p.mu == 0.0 else float(sol.h_F_star @ sol.h_F_star) / (2.0 * p.mu)
    lcm = strides[0]
    cap_steps = int(math.ceil(horizon_cap / grid.dt / lcm)) * lcm

    per_monitor = _barrier_samples(law, bar, grid, k, strides, cap_steps, threads)
    results = []
    for s, (censored, pen_raw, upper, exit_step) in zip(strides, per_monitor):
        dt_m = s * grid.dt
        ind = upper.astype(float)
        # penalty sum was accumulated on the monitor's own checkpoints
        payoff = ind + (q * dt_m / denom) * pen_raw
        n = payoff.size
        est = McEstimate(
            mean=float(np.mean(payoff)),
            std_err=float(np.std(payoff, ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
            n=n,
            seed=grid.seed,
        )
        prob = McEstimate(
            mean=float(np.mean(ind)),
            std_err=float(np.std(ind, ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
            n=n,
            seed=grid.seed,
        )
        exited = ~censored
        mean_exit = float(np.mean(exit_step[exited]) * grid.dt) if exited.any() else float("nan")
        results.append(
            BarrierPayoffEstimate(
                payoff=est,
                exit_probability=prob,
                censored_count=int(censored.sum()),
                mean_exit_time=mean_exit,
                dt_monitor=dt_m,
            )
        )
    worst_censored = results[0].censored_count  # coarsest exits last
    if worst_censored > _CENSOR_LIMIT * grid.n_paths:
        raise ExcessiveCensoring(
            f"{worst_censored} of {grid.n_paths} paths hit the {horizon_cap}-year cap"
        )
    return tuple(results)


def mc_firm_payoff_g2(
    sol: GameTwoSolution,
    m: ValidatedMarket,
    p: Preferences,
    bar: Barriers,
    grid: PathGrid,
    horizon_cap: float = 200.0,
    threads: int = 1,
) -> BarrierPayoffEstimate:
    """Firm's barrier payoff at the grid's own resolution (single monitor)."""
    (res,) = mc_firm_payoff_g2_ladder(
        sol, m, p, bar, grid, horizon_cap=horizon_cap, strides=(1,), threads=threads
    )
    return res
