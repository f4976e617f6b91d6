"""Exact GBM path sampling and lognormal moment/exit-probability oracles.

Paths are stepped in log space with the exact lognormal increment, so the
state carries no discretization error at the grid points; time integrals and
barrier detection are the only discretized quantities anywhere downstream.

Reproducibility contract: path i draws from its own counter-based substream
keyed by (seed, i), with normals produced by the inverse CDF. Results are a
pure function of (inputs, seed), independent of chunking, thread count, or
platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ..errors import DegenerateVolatility, InvalidBarriers, NonPositiveStart
from ..laws import GbmLaw, moment_rate

# Uniforms land in [0, 1); the half-ulp shift keeps ndtri off -inf.
_U_SHIFT = 2.0**-54

_CHUNK_PATHS = 4096


@dataclass(frozen=True)
class PathGrid:
    """Time grid and ensemble size for a simulation run."""

    t0: float
    dt: float
    n_steps: int
    n_paths: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "n_paths", int(self.n_paths))
        object.__setattr__(self, "seed", int(self.seed))
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1 or self.n_paths < 1:
            raise ValueError(
                f"need n_steps >= 1 and n_paths >= 1, got {self.n_steps}, {self.n_paths}"
            )

    @property
    def horizon(self) -> float:
        return self.t0 + self.n_steps * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)


def path_substream(seed: int, path_index: int) -> np.random.Generator:
    """The dedicated counter-based RNG substream of one path."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(path_index,))
    return np.random.Generator(np.random.Philox(ss))


def _normal_increments(seed: int, first_path: int, n_paths: int, n_steps: int) -> np.ndarray:
    """(n_paths, n_steps) standard normals, one substream row per path."""
    u = np.empty((n_paths, n_steps))
    for j in range(n_paths):
        u[j] = path_substream(seed, first_path + j).random(n_steps)
    u += _U_SHIFT
    return ndtri(u)


def sample_paths(law: GbmLaw, x0: float, grid: PathGrid) -> np.ndarray:
    """Simulate X on the grid; returns (n_paths, n_steps+1) including X_0 = x0.

    The log increment per step is log_drift*dt + |vol| sqrt(dt) z with one
    scalar normal z per step: the surplus is one-dimensional, so only the
    Euclidean norm of the volatility vector matters for its law.
    """
    if x0 <= 0.0:
        raise NonPositiveStart(f"start value must be positive, got {x0}")
    vol = np.sqrt(law.vol_sq)
    out = np.empty((grid.n_paths, grid.n_steps + 1))
    out[:, 0] = x0
    for lo in range(0, grid.n_paths, _CHUNK_PATHS):
        hi = min(lo + _CHUNK_PATHS, grid.n_paths)
        z = _normal_increments(grid.seed, lo, hi - lo, grid.n_steps)
        z *= vol * np.sqrt(grid.dt)
        z += law.log_drift * grid.dt
        np.cumsum(z, axis=1, out=z)
        z += np.log(x0)
        np.exp(z, out=out[lo:hi, 1:])
    return out


def gbm_moment(law: GbmLaw, x0: float, m_exp: float, t: float) -> float:
    """E[X_t^m] = x0^m exp{(m*log_drift + m^2*vol_sq/2) t}."""
    if x0 <= 0.0:
        raise NonPositiveStart(f"start value must be positive, got {x0}")
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return float(x0**m_exp * np.exp(moment_rate(law, m_exp) * t))


def exit_probability_gbm(law: GbmLaw, l: float, v: float, x0: float) -> float:
    """P(X hits v before l | X_0 = x0) for the GBM law, in closed form.

    With SDE drift m and variance rate s^2, the scale exponent is
    rho = 1 - 2m/s^2 and the probability (x0^rho - l^rho)/(v^rho - l^rho);
    rho ~ 0 degenerates to interpolation in log x.
    """
    if not (0.0 < l < x0 < v):
        raise InvalidBarriers(f"need 0 < l < x0 < v, got l={l}, x0={x0}, v={v}")
    s_sq = law.vol_sq
    if s_sq == 0.0:
        raise DegenerateVolatility("exit probability undefined for zero volatility")
    rho = 1.0 - 2.0 * law.sde_drift / s_sq
    if abs(rho) <= 1e-10:
        return float((np.log(x0) - np.log(l)) / (np.log(v) - np.log(l)))
    # normalize by the larger power to keep the exponentials bounded
    if rho > 0:
        ev = np.exp(rho * (np.log(x0) - np.log(v)))
        el = np.exp(rho * (np.log(l) - np.log(v)))
        return float((ev - el) / (1.0 - el))
    ev = np.exp(rho * (np.log(v) - np.log(l)))
    e0 = np.exp(rho * (np.log(x0) - np.log(l)))
    return float((e0 - 1.0) / (ev - 1.0))
