"""Market and preference primitives shared by both games.

The market is a constant-coefficient Black-Scholes market: risk-free rate r,
drift vector b, volatility matrix sigma. Everything downstream consumes the
validated wrapper, which caches the covariance Sigma = sigma sigma^T, its
inverse, and the Sharpe vector theta = sigma^{-1}(b - r 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DriftBelowRiskFree,
    InvalidPreferences,
    NonPositiveRate,
    SingularVolatility,
)

# Relative eigenvalue floor below which Sigma is treated as singular.
_EIG_RTOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MarketParams:
    """Raw market inputs: scalar rate, drift vector (n,), volatility (n, n)."""

    r: float
    b: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        b = _readonly(np.atleast_1d(self.b))
        sigma = _readonly(np.atleast_2d(self.sigma))
        if b.ndim != 1 or sigma.shape != (b.size, b.size):
            raise SingularVolatility(
                f"sigma must be square with side len(b)={b.size}, got {sigma.shape}"
            )
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_assets(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class Preferences:
    """Players' discount, risk-aversion and ambiguity-aversion parameters.

    alpha, gamma, lam belong to the union; beta, delta, mu to the firm.
    Power utility excludes gamma = 1 and delta = 1 (the log-utility case).
    """

    alpha: float
    beta: float
    gamma: float
    delta: float
    lam: float
    mu: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta", "lam", "mu"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.alpha <= 0 or self.beta <= 0:
            raise InvalidPreferences(
                f"discount rates must be positive, got alpha={self.alpha}, beta={self.beta}"
            )
        for name in ("gamma", "delta"):
            v = getattr(self, name)
            if v <= 0:
                raise InvalidPreferences(f"{name} must be positive, got {v}")
            if v == 1.0:
                raise InvalidPreferences(f"{name} must differ from 1 (log utility excluded)")
        if self.lam < 0 or self.mu < 0:
            raise InvalidPreferences(
                f"ambiguity aversions must be nonnegative, got lam={self.lam}, mu={self.mu}"
            )


@dataclass(frozen=True)
class SharpeInfo:
    """Sharpe vector theta and its squared norm."""

    theta: np.ndarray
    theta_sq: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _readonly(np.atleast_1d(self.theta)))
        object.__setattr__(self, "theta_sq", float(self.theta_sq))


@dataclass(frozen=True)
class ValidatedMarket:
    """A MarketParams instance that passed validation, with cached algebra."""

    params: MarketParams
    Sigma: np.ndarray = field(repr=False)
    Sigma_inv: np.ndarray = field(repr=False)
    sharpe: SharpeInfo

    @property
    def r(self) -> float:
        return self.params.r

    @property
    def b(self) -> np.ndarray:
        return self.params.b

    @property
    def sigma(self) -> np.ndarray:
        return self.params.sigma

    @property
    def n_assets(self) -> int:
        return self.params.n_assets

    @property
    def excess(self) -> np.ndarray:
        """Excess drift b - r*1."""
        return self.params.b - self.params.r


def validate_market(params: MarketParams) -> ValidatedMarket:
    """Check r > 0, b_i > r, Sigma symmetric positive definite; cache algebra.

    Element signs of sigma are deliberately not restricted: only Sigma > 0
    matters for the closed forms, and factor models routinely carry negative
    off-diagonal loadings.
    """
    if params.r <= 0:
        raise NonPositiveRate(f"risk-free rate must be positive, got r={params.r}")
    if np.any(params.b <= params.r):
        bad = params.b[params.b <= params.r]
        raise DriftBelowRiskFree(
            f"every asset drift must exceed r={params.r}, got {bad.tolist()}"
        )
    Sigma = params.sigma @ params.sigma.T
    eigs = np.linalg.eigvalsh(Sigma)
    if eigs[0] <= _EIG_RTOL * max(eigs[-1], 0.0):
        raise SingularVolatility(
            f"Sigma is numerically singular: eigenvalues {eigs.tolist()}"
        )
    Sigma_inv = np.linalg.inv(Sigma)
    theta = np.linalg.solve(params.sigma, params.b - params.r)
    info = SharpeInfo(theta=theta, theta_sq=float(theta @ theta))
    return ValidatedMarket(
        params=params,
        Sigma=_readonly(Sigma),
        Sigma_inv=_readonly(Sigma_inv),
        sharpe=info,
    )


def market_from_scalars(r: float, b: float, sigma: float) -> ValidatedMarket:
    """Single-asset convenience constructor."""
    return validate_market(MarketParams(r=r, b=np.array([b]), sigma=np.array([[sigma]])))
