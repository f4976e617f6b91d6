"""Lognormal law of the optimal surplus under a chosen probability measure.

Both games leave the equilibrium surplus an exact geometric Brownian motion;
only the drift depends on which measure (reference or a player's worst case)
is used. dX/X = (log_drift + vol.vol/2) dt + vol.dW, i.e. log X is Brownian
with drift `log_drift` and variance rate `vol.vol`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REFERENCE = "Reference"
WORST_CASE_UNION = "WorstCaseUnion"
WORST_CASE_FIRM = "WorstCaseFirm"
MEASURE_TAGS = (REFERENCE, WORST_CASE_UNION, WORST_CASE_FIRM)


@dataclass(frozen=True)
class GbmLaw:
    """log X increments: log_drift * dt + vol_vec . dW, per year."""

    log_drift: float
    vol_vec: np.ndarray
    measure_tag: str

    def __post_init__(self):
        object.__setattr__(self, "log_drift", float(self.log_drift))
        v = np.array(np.atleast_1d(self.vol_vec), dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vol_vec", v)
        if self.measure_tag not in MEASURE_TAGS:
            raise ValueError(f"unknown measure tag {self.measure_tag!r}")

    @property
    def vol_sq(self) -> float:
        """Variance rate of log X."""
        return float(self.vol_vec @ self.vol_vec)

    @property
    def sde_drift(self) -> float:
        """Drift of dX/X (arithmetic), = log_drift + vol_sq/2."""
        return self.log_drift + 0.5 * self.vol_sq


def moment_rate(law: GbmLaw, m_exp: float) -> float:
    """Exponential growth rate g of E[X_t^m]: E[X_t^m] = X_0^m e^{g t}.

    From the lognormal moment formula: g = m*log_drift + m^2*vol_sq/2.
    """
    return m_exp * law.log_drift + 0.5 * m_exp * m_exp * law.vol_sq
