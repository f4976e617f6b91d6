"""Simulation, Monte-Carlo payoff estimation, and PDE verification grids."""

from .hjbi import HjbiReport, hjbi_grid_check
from .paths import PathGrid, exit_probability_gbm, gbm_moment, path_substream, sample_paths
from .payoffs import (
    BarrierPayoffEstimate,
    McEstimate,
    analytic_payoff_g1,
    mc_firm_payoff_g2,
    mc_firm_payoff_g2_ladder,
    mc_payoff_firm_g1,
    mc_payoff_union_g1,
)

__all__ = [
    "BarrierPayoffEstimate",
    "HjbiReport",
    "McEstimate",
    "PathGrid",
    "analytic_payoff_g1",
    "exit_probability_gbm",
    "gbm_moment",
    "hjbi_grid_check",
    "mc_firm_payoff_g2",
    "mc_firm_payoff_g2_ladder",
    "mc_payoff_firm_g1",
    "mc_payoff_union_g1",
    "path_substream",
    "sample_paths",
]
