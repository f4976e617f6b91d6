"""Robust pension surplus games: closed-form equilibria plus verification."""

from .errors import (
    ConfigError,
    FeasibilityError,
    PensionGameError,
    SimulationError,
    ValidationError,
    VerificationError,
)
from .game_one import (
    GameOneSolution,
    ParetoSolution,
    solve_game_one,
    solve_pareto,
    value_functions_g1,
    wealth_law_g1,
)
from .game_two import (
    Barriers,
    GameTwoSolution,
    solve_game_two,
    value_functions_g2,
    wealth_law_g2,
)
from .laws import (
    MEASURE_TAGS,
    REFERENCE,
    WORST_CASE_FIRM,
    WORST_CASE_UNION,
    GbmLaw,
    moment_rate,
)
from .market_model import (
    MarketParams,
    Preferences,
    ValidatedMarket,
    market_from_scalars,
    validate_market,
)
from .sensitivity import (
    AxisSpec,
    BenefitRatioGradient,
    SweepTable,
    benefit_ratio_gradient,
    fd_gradient,
    sweep,
    sweep_table_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "Barriers",
    "BenefitRatioGradient",
    "ConfigError",
    "FeasibilityError",
    "GameOneSolution",
    "GameTwoSolution",
    "GbmLaw",
    "MEASURE_TAGS",
    "MarketParams",
    "ParetoSolution",
    "PensionGameError",
    "Preferences",
    "REFERENCE",
    "SimulationError",
    "SweepTable",
    "ValidatedMarket",
    "ValidationError",
    "VerificationError",
    "WORST_CASE_FIRM",
    "WORST_CASE_UNION",
    "benefit_ratio_gradient",
    "fd_gradient",
    "market_from_scalars",
    "moment_rate",
    "solve_game_one",
    "solve_game_two",
    "solve_pareto",
    "sweep",
    "sweep_table_csv",
    "validate_market",
    "value_functions_g1",
    "value_functions_g2",
    "wealth_law_g1",
    "wealth_law_g2",
    "__version__",
]
