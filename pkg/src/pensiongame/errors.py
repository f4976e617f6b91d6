"""Typed exception hierarchy.

Three broad classes matter to callers: validation errors (malformed inputs),
feasibility errors (well-formed inputs outside the model's admissible region;
parameter sweeps record these as data rather than failing), and verification
errors (a numerical check found a violation). The CLI maps them to exit codes.
"""


class PensionGameError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PensionGameError):
    """Input values violate a structural precondition."""


class FeasibilityError(PensionGameError):
    """Inputs are well-formed but the model's admissibility conditions fail.

    Sweeps catch this class and flag the cell instead of aborting.
    """


class SimulationError(PensionGameError):
    """A Monte-Carlo run violated one of its own quality preconditions."""


class VerificationError(PensionGameError):
    """A numerical verification check found a genuine violation."""


class ConfigError(PensionGameError):
    """Scenario config could not be parsed or validated."""


# --- validation ---------------------------------------------------------


class NonPositiveRate(ValidationError):
    pass


class DriftBelowRiskFree(ValidationError):
    pass


class SingularVolatility(ValidationError):
    pass


class InvalidPreferences(ValidationError):
    pass


class InvalidBarriers(ValidationError):
    pass


class NonPositiveSurplus(ValidationError):
    pass


class SurplusOutsideBarriers(ValidationError):
    pass


class NonPositiveStart(ValidationError):
    pass


class DegenerateVolatility(ValidationError):
    pass


# --- feasibility --------------------------------------------------------


class InadmissibleA(FeasibilityError):
    """The bracket defining the union coefficient A is not positive."""


class InadmissibleB(FeasibilityError):
    """The firm coefficient B is not positive, or its bracket is ~0."""


class InadmissibleA0(FeasibilityError):
    """The bracket defining the cooperative coefficient A0 is not positive."""


class RequiresAlphaAboveR(FeasibilityError):
    """The barrier game needs a discount rate above the risk-free rate."""


class MuEqualsOne(FeasibilityError):
    """eta = (omega - mu)/(1 - mu) is undefined at mu = 1."""


class NegativeDiscriminant(FeasibilityError):
    """The quadratic for omega has no real root."""


class EtaOutOfRange(FeasibilityError):
    """eta must lie strictly inside (0, 1)."""


class DivergentIntegral(FeasibilityError):
    """Discounted moment growth does not decay; the payoff integral diverges."""


class InfeasiblePerturbation(FeasibilityError):
    """A finite-difference step left the admissible parameter region."""


class InadmissibleSolution(FeasibilityError):
    """A Monte-Carlo estimator was handed a solution with A <= 0 or B <= 0."""


class InfeasibleSolution(FeasibilityError):
    """A Monte-Carlo estimator was handed an infeasible barrier-game solution."""


# --- simulation quality -------------------------------------------------


class TailBoundNotMet(SimulationError):
    """The deterministic tail beyond the horizon exceeds its error budget."""


class ExcessiveCensoring(SimulationError):
    """Too many paths hit the horizon cap before exiting the barriers."""


# --- verification -------------------------------------------------------


class PropertyViolation(VerificationError):
    """A saddle-point/sign property failed on the verification grid.

    Carries the offending grid point and the signed slack.
    """

    def __init__(self, message: str, *, point: dict | None = None, slack: float | None = None):
        super().__init__(message)
        self.point = point or {}
        self.slack = slack
