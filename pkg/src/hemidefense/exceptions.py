"""Exception hierarchy shared by the solver, strategies and engine."""


class HemiDefenseError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(HemiDefenseError, ValueError):
    """Input lies outside the region where a geometric formula is defined."""


class SingularityError(HemiDefenseError, ArithmeticError):
    """Defender sits exactly on the breaching point; the governing equations degenerate."""


class ConvergenceError(HemiDefenseError, RuntimeError):
    """The breaching-point solver failed to reach its tolerance."""

    def __init__(self, message, residual_beta=float("nan"), residual_theta=float("nan")):
        super().__init__(
            f"{message} (residual_beta={residual_beta:.3e}, residual_theta={residual_theta:.3e})"
        )
        self.residual_beta = residual_beta
        self.residual_theta = residual_theta


class StepError(HemiDefenseError, ValueError):
    """Requested step length is not admissible on the hemisphere."""


class SimulationError(HemiDefenseError, RuntimeError):
    """A game aborted mid-run; carries the tick at which it failed."""

    def __init__(self, message, tick):
        super().__init__(f"tick {tick}: {message}")
        self.tick = tick


class ConfigError(HemiDefenseError, ValueError):
    """Invalid or unknown configuration field."""
