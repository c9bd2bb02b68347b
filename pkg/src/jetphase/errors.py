"""Exception types raised by the library."""


class JetPhaseError(Exception):
    """Base class for all library errors."""


class SingularMetric(JetPhaseError):
    """Metric determinant vanishes (beyond tolerance) at the requested point."""


class ChartDomain(JetPhaseError):
    """Point lies outside the chart domain of the model."""


class NotTimelike(JetPhaseError):
    """Velocity triple does not define a timelike direction at the event."""


class MissingEMField(JetPhaseError):
    """Operation needs an electromagnetic field but the model has none."""


class MissingPotential(JetPhaseError):
    """Operation needs an electromagnetic potential but only the field strength is known."""


class MissingDerivatives(JetPhaseError):
    """Operation needs derivative data that the input object does not provide."""


class ObserverNotAdapted(JetPhaseError):
    """Chart-adapted evaluation requested for an observer with nonzero velocities."""


class DegenerateDenominator(JetPhaseError):
    """Fractional-linear velocity transformation hit a vanishing denominator."""


class ConfigError(JetPhaseError):
    """Run configuration failed validation."""
