"""Exceptions raised by the planning library."""


class ForwardArcError(Exception):
    """Base class for forward_arc errors."""


class InvalidArgumentError(ForwardArcError, ValueError):
    """A precondition on an argument was violated."""


class StartMismatchError(ForwardArcError, ValueError):
    """A primitive does not start where the committed schedule puts the robot."""

    def __init__(self, component: str, deviation: float, tolerance: float) -> None:
        """Initialize the StartMismatchError."""
        self.component = component
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(
            f"Selected primitive start deviates from the scheduled handoff state: "
            f"{component} off by {deviation:.3e} (tolerance {tolerance:.1e})"
        )


class OutOfOrderStampError(ForwardArcError, ValueError):
    """A depth frame was pushed with a stamp that is not strictly newer than the chain head."""


class ConfigError(ForwardArcError, ValueError):
    """Trial, batch or world configuration is invalid."""


class ReportError(ForwardArcError, OSError):
    """Reading or writing a report, world or log file failed."""
