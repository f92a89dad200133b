"""Committed piecewise reference: lead-in, active window, stop, terminal hover."""

from dataclasses import dataclass, replace
import logging

from ..const import START_TOLERANCE
from .errors import InvalidArgumentError, StartMismatchError
from .primitives import MotionPrimitive, ReferenceState, StopPrimitive, build_stop

_LOGGER = logging.getLogger(__name__)

# a hover schedule has no active window; any positive duration works for its stop
_HOVER_STOP_DURATION = 1.0


@dataclass(frozen=True, eq=False)
class ScheduledTrajectory:
    """
    Piecewise plan committed at t0.

    Windows:
        [t0, t0 + t_p)                          lead-in (previous schedule, or a hold)
        [t0 + t_p, t0 + 2 t_p)                  active primitive
        [t0 + 2 t_p, t0 + 2 t_p + stop_duration) stopping primitive
        after that                              terminal hover
    A hover schedule (no active primitive) holds its state from t0 on.
    """

    t0: float
    t_p: float
    active: MotionPrimitive | None
    stop: StopPrimitive
    lead_in: "ScheduledTrajectory | ReferenceState | None" = None

    @classmethod
    def hover(cls, state: ReferenceState, t0: float) -> "ScheduledTrajectory":
        """Schedule that holds a state at rest from t0 on."""
        return cls(t0=t0, t_p=0.0, active=None, stop=build_stop(state, _HOVER_STOP_DURATION))

    @property
    def active_start(self) -> float:
        """Start of the active window."""
        return self.t0 + self.t_p

    @property
    def stop_start(self) -> float:
        """Start of the stop window."""
        return self.t0 + 2.0 * self.t_p if self.active is not None else self.t0

    @property
    def stop_end(self) -> float:
        """End of the stop window; the schedule holds hover after this."""
        if self.active is None:
            return self.t0
        return self.stop_start + self.stop.stop_duration

    @property
    def end(self) -> float:
        """Alias for stop_end."""
        return self.stop_end

    def evaluate(self, t: float) -> ReferenceState:
        """Reference state at time t >= t0."""
        if t < self.t0 - 1e-12:
            msg = f"t={t} precedes the schedule start t0={self.t0}"
            raise InvalidArgumentError(msg)
        if self.active is None:
            return self.stop.evaluate(self.stop.stop_duration)
        if t < self.active_start:
            if isinstance(self.lead_in, ScheduledTrajectory):
                return self.lead_in.evaluate(t)
            if isinstance(self.lead_in, ReferenceState):
                return self.lead_in
            return self.active.start
        if t < self.stop_start:
            return self.active.evaluate(t - self.active_start)
        return self.stop.evaluate(t - self.stop_start)

    def junctions(self) -> list[float]:
        """Window boundaries inside the schedule."""
        if self.active is None:
            return []
        return [self.active_start, self.stop_start, self.stop_end]

    def trimmed(self) -> "ScheduledTrajectory":
        """Copy without its own lead-in, used as the lead-in of the next schedule."""
        return replace(self, lead_in=None)


def commit_schedule(
    prev: ScheduledTrajectory | None,
    selected: MotionPrimitive,
    stop: StopPrimitive,
    t_now: float,
    t_p: float,
    tolerance: float = START_TOLERANCE,
) -> ScheduledTrajectory:
    """
    Commit a selected primitive and its stop after the current window.

    The previously committed stop is discarded; the new stop is the one
    verified together with the selected primitive.

    Raises:
        StartMismatchError: if selected does not start at the state prev holds at t_now + t_p.
    """
    if prev is not None:
        expected = prev.evaluate(t_now + t_p)
        component, deviation = selected.start.deviation(expected)
        if deviation > tolerance:
            raise StartMismatchError(component, deviation, tolerance)
        lead_in: ScheduledTrajectory | ReferenceState = prev.trimmed()
    else:
        lead_in = selected.start
    _LOGGER.debug(
        "Committed primitive omega=%.3f v_z=%.3f at t=%.4f (active from %.4f)",
        selected.command.omega,
        selected.command.v_z,
        t_now,
        t_now + t_p,
    )
    return ScheduledTrajectory(t0=t_now, t_p=t_p, active=selected, stop=stop, lead_in=lead_in)
