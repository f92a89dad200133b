"""
Forward-arc motion primitives and stopping primitives.

A primitive is a unicycle flown at forward speed s(t), vertical speed w(t) and
yaw rate r(t). Each of the three body rates follows a quintic ramp from the
start state's value and first two derivatives to its target (zero slope and
curvature at the end) and is held constant afterwards. Matching the start
through the second derivative of every body rate is what makes consecutive
primitives join continuously through jerk; snap jumps by a bounded amount.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray

from ..const import OMEGA_EPSILON
from .errors import InvalidArgumentError
from .geometry import as_vector, wrap_angle

TAU_TOLERANCE = 1e-12

_GL_NODES, _GL_WEIGHTS = leggauss(16)


@dataclass(frozen=True, eq=False)
class FlatState:
    """Position (world frame, m) and heading (rad)."""

    position: NDArray[np.float64]
    yaw: float = 0.0

    def __post_init__(self) -> None:
        """Validate and wrap yaw."""
        object.__setattr__(self, "position", as_vector(self.position, "position"))
        if not math.isfinite(self.yaw):
            msg = f"yaw must be finite, got {self.yaw}"
            raise InvalidArgumentError(msg)
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))


def _zeros() -> NDArray[np.float64]:
    return np.zeros(3)


@dataclass(frozen=True, eq=False)
class ReferenceState:
    """Reference position and its derivatives through snap, plus heading and its derivatives."""

    position: NDArray[np.float64]
    velocity: NDArray[np.float64] = field(default_factory=_zeros)
    acceleration: NDArray[np.float64] = field(default_factory=_zeros)
    jerk: NDArray[np.float64] = field(default_factory=_zeros)
    snap: NDArray[np.float64] = field(default_factory=_zeros)
    yaw: float = 0.0
    yaw_rate: float = 0.0
    yaw_acceleration: float = 0.0
    yaw_jerk: float = 0.0

    def __post_init__(self) -> None:
        """Validate vectors and wrap yaw."""
        for name in ("position", "velocity", "acceleration", "jerk", "snap"):
            object.__setattr__(self, name, as_vector(getattr(self, name), name))
        scalars = (self.yaw, self.yaw_rate, self.yaw_acceleration, self.yaw_jerk)
        if not all(math.isfinite(x) for x in scalars):
            msg = f"yaw terms must be finite, got {scalars}"
            raise InvalidArgumentError(msg)
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    @classmethod
    def hover(cls, position: ArrayLike, yaw: float = 0.0) -> "ReferenceState":
        """Return a state at rest."""
        return cls(position=np.asarray(position, dtype=np.float64), yaw=yaw)

    @property
    def speed(self) -> float:
        """Return the velocity magnitude."""
        return float(np.linalg.norm(self.velocity))

    @property
    def flat(self) -> FlatState:
        """Return the flat output (position, yaw)."""
        return FlatState(position=self.position, yaw=self.yaw)

    def deviation(self, other: "ReferenceState") -> tuple[str, float]:
        """Return the component with the largest absolute difference to other, and that difference."""
        worst = ("position", 0.0)
        for name in ("position", "velocity", "acceleration", "jerk"):
            diff = float(np.max(np.abs(getattr(self, name) - getattr(other, name))))
            if diff > worst[1]:
                worst = (name, diff)
        yaw_diff = abs(wrap_angle(self.yaw - other.yaw))
        if yaw_diff > worst[1]:
            worst = ("yaw", yaw_diff)
        return worst


@dataclass(frozen=True)
class BodyCommand:
    """Body-frame command: forward speed, vertical speed, yaw rate, and duration."""

    v_x: float
    v_z: float = 0.0
    omega: float = 0.0
    duration_T: float = 2.0

    def __post_init__(self) -> None:
        """Validate the command."""
        if not all(math.isfinite(x) for x in (self.v_x, self.v_z, self.omega, self.duration_T)):
            msg = f"Body command must be finite: {self}"
            raise InvalidArgumentError(msg)
        if self.v_x < 0:
            msg = f"Forward speed must be non-negative, got {self.v_x}"
            raise InvalidArgumentError(msg)
        if self.duration_T <= 0:
            msg = f"Command duration must be positive, got {self.duration_T}"
            raise InvalidArgumentError(msg)

    def check_bounds(self, omega_max: float, vz_max: float) -> None:
        """Raise if the yaw rate or vertical speed exceed their bounds."""
        if abs(self.omega) > omega_max + TAU_TOLERANCE or abs(self.v_z) > vz_max + TAU_TOLERANCE:
            msg = f"Command {self} exceeds bounds |omega| <= {omega_max}, |v_z| <= {vz_max}"
            raise InvalidArgumentError(msg)


def _arc_offset(
    yaw: float | NDArray[np.float64], v: float, omega: float, tau: float | NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Planar displacement of a constant-(v, omega) unicycle after tau."""
    tau = np.asarray(tau, dtype=np.float64)
    if abs(omega) <= OMEGA_EPSILON:
        return v * tau * np.cos(yaw), v * tau * np.sin(yaw)
    # v/w (sin(th + w tau) - sin th), v/w (cos th - cos(th + w tau))
    end = yaw + omega * tau
    return (v / omega) * (np.sin(end) - np.sin(yaw)), (v / omega) * (np.cos(yaw) - np.cos(end))


def propagate_flat(xi: FlatState, cmd: BodyCommand, tau: float) -> FlatState:
    """
    Closed-form unicycle solution after tau seconds of a constant command.

    Below the yaw-rate switch threshold the straight-line limit is returned
    instead of dividing by omega.
    """
    if not (-TAU_TOLERANCE <= tau <= cmd.duration_T + TAU_TOLERANCE):
        msg = f"tau={tau} outside [0, {cmd.duration_T}]"
        raise InvalidArgumentError(msg)
    dx, dy = _arc_offset(xi.yaw, cmd.v_x, cmd.omega, tau)
    position = xi.position + np.array([float(dx), float(dy), cmd.v_z * tau])
    return FlatState(position=position, yaw=xi.yaw + cmd.omega * tau)


def quintic_ramp(x0: float, v0: float, a0: float, target: float, duration: float) -> Polynomial:
    """Quintic from (x0, v0, a0) at t=0 to (target, 0, 0) at t=duration."""
    T = duration
    dx = target - x0 - v0 * T - 0.5 * a0 * T**2
    dv = -v0 - a0 * T
    da = -a0
    c3 = (10.0 * dx - 4.0 * dv * T + 0.5 * da * T**2) / T**3
    c4 = (-15.0 * dx + 7.0 * dv * T - da * T**2) / T**4
    c5 = (6.0 * dx - 3.0 * dv * T + 0.5 * da * T**2) / T**5
    return Polynomial([x0, v0, 0.5 * a0, c3, c4, c5])


@dataclass(frozen=True)
class BodyRates:
    """Body rate derivatives at one instant: s (forward), w (vertical), r (yaw), orders 0..3."""

    s: tuple[float, float, float, float]
    w: tuple[float, float, float, float]
    r: tuple[float, float, float, float]

    @classmethod
    def from_state(cls, state: ReferenceState) -> "BodyRates":
        """Recover body rates from a reference state produced by the unicycle model."""
        heading = np.array([math.cos(state.yaw), math.sin(state.yaw), 0.0])
        s0 = float(state.velocity @ heading)
        s1 = float(state.acceleration @ heading)
        s2 = float(state.jerk @ heading) + s0 * state.yaw_rate**2
        return cls(
            s=(s0, s1, s2, 0.0),
            w=(float(state.velocity[2]), float(state.acceleration[2]), float(state.jerk[2]), 0.0),
            r=(state.yaw_rate, state.yaw_acceleration, state.yaw_jerk, 0.0),
        )


def _compose(
    position: NDArray[np.float64], yaw: float, rates: BodyRates
) -> ReferenceState:
    """Build world-frame derivatives from body rates at a given heading."""
    s0, s1, s2, s3 = rates.s
    w0, w1, w2, w3 = rates.w
    r0, r1, r2, _ = rates.r
    cos_y, sin_y = math.cos(yaw), math.sin(yaw)
    u = np.array([cos_y, sin_y, 0.0])
    n = np.array([-sin_y, cos_y, 0.0])
    e_z = np.array([0.0, 0.0, 1.0])
    velocity = s0 * u + w0 * e_z
    acceleration = s1 * u + s0 * r0 * n + w1 * e_z
    jerk = (s2 - s0 * r0**2) * u + (2.0 * s1 * r0 + s0 * r1) * n + w2 * e_z
    snap = (
        (s3 - 3.0 * s1 * r0**2 - 3.0 * s0 * r0 * r1) * u
        + (3.0 * s2 * r0 + 3.0 * s1 * r1 + s0 * r2 - s0 * r0**3) * n
        + w3 * e_z
    )
    return ReferenceState(
        position=position,
        velocity=velocity,
        acceleration=acceleration,
        jerk=jerk,
        snap=snap,
        yaw=yaw,
        yaw_rate=r0,
        yaw_acceleration=r1,
        yaw_jerk=r2,
    )


class _ArcProfile:
    """Precomputed ramp polynomials and ramp-end state of one segment."""

    def __init__(self, start: ReferenceState, targets: tuple[float, float, float], ramp: float) -> None:
        self.start = start
        self.ramp = ramp
        self.s_target, self.w_target, self.r_target = targets
        rates = BodyRates.from_state(start)
        if ramp > 0:
            self.s_poly = quintic_ramp(*rates.s[:3], self.s_target, ramp)
            self.w_poly = quintic_ramp(*rates.w[:3], self.w_target, ramp)
            self.r_poly = quintic_ramp(*rates.r[:3], self.r_target, ramp)
            self.yaw_poly = self.r_poly.integ(k=start.yaw)
            self.z_poly = self.w_poly.integ(k=start.position[2])
            self.derivs = {
                name: [poly] + [poly.deriv(k) for k in (1, 2, 3)]
                for name, poly in (("s", self.s_poly), ("w", self.w_poly), ("r", self.r_poly))
            }
            end_xy = self._ramp_xy(np.array([ramp]))[0]
            self.end_position = np.array([end_xy[0], end_xy[1], self.z_poly(ramp)])
            self.end_yaw = float(self.yaw_poly(ramp))
        else:
            self.end_position = start.position.copy()
            self.end_yaw = start.yaw

    def _ramp_xy(self, taus: NDArray[np.float64]) -> NDArray[np.float64]:
        """Planar position inside the ramp by Gauss-Legendre quadrature of s (cos yaw, sin yaw)."""
        half = 0.5 * taus[:, None]
        nodes = half * (_GL_NODES[None, :] + 1.0)
        speed = self.s_poly(nodes)
        yaw = self.yaw_poly(nodes)
        weights = half * _GL_WEIGHTS[None, :]
        dx = np.sum(weights * speed * np.cos(yaw), axis=1)
        dy = np.sum(weights * speed * np.sin(yaw), axis=1)
        return self.start.position[:2] + np.stack([dx, dy], axis=1)

    def positions(self, taus: NDArray[np.float64]) -> NDArray[np.float64]:
        """World positions at an array of local times."""
        out = np.empty((taus.size, 3))
        in_ramp = taus < self.ramp
        if np.any(in_ramp):
            ramp_taus = taus[in_ramp]
            out[in_ramp, :2] = self._ramp_xy(ramp_taus)
            out[in_ramp, 2] = self.z_poly(ramp_taus)
        if np.any(~in_ramp):
            dt = taus[~in_ramp] - self.ramp
            dx, dy = _arc_offset(self.end_yaw, self.s_target, self.r_target, dt)
            out[~in_ramp, 0] = self.end_position[0] + dx
            out[~in_ramp, 1] = self.end_position[1] + dy
            out[~in_ramp, 2] = self.end_position[2] + self.w_target * dt
        return out

    def evaluate(self, tau: float) -> ReferenceState:
        """Full reference state at local time tau."""
        if tau < self.ramp:
            position = self.positions(np.array([tau]))[0]
            yaw = float(self.yaw_poly(tau))
            s, w, r = (tuple(float(p(tau)) for p in self.derivs[name]) for name in ("s", "w", "r"))
            rates = BodyRates(s=s, w=w, r=r)
        else:
            dt = tau - self.ramp
            dx, dy = _arc_offset(self.end_yaw, self.s_target, self.r_target, dt)
            position = self.end_position + np.array([float(dx), float(dy), self.w_target * dt])
            yaw = self.end_yaw + self.r_target * dt
            rates = BodyRates(
                s=(self.s_target, 0.0, 0.0, 0.0),
                w=(self.w_target, 0.0, 0.0, 0.0),
                r=(self.r_target, 0.0, 0.0, 0.0),
            )
        return _compose(position, wrap_angle(yaw), rates)


class _ArcSegment:
    """Shared evaluation for motion and stopping primitives."""

    start: ReferenceState

    @property
    def duration(self) -> float:
        """Return the nominal duration of the segment."""
        raise NotImplementedError

    @property
    def ramp(self) -> float:
        """Return the length of the body-rate ramp."""
        raise NotImplementedError

    @property
    def targets(self) -> tuple[float, float, float]:
        """Return the (forward, vertical, yaw rate) targets of the ramp."""
        raise NotImplementedError

    @cached_property
    def profile(self) -> _ArcProfile:
        """Return the precomputed ramp profile."""
        return _ArcProfile(self.start, self.targets, self.ramp)

    def _state(self, tau: float) -> ReferenceState:
        if tau == 0.0:
            modeled = self.profile.evaluate(0.0)
            return ReferenceState(
                position=self.start.position,
                velocity=self.start.velocity,
                acceleration=self.start.acceleration,
                jerk=self.start.jerk,
                snap=modeled.snap,
                yaw=self.start.yaw,
                yaw_rate=self.start.yaw_rate,
                yaw_acceleration=self.start.yaw_acceleration,
                yaw_jerk=self.start.yaw_jerk,
            )
        return self.profile.evaluate(tau)

    def positions(self, taus: ArrayLike) -> NDArray[np.float64]:
        """World positions at an array of local times."""
        return self.profile.positions(np.asarray(taus, dtype=np.float64))

    @property
    def end_state(self) -> ReferenceState:
        """Return the state at the end of the segment."""
        return self._state(self.duration)


@dataclass(frozen=True, eq=False)
class MotionPrimitive(_ArcSegment):
    """Forward-arc primitive from a start state under a constant body command."""

    start: ReferenceState
    command: BodyCommand
    ramp_duration: float

    def __post_init__(self) -> None:
        """Validate the ramp."""
        if not (0.0 <= self.ramp_duration <= self.command.duration_T):
            msg = f"ramp_duration={self.ramp_duration} outside [0, {self.command.duration_T}]"
            raise InvalidArgumentError(msg)

    @property
    def duration(self) -> float:
        """Return the primitive duration T."""
        return self.command.duration_T

    @property
    def ramp(self) -> float:
        """Return the blend-in interval."""
        return self.ramp_duration

    @property
    def targets(self) -> tuple[float, float, float]:
        """Return the commanded body rates."""
        return (self.command.v_x, self.command.v_z, self.command.omega)

    def evaluate(self, tau: float) -> ReferenceState:
        """Reference state at local time tau in [0, T]."""
        if not (-TAU_TOLERANCE <= tau <= self.duration + TAU_TOLERANCE):
            msg = f"tau={tau} outside [0, {self.duration}]"
            raise InvalidArgumentError(msg)
        return self._state(min(max(tau, 0.0), self.duration))


@dataclass(frozen=True, eq=False)
class StopPrimitive(_ArcSegment):
    """Decelerates body speed, vertical speed and yaw rate to zero; holds the terminal hover after."""

    start: ReferenceState
    stop_duration: float

    def __post_init__(self) -> None:
        """Validate the duration."""
        if not self.stop_duration > 0:
            msg = f"stop_duration must be positive, got {self.stop_duration}"
            raise InvalidArgumentError(msg)

    @property
    def duration(self) -> float:
        """Return the stop duration."""
        return self.stop_duration

    @property
    def ramp(self) -> float:
        """Return the deceleration interval."""
        return self.stop_duration

    @property
    def targets(self) -> tuple[float, float, float]:
        """Everything decays to zero."""
        return (0.0, 0.0, 0.0)

    def evaluate(self, tau: float) -> ReferenceState:
        """Reference state at local time tau >= 0; past the stop it is the terminal hover."""
        if tau < -TAU_TOLERANCE:
            msg = f"tau={tau} is negative"
            raise InvalidArgumentError(msg)
        return self._state(max(tau, 0.0))


@dataclass(frozen=True, eq=False)
class PrimitiveLibrary:
    """Cartesian product of yaw rates and vertical speeds at a fixed forward speed."""

    primitives: tuple[MotionPrimitive, ...]
    v_x_fixed: float
    omega_set: tuple[float, ...]
    v_z_set: tuple[float, ...]

    def __len__(self) -> int:
        """Return the number of primitives."""
        return len(self.primitives)

    def __iter__(self):  # noqa: ANN204
        """Iterate in library order."""
        return iter(self.primitives)

    def __getitem__(self, index: int) -> MotionPrimitive:
        """Return the primitive at index."""
        return self.primitives[index]


def centered_outward(values: Sequence[float]) -> tuple[float, ...]:
    """Order values 0, -d, +d, -2d, +2d, ... with duplicates removed."""
    return tuple(sorted(dict.fromkeys(float(v) for v in values), key=lambda x: (abs(x), x)))


def uniform_set(bound: float, count: int) -> tuple[float, ...]:
    """Return count values uniformly spread over [-bound, bound], exactly symmetric."""
    if count < 1:
        msg = f"count must be at least 1, got {count}"
        raise InvalidArgumentError(msg)
    if count == 1:
        return (0.0,)
    half = (count - 1) / 2.0
    return tuple(float(bound * (i - half) / half) for i in range(count))


def build_library(
    start: ReferenceState,
    v_x: float,
    omega_set: Sequence[float],
    v_z_set: Sequence[float],
    T: float,
    ramp_duration: float,
    omega_max: float | None = None,
    vz_max: float | None = None,
) -> PrimitiveLibrary:
    """Build the primitive library, omega-major and centered-outward."""
    if not omega_set or not v_z_set:
        msg = "omega_set and v_z_set must be non-empty"
        raise InvalidArgumentError(msg)
    omegas = centered_outward(omega_set)
    v_zs = centered_outward(v_z_set)
    primitives = []
    for omega in omegas:
        for v_z in v_zs:
            command = BodyCommand(v_x=v_x, v_z=v_z, omega=omega, duration_T=T)
            if omega_max is not None and vz_max is not None:
                command.check_bounds(omega_max, vz_max)
            primitives.append(MotionPrimitive(start=start, command=command, ramp_duration=ramp_duration))
    return PrimitiveLibrary(primitives=tuple(primitives), v_x_fixed=v_x, omega_set=omegas, v_z_set=v_zs)


def build_stop(start: ReferenceState, stop_duration: float) -> StopPrimitive:
    """Build the stopping primitive from a start state."""
    return StopPrimitive(start=start, stop_duration=stop_duration)


def eval_reference(prim: MotionPrimitive, tau: float) -> ReferenceState:
    """Evaluate a motion primitive at local time tau."""
    return prim.evaluate(tau)


def sample_times(duration: float, delta_t: float) -> NDArray[np.float64]:
    """Times 0, dt, 2dt, ... below duration, with the terminal time always included."""
    if delta_t <= 0:
        msg = f"delta_t must be positive, got {delta_t}"
        raise InvalidArgumentError(msg)
    count = math.floor(duration / delta_t + 1e-9)
    taus = delta_t * np.arange(count + 1, dtype=np.float64)
    taus = taus[taus < duration - 1e-9]
    return np.append(taus, duration)


def sample_points(
    prim: MotionPrimitive | StopPrimitive, delta_t: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Sample a primitive at a fixed step; returns (taus, world positions (N, 3))."""
    taus = sample_times(prim.duration, delta_t)
    return taus, prim.positions(taus)
