"""Pinhole depth camera model."""

from enum import Enum
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from ..const import (
    DEFAULT_D_MAX,
    DEFAULT_D_MIN,
    DEFAULT_EDGE_MARGIN,
    DEFAULT_FOCAL,
    DEFAULT_HEIGHT,
    DEFAULT_STRIDE,
    DEFAULT_WIDTH,
)
from .geometry import FORWARD_CAMERA_ROTATION, RigidTransform


class NoReturnPolicy(str, Enum):
    """How a ray that hits nothing within the sensing range is stored."""

    FREE = "free"  # +inf: observed free out to d_max
    INVALID = "invalid"  # NaN sentinel


class Projection(NamedTuple):
    """Pixel coordinates and sensor depth of a projected point."""

    u: float
    v: float
    depth: float


class Extrinsic(BaseModel):
    """Body-to-sensor rigid transform, T_B^S."""

    model_config = ConfigDict(frozen=True)

    rotation: tuple[tuple[float, float, float], ...] = tuple(
        tuple(float(x) for x in row) for row in FORWARD_CAMERA_ROTATION
    )
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @field_validator("rotation")
    @classmethod
    def check_rotation(cls, value: tuple[tuple[float, ...], ...]) -> tuple[tuple[float, ...], ...]:
        """Ensure the rotation is a proper 3x3 rotation."""
        if len(value) != 3 or any(len(row) != 3 for row in value):  # noqa: PLR2004
            msg = "rotation must be 3x3"
            raise ValueError(msg)
        if not RigidTransform(rotation=np.array(value)).is_proper:
            msg = "rotation must be orthonormal with det +1"
            raise ValueError(msg)
        return value

    def to_transform(self) -> RigidTransform:
        """Return the extrinsic as a RigidTransform."""
        return RigidTransform(rotation=np.array(self.rotation), translation=np.array(self.translation))


class CameraModel(BaseModel):
    """Intrinsics, valid range and mounting of the forward depth camera."""

    model_config = ConfigDict(frozen=True)

    fx: float = Field(default=DEFAULT_FOCAL, gt=0)
    fy: float = Field(default=DEFAULT_FOCAL, gt=0)
    cx: float = DEFAULT_WIDTH / 2.0
    cy: float = DEFAULT_HEIGHT / 2.0
    width: int = Field(default=DEFAULT_WIDTH, gt=0)
    height: int = Field(default=DEFAULT_HEIGHT, gt=0)
    d_min: float = Field(default=DEFAULT_D_MIN, gt=0)
    d_max: float = DEFAULT_D_MAX
    edge_margin: float = Field(default=DEFAULT_EDGE_MARGIN, ge=0)
    stride: int = Field(default=DEFAULT_STRIDE, ge=1)
    no_return: NoReturnPolicy = NoReturnPolicy.FREE
    noise_std: float = Field(default=0.0, ge=0)
    extrinsic: Extrinsic = Extrinsic()

    _body_to_sensor: RigidTransform = PrivateAttr()

    @model_validator(mode="after")
    def check_range(self) -> "CameraModel":
        """Ensure 0 < d_min < d_max."""
        if not self.d_min < self.d_max:
            msg = f"d_min ({self.d_min}) must be below d_max ({self.d_max})"
            raise ValueError(msg)
        return self

    def model_post_init(self, context: object, /) -> None:
        """Cache the extrinsic transform."""
        self._body_to_sensor = self.extrinsic.to_transform()

    @property
    def body_to_sensor(self) -> RigidTransform:
        """Return T_B^S."""
        return self._body_to_sensor

    def scaled(self, factor: float) -> "CameraModel":
        """Return the same field of view at a resolution scaled by factor."""
        return self.model_copy(
            update={
                "fx": self.fx * factor,
                "fy": self.fy * factor,
                "cx": self.cx * factor,
                "cy": self.cy * factor,
                "width": max(1, round(self.width * factor)),
                "height": max(1, round(self.height * factor)),
            }
        )

    def pixel_rays(self) -> NDArray[np.float64]:
        """Sensor-frame rays (height, width, 3) with unit z, so the ray parameter is the depth."""
        u, v = np.meshgrid(np.arange(self.width, dtype=np.float64), np.arange(self.height, dtype=np.float64))
        return np.stack([(u - self.cx) / self.fx, (v - self.cy) / self.fy, np.ones_like(u)], axis=-1)

    def project_many(
        self, points: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
        """Project (N, 3) sensor-frame points; returns (u, v, in_view)."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        z = pts[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.fx * pts[:, 0] / z + self.cx
            v = self.fy * pts[:, 1] / z + self.cy
        margin = self.edge_margin
        in_view = (
            (z >= self.d_min)
            & (z <= self.d_max)
            & (u >= margin - 0.5)
            & (u <= self.width - 0.5 - margin)
            & (v >= margin - 0.5)
            & (v <= self.height - 0.5 - margin)
        )
        return u, v, in_view

    def back_project(self, rows: ArrayLike, cols: ArrayLike, depth: ArrayLike) -> NDArray[np.float64]:
        """Sensor-frame points for pixel centers (row, col) at the given depths."""
        rows = np.asarray(rows, dtype=np.float64)
        cols = np.asarray(cols, dtype=np.float64)
        z = np.asarray(depth, dtype=np.float64)
        return np.stack([(cols - self.cx) / self.fx * z, (rows - self.cy) / self.fy * z, z], axis=-1)


def project(camera: CameraModel, p_S: ArrayLike) -> Projection | None:
    """Pinhole projection of one sensor-frame point, or None when it is out of view."""
    u, v, in_view = camera.project_many(np.asarray(p_S, dtype=np.float64)[None, :])
    if not in_view[0]:
        return None
    return Projection(u=float(u[0]), v=float(v[0]), depth=float(np.asarray(p_S)[2]))
