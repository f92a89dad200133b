"""Rigid transforms and angle helpers."""

from dataclasses import dataclass, field
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.transform import Rotation

from .errors import InvalidArgumentError

RIGID_TOLERANCE = 1e-9

# body (x forward, y left, z up) -> optical sensor (x right, y down, z forward)
FORWARD_CAMERA_ROTATION = np.array(
    [
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
    ]
)


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def as_vector(value: ArrayLike, name: str = "vector") -> NDArray[np.float64]:
    """Return value as a finite float64 3-vector."""
    vec = np.asarray(value, dtype=np.float64)
    if vec.shape != (3,):
        msg = f"{name} must be a 3-vector, got shape {vec.shape}"
        raise InvalidArgumentError(msg)
    if not np.all(np.isfinite(vec)):
        msg = f"{name} must be finite, got {vec}"
        raise InvalidArgumentError(msg)
    return vec


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Proper rigid transform p' = R p + t."""

    rotation: NDArray[np.float64] = field(default_factory=lambda: np.eye(3))
    translation: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        """Validate the rotation."""
        rot = np.asarray(self.rotation, dtype=np.float64)
        trans = np.asarray(self.translation, dtype=np.float64)
        if rot.shape != (3, 3) or trans.shape != (3,):
            msg = f"Rigid transform needs a 3x3 rotation and 3-vector, got {rot.shape} and {trans.shape}"
            raise InvalidArgumentError(msg)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @classmethod
    def identity(cls) -> "RigidTransform":
        """Return the identity transform."""
        return cls()

    @classmethod
    def from_pose(
        cls, position: ArrayLike, yaw: float, pitch: float = 0.0, roll: float = 0.0
    ) -> "RigidTransform":
        """Body-to-world transform for a pose given as position and z-y-x Euler angles."""
        rot = Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_matrix()
        return cls(rotation=rot, translation=np.asarray(position, dtype=np.float64))

    @classmethod
    def from_matrix(cls, matrix: ArrayLike) -> "RigidTransform":
        """Build from a 4x4 homogeneous matrix."""
        mat = np.asarray(matrix, dtype=np.float64)
        return cls(rotation=mat[:3, :3], translation=mat[:3, 3])

    @property
    def matrix(self) -> NDArray[np.float64]:
        """Return the 4x4 homogeneous matrix."""
        mat = np.eye(4)
        mat[:3, :3] = self.rotation
        mat[:3, 3] = self.translation
        return mat

    @property
    def is_proper(self) -> bool:
        """Whether the rotation is orthonormal with det +1."""
        rot = self.rotation
        orthonormal = np.allclose(rot @ rot.T, np.eye(3), atol=RIGID_TOLERANCE)
        return bool(orthonormal and abs(np.linalg.det(rot) - 1.0) <= RIGID_TOLERANCE)

    def ensure_proper(self, name: str = "transform") -> "RigidTransform":
        """Raise if the rotation is not a proper rotation."""
        if not self.is_proper:
            msg = f"{name} is not a proper rigid transform"
            raise InvalidArgumentError(msg)
        return self

    def apply(self, points: ArrayLike) -> NDArray[np.float64]:
        """Transform a single point (3,) or an array of points (N, 3)."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        """Return the inverse transform."""
        rot_t = self.rotation.T
        return RigidTransform(rotation=rot_t, translation=-rot_t @ self.translation)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        """Compose: (self @ other).apply(p) == self.apply(other.apply(p))."""
        return RigidTransform(
            rotation=self.rotation @ other.rotation,
            translation=self.rotation @ other.translation + self.translation,
        )

    def __repr__(self) -> str:
        """Compact representation."""
        yaw, pitch, roll = Rotation.from_matrix(self.rotation).as_euler("ZYX")
        return (
            f"RigidTransform(t={np.round(self.translation, 4).tolist()}, "
            f"ypr={np.round([yaw, pitch, roll], 4).tolist()})"
        )
