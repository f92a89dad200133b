import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from forward_arc.planning.errors import InvalidArgumentError
from forward_arc.planning.geometry import FORWARD_CAMERA_ROTATION, RigidTransform, as_vector, wrap_angle


def random_transform(rng: np.random.Generator) -> RigidTransform:
    yaw, pitch, roll = rng.uniform(-math.pi, math.pi, 3)
    return RigidTransform.from_pose(rng.normal(size=3), yaw, pitch / 2, roll)


def test_inverse_undoes_transform():
    rng = np.random.default_rng(1)
    for _ in range(20):
        tf = random_transform(rng)
        points = rng.normal(size=(5, 3))
        assert_allclose(tf.inverse().apply(tf.apply(points)), points, atol=1e-12)


def test_compose_matches_sequential_application():
    rng = np.random.default_rng(2)
    a, b = random_transform(rng), random_transform(rng)
    point = rng.normal(size=3)
    assert_allclose((a @ b).apply(point), a.apply(b.apply(point)), atol=1e-12)
    assert (a @ b).is_proper


def test_matrix_round_trip_keeps_transform():
    tf = RigidTransform.from_pose([1.0, 2.0, 3.0], 0.4)
    assert_allclose(RigidTransform.from_matrix(tf.matrix).apply([1.0, 0.0, 0.0]), tf.apply([1.0, 0.0, 0.0]))


def test_reflection_is_not_proper():
    tf = RigidTransform(rotation=np.diag([1.0, 1.0, -1.0]))
    assert not tf.is_proper
    with pytest.raises(InvalidArgumentError):
        tf.ensure_proper()


def test_bad_shapes_rejected():
    with pytest.raises(InvalidArgumentError):
        RigidTransform(rotation=np.eye(2))
    with pytest.raises(InvalidArgumentError):
        as_vector([1.0, 2.0])
    with pytest.raises(InvalidArgumentError):
        as_vector([1.0, np.nan, 2.0])


@pytest.mark.parametrize(
    ("angle", "expected"),
    [(0.0, 0.0), (-math.pi, math.pi), (2 * math.pi + 0.5, 0.5), (-0.5, -0.5)],
)
def test_wrap_angle(angle, expected):
    assert wrap_angle(angle) == pytest.approx(expected)


def test_forward_camera_looks_along_body_x():
    # body forward -> optical z, body left -> optical -x, body up -> optical -y
    assert_allclose(FORWARD_CAMERA_ROTATION @ [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    assert_allclose(FORWARD_CAMERA_ROTATION @ [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0])
    assert_allclose(FORWARD_CAMERA_ROTATION @ [0.0, 0.0, 1.0], [0.0, -1.0, 0.0])
