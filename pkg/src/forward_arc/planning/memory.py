"""
Temporal depth-frame memory.

A chain of recent depth frames, each holding its raster, a subsampled point
cloud and a k-d tree, linked by relative sensor transforms. Query points are
moved from the newest frame to older ones until one frame sees them in free
space; the nearest cloud point of that frame gives the obstacle distance.
No uncertainty is propagated along the chain.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
import logging
from pathlib import Path
import threading

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree

from ..const import DEFAULT_HISTORY, DEFAULT_OCCLUSION_BAND, STAMP_TOLERANCE
from .camera import CameraModel
from .errors import InvalidArgumentError, OutOfOrderStampError, ReportError
from .geometry import RigidTransform

_LOGGER = logging.getLogger(__name__)

DUMP_MAGIC = b"FADF"
DUMP_VERSION = 1
DUMP_HEADER = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("width", "<u4"),
        ("height", "<u4"),
        ("fx", "<f8"),
        ("fy", "<f8"),
        ("cx", "<f8"),
        ("cy", "<f8"),
        ("stamp", "<f8"),
    ]
)


class FrameVerdict(str, Enum):
    """Classification of a point against a single frame."""

    FREE_KNOWN = "free_known"
    OCCLUDED = "occluded"
    OUT_OF_VIEW = "out_of_view"


class Verdict(str, Enum):
    """Classification of a point against the whole chain."""

    FREE_KNOWN = "free_known"
    NEAR_OBSTACLE = "near_obstacle"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class DepthFrame:
    """One depth observation with its back-projected cloud and k-d tree."""

    depth: NDArray[np.float32]
    points: NDArray[np.float64]
    stamp: float
    pose: RigidTransform = field(default_factory=RigidTransform.identity)
    kd_index: cKDTree | None = None

    @classmethod
    def from_depth(
        cls,
        depth: ArrayLike,
        camera: CameraModel,
        stamp: float,
        pose: RigidTransform | None = None,
        stride: int | None = None,
    ) -> "DepthFrame":
        """Back-project every stride-th finite pixel and index the cloud."""
        raster = np.asarray(depth, dtype=np.float32)
        if raster.shape != (camera.height, camera.width):
            msg = f"depth raster shape {raster.shape} does not match camera {(camera.height, camera.width)}"
            raise InvalidArgumentError(msg)
        step = camera.stride if stride is None else stride
        sub = raster[::step, ::step]
        rows, cols = np.nonzero(np.isfinite(sub))
        rows, cols = rows * step, cols * step
        points = camera.back_project(rows, cols, raster[rows, cols].astype(np.float64))
        kd_index = cKDTree(points) if len(points) else None
        return cls(
            depth=raster,
            points=points,
            stamp=stamp,
            pose=pose if pose is not None else RigidTransform.identity(),
            kd_index=kd_index,
        )

    def __len__(self) -> int:
        """Return the number of cloud points."""
        return len(self.points)


@dataclass(frozen=True, eq=False)
class QueryResult:
    """Result of a chain query for one point."""

    verdict: Verdict
    distance: float = float("inf")
    frame_index: int | None = None
    neighbors: NDArray[np.float64] = field(default_factory=lambda: np.empty((0, 3)))


@dataclass(frozen=True)
class ChainEntry:
    """A frame and the transform from its sensor frame into the next-older frame's sensor frame."""

    frame: DepthFrame
    edge: RigidTransform


_FREE, _OCCLUDED, _OUT_OF_VIEW = 0, 1, 2
_CODE_VERDICTS = (FrameVerdict.FREE_KNOWN, FrameVerdict.OCCLUDED, FrameVerdict.OUT_OF_VIEW)


def _classify_codes(
    frame: DepthFrame, camera: CameraModel, points: NDArray[np.float64], occlusion_band: float
) -> NDArray[np.int8]:
    u, v, in_view = camera.project_many(points)
    codes = np.full(len(points), _OUT_OF_VIEW, dtype=np.int8)
    if not np.any(in_view):
        return codes
    cols = np.clip(np.rint(u[in_view]).astype(np.int64), 0, camera.width - 1)
    rows = np.clip(np.rint(v[in_view]).astype(np.int64), 0, camera.height - 1)
    measured = frame.depth[rows, cols].astype(np.float64)
    # +inf (no return) compares as free, NaN (invalid) as occluded
    free = points[in_view, 2] <= measured + occlusion_band
    codes[in_view] = np.where(free, _FREE, _OCCLUDED)
    return codes


def classify_many(
    frame: DepthFrame,
    camera: CameraModel,
    points: ArrayLike,
    occlusion_band: float = DEFAULT_OCCLUSION_BAND,
) -> list[FrameVerdict]:
    """Classify (N, 3) sensor-frame points against one frame."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return [_CODE_VERDICTS[c] for c in _classify_codes(frame, camera, pts, occlusion_band)]


def classify_in_frame(
    frame: DepthFrame,
    camera: CameraModel,
    p_S: ArrayLike,
    occlusion_band: float = DEFAULT_OCCLUSION_BAND,
) -> FrameVerdict:
    """Classify one sensor-frame point as free, occluded or out of view."""
    return classify_many(frame, camera, np.asarray(p_S, dtype=np.float64)[None, :], occlusion_band)[0]


def _nearest_many(
    frame: DepthFrame, points: NDArray[np.float64], k: int
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Distances and indices (M, count) of the k nearest cloud points, count = min(k, cloud size)."""
    if frame.kd_index is None:
        return np.empty((len(points), 0)), np.empty((len(points), 0), dtype=np.int64)
    count = min(k, len(frame))
    distances, indices = frame.kd_index.query(points, k=count)
    return distances.reshape(len(points), count), indices.reshape(len(points), count)


def knn(frame: DepthFrame, p_S: ArrayLike, k: int = 1) -> list[tuple[NDArray[np.float64], float]]:
    """Exact k nearest cloud points, ascending by distance (fewer when the cloud is small)."""
    if k < 1:
        msg = f"k must be at least 1, got {k}"
        raise InvalidArgumentError(msg)
    distances, indices = _nearest_many(frame, np.asarray(p_S, dtype=np.float64)[None, :], k)
    return [(frame.points[i], float(d)) for i, d in zip(indices[0], distances[0], strict=True)]


class FrameChain:
    """
    Newest-first chain of depth frames over a sliding time window.

    One writer pushes frames; readers query a snapshot of the entry tuple,
    which push_frame replaces atomically rather than mutating.
    """

    def __init__(
        self,
        camera: CameraModel,
        history_duration: float = DEFAULT_HISTORY,
        occlusion_band: float = DEFAULT_OCCLUSION_BAND,
    ) -> None:
        """Initialize an empty chain."""
        self.camera = camera
        self.history_duration = history_duration
        self.occlusion_band = occlusion_band
        self._entries: tuple[ChainEntry, ...] = ()
        self._lock = threading.Lock()

    @property
    def entries(self) -> tuple[ChainEntry, ...]:
        """Return a consistent snapshot of the entries, newest first."""
        return self._entries

    def __len__(self) -> int:
        """Return the number of frames held."""
        return len(self._entries)

    @property
    def newest(self) -> DepthFrame | None:
        """Return the newest frame, if any."""
        entries = self._entries
        return entries[0].frame if entries else None

    def push_frame(self, frame: DepthFrame, rel_transform: RigidTransform) -> None:
        """
        Prepend a frame and evict frames older than the history window.

        rel_transform maps the new frame's sensor coordinates into the
        previously newest frame's sensor coordinates.

        Raises:
            OutOfOrderStampError: if the stamp is not strictly newer than the chain head.
        """
        with self._lock:
            entries = self._entries
            if entries and frame.stamp <= entries[0].frame.stamp:
                msg = f"Frame stamp {frame.stamp} is not newer than the chain head {entries[0].frame.stamp}"
                raise OutOfOrderStampError(msg)
            cutoff = frame.stamp - self.history_duration - STAMP_TOLERANCE
            kept = tuple(e for e in entries if e.frame.stamp >= cutoff)
            if len(kept) < len(entries):
                _LOGGER.debug("Evicted %d frame(s) older than %.3f", len(entries) - len(kept), cutoff)
            self._entries = (ChainEntry(frame=frame, edge=rel_transform), *kept)

    def sensor_transforms(self, entries: Sequence[ChainEntry] | None = None) -> list[RigidTransform]:
        """Body-to-sensor transform of every frame, newest first: edge_{i-1} ... edge_0 T_B^S."""
        entries = self._entries if entries is None else entries
        transforms = []
        current = self.camera.body_to_sensor
        for entry in entries:
            transforms.append(current)
            current = entry.edge @ current
        return transforms

    def query_many(self, points_B: ArrayLike, k: int = 1, r_coll: float = 0.0) -> list[QueryResult]:
        """
        Resolve (N, 3) body-frame points against the chain, newest frame first.

        A point is resolved by the first frame that sees it in free space: it is
        NearObstacle when that frame's nearest cloud point is closer than r_coll
        and FreeKnown otherwise. Points no frame resolves are Unknown.
        """
        if k < 1:
            msg = f"k must be at least 1, got {k}"
            raise InvalidArgumentError(msg)
        pts = np.atleast_2d(np.asarray(points_B, dtype=np.float64))
        results: list[QueryResult] = [QueryResult(verdict=Verdict.UNKNOWN)] * len(pts)
        pending = np.arange(len(pts))
        current = self.camera.body_to_sensor.apply(pts)
        for index, entry in enumerate(self._entries):
            if not pending.size:
                break
            free = _classify_codes(entry.frame, self.camera, current, self.occlusion_band) == _FREE
            if np.any(free):
                distances, indices = _nearest_many(entry.frame, current[free], k)
                for slot, dist_row, index_row in zip(pending[free], distances, indices, strict=True):
                    results[slot] = _resolved(entry.frame, index, dist_row, index_row, r_coll)
            pending = pending[~free]
            current = entry.edge.apply(current[~free])
        return results

    def query(self, p_B: ArrayLike, k: int = 1, r_coll: float = 0.0) -> QueryResult:
        """Resolve a single body-frame point."""
        return self.query_many(np.asarray(p_B, dtype=np.float64)[None, :], k, r_coll)[0]


def _resolved(
    frame: DepthFrame,
    frame_index: int,
    distances: NDArray[np.float64],
    indices: NDArray[np.int64],
    r_coll: float,
) -> QueryResult:
    if not len(distances):
        return QueryResult(verdict=Verdict.FREE_KNOWN, frame_index=frame_index)
    distance = float(distances[0])
    return QueryResult(
        verdict=Verdict.NEAR_OBSTACLE if distance < r_coll else Verdict.FREE_KNOWN,
        distance=distance,
        frame_index=frame_index,
        neighbors=frame.points[indices],
    )


def query(chain: FrameChain, p_B: ArrayLike, k: int, r_coll: float) -> QueryResult:
    """Resolve a body-frame point against a frame chain."""
    return chain.query(p_B, k, r_coll)


def dump_frame(frame: DepthFrame, camera: CameraModel, path: Path) -> None:
    """Write a frame as a little-endian header followed by the float32 raster."""
    header = np.zeros((), dtype=DUMP_HEADER)
    header["magic"] = DUMP_MAGIC
    header["version"] = DUMP_VERSION
    header["width"] = camera.width
    header["height"] = camera.height
    header["fx"], header["fy"], header["cx"], header["cy"] = camera.fx, camera.fy, camera.cx, camera.cy
    header["stamp"] = frame.stamp
    try:
        with Path(path).open("wb") as fh:
            fh.write(header.tobytes())
            fh.write(frame.depth.astype("<f4").tobytes(order="C"))
    except OSError as e:
        msg = f"Failed to write frame dump {path}: {e}"
        raise ReportError(msg) from e


def load_frame_dump(path: Path) -> tuple[np.void, NDArray[np.float32]]:
    """Read a frame dump; returns (header record, raster)."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        msg = f"Failed to read frame dump {path}: {e}"
        raise ReportError(msg) from e
    header = np.frombuffer(data, dtype=DUMP_HEADER, count=1)[0]
    if header["magic"] != DUMP_MAGIC:
        msg = f"{path} is not a frame dump"
        raise InvalidArgumentError(msg)
    raster = np.frombuffer(data, dtype="<f4", offset=DUMP_HEADER.itemsize)
    return header, raster.reshape(int(header["height"]), int(header["width"]))
