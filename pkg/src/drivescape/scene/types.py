"""Domain types for driving scenes.

All annotation geometry lives in the ego frame (x forward, y left, z up);
world motion is folded into the per-tick annotations, so consumers only ever
see ego-relative coordinates. SceneTimeline is immutable after construction
and safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..geometry import VIEW_ORDER, CameraSpec


@dataclass(frozen=True)
class Box3D:
    center: tuple[float, float, float]
    size: tuple[float, float, float]  # length (x), width (y), height (z)
    yaw: float
    class_id: int
    track_id: int

    def __post_init__(self):
        if min(self.size) <= 0:
            raise ValidationError(f"box size must be positive, got {self.size}")
        if not (-math.pi <= self.yaw < math.pi):
            raise ValidationError(f"yaw {self.yaw} outside [-pi, pi)")
        if not (0 <= self.class_id < 8):
            raise ValidationError(f"object class_id {self.class_id} outside 0..7")


@dataclass(frozen=True)
class MapElement:
    polyline: np.ndarray  # (P, 2) ego-frame meters
    class_id: int
    closed: bool

    def __post_init__(self):
        pts = np.asarray(self.polyline, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValidationError(
                f"polyline must be (P>=2, 2), got shape {pts.shape}"
            )
        if not (0 <= self.class_id < 8):
            raise ValidationError(f"road class_id {self.class_id} outside 0..7")
        object.__setattr__(self, "polyline", pts)


@dataclass(frozen=True)
class EgoState:
    velocity: float
    direction_angle: float

    def __post_init__(self):
        if self.velocity < 0:
            raise ValidationError(f"velocity must be >= 0, got {self.velocity}")


@dataclass(frozen=True)
class Tick:
    t: float
    ego: EgoState
    boxes: tuple[Box3D, ...]
    map_elements: tuple[MapElement, ...]


@dataclass(frozen=True)
class SceneTimeline:
    cameras: dict[str, CameraSpec]
    frame_timestamps: tuple[float, ...]
    ticks: tuple[Tick, ...]
    # frames[view_id] is a (T+1, H, W, 3) uint8 array or absent
    frames: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if set(self.cameras) != set(VIEW_ORDER):
            raise ValidationError(
                f"cameras must cover the 6 canonical views, got {sorted(self.cameras)}"
            )
        ts = self.frame_timestamps
        if len(ts) < 1:
            raise ValidationError("need at least one frame timestamp")
        for a, b in zip(ts, ts[1:]):
            if not (b > a):
                raise ValidationError(
                    f"frame_timestamps not strictly increasing at {a} -> {b}"
                )
        for tick in self.ticks:
            if min(abs(tick.t - f) for f in ts) > 1e-6:
                raise ValidationError(
                    f"annotation tick at t={tick.t} matches no frame timestamp"
                )
        for view, arr in self.frames.items():
            if arr.shape[0] != len(ts):
                raise ValidationError(
                    f"view {view} has {arr.shape[0]} frames for {len(ts)} timestamps"
                )

    @property
    def frame_count(self) -> int:
        return len(self.frame_timestamps)

    def tick_frame_indices(self, tol: float = 1e-6) -> list[int]:
        """Frame index of each annotation tick, in tick order."""
        out = []
        for tick in self.ticks:
            diffs = [abs(tick.t - f) for f in self.frame_timestamps]
            out.append(int(np.argmin(diffs)))
        return out


_CORNER_SIGNS = np.array(
    [
        # bottom face, counterclockwise seen from above, starting at (+x, +y)
        [1, 1, -1],
        [-1, 1, -1],
        [-1, -1, -1],
        [1, -1, -1],
        # top face, same x/y order
        [1, 1, 1],
        [-1, 1, 1],
        [-1, -1, 1],
        [1, -1, 1],
    ],
    dtype=np.float64,
)


def box_corners(box: Box3D) -> np.ndarray:
    """The 8 corners of the oriented cuboid in the ego frame, (8,3)."""
    l, w, h = box.size
    local = _CORNER_SIGNS * np.array([l / 2, w / 2, h / 2])
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return local @ rot.T + np.asarray(box.center, dtype=np.float64)
