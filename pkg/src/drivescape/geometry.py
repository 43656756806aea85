"""Pinhole projection and polygon rasterization shared by the synthetic
renderer and the condition rasterizer.

Frames: ego is x-forward, y-left, z-up. Camera is x-right, y-down, z-forward
(optical axis). A CameraSpec maps ego points to camera points by
X_cam = R @ X_ego + t.

Both the renderer and the condition rasterizer funnel through project_points
and the polygon helpers here; agreement between image-space silhouettes and
condition-channel masks follows from sharing this one path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

Z_NEAR = 0.1

VIEW_ORDER = (
    "FRONT",
    "FRONT_RIGHT",
    "BACK_RIGHT",
    "BACK",
    "BACK_LEFT",
    "FRONT_LEFT",
)
VIEW_INDEX = {name: i for i, name in enumerate(VIEW_ORDER)}


class _Behind:
    __slots__ = ()

    def __repr__(self):
        return "BEHIND"


BEHIND = _Behind()


@dataclass(frozen=True)
class CameraSpec:
    view_id: str
    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray = field(repr=False)  # (3,3) ego -> camera
    translation: np.ndarray = field(repr=False)  # (3,)
    width: int = 64
    height: int = 32

    def __post_init__(self):
        if self.view_id not in VIEW_INDEX:
            raise ValidationError(f"unknown view_id {self.view_id!r}")
        if not (self.fx > 0 and self.fy > 0):
            raise ValidationError(f"focal lengths must be positive: {self.fx}, {self.fy}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValidationError(
                f"principal point ({self.cx}, {self.cy}) outside "
                f"{self.width}x{self.height} image"
            )
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3):
            raise ValidationError(f"rotation must be 3x3, got {r.shape}")
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-9:
            raise ValidationError("rotation is not orthonormal within 1e-9")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValidationError("rotation determinant is not +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(
            self, "translation", np.asarray(self.translation, dtype=np.float64)
        )

    def to_camera(self, pts: np.ndarray) -> np.ndarray:
        """(N,3) ego points -> (N,3) camera points."""
        return pts @ self.rotation.T + self.translation


def camera_from_yaw(
    view_id: str,
    yaw: float,
    position: np.ndarray,
    fx: float,
    fy: float,
    cx: float,
    cy: float,
    width: int,
    height: int,
) -> CameraSpec:
    """Horizontal camera at `position` (ego frame) whose optical axis points
    along ego yaw angle `yaw` (0 = straight ahead)."""
    c, s = math.cos(yaw), math.sin(yaw)
    # rows are the camera axes (right, down, forward) in ego coordinates
    rot = np.array(
        [
            [s, -c, 0.0],
            [0.0, 0.0, -1.0],
            [c, s, 0.0],
        ]
    )
    pos = np.asarray(position, dtype=np.float64)
    return CameraSpec(
        view_id=view_id,
        fx=fx,
        fy=fy,
        cx=cx,
        cy=cy,
        rotation=rot,
        translation=-rot @ pos,
        width=width,
        height=height,
    )


def project_point(p, cam: CameraSpec, z_near: float = Z_NEAR):
    """Pinhole projection of one ego-frame point.

    Returns (u, v, depth) in pixels/meters, or BEHIND when the camera-frame
    depth is at or inside the near plane.
    """
    x, y, z = cam.to_camera(np.asarray(p, dtype=np.float64).reshape(1, 3))[0]
    if z <= z_near:
        return BEHIND
    return (cam.fx * x / z + cam.cx, cam.fy * y / z + cam.cy, z)


def project_points(pts: np.ndarray, cam: CameraSpec, z_near: float = Z_NEAR):
    """Vectorized projection. Returns (uv (N,2), depth (N,), in_front (N,)).

    uv rows with in_front False are filled with NaN; callers clip before use.
    """
    c = cam.to_camera(np.asarray(pts, dtype=np.float64).reshape(-1, 3))
    z = c[:, 2]
    in_front = z > z_near
    uv = np.full((len(c), 2), np.nan)
    zz = np.where(in_front, z, 1.0)
    uv[:, 0] = np.where(in_front, cam.fx * c[:, 0] / zz + cam.cx, np.nan)
    uv[:, 1] = np.where(in_front, cam.fy * c[:, 1] / zz + cam.cy, np.nan)
    return uv, z, in_front


def _project_cam(c: np.ndarray, cam: CameraSpec) -> np.ndarray:
    """Camera-frame points (N,3), all strictly in front -> (N,2) pixel uv."""
    return np.stack(
        [cam.fx * c[:, 0] / c[:, 2] + cam.cx, cam.fy * c[:, 1] / c[:, 2] + cam.cy],
        axis=1,
    )


def clip_segment_near(c0: np.ndarray, c1: np.ndarray, z_near: float = Z_NEAR):
    """Clip a camera-frame segment against the z > z_near half-space.

    Returns (q0, q1) camera-frame endpoints or None when fully behind. The
    clip plane is offset slightly in front of z_near so clipped endpoints
    project finitely.
    """
    z0, z1 = c0[2], c1[2]
    eps = 1e-9
    plane = z_near + eps
    if z0 <= z_near and z1 <= z_near:
        return None
    if z0 > z_near and z1 > z_near:
        return c0, c1
    t = (plane - z0) / (z1 - z0)
    cross = c0 + t * (c1 - c0)
    if z0 <= z_near:
        return cross, c1
    return c0, cross


def clip_polygon_near(cam_pts: np.ndarray, z_near: float = Z_NEAR) -> np.ndarray:
    """Sutherland-Hodgman clip of a camera-frame polygon against z > z_near.

    Returns (M,3) camera-frame vertices; M may be 0.
    """
    eps = 1e-9
    plane = z_near + eps
    out = []
    n = len(cam_pts)
    for i in range(n):
        a = cam_pts[i]
        b = cam_pts[(i + 1) % n]
        a_in = a[2] > z_near
        b_in = b[2] > z_near
        if a_in:
            out.append(a)
        if a_in != b_in:
            t = (plane - a[2]) / (b[2] - a[2])
            out.append(a + t * (b - a))
    return np.array(out) if out else np.zeros((0, 3))


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices in CCW order (M,2)."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _crossings(poly: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Even-odd crossing counts for query points against a closed polygon."""
    inside = np.zeros(px.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if y0 == y1:
            continue
        cond = (y0 > py) != (y1 > py)
        xcross = (x1 - x0) * (py - y0) / (y1 - y0) + x0
        inside ^= cond & (px < xcross)
    return inside


def polygon_mask(poly: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Boolean even-odd fill sampled at pixel centers. poly in pixel coords
    (u right, v down), shape (h, w)."""
    h, w = shape
    if len(poly) < 3:
        return np.zeros(shape, dtype=bool)
    py, px = np.mgrid[0:h, 0:w].astype(np.float64)
    px += 0.5
    py += 0.5
    return _crossings(poly, px, py)


def polygon_coverage(
    poly: np.ndarray, shape: tuple[int, int], supersample: int = 3
) -> np.ndarray:
    """Fractional even-odd coverage per cell via supersampling, in [0,1]."""
    h, w = shape
    if len(poly) < 3:
        return np.zeros(shape, dtype=np.float64)
    ss = supersample
    offs = (np.arange(ss) + 0.5) / ss
    py, px = np.mgrid[0:h, 0:w].astype(np.float64)
    cover = np.zeros(shape, dtype=np.float64)
    for oy in offs:
        for ox in offs:
            cover += _crossings(poly, px + ox, py + oy)
    return cover / (ss * ss)


def segment_mask(
    p0: np.ndarray, p1: np.ndarray, shape: tuple[int, int], half_width: float = 0.6
) -> np.ndarray:
    """Pixels whose centers sit within half_width of the segment (pixel coords)."""
    h, w = shape
    lo = np.floor(np.minimum(p0, p1) - half_width - 1).astype(int)
    hi = np.ceil(np.maximum(p0, p1) + half_width + 1).astype(int)
    x0, y0 = max(lo[0], 0), max(lo[1], 0)
    x1, y1 = min(hi[0], w), min(hi[1], h)
    mask = np.zeros(shape, dtype=bool)
    if x0 >= x1 or y0 >= y1:
        return mask
    py, px = np.mgrid[y0:y1, x0:x1].astype(np.float64)
    px += 0.5
    py += 0.5
    d = _segment_distance(px, py, p0, p1)
    mask[y0:y1, x0:x1] = d <= half_width
    return mask


def segment_coverage(
    p0: np.ndarray,
    p1: np.ndarray,
    shape: tuple[int, int],
    half_width: float = 0.5,
) -> np.ndarray:
    """Anti-aliased stroke coverage: 1 inside the stroke core, fading linearly
    to 0 one cell outside it."""
    h, w = shape
    lo = np.floor(np.minimum(p0, p1) - half_width - 2).astype(int)
    hi = np.ceil(np.maximum(p0, p1) + half_width + 2).astype(int)
    x0, y0 = max(lo[0], 0), max(lo[1], 0)
    x1, y1 = min(hi[0], w), min(hi[1], h)
    cover = np.zeros(shape, dtype=np.float64)
    if x0 >= x1 or y0 >= y1:
        return cover
    py, px = np.mgrid[y0:y1, x0:x1].astype(np.float64)
    px += 0.5
    py += 0.5
    d = _segment_distance(px, py, p0, p1)
    cover[y0:y1, x0:x1] = np.clip(1.0 - (d - half_width), 0.0, 1.0)
    return cover


def _segment_distance(px, py, p0, p1):
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    denom = dx * dx + dy * dy
    if denom < 1e-18:
        return np.hypot(px - p0[0], py - p0[1])
    t = np.clip(((px - p0[0]) * dx + (py - p0[1]) * dy) / denom, 0.0, 1.0)
    return np.hypot(px - (p0[0] + t * dx), py - (p0[1] + t * dy))
