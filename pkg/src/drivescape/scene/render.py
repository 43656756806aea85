"""Flat-shaded synthetic renderer.

Deliberately trivial: map polygons and strokes first (fixed layer order),
then box silhouettes painted far to near with solid class colors. Every
painted pixel carries a palette color exactly, which is what makes the
pixel-level controllability metric well-defined. Projection goes through the
same geometry helpers the condition rasterizer uses.
"""
from __future__ import annotations

import numpy as np

from ..geometry import (
    CameraSpec,
    clip_polygon_near,
    clip_segment_near,
    convex_hull,
    polygon_mask,
    segment_mask,
    _project_cam,
)
from .palette import BACKGROUND, object_color, road_color
from .types import Box3D, MapElement, box_corners

# closed map classes painted first, in this order; open classes stroked after
_FILL_ORDER = (0, 6, 4, 3, 7)
_STROKE_ORDER = (2, 1, 5)

_STROKE_HALF_WIDTH = 0.6  # pixels


def _map_masks(
    elements, cam: CameraSpec, shape: tuple[int, int]
) -> dict[int, np.ndarray]:
    """Boolean pixel mask per road class present."""
    masks: dict[int, np.ndarray] = {}
    for el in elements:
        pts3 = np.concatenate(
            [el.polyline, np.zeros((len(el.polyline), 1))], axis=1
        )
        cam_pts = cam.to_camera(pts3)
        if el.closed:
            clipped = clip_polygon_near(cam_pts)
            if len(clipped) < 3:
                continue
            poly = _project_cam(clipped, cam)
            m = polygon_mask(poly, shape)
        else:
            m = np.zeros(shape, dtype=bool)
            for a, b in zip(cam_pts, cam_pts[1:]):
                seg = clip_segment_near(a, b)
                if seg is None:
                    continue
                q = _project_cam(np.stack(seg), cam)
                m |= segment_mask(q[0], q[1], shape, half_width=_STROKE_HALF_WIDTH)
        if m.any():
            if el.class_id in masks:
                masks[el.class_id] |= m
            else:
                masks[el.class_id] = m
    return masks


def box_silhouette(box: Box3D, cam: CameraSpec, shape: tuple[int, int]) -> np.ndarray:
    """Boolean mask of the box's convex silhouette after near-plane clipping."""
    corners = box_corners(box)
    cam_pts = cam.to_camera(corners)
    kept = [cam_pts[cam_pts[:, 2] > 0.1]]
    # walk the 12 edges so partially behind boxes clip instead of vanishing
    edges = (
        (0, 1), (1, 2), (2, 3), (3, 0),
        (4, 5), (5, 6), (6, 7), (7, 4),
        (0, 4), (1, 5), (2, 6), (3, 7),
    )
    for i, j in edges:
        seg = clip_segment_near(cam_pts[i], cam_pts[j])
        if seg is not None:
            kept.append(np.stack(seg))
    kept = [k for k in kept if len(k)]
    if not kept:
        return np.zeros(shape, dtype=bool)
    pts = np.concatenate(kept, axis=0)
    if len(pts) < 3:
        return np.zeros(shape, dtype=bool)
    uv = _project_cam(pts, cam)
    hull = convex_hull(uv)
    if len(hull) < 3:
        return np.zeros(shape, dtype=bool)
    return polygon_mask(hull, shape)


def render_frame(
    cam: CameraSpec,
    boxes,
    map_elements,
    image_size: tuple[int, int] | None = None,
) -> np.ndarray:
    """Render one (H, W, 3) uint8 frame for the given camera."""
    if image_size is None:
        image_size = (cam.height, cam.width)
    shape = image_size
    img = np.empty(shape + (3,), dtype=np.uint8)
    img[...] = BACKGROUND

    masks = _map_masks(map_elements, cam, shape)
    for cid in _FILL_ORDER:
        if cid in masks:
            img[masks[cid]] = road_color(cid)
    for cid in _STROKE_ORDER:
        if cid in masks:
            img[masks[cid]] = road_color(cid)

    # painter's algorithm over boxes: far to near by camera-frame depth
    def depth(b: Box3D) -> float:
        c = cam.to_camera(np.asarray(b.center, dtype=np.float64).reshape(1, 3))
        return float(np.linalg.norm(c))

    for box in sorted(boxes, key=depth, reverse=True):
        m = box_silhouette(box, cam, shape)
        if m.any():
            img[m] = object_color(box.class_id)
    return img
