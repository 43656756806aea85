"""Frozen flat-shading palette.

17 colors: 1 background, 8 road classes, 8 object classes, chosen by a
repulsion optimizer over the RGB cube and then frozen. The minimum pairwise
Euclidean distance is 0.59 in [0,1] units, which exceeds twice the pixel
classification threshold (2 * 0.15 * sqrt(3) = 0.52): any pixel within the
threshold of its true class color is strictly closer to that color than to
every other palette entry, so nearest-color classification never flips class
for in-tolerance pixels.
"""
from __future__ import annotations

import numpy as np

BACKGROUND = (0, 0, 81)

ROAD_COLORS = (
    (128, 128, 255),  # 0 drivable area
    (255, 255, 255),  # 1 lane divider
    (255, 255, 81),  # 2 road edge
    (0, 255, 255),  # 3 crosswalk
    (127, 0, 166),  # 4 sidewalk
    (255, 0, 255),  # 5 stop line
    (0, 127, 166),  # 6 parking area
    (128, 255, 166),  # 7 road marking
)

OBJECT_COLORS = (
    (255, 0, 81),  # 0 car
    (255, 127, 0),  # 1 truck
    (0, 255, 81),  # 2 bus
    (127, 255, 0),  # 3 trailer
    (255, 128, 166),  # 4 van
    (0, 0, 255),  # 5 motorcycle
    (128, 0, 0),  # 6 pedestrian
    (0, 128, 0),  # 7 cyclist
)

ROAD_CLASS_NAMES = (
    "drivable",
    "lane_divider",
    "road_edge",
    "crosswalk",
    "sidewalk",
    "stop_line",
    "parking",
    "road_marking",
)

OBJECT_CLASS_NAMES = (
    "car",
    "truck",
    "bus",
    "trailer",
    "van",
    "motorcycle",
    "pedestrian",
    "cyclist",
)

# row 0 = background, rows 1..8 = road classes, rows 9..16 = object classes
PALETTE = np.array((BACKGROUND,) + ROAD_COLORS + OBJECT_COLORS, dtype=np.uint8)

# normalized-distance threshold for nearest-color pixel classification;
# distances are Euclidean in [0,1] RGB divided by sqrt(3) so 1.0 spans the cube
CLASSIFY_TAU = 0.15


def road_color(class_id: int) -> np.ndarray:
    return PALETTE[1 + class_id]


def object_color(class_id: int) -> np.ndarray:
    return PALETTE[9 + class_id]


def classify_pixels(image: np.ndarray, tau: float = CLASSIFY_TAU) -> np.ndarray:
    """Map an (H,W,3) image to palette indices, -1 where no color is within
    tau. Accepts uint8 or float in [0,1]."""
    img = np.asarray(image)
    if img.dtype == np.uint8:
        img = img.astype(np.float64) / 255.0
    pal = PALETTE.astype(np.float64) / 255.0
    d = np.linalg.norm(img[..., None, :] - pal[None, None, :, :], axis=-1)
    d /= np.sqrt(3.0)
    idx = d.argmin(axis=-1)
    best = np.take_along_axis(d, idx[..., None], axis=-1)[..., 0]
    return np.where(best <= tau, idx, -1)
