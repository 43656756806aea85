"""Procedural scene generator.

Scenes are built in a world frame (straight four-lane road with sidewalks, a
crosswalk, and a stop line) and folded into ego-relative annotations per
annotation tick. Vehicles follow constant-velocity lane tracks; lanes on the
ego's side run forward, the other side runs oncoming, so box motion is not
predictable from a single key frame without the layout conditions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..geometry import VIEW_ORDER, CameraSpec, camera_from_yaw
from .render import render_frame
from .types import Box3D, EgoState, MapElement, SceneTimeline, Tick

COND_HZ = 2.0

_LANE_CENTERS = (-6.0, -2.0, 2.0, 6.0)
_ROAD_HALF_WIDTH = 8.0


@dataclass(frozen=True)
class SceneConfig:
    fps: float = 10.0
    duration: float = 0.8
    vehicle_count: int = 3
    image_width: int = 64
    image_height: int = 32
    ego_speed: tuple[float, float] = (4.0, 9.0)
    vehicle_speed: tuple[float, float] = (3.0, 8.0)
    render: bool = True

    def __post_init__(self):
        if not (2.0 <= self.fps <= 10.0):
            raise ConfigError(f"frame rate {self.fps} Hz outside [2, 10]")
        if self.duration <= 0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if self.vehicle_count < 0:
            raise ConfigError("vehicle_count must be >= 0")

    @property
    def max_relative_speed(self) -> float:
        return self.ego_speed[1] + self.vehicle_speed[1]


def canonical_rig(width: int = 64, height: int = 32) -> dict[str, CameraSpec]:
    """Six horizontal cameras at 60 degree spacing, 1.6 m above ground.

    Focal length gives roughly 70 degrees horizontal field of view, so
    adjacent views overlap by about 10 degrees.
    """
    fx = fy = 46.0 * (width / 64.0)
    cx, cy = width / 2.0, height / 2.0
    placements = {
        "FRONT": (0.0, (1.5, 0.0, 1.6)),
        "FRONT_RIGHT": (-math.pi / 3, (1.0, -0.8, 1.6)),
        "BACK_RIGHT": (-2 * math.pi / 3, (-1.0, -0.8, 1.6)),
        "BACK": (math.pi, (-1.5, 0.0, 1.6)),
        "BACK_LEFT": (2 * math.pi / 3, (-1.0, 0.8, 1.6)),
        "FRONT_LEFT": (math.pi / 3, (1.0, 0.8, 1.6)),
    }
    return {
        view: camera_from_yaw(
            view, yaw, np.array(pos), fx, fy, cx, cy, width, height
        )
        for view, (yaw, pos) in placements.items()
    }


def _world_map(x_lo: float, x_hi: float, x_cross: float) -> list[dict]:
    """Road template in world coordinates; polylines as raw arrays."""
    elements = []

    def poly(points, class_id, closed):
        elements.append(
            {"points": np.array(points, dtype=np.float64), "class_id": class_id,
             "closed": closed}
        )

    hw = _ROAD_HALF_WIDTH
    poly([(x_lo, -hw), (x_hi, -hw), (x_hi, hw), (x_lo, hw)], 0, True)  # drivable
    poly([(x_lo, hw), (x_hi, hw), (x_hi, hw + 3), (x_lo, hw + 3)], 4, True)
    poly([(x_lo, -hw - 3), (x_hi, -hw - 3), (x_hi, -hw), (x_lo, -hw)], 4, True)
    poly([(x_cross, -hw), (x_cross + 3, -hw), (x_cross + 3, hw), (x_cross, hw)],
         3, True)  # crosswalk
    for y in (-4.0, 0.0, 4.0):
        poly([(x_lo, y), (x_hi, y)], 1, False)  # lane dividers
    for y in (-hw, hw):
        poly([(x_lo, y), (x_hi, y)], 2, False)  # road edges
    poly([(x_cross - 2.0, -hw), (x_cross - 2.0, hw)], 5, False)  # stop line
    return elements


def _translated_map(world_elems: list[dict], ego_x: float) -> tuple[MapElement, ...]:
    out = []
    for el in world_elems:
        pts = el["points"].copy()
        pts[:, 0] -= ego_x
        out.append(MapElement(polyline=pts, class_id=el["class_id"],
                              closed=el["closed"]))
    return tuple(out)


def _tick_times(config: SceneConfig) -> list[float]:
    """2 Hz tick grid intersected with the frame grid (handles rates like 5 Hz
    where only every other tick lands on a frame)."""
    frame_ts = _frame_times(config)
    out = []
    k = 0
    while True:
        t = k / COND_HZ
        if t >= config.duration - 1e-9:
            break
        if min(abs(t - f) for f in frame_ts) <= 1e-6:
            out.append(round(t, 9))
        k += 1
    return out


def _frame_times(config: SceneConfig) -> list[float]:
    n = int(round(config.duration * config.fps))
    return [round(i / config.fps, 9) for i in range(n)]


def generate_scene(seed: int, config: SceneConfig | None = None) -> SceneTimeline:
    if config is None:
        config = SceneConfig()
    rng = np.random.default_rng([int(seed), 2024])
    ego_v = float(rng.uniform(*config.ego_speed))
    travel = ego_v * config.duration
    x_cross = float(rng.uniform(10.0, 28.0))
    world_elems = _world_map(-60.0, 60.0 + travel, x_cross)

    vehicles = []
    for i in range(config.vehicle_count):
        lane = int(rng.integers(0, len(_LANE_CENTERS)))
        y = _LANE_CENTERS[lane] + float(rng.uniform(-0.4, 0.4))
        # forward traffic on the right half, oncoming on the left half
        direction = 1.0 if y < 0 else -1.0
        speed = direction * float(rng.uniform(*config.vehicle_speed))
        side = 1.0 if rng.uniform() < 0.65 else -1.0
        x0 = side * float(rng.uniform(6.0, 24.0))
        vehicles.append(
            {
                "x0": x0,
                "y": y,
                "speed": speed,
                "yaw": 0.0 if direction > 0 else -math.pi,
                "size": (
                    float(rng.uniform(4.2, 5.6)),
                    float(rng.uniform(1.8, 2.2)),
                    float(rng.uniform(1.5, 2.0)),
                ),
                "class_id": int(rng.integers(0, 8)),
                "track_id": i,
            }
        )

    def boxes_at(t: float) -> tuple[Box3D, ...]:
        ego_x = ego_v * t
        out = []
        for v in vehicles:
            x_rel = v["x0"] + v["speed"] * t - ego_x
            out.append(
                Box3D(
                    center=(x_rel, v["y"], v["size"][2] / 2.0),
                    size=v["size"],
                    yaw=v["yaw"],
                    class_id=v["class_id"],
                    track_id=v["track_id"],
                )
            )
        return tuple(out)

    frame_ts = _frame_times(config)
    tick_ts = _tick_times(config)
    ticks = tuple(
        Tick(
            t=t,
            ego=EgoState(velocity=ego_v, direction_angle=0.0),
            boxes=boxes_at(t),
            map_elements=_translated_map(world_elems, ego_v * t),
        )
        for t in tick_ts
    )

    cameras = canonical_rig(config.image_width, config.image_height)
    frames: dict[str, np.ndarray] = {}
    if config.render:
        shape = (config.image_height, config.image_width)
        for view in VIEW_ORDER:
            cam = cameras[view]
            stack = np.stack(
                [
                    render_frame(
                        cam,
                        boxes_at(t),
                        _translated_map(world_elems, ego_v * t),
                        shape,
                    )
                    for t in frame_ts
                ]
            )
            frames[view] = stack

    return SceneTimeline(
        cameras=cameras,
        frame_timestamps=tuple(frame_ts),
        ticks=ticks,
        frames=frames,
    )


def rerender_tick(scene: SceneTimeline, tick_index: int, view: str) -> np.ndarray:
    """Render the ground-truth image for one annotation tick and view from the
    stored annotations alone. Used to build evaluation masks."""
    tick = scene.ticks[tick_index]
    cam = scene.cameras[view]
    return render_frame(cam, tick.boxes, tick.map_elements, (cam.height, cam.width))
