from .generate import (
    COND_HZ,
    SceneConfig,
    canonical_rig,
    generate_scene,
    rerender_tick,
)
from .io import SCENE_SCHEMA_VERSION, load_scene, save_scene
from .palette import (
    CLASSIFY_TAU,
    OBJECT_CLASS_NAMES,
    PALETTE,
    ROAD_CLASS_NAMES,
    classify_pixels,
    object_color,
    road_color,
)
from .render import box_silhouette, render_frame
from .types import Box3D, EgoState, MapElement, SceneTimeline, Tick, box_corners

__all__ = [
    "Box3D",
    "CLASSIFY_TAU",
    "COND_HZ",
    "EgoState",
    "MapElement",
    "OBJECT_CLASS_NAMES",
    "PALETTE",
    "ROAD_CLASS_NAMES",
    "SCENE_SCHEMA_VERSION",
    "SceneConfig",
    "SceneTimeline",
    "Tick",
    "box_corners",
    "box_silhouette",
    "canonical_rig",
    "classify_pixels",
    "generate_scene",
    "load_scene",
    "object_color",
    "rerender_tick",
    "render_frame",
    "road_color",
    "save_scene",
]
