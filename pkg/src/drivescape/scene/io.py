"""Scene serialization: versioned JSON plus sibling PNG frames."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import SchemaError
from ..geometry import VIEW_ORDER, CameraSpec
from .types import Box3D, EgoState, MapElement, SceneTimeline, Tick

SCENE_SCHEMA_VERSION = 1


def save_scene(scene: SceneTimeline, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frames_rel: dict[str, list[str]] = {}
    for view, stack in scene.frames.items():
        view_dir = directory / "frames" / view
        view_dir.mkdir(parents=True, exist_ok=True)
        rels = []
        for i in range(stack.shape[0]):
            rel = f"frames/{view}/frame_{i:03d}.png"
            Image.fromarray(stack[i]).save(directory / rel)
            rels.append(rel)
        frames_rel[view] = rels

    doc = {
        "version": SCENE_SCHEMA_VERSION,
        "cameras": [
            {
                "view_id": cam.view_id,
                "fx": cam.fx,
                "fy": cam.fy,
                "cx": cam.cx,
                "cy": cam.cy,
                "rotation": cam.rotation.tolist(),
                "translation": cam.translation.tolist(),
                "width": cam.width,
                "height": cam.height,
            }
            for cam in (scene.cameras[v] for v in VIEW_ORDER)
        ],
        "frame_timestamps": list(scene.frame_timestamps),
        "ticks": [
            {
                "t": tick.t,
                "ego": {"v": tick.ego.velocity, "phi": tick.ego.direction_angle},
                "boxes": [
                    {
                        "center": list(b.center),
                        "size": list(b.size),
                        "yaw": b.yaw,
                        "class_id": b.class_id,
                        "track_id": b.track_id,
                    }
                    for b in tick.boxes
                ],
                "map": [
                    {
                        "polyline": m.polyline.tolist(),
                        "class_id": m.class_id,
                        "closed": m.closed,
                    }
                    for m in tick.map_elements
                ],
            }
            for tick in scene.ticks
        ],
        "frames": frames_rel,
    }
    path = directory / "scene.json"
    path.write_text(json.dumps(doc, indent=1))
    return path


def _require(doc: dict, key: str, ctx: str):
    if key not in doc:
        raise SchemaError(f"missing field {key!r} in {ctx}")
    return doc[key]


def load_scene(path: str | Path) -> SceneTimeline:
    path = Path(path)
    if path.is_dir():
        path = path / "scene.json"
    if not path.exists():
        raise SchemaError(f"scene file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"scene file is not valid JSON: {path}") from e

    version = _require(doc, "version", "scene")
    if version != SCENE_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported scene version {version!r}, expected {SCENE_SCHEMA_VERSION}"
        )

    cameras = {}
    for cdoc in _require(doc, "cameras", "scene"):
        view = _require(cdoc, "view_id", "camera")
        cameras[view] = CameraSpec(
            view_id=view,
            fx=float(_require(cdoc, "fx", f"camera {view}")),
            fy=float(_require(cdoc, "fy", f"camera {view}")),
            cx=float(_require(cdoc, "cx", f"camera {view}")),
            cy=float(_require(cdoc, "cy", f"camera {view}")),
            rotation=np.array(_require(cdoc, "rotation", f"camera {view}")),
            translation=np.array(_require(cdoc, "translation", f"camera {view}")),
            width=int(_require(cdoc, "width", f"camera {view}")),
            height=int(_require(cdoc, "height", f"camera {view}")),
        )

    ticks = []
    for i, tdoc in enumerate(_require(doc, "ticks", "scene")):
        ego_doc = _require(tdoc, "ego", f"tick {i}")
        boxes = tuple(
            Box3D(
                center=tuple(_require(b, "center", f"tick {i} box")),
                size=tuple(_require(b, "size", f"tick {i} box")),
                yaw=float(_require(b, "yaw", f"tick {i} box")),
                class_id=int(_require(b, "class_id", f"tick {i} box")),
                track_id=int(_require(b, "track_id", f"tick {i} box")),
            )
            for b in _require(tdoc, "boxes", f"tick {i}")
        )
        elements = tuple(
            MapElement(
                polyline=np.array(_require(m, "polyline", f"tick {i} map")),
                class_id=int(_require(m, "class_id", f"tick {i} map")),
                closed=bool(_require(m, "closed", f"tick {i} map")),
            )
            for m in _require(tdoc, "map", f"tick {i}")
        )
        ticks.append(
            Tick(
                t=float(_require(tdoc, "t", f"tick {i}")),
                ego=EgoState(
                    velocity=float(_require(ego_doc, "v", f"tick {i} ego")),
                    direction_angle=float(_require(ego_doc, "phi", f"tick {i} ego")),
                ),
                boxes=boxes,
                map_elements=elements,
            )
        )

    frames: dict[str, np.ndarray] = {}
    base = path.parent
    for view, rels in doc.get("frames", {}).items():
        stack = []
        for rel in rels:
            img_path = base / rel
            if not img_path.exists():
                raise SchemaError(f"referenced frame file missing: {img_path}")
            stack.append(np.asarray(Image.open(img_path).convert("RGB")))
        frames[view] = np.stack(stack)

    return SceneTimeline(
        cameras=cameras,
        frame_timestamps=tuple(
            float(t) for t in _require(doc, "frame_timestamps", "scene")
        ),
        ticks=tuple(ticks),
        frames=frames,
    )
