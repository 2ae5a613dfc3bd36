"""Planar obstacle scenes: closed simple polygons and discs inside the unit disc."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from shapely.geometry import Point, Polygon

from .errors import SceneError

RIM_MARGIN = 1e-9


@dataclass(frozen=True)
class Scene2D:
    polygons: tuple  # tuple of (k, 2) float arrays, vertices in order
    discs: tuple     # tuple of (cx, cy, r)
    name: str = ""

    @property
    def area(self) -> float:
        return scene_area(self)

    @property
    def normalized_volume(self) -> float:
        return self.area / math.pi

    def segments(self) -> np.ndarray:
        """All polygon edges as rows (x0, y0, x1, y1)."""
        rows = []
        for poly in self.polygons:
            nxt = np.roll(poly, -1, axis=0)
            rows.append(np.hstack([poly, nxt]))
        if not rows:
            return np.zeros((0, 4))
        return np.ascontiguousarray(np.vstack(rows))

    def disc_array(self) -> np.ndarray:
        if not self.discs:
            return np.zeros((0, 3))
        return np.ascontiguousarray(np.array(self.discs, dtype=float))


def _shoelace(poly: np.ndarray) -> float:
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def scene_area(scene: Scene2D) -> float:
    """Exact area: shoelace sums for polygons plus pi r^2 for discs."""
    return (math.fsum(_shoelace(p) for p in scene.polygons)
            + math.fsum(math.pi * r * r for _, _, r in scene.discs))


def _validate(polygons, discs):
    limit = 1.0 - RIM_MARGIN
    shapes = []
    for k, poly in enumerate(polygons):
        if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
            raise SceneError(f"polygon {k} needs at least three (x, y) vertices")
        if not np.all(np.isfinite(poly)):
            raise SceneError(f"polygon {k} has non-finite coordinates")
        if np.max(np.hypot(poly[:, 0], poly[:, 1])) > limit:
            raise SceneError(f"polygon {k} reaches the unit circle")
        shape = Polygon(poly)
        if not shape.is_valid or not shape.exterior.is_simple or shape.area <= 0:
            raise SceneError(f"polygon {k} is not a simple polygon")
        shapes.append(shape)
    for k, (cx, cy, r) in enumerate(discs):
        if not all(math.isfinite(t) for t in (cx, cy, r)) or r <= 0:
            raise SceneError(f"disc {k} needs finite centre and positive radius")
        if math.hypot(cx, cy) + r > limit:
            raise SceneError(f"disc {k} reaches the unit circle")
    for i in range(len(shapes)):
        for j in range(i + 1, len(shapes)):
            if shapes[i].intersects(shapes[j]):
                raise SceneError(f"polygons {i} and {j} overlap or touch")
    for i, shape in enumerate(shapes):
        for j, (cx, cy, r) in enumerate(discs):
            # distance is zero when the centre lies inside the polygon
            if shape.distance(Point(cx, cy)) <= r:
                raise SceneError(f"polygon {i} and disc {j} overlap or touch")
    for i in range(len(discs)):
        for j in range(i + 1, len(discs)):
            (x1, y1, r1), (x2, y2, r2) = discs[i], discs[j]
            if math.hypot(x1 - x2, y1 - y2) <= r1 + r2:
                raise SceneError(f"discs {i} and {j} overlap or touch")


def make_scene(polygons=(), discs=(), name: str = "") -> Scene2D:
    polys = tuple(np.ascontiguousarray(np.asarray(p, dtype=float)) for p in polygons)
    ds = tuple((float(cx), float(cy), float(r)) for cx, cy, r in discs)
    _validate(polys, ds)
    for p in polys:
        p.setflags(write=False)
    return Scene2D(polygons=polys, discs=ds, name=name)


def scene_from_dict(data: dict, name: str = "") -> Scene2D:
    if not isinstance(data, dict):
        raise SceneError("scene must be a mapping with 'polygons' and 'discs'")
    unknown = set(data) - {"polygons", "discs", "name", "description"}
    if unknown:
        raise SceneError(f"unknown scene keys: {sorted(unknown)}")
    try:
        discs = [(d["cx"], d["cy"], d["r"]) for d in data.get("discs", [])]
    except (KeyError, TypeError) as exc:
        raise SceneError(f"disc entries need cx, cy and r: {exc}") from None
    return make_scene(data.get("polygons", []), discs, name=data.get("name", name))


def load_scene(path) -> Scene2D:
    """Read a scene from a JSON file.  OSError propagates for I/O problems."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: invalid JSON ({exc})") from None
    return scene_from_dict(data, name=path.stem)


def corpus_names() -> list[str]:
    root = resources.files("visbound") / "scenes"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def corpus_scene(name: str) -> Scene2D:
    """One of the scenes bundled with the package."""
    root = resources.files("visbound") / "scenes"
    entry = root / f"{name}.json"
    if not entry.is_file():
        raise SceneError(f"no bundled scene named {name!r}")
    return scene_from_dict(json.loads(entry.read_text()), name=name)
