"""Scene assembly from RGB-D pairs and deterministic dataset pair sampling.

World layout (meters): camera at the origin looking along +z; glass slab
front surface at glass.distance_to_camera, perpendicular to the camera axis;
the front mesh lies beyond the slab; the back mesh is the glass-plane mirror
image of a mirrored-camera unprojection and lies entirely behind the camera,
so glass-reflected rays see it exactly where a physical back scene would be.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Bvh, DepthImage, HeightfieldMesh, build_bvh, build_heightfield, mirror_mesh
from .optics import GlassSpec, LensSpec


class SceneGeometryError(ValueError):
    """Scene violates the renderer's geometric scope."""


@dataclass(frozen=True)
class SceneParams:
    glass: GlassSpec = field(default_factory=GlassSpec)
    lens: LensSpec = field(default_factory=LensSpec)
    back_scene_distance: float = 1.5
    split_threshold: float = 0.5

    def __post_init__(self):
        if self.back_scene_distance <= 0.0:
            raise SceneGeometryError(
                "back_scene_distance must be > 0 (the back scene sits behind the camera)"
            )


@dataclass(frozen=True)
class SceneDescription:
    front_mesh: HeightfieldMesh
    back_mesh: HeightfieldMesh
    front_bvh: Bvh
    back_bvh: Bvh
    glass: GlassSpec
    lens: LensSpec
    hfov_deg: float
    back_scene_distance: float
    meta: dict = field(default_factory=dict, compare=False)
    _pack_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def bvh_for(self, name: str) -> Bvh:
        if name == "front":
            return self.front_bvh
        if name == "back":
            return self.back_bvh
        raise KeyError(name)


def assemble_scene(front: DepthImage, back: DepthImage, params: SceneParams | None = None) -> SceneDescription:
    """Build the physical scene for one (front, back) image pair.

    The lens focus distance is set to the front scene's center-pixel depth.
    The back depth raster is offset so its nearest point sits exactly
    back_scene_distance behind the camera, then unprojected from the
    mirrored camera position and reflected about the glass plane: a back
    point at distance d behind the camera images at optical distance
    d + 2 * glass.distance_to_camera.
    """
    params = params or SceneParams()
    glass = params.glass
    g = glass.distance_to_camera

    front_mesh = build_heightfield(front, params.split_threshold)
    front_clearance = g + glass.thickness
    if float(front.depth.min()) <= front_clearance:
        raise SceneGeometryError(
            f"front scene must lie entirely beyond the glass "
            f"(min depth {front.depth.min():.3f} m <= {front_clearance:.3f} m); "
            "rescale the depth map first"
        )
    focus = float(front.depth[front.height // 2, front.width // 2])
    lens = replace(params.lens, focus_distance=focus)

    # Mirrored-camera construction: unproject at offset depths, then reflect
    # about the glass plane. Offset anchors the nearest point at
    # back_scene_distance behind the camera; z = 2g - depth' < 0 everywhere.
    offset = params.back_scene_distance + 2.0 * g - float(back.depth.min())
    back_depth = back.depth + offset
    back_img = DepthImage(rgb=back.rgb, depth=back_depth, hfov_deg=back.hfov_deg)
    back_mesh = mirror_mesh(build_heightfield(back_img, params.split_threshold), g)
    if float(back_mesh.vertices[:, 2].max()) >= 0.0:
        raise SceneGeometryError("back mesh reaches in front of the camera")

    return SceneDescription(
        front_mesh=front_mesh,
        back_mesh=back_mesh,
        front_bvh=build_bvh(front_mesh),
        back_bvh=build_bvh(back_mesh),
        glass=glass,
        lens=lens,
        hfov_deg=front.hfov_deg,
        back_scene_distance=params.back_scene_distance,
    )


def sample_pairs(front_ids, back_ids, seed: int, n: int) -> list[tuple]:
    """Draw n distinct (front, back) pairs, reproducibly under seed."""
    front_ids = list(front_ids)
    back_ids = list(back_ids)
    if not front_ids or not back_ids:
        raise ValueError("image sets must be non-empty")
    total = len(front_ids) * len(back_ids)
    if n > total:
        raise ValueError(f"requested {n} pairs but only {total} distinct pairs exist")
    rng = random.Random(seed)
    picks = rng.sample(range(total), n)
    nb = len(back_ids)
    return [(front_ids[i // nb], back_ids[i % nb]) for i in picks]


def scale_depth(category: str, normalized_depth: np.ndarray, table: dict) -> np.ndarray:
    """Rescale a normalized [0,1] depth raster to a category's mean depth.

    Pure scaling: preserves the ordering of every pixel pair and makes the
    output mean exactly the table entry.
    """
    if category not in table:
        raise KeyError(f"unknown depth category {category!r}; known: {sorted(table)}")
    arr = np.asarray(normalized_depth, dtype=np.float64)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("normalized depth must lie in [0, 1]")
    mean = float(arr.mean())
    if mean <= 0.0:
        raise ValueError("normalized depth raster is all zero")
    return arr * (float(table[category]) / mean)
