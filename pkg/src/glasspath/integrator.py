"""Monte Carlo renderer producing the training-tuple images.

Five render modes fix the (glass behavior, lens, visible meshes) triple:

    INPUT_I                  real glass    thin lens   front + back
    TRANSMISSION_GLASS_TTILDE real glass   thin lens   front only
    REFLECTION_GLASS_RTILDE  real glass    thin lens   back only
    TRANSMISSION_T           virtual glass (transmit) pinhole  front only
    REFLECTION_CLEAN_R       virtual glass (reflect)  pinhole  back only

Surfaces are textured diffuse emitters: the source photo's radiance is
emitted directly, so the direct path reproduces its colors exactly and
I = T~ + R~ holds per sample. All modes of one tuple share the seed, so the
identity is exact up to floating point, not just in expectation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import engine
from .engine.common import (
    GLASS_ABSENT,
    GLASS_REAL,
    GLASS_VIRTUAL_REFLECT,
    GLASS_VIRTUAL_TRANSMIT,
    LENS_PINHOLE,
    LENS_THIN,
    TracerParams,
    pack_geometry,
)
from .optics import GlassMode
from .scene import SceneDescription
from .vecmath import Ray


class RenderMode(enum.Enum):
    INPUT_I = "I"
    TRANSMISSION_T = "T"
    REFLECTION_GLASS_RTILDE = "Rtilde"
    REFLECTION_CLEAN_R = "R"
    TRANSMISSION_GLASS_TTILDE = "Ttilde"


#: mode -> (glass behavior, lens mode, visible meshes)
MODE_TABLE = {
    RenderMode.INPUT_I: (GLASS_REAL, LENS_THIN, ("front", "back")),
    RenderMode.TRANSMISSION_GLASS_TTILDE: (GLASS_REAL, LENS_THIN, ("front",)),
    RenderMode.REFLECTION_GLASS_RTILDE: (GLASS_REAL, LENS_THIN, ("back",)),
    RenderMode.TRANSMISSION_T: (GLASS_VIRTUAL_TRANSMIT, LENS_PINHOLE, ("front",)),
    RenderMode.REFLECTION_CLEAN_R: (GLASS_VIRTUAL_REFLECT, LENS_PINHOLE, ("back",)),
}


@dataclass(frozen=True)
class RenderSettings:
    spp: int = 256
    resolution: tuple[int, int] = (256, 256)
    max_path_depth: int = 8
    seed: int = 0
    tile_size: int = 32
    max_orders: int = 4

    def __post_init__(self):
        if self.spp < 1:
            raise ValueError("spp must be >= 1")
        w, h = self.resolution
        if w < 16 or h < 16:
            raise ValueError("resolution must be at least 16x16")
        if self.tile_size < 1:
            raise ValueError("tile_size must be >= 1")
        if not 0 <= self.max_orders <= 64:
            raise ValueError("max_orders must lie in [0, 64]")
        if self.max_path_depth < 1:
            raise ValueError("max_path_depth must be >= 1")


@dataclass(frozen=True)
class RadianceImage:
    """Linear HDR radiances with per-pixel sample count and kernel counters."""

    rgb: np.ndarray            # (H, W, 3) float64, finite, >= 0
    spp: int
    counters: tuple[int, int, int] = (0, 0, 0)  # fresnel, attenuation, aperture

    def __post_init__(self):
        rgb = np.asarray(self.rgb, dtype=np.float64)
        if not np.all(np.isfinite(rgb)) or np.any(rgb < 0.0):
            raise ValueError("radiance image must be finite and non-negative")
        object.__setattr__(self, "rgb", rgb)

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def height(self) -> int:
        return self.rgb.shape[0]


@dataclass(frozen=True)
class ImageTuple:
    i: RadianceImage
    t: RadianceImage
    r_tilde: RadianceImage
    r: RadianceImage
    t_tilde: RadianceImage | None
    metadata: dict = field(default_factory=dict)

    def images(self) -> dict[str, RadianceImage]:
        out = {"I": self.i, "T": self.t, "Rtilde": self.r_tilde, "R": self.r}
        if self.t_tilde is not None:
            out["Ttilde"] = self.t_tilde
        return out


def _packed_for(scene: SceneDescription, visible: tuple[str, ...]):
    key = visible
    cached = scene._pack_cache.get(key)
    if cached is None:
        cached = pack_geometry([scene.bvh_for(name) for name in visible])
        scene._pack_cache[key] = cached
    return cached


def _tracer_params(scene: SceneDescription, mode: RenderMode, settings: RenderSettings) -> TracerParams:
    glass_behavior, lens_mode, _ = MODE_TABLE[mode]
    w, h = settings.resolution
    tan_x = math.tan(math.radians(scene.hfov_deg) / 2.0)
    tan_y = tan_x * h / w
    return TracerParams(
        width=w,
        height=h,
        spp=settings.spp,
        seed=settings.seed,
        tan_half_x=tan_x,
        tan_half_y=tan_y,
        lens_mode=lens_mode,
        aperture_radius=scene.lens.aperture_radius,
        focus_distance=scene.lens.focus_distance,
        glass_behavior=glass_behavior,
        plane_z=scene.glass.distance_to_camera,
        thickness=scene.glass.thickness,
        ior=scene.glass.ior,
        absorption=tuple(scene.glass.absorption),
        max_orders=settings.max_orders,
        max_depth=settings.max_path_depth,
    )


def render(
    scene: SceneDescription,
    mode: RenderMode,
    settings: RenderSettings,
    n_threads: int = 1,
    engine_name: str = "auto",
) -> RadianceImage:
    """Render one mode; deterministic given the settings seed.

    Sample streams are keyed by pixel, so neither tile size nor thread count
    changes any output value.
    """
    _, _, visible = MODE_TABLE[mode]
    geo = _packed_for(scene, visible)
    params = _tracer_params(scene, mode, settings)
    rgb, counters = engine.render_image(
        geo, params, tile_size=settings.tile_size, n_threads=n_threads, engine=engine_name
    )
    return RadianceImage(rgb=rgb, spp=settings.spp, counters=tuple(int(c) for c in counters))


def render_tuple(
    scene: SceneDescription,
    settings: RenderSettings,
    include_ttilde: bool = False,
    n_threads: int = 1,
    engine_name: str = "auto",
) -> ImageTuple:
    """Render the full tuple {I, T, R~, R} (+ optional T~) with shared seed."""
    modes = [
        RenderMode.INPUT_I,
        RenderMode.TRANSMISSION_T,
        RenderMode.REFLECTION_GLASS_RTILDE,
        RenderMode.REFLECTION_CLEAN_R,
    ]
    if include_ttilde:
        modes.append(RenderMode.TRANSMISSION_GLASS_TTILDE)
    rendered = {
        mode: render(scene, mode, settings, n_threads=n_threads, engine_name=engine_name)
        for mode in modes
    }
    metadata = {
        "seed": settings.seed,
        "spp": settings.spp,
        "resolution": list(settings.resolution),
        "max_path_depth": settings.max_path_depth,
        "max_orders": settings.max_orders,
        "hfov_deg": scene.hfov_deg,
        "glass": {
            "thickness": scene.glass.thickness,
            "ior": scene.glass.ior,
            "absorption": list(scene.glass.absorption),
            "distance_to_camera": scene.glass.distance_to_camera,
        },
        "lens": {
            "focal_length": scene.lens.focal_length,
            "aperture_radius": scene.lens.aperture_radius,
            "focus_distance": scene.lens.focus_distance,
        },
        "back_scene_distance": scene.back_scene_distance,
        "engine": engine.active_engine_name(engine_name),
    }
    metadata.update(scene.meta)
    return ImageTuple(
        i=rendered[RenderMode.INPUT_I],
        t=rendered[RenderMode.TRANSMISSION_T],
        r_tilde=rendered[RenderMode.REFLECTION_GLASS_RTILDE],
        r=rendered[RenderMode.REFLECTION_CLEAN_R],
        t_tilde=rendered.get(RenderMode.TRANSMISSION_GLASS_TTILDE),
        metadata=metadata,
    )


def trace_path(
    scene: SceneDescription,
    ray: Ray,
    mode: RenderMode | None = None,
    settings: RenderSettings | None = None,
    engine_name: str = "auto",
) -> np.ndarray:
    """Radiance estimate for a single ray under a render mode's physics.

    With mode=None the scene's own glass mode is used (REAL or ABSENT) with
    both meshes visible.
    """
    settings = settings or RenderSettings()
    if mode is None:
        behavior = GLASS_REAL if scene.glass.mode is GlassMode.REAL else GLASS_ABSENT
        visible: tuple[str, ...] = ("front", "back")
        mode_for_params = RenderMode.INPUT_I
    else:
        behavior, _, visible = MODE_TABLE[mode]
        mode_for_params = mode
    geo = _packed_for(scene, visible)
    params = _tracer_params(scene, mode_for_params, settings)
    if mode is None and behavior != params.glass_behavior:
        params = replace(params, glass_behavior=behavior)
    tracer = engine.make_tracer(geo, params, engine_name)
    return tracer.trace_one(ray.origin, ray.direction)
