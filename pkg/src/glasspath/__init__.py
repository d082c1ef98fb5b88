"""glasspath: physically-based rendering of reflection-removal training tuples.

Simulates light transport through a dielectric glass slab and a thin-lens
camera over meshes unprojected from RGB-D images, producing co-registered
tuples {I, T, R~, R} (input with reflection, clean transmission,
glass-reflected back scene, clean back scene), plus dataset tooling and
image-quality metrics.
"""

from .engine import HAVE_COMPILED, active_engine_name
from .geometry import Bvh, DepthImage, HeightfieldMesh, build_bvh, build_heightfield, intersect
from .integrator import (
    ImageTuple,
    RadianceImage,
    RenderMode,
    RenderSettings,
    render,
    render_tuple,
    trace_path,
)
from .optics import (
    Film,
    GlassMode,
    GlassSpec,
    LensMode,
    LensSpec,
    SlabInteraction,
    VirtualSide,
    beer_lambert,
    fresnel_dielectric,
    generate_camera_ray,
    interact_slab,
    interact_virtual_slab,
)
from .scene import SceneDescription, SceneParams, assemble_scene, sample_pairs, scale_depth
from .vecmath import Ray, reflect, refract

__version__ = "0.1.0"

__all__ = [
    "Bvh", "DepthImage", "Film", "GlassMode", "GlassSpec", "HAVE_COMPILED",
    "HeightfieldMesh", "ImageTuple", "LensMode", "LensSpec", "RadianceImage", "Ray",
    "RenderMode", "RenderSettings", "SceneDescription", "SceneParams",
    "SlabInteraction", "VirtualSide", "active_engine_name", "assemble_scene",
    "beer_lambert", "build_bvh", "build_heightfield", "fresnel_dielectric",
    "generate_camera_ray", "interact_slab", "interact_virtual_slab", "intersect",
    "reflect", "refract", "render", "render_tuple", "sample_pairs", "scale_depth",
    "trace_path",
]
