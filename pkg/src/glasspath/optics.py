"""Physical models: dielectric glass slab (real and virtual), Beer-Lambert
attenuation, and the thin-lens camera.

Geometry convention throughout: camera at the origin looking along +z
(+x right, +y down, matching image rasters). The slab occupies
z in [distance_to_camera, distance_to_camera + thickness] and is
perpendicular to the camera axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .vecmath import Ray, reflect, refract, vec3


class GlassMode(enum.Enum):
    REAL = "real"
    VIRTUAL = "virtual"
    ABSENT = "absent"


class LensMode(enum.Enum):
    THIN_LENS = "thin_lens"
    PINHOLE = "pinhole"


class VirtualSide(enum.Enum):
    TRANSMIT = "transmit"
    REFLECT = "reflect"


#: Default per-channel absorption (1/m): slight green cast over internal
#: bounces, configurable and recorded in every manifest.
DEFAULT_ABSORPTION = (9.0, 7.0, 5.0)


@dataclass(frozen=True)
class GlassSpec:
    thickness: float = 0.010
    ior: float = 1.6
    absorption: tuple[float, float, float] = DEFAULT_ABSORPTION
    distance_to_camera: float = 0.30
    mode: GlassMode = GlassMode.REAL

    def __post_init__(self):
        if self.thickness <= 0.0:
            raise ValueError("glass thickness must be > 0")
        if self.ior <= 1.0:
            raise ValueError("glass ior must be > 1")
        if any(a < 0.0 for a in self.absorption):
            raise ValueError("absorption coefficients must be >= 0")
        if self.distance_to_camera <= 0.0:
            raise ValueError("distance_to_camera must be > 0")


@dataclass(frozen=True)
class LensSpec:
    focal_length: float = 0.055
    aperture_radius: float = 0.00893
    focus_distance: float = 2.0
    mode: LensMode = LensMode.THIN_LENS

    def __post_init__(self):
        if self.focal_length <= 0.0:
            raise ValueError("focal_length must be > 0")
        if self.aperture_radius < 0.0:
            raise ValueError("aperture_radius must be >= 0")
        if self.mode is LensMode.THIN_LENS and self.focus_distance <= self.focal_length:
            raise ValueError("focus_distance must exceed focal_length in thin-lens mode")


@dataclass(frozen=True)
class SlabExitRay:
    """One exit ray of the ghost series."""

    ray: Ray
    weight: np.ndarray            # per-channel, >= 0
    path_length_in_glass: float   # meters inside the slab (Beer-Lambert)
    side: VirtualSide             # which side of the slab the ray leaves
    order: int                    # 0-based exit index on its side


@dataclass(frozen=True)
class SlabInteraction:
    exit_rays: tuple[SlabExitRay, ...]

    def transmitted(self) -> list[SlabExitRay]:
        return [r for r in self.exit_rays if r.side is VirtualSide.TRANSMIT]

    def reflected(self) -> list[SlabExitRay]:
        return [r for r in self.exit_rays if r.side is VirtualSide.REFLECT]


def fresnel_dielectric(cos_theta_i: float, eta: float) -> float:
    """Unpolarized Fresnel reflectance (mean of s and p polarizations).

    cos_theta_i is the incident cosine in [0,1]; eta = n_transmitted /
    n_incident. Returns exactly 1.0 under total internal reflection.
    """
    if not 0.0 <= cos_theta_i <= 1.0:
        raise ValueError("cos_theta_i must lie in [0,1]")
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    sin2_t = (1.0 - cos_theta_i * cos_theta_i) / (eta * eta)
    if sin2_t > 1.0:
        return 1.0
    cos_t = math.sqrt(1.0 - sin2_t)
    r_s = (cos_theta_i - eta * cos_t) / (cos_theta_i + eta * cos_t)
    r_p = (eta * cos_theta_i - cos_t) / (eta * cos_theta_i + cos_t)
    return 0.5 * (r_s * r_s + r_p * r_p)


def beer_lambert(absorption, distance: float) -> np.ndarray:
    """exp(-absorption * distance), per channel."""
    a = np.asarray(absorption, dtype=np.float64)
    if np.any(a < 0.0) or distance < 0.0:
        raise ValueError("absorption and distance must be >= 0")
    return np.exp(-a * distance)


def _slab_entry(ray: Ray, glass: GlassSpec):
    """Common front-surface geometry for real and virtual interactions."""
    dz = float(ray.direction[2])
    if abs(dz) < 1e-12:
        raise ValueError("ray is parallel to the slab plane")
    oz = float(ray.origin[2])
    plane_z = glass.distance_to_camera
    if not (oz < plane_z and dz > 0.0):
        raise ValueError("ray does not approach the slab front surface")
    t_hit = (plane_z - oz) / dz
    entry = ray.at(t_hit)
    normal = vec3(0.0, 0.0, -1.0)  # front surface normal, toward the camera
    return entry, normal, dz


def _refracted_geometry(ray: Ray, glass: GlassSpec, dz: float):
    """Refracted direction, per-crossing slab path length and tangential drift."""
    d_t = refract(ray.direction, vec3(0.0, 0.0, -1.0), glass.ior)
    # eta > 1 entering: total internal reflection cannot occur here.
    assert d_t is not None
    cos_t = float(d_t[2])
    crossing_length = glass.thickness / cos_t
    drift = crossing_length * np.array([d_t[0], d_t[1], 0.0])
    return d_t, crossing_length, drift


def interact_slab(ray: Ray, glass: GlassSpec, max_orders: int = 4) -> SlabInteraction:
    """Enumerate the ghost series of a ray striking the real slab.

    max_orders bounds the number of internal reflections m: exits are the
    front-surface reflection (weight R), transmissions at even m with weight
    T^2 R^m, and reflections at odd m with weight T^2 R^m, each attenuated by
    Beer-Lambert over its in-glass path. The truncated remainder is dropped,
    not renormalized. All exit rays are parallel to either the incident or
    the mirrored direction (parallel-slab geometry).
    """
    if glass.mode is not GlassMode.REAL:
        raise ValueError("interact_slab requires glass.mode == REAL")
    if max_orders < 0:
        raise ValueError("max_orders must be >= 0")
    entry, normal, dz = _slab_entry(ray, glass)
    cos_i = dz  # |direction . slab axis|, direction is unit
    refl = fresnel_dielectric(cos_i, glass.ior)
    trans = 1.0 - refl
    mirrored = reflect(ray.direction, normal)
    d_t, crossing_length, drift = _refracted_geometry(ray, glass, dz)
    absorption = np.asarray(glass.absorption, dtype=np.float64)
    back_offset = np.array([0.0, 0.0, glass.thickness])

    exits = [
        SlabExitRay(
            ray=Ray(entry, mirrored),
            weight=np.full(3, refl),
            path_length_in_glass=0.0,
            side=VirtualSide.REFLECT,
            order=0,
        )
    ]
    t_order = 0
    r_order = 1
    for m in range(max_orders + 1):
        weight_scalar = trans * trans * refl**m
        if weight_scalar < 1e-16:
            break
        crossings = m + 1
        glass_len = crossings * crossing_length
        weight = weight_scalar * np.exp(-absorption * glass_len)
        origin = entry + crossings * drift
        if m % 2 == 0:
            exits.append(
                SlabExitRay(
                    ray=Ray(origin + back_offset, ray.direction),
                    weight=weight,
                    path_length_in_glass=glass_len,
                    side=VirtualSide.TRANSMIT,
                    order=t_order,
                )
            )
            t_order += 1
        else:
            exits.append(
                SlabExitRay(
                    ray=Ray(origin, mirrored),
                    weight=weight,
                    path_length_in_glass=glass_len,
                    side=VirtualSide.REFLECT,
                    order=r_order,
                )
            )
            r_order += 1
    return SlabInteraction(exit_rays=tuple(exits))


def interact_virtual_slab(ray: Ray, glass: GlassSpec, side: VirtualSide) -> Ray:
    """Warp a ray like the real slab without any splitting or attenuation.

    TRANSMIT yields exactly the real slab's direct-transmission ray (same
    lateral shift); REFLECT the front-surface mirror ray. Weight is 1.
    """
    if glass.mode is not GlassMode.VIRTUAL:
        raise ValueError("interact_virtual_slab requires glass.mode == VIRTUAL")
    entry, normal, dz = _slab_entry(ray, glass)
    if side is VirtualSide.REFLECT:
        return Ray(entry, reflect(ray.direction, normal))
    _, _, drift = _refracted_geometry(ray, glass, dz)
    origin = entry + drift + np.array([0.0, 0.0, glass.thickness])
    return Ray(origin, ray.direction)


def sample_disk_concentric(u1: float, u2: float) -> tuple[float, float]:
    """Map [0,1)^2 to the unit disk (Shirley's concentric map).

    (0.5, 0.5) maps to the exact disk center.
    """
    ox = 2.0 * u1 - 1.0
    oy = 2.0 * u2 - 1.0
    if ox == 0.0 and oy == 0.0:
        return 0.0, 0.0
    if abs(ox) > abs(oy):
        r = ox
        theta = (math.pi / 4.0) * (oy / ox)
    else:
        r = oy
        theta = (math.pi / 2.0) - (math.pi / 4.0) * (ox / oy)
    return r * math.cos(theta), r * math.sin(theta)


@dataclass(frozen=True)
class Film:
    width: int
    height: int
    hfov_deg: float

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("film must be at least 1x1")
        if not 0.0 < self.hfov_deg < 180.0:
            raise ValueError("hfov_deg must lie in (0, 180)")

    @property
    def tan_half_x(self) -> float:
        return math.tan(math.radians(self.hfov_deg) / 2.0)

    @property
    def tan_half_y(self) -> float:
        # square pixels
        return self.tan_half_x * self.height / self.width


def generate_camera_ray(
    lens: LensSpec,
    film: Film,
    px: float,
    py: float,
    lens_sample: tuple[float, float] = (0.5, 0.5),
) -> Ray:
    """Camera ray for continuous film coordinates (px, py) in pixels.

    Thin lens: the origin is sampled on the aperture disk and the direction
    passes through the pixel's point on the focus plane, so all rays of a
    pixel converge at focus_distance. Pinhole: origin at the camera center.
    """
    if not (0.0 <= px <= film.width and 0.0 <= py <= film.height):
        raise ValueError("pixel coordinates outside the film")
    x = (2.0 * px / film.width - 1.0) * film.tan_half_x
    y = (2.0 * py / film.height - 1.0) * film.tan_half_y
    norm = math.sqrt(x * x + y * y + 1.0)
    d = np.array([x / norm, y / norm, 1.0 / norm])
    if lens.mode is LensMode.PINHOLE or lens.aperture_radius == 0.0:
        return Ray(np.zeros(3), d)
    lx, ly = sample_disk_concentric(*lens_sample)
    if lx == 0.0 and ly == 0.0:
        return Ray(np.zeros(3), d)
    origin = np.array([lx * lens.aperture_radius, ly * lens.aperture_radius, 0.0])
    focus_point = d * (lens.focus_distance / d[2])
    direction = focus_point - origin
    direction /= math.sqrt(float(np.dot(direction, direction)))
    return Ray(origin, direction)
