"""Independent brute-force oracles used to derive expected test values.

Everything here is deliberately written from first principles, separate from
the library's implementations: exhaustive triangle scans, bit-reversal
radical inverse, closed-form Fresnel/Snell identities.
"""

from __future__ import annotations

import math

import numpy as np


def radical_inverse_base2_bits(index: int, n_bits: int = 32) -> float:
    """Base-2 radical inverse via explicit bit reversal."""
    rev = 0
    for b in range(n_bits):
        if index & (1 << b):
            rev |= 1 << (n_bits - 1 - b)
    return rev / float(1 << n_bits)


def brute_force_hits(vertices, triangles, origins, directions, t_min=1e-9, t_max=np.inf):
    """Exhaustive nearest-hit scan over every (ray, triangle) pair.

    Returns (t, tri_index) with tri_index -1 on miss. Vectorized
    Moller-Trumbore over all triangles per ray.
    """
    v0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - v0
    e2 = vertices[triangles[:, 2]] - v0
    n_rays = len(origins)
    out_t = np.full(n_rays, np.inf)
    out_tri = np.full(n_rays, -1, dtype=np.int64)
    for i in range(n_rays):
        o = origins[i]
        d = directions[i]
        p = np.cross(d, e2)
        det = np.einsum("ij,ij->i", e1, p)
        ok = np.abs(det) >= 1e-14
        inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        s = o - v0
        u = np.einsum("ij,ij->i", s, p) * inv_det
        ok &= (u >= 0.0) & (u <= 1.0)
        q = np.cross(s, e1)
        v = (q @ d) * inv_det
        ok &= (v >= 0.0) & (u + v <= 1.0)
        t = np.einsum("ij,ij->i", e2, q) * inv_det
        ok &= (t > t_min) & (t < t_max)
        if np.any(ok):
            idx = np.flatnonzero(ok)
            best = idx[np.argmin(t[idx])]
            out_t[i] = t[best]
            out_tri[i] = best
    return out_t, out_tri


def fresnel_reflectance_closed_form(theta_i_rad: float, n1: float, n2: float) -> float:
    """Unpolarized Fresnel from raw sin/cos identities (not the library path)."""
    sin_t = n1 * math.sin(theta_i_rad) / n2
    if sin_t > 1.0:
        return 1.0
    theta_t = math.asin(sin_t)
    rs = (n1 * math.cos(theta_i_rad) - n2 * math.cos(theta_t)) / (
        n1 * math.cos(theta_i_rad) + n2 * math.cos(theta_t)
    )
    rp = (n2 * math.cos(theta_i_rad) - n1 * math.cos(theta_t)) / (
        n2 * math.cos(theta_i_rad) + n1 * math.cos(theta_t)
    )
    return 0.5 * (rs * rs + rp * rp)


def slab_ghost_weights(theta_i_rad: float, ior: float, n_orders: int):
    """Geometric Fresnel series of a lossless slab, by direct products.

    Returns (front_reflection, transmitted[к], reflected_ghosts[k]).
    """
    r = fresnel_reflectance_closed_form(theta_i_rad, 1.0, ior)
    t = 1.0 - r
    transmitted = [t * t * r ** (2 * k) for k in range(n_orders)]
    reflected = [t * t * r ** (2 * k + 1) for k in range(n_orders)]
    return r, transmitted, reflected


def slab_lateral_shift(theta_i_rad: float, thickness: float, ior: float) -> float:
    """Perpendicular offset between the incident line and the exit ray line."""
    theta_t = math.asin(math.sin(theta_i_rad) / ior)
    return thickness * math.sin(theta_i_rad - theta_t) / math.cos(theta_t)


def perpendicular_distance_between_parallel_lines(p0, d, p1) -> float:
    """Distance from the line (p0, d) to the parallel line through p1."""
    d = np.asarray(d, dtype=np.float64)
    w = np.asarray(p1, dtype=np.float64) - np.asarray(p0, dtype=np.float64)
    proj = w - (w @ d) * d
    return float(np.linalg.norm(proj))


def mse_direct(a, b) -> float:
    """Naive direct-summation MSE (PSNR oracle)."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    total = 0.0
    for x, y in zip(a, b):
        total += (x - y) * (x - y)
    return total / len(a)


def coc_radius_on_focus_plane(aperture_radius: float, point_distance: float,
                              focus_distance: float) -> float:
    """Thin-lens blur radius of a point at distance D measured on the focus
    plane, from similar triangles."""
    return aperture_radius * abs(point_distance - focus_distance) / point_distance
