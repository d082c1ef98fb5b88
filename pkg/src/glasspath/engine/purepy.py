"""Pure-Python tracer kernel: the portable fallback engine.

Scalar mirror of the compiled Cython kernel in _kernels.pyx. The two are
kept operation-for-operation identical (same formulas, same evaluation
order, same libm calls) so their outputs agree bit-for-bit; the parity test
asserts exact equality. Keep any change synchronized with the .pyx file.
"""

from __future__ import annotations

import math

import numpy as np

from .common import (
    COUNTER_APERTURE,
    COUNTER_ATTENUATION,
    COUNTER_FRESNEL,
    GLASS_ABSENT,
    GLASS_REAL,
    GLASS_VIRTUAL_REFLECT,
    GLASS_VIRTUAL_TRANSMIT,
    LENS_THIN,
    PackedGeometry,
    TracerParams,
)

_MASK64 = (1 << 64) - 1
_INV_2_64 = 1.0 / float(1 << 64)
_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)
_T_EPS = 1e-9
_DET_EPS = 1e-14
_INF = math.inf


def _splitmix64(x):
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _sample(seed, pixel, sample_index, dim):
    h = _splitmix64(seed & _MASK64)
    h = _splitmix64((h ^ pixel) & _MASK64)
    h = _splitmix64((h ^ dim) & _MASK64)
    offset = h * _INV_2_64
    base = _PRIMES[dim % 16]
    inv_base = 1.0 / base
    value = 0.0
    factor = inv_base
    i = sample_index
    while i > 0:
        value += (i % base) * factor
        i //= base
        factor *= inv_base
    v = value + offset
    if v >= 1.0:
        v -= 1.0
    return v


def _fresnel(cos_i, eta):
    sin2_t = (1.0 - cos_i * cos_i) / (eta * eta)
    if sin2_t > 1.0:
        return 1.0
    cos_t = math.sqrt(1.0 - sin2_t)
    r_s = (cos_i - eta * cos_t) / (cos_i + eta * cos_t)
    r_p = (eta * cos_i - cos_t) / (eta * cos_i + cos_t)
    return 0.5 * (r_s * r_s + r_p * r_p)


def _disk_concentric(u1, u2):
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


def _safe_inv(d):
    if d != 0.0:
        return 1.0 / d
    return _INF


class Tracer:
    """Holds one packed scene; run_tile renders a film rectangle into out."""

    def __init__(self, geo: PackedGeometry, params: TracerParams):
        self.geo = geo
        self.p = params
        self.textures = (geo.tex0, geo.tex1)

    # -- geometry ---------------------------------------------------------

    def _intersect(self, ox, oy, oz, dx, dy, dz, t_limit, t_lo=_T_EPS):
        """Nearest triangle over all mesh roots; returns (t, tri, u, v)."""
        geo = self.geo
        nmin = geo.nodes_min
        nmax = geo.nodes_max
        left = geo.node_left
        right = geo.node_right
        first = geo.node_first
        count = geo.node_count
        v0 = geo.v0
        e1 = geo.e1
        e2 = geo.e2
        ix = _safe_inv(dx)
        iy = _safe_inv(dy)
        iz = _safe_inv(dz)
        best_t = t_limit
        best_tri = -1
        best_u = 0.0
        best_v = 0.0
        stack = [0] * 64
        for r in range(len(geo.roots)):
            stack[0] = geo.roots[r]
            sp = 1
            while sp > 0:
                sp -= 1
                node = stack[sp]
                # slab test against [t_lo, best_t]
                tmin = t_lo
                tmax = best_t
                t1 = (nmin[node, 0] - ox) * ix
                t2 = (nmax[node, 0] - ox) * ix
                if t1 > t2:
                    t1, t2 = t2, t1
                if t1 > tmin:
                    tmin = t1
                if t2 < tmax:
                    tmax = t2
                t1 = (nmin[node, 1] - oy) * iy
                t2 = (nmax[node, 1] - oy) * iy
                if t1 > t2:
                    t1, t2 = t2, t1
                if t1 > tmin:
                    tmin = t1
                if t2 < tmax:
                    tmax = t2
                t1 = (nmin[node, 2] - oz) * iz
                t2 = (nmax[node, 2] - oz) * iz
                if t1 > t2:
                    t1, t2 = t2, t1
                if t1 > tmin:
                    tmin = t1
                if t2 < tmax:
                    tmax = t2
                if tmax < tmin:
                    continue
                c = count[node]
                if c > 0:
                    f = first[node]
                    for k in range(f, f + c):
                        e1x = e1[k, 0]
                        e1y = e1[k, 1]
                        e1z = e1[k, 2]
                        e2x = e2[k, 0]
                        e2y = e2[k, 1]
                        e2z = e2[k, 2]
                        px = dy * e2z - dz * e2y
                        py = dz * e2x - dx * e2z
                        pz = dx * e2y - dy * e2x
                        det = e1x * px + e1y * py + e1z * pz
                        if -_DET_EPS < det < _DET_EPS:
                            continue
                        inv_det = 1.0 / det
                        sx = ox - v0[k, 0]
                        sy = oy - v0[k, 1]
                        sz = oz - v0[k, 2]
                        u = (sx * px + sy * py + sz * pz) * inv_det
                        if u < 0.0 or u > 1.0:
                            continue
                        qx = sy * e1z - sz * e1y
                        qy = sz * e1x - sx * e1z
                        qz = sx * e1y - sy * e1x
                        v = (dx * qx + dy * qy + dz * qz) * inv_det
                        if v < 0.0 or u + v > 1.0:
                            continue
                        t = (e2x * qx + e2y * qy + e2z * qz) * inv_det
                        if t <= t_lo or t >= best_t:
                            continue
                        best_t = t
                        best_tri = k
                        best_u = u
                        best_v = v
                else:
                    stack[sp] = left[node]
                    stack[sp + 1] = right[node]
                    sp += 2
        return best_t, best_tri, best_u, best_v

    def _emission(self, tri, u, v):
        geo = self.geo
        w0 = 1.0 - u - v
        tu = w0 * geo.uv0[tri, 0] + u * geo.uv1[tri, 0] + v * geo.uv2[tri, 0]
        tv = w0 * geo.uv0[tri, 1] + u * geo.uv1[tri, 1] + v * geo.uv2[tri, 1]
        tex = self.textures[geo.tri_tex[tri]]
        th = tex.shape[0]
        tw = tex.shape[1]
        fx = tu * tw - 0.5
        fy = tv * th - 0.5
        if fx < 0.0:
            fx = 0.0
        if fx > tw - 1.0:
            fx = tw - 1.0
        if fy < 0.0:
            fy = 0.0
        if fy > th - 1.0:
            fy = th - 1.0
        x0 = int(fx)
        y0 = int(fy)
        x1 = x0 + 1 if x0 + 1 < tw else tw - 1
        y1 = y0 + 1 if y0 + 1 < th else th - 1
        wx = fx - x0
        wy = fy - y0
        r = (1.0 - wy) * ((1.0 - wx) * tex[y0, x0, 0] + wx * tex[y0, x1, 0]) + wy * (
            (1.0 - wx) * tex[y1, x0, 0] + wx * tex[y1, x1, 0]
        )
        g = (1.0 - wy) * ((1.0 - wx) * tex[y0, x0, 1] + wx * tex[y0, x1, 1]) + wy * (
            (1.0 - wx) * tex[y1, x0, 1] + wx * tex[y1, x1, 1]
        )
        b = (1.0 - wy) * ((1.0 - wx) * tex[y0, x0, 2] + wx * tex[y0, x1, 2]) + wy * (
            (1.0 - wx) * tex[y1, x0, 2] + wx * tex[y1, x1, 2]
        )
        return r, g, b

    # -- light transport --------------------------------------------------

    def _trace(self, ox, oy, oz, dx, dy, dz, counters):
        p = self.p
        out_r = 0.0
        out_g = 0.0
        out_b = 0.0
        # ray stack entries: (ox, oy, oz, dx, dy, dz, wr, wg, wb, depth)
        stack = [(ox, oy, oz, dx, dy, dz, 1.0, 1.0, 1.0, 0)]
        while stack:
            ox, oy, oz, dx, dy, dz, wr, wg, wb, depth = stack.pop()
            t_mesh, tri, u, v = self._intersect(ox, oy, oz, dx, dy, dz, _INF)
            t_glass = _INF
            if p.glass_behavior != GLASS_ABSENT and oz < p.plane_z and dz > 1e-12:
                tg = (p.plane_z - oz) / dz
                if _T_EPS < tg < t_mesh:
                    t_glass = tg
            if t_glass < _INF:
                if depth + 1 > p.max_depth:
                    continue
                ex = ox + t_glass * dx
                ey = oy + t_glass * dy
                cos_i = dz
                mz = -dz
                if p.glass_behavior == GLASS_VIRTUAL_REFLECT:
                    stack.append((ex, ey, p.plane_z, dx, dy, mz, wr, wg, wb, depth + 1))
                    continue
                inv_eta = 1.0 / p.ior
                sin2_t = inv_eta * inv_eta * (1.0 - cos_i * cos_i)
                cos_t = math.sqrt(1.0 - sin2_t)
                crossing = p.thickness / cos_t
                drift_x = crossing * inv_eta * dx
                drift_y = crossing * inv_eta * dy
                if p.glass_behavior == GLASS_VIRTUAL_TRANSMIT:
                    stack.append(
                        (ex + drift_x, ey + drift_y, p.plane_z + p.thickness,
                         dx, dy, dz, wr, wg, wb, depth + 1)
                    )
                    continue
                # real slab: front reflection + ghost series
                refl = _fresnel(cos_i, p.ior)
                counters[COUNTER_FRESNEL] += 1
                trans = 1.0 - refl
                stack.append(
                    (ex, ey, p.plane_z, dx, dy, mz, wr * refl, wg * refl, wb * refl, depth + 1)
                )
                ab_r, ab_g, ab_b = p.absorption
                ww = trans * trans
                rm = 1.0
                for m in range(p.max_orders + 1):
                    ws = ww * rm
                    if ws < 1e-16:
                        break
                    crossings = m + 1
                    glass_len = crossings * crossing
                    att_r = math.exp(-ab_r * glass_len)
                    att_g = math.exp(-ab_g * glass_len)
                    att_b = math.exp(-ab_b * glass_len)
                    counters[COUNTER_ATTENUATION] += 1
                    gx = ex + crossings * drift_x
                    gy = ey + crossings * drift_y
                    if m % 2 == 0:
                        stack.append(
                            (gx, gy, p.plane_z + p.thickness, dx, dy, dz,
                             wr * ws * att_r, wg * ws * att_g, wb * ws * att_b, depth + 1)
                        )
                    else:
                        stack.append(
                            (gx, gy, p.plane_z, dx, dy, mz,
                             wr * ws * att_r, wg * ws * att_g, wb * ws * att_b, depth + 1)
                        )
                    rm *= refl
            elif tri >= 0:
                er, eg, eb = self._emission(tri, u, v)
                out_r += wr * er
                out_g += wg * eg
                out_b += wb * eb
        return out_r, out_g, out_b

    def trace_one(self, origin, direction):
        """Radiance estimate for a single ray (diagnostics and tests)."""
        counters = [0, 0, 0]
        r, g, b = self._trace(
            float(origin[0]), float(origin[1]), float(origin[2]),
            float(direction[0]), float(direction[1]), float(direction[2]),
            counters,
        )
        return np.array([r, g, b])

    def run_tile(self, out: np.ndarray, counters: np.ndarray, x0: int, y0: int, x1: int, y1: int):
        p = self.p
        inv_spp = 1.0 / p.spp
        thin = p.lens_mode == LENS_THIN and p.aperture_radius > 0.0
        local_counters = [0, 0, 0]
        for y in range(y0, y1):
            for x in range(x0, x1):
                pixel = y * p.width + x
                acc_r = 0.0
                acc_g = 0.0
                acc_b = 0.0
                for s in range(p.spp):
                    jx = _sample(p.seed, pixel, s, 0)
                    jy = _sample(p.seed, pixel, s, 1)
                    cx = (2.0 * (x + jx) / p.width - 1.0) * p.tan_half_x
                    cy = (2.0 * (y + jy) / p.height - 1.0) * p.tan_half_y
                    norm = math.sqrt(cx * cx + cy * cy + 1.0)
                    dx = cx / norm
                    dy = cy / norm
                    dz = 1.0 / norm
                    ox = 0.0
                    oy = 0.0
                    if thin:
                        u1 = _sample(p.seed, pixel, s, 2)
                        u2 = _sample(p.seed, pixel, s, 3)
                        local_counters[COUNTER_APERTURE] += 1
                        lx, ly = _disk_concentric(u1, u2)
                        if lx != 0.0 or ly != 0.0:
                            ox = lx * p.aperture_radius
                            oy = ly * p.aperture_radius
                            fs = p.focus_distance / dz
                            fx = dx * fs - ox
                            fy = dy * fs - oy
                            fz = dz * fs
                            fn = math.sqrt(fx * fx + fy * fy + fz * fz)
                            dx = fx / fn
                            dy = fy / fn
                            dz = fz / fn
                    r, g, b = self._trace(ox, oy, 0.0, dx, dy, dz, local_counters)
                    acc_r += r
                    acc_g += g
                    acc_b += b
                out[y, x, 0] = acc_r * inv_spp
                out[y, x, 1] = acc_g * inv_spp
                out[y, x, 2] = acc_b * inv_spp
        counters[COUNTER_FRESNEL] += local_counters[COUNTER_FRESNEL]
        counters[COUNTER_ATTENUATION] += local_counters[COUNTER_ATTENUATION]
        counters[COUNTER_APERTURE] += local_counters[COUNTER_APERTURE]


def intersect_batch(geo: PackedGeometry, origins, directions, t_min, t_max):
    """Nearest hits for a batch of rays; (t, tri, u, v) arrays.

    tri is the packed (leaf-order) triangle index or -1 for a miss.
    """
    dummy = TracerParams(
        width=1, height=1, spp=1, seed=0, tan_half_x=1.0, tan_half_y=1.0,
        lens_mode=0, aperture_radius=0.0, focus_distance=1.0,
        glass_behavior=GLASS_ABSENT, plane_z=0.0, thickness=1.0, ior=1.5,
        absorption=(0.0, 0.0, 0.0), max_orders=0, max_depth=1,
    )
    tracer = Tracer(geo, dummy)
    n = len(origins)
    ts = np.full(n, np.inf)
    tris = np.full(n, -1, dtype=np.int32)
    us = np.zeros(n)
    vs = np.zeros(n)
    for i in range(n):
        t, tri, u, v = tracer._intersect(
            origins[i, 0], origins[i, 1], origins[i, 2],
            directions[i, 0], directions[i, 1], directions[i, 2], t_max, t_min,
        )
        if tri >= 0:
            ts[i] = t
            tris[i] = tri
            us[i] = u
            vs[i] = v
    return ts, tris, us, vs
