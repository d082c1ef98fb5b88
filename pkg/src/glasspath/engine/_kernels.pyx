# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tracer kernel (hot path).

Operation-for-operation mirror of purepy.py: same formulas, same evaluation
order, same libm calls, so both engines produce bit-identical images. Keep
any change synchronized with purepy.py.
"""

from libc.math cimport cos, exp, fabs, sin, sqrt

import numpy as np

# C mirrors of the codes in common.py (asserted equal at import below)
cdef int COUNTER_FRESNEL = 0
cdef int COUNTER_ATTENUATION = 1
cdef int COUNTER_APERTURE = 2
cdef int GLASS_ABSENT = 0
cdef int GLASS_REAL = 1
cdef int GLASS_VIRTUAL_TRANSMIT = 2
cdef int GLASS_VIRTUAL_REFLECT = 3
cdef int LENS_THIN = 1

from . import common as _common

assert _common.COUNTER_FRESNEL == 0 and _common.COUNTER_ATTENUATION == 1
assert _common.COUNTER_APERTURE == 2 and _common.GLASS_ABSENT == 0
assert _common.GLASS_REAL == 1 and _common.GLASS_VIRTUAL_TRANSMIT == 2
assert _common.GLASS_VIRTUAL_REFLECT == 3 and _common.LENS_THIN == 1

ctypedef unsigned long long u64

cdef double _INV_2_64 = 1.0 / 18446744073709551616.0
cdef double _T_EPS = 1e-9
cdef double _DET_EPS = 1e-14
cdef double _INF = float("inf")
cdef double _PI = 3.141592653589793

cdef int[16] _PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53]

cdef int _RAY_STACK = 300
cdef int _NODE_STACK = 64


cdef inline u64 _splitmix64(u64 x) noexcept nogil:
    cdef u64 z = x + <u64>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _sample(u64 seed, u64 pixel, u64 sample_index, int dim) noexcept nogil:
    cdef u64 h = _splitmix64(seed)
    h = _splitmix64(h ^ pixel)
    h = _splitmix64(h ^ <u64>dim)
    cdef double offset = h * _INV_2_64
    cdef int base = _PRIMES[dim % 16]
    cdef double inv_base = 1.0 / base
    cdef double value = 0.0
    cdef double factor = inv_base
    cdef u64 i = sample_index
    cdef u64 ubase = <u64>base
    while i > 0:
        value += <double>(i % ubase) * factor
        i //= ubase
        factor *= inv_base
    cdef double v = value + offset
    if v >= 1.0:
        v -= 1.0
    return v


cdef inline double _fresnel(double cos_i, double eta) noexcept nogil:
    cdef double sin2_t = (1.0 - cos_i * cos_i) / (eta * eta)
    if sin2_t > 1.0:
        return 1.0
    cdef double cos_t = sqrt(1.0 - sin2_t)
    cdef double r_s = (cos_i - eta * cos_t) / (cos_i + eta * cos_t)
    cdef double r_p = (eta * cos_i - cos_t) / (eta * cos_i + cos_t)
    return 0.5 * (r_s * r_s + r_p * r_p)


cdef inline void _disk_concentric(double u1, double u2, double* lx, double* ly) noexcept nogil:
    cdef double ox = 2.0 * u1 - 1.0
    cdef double oy = 2.0 * u2 - 1.0
    cdef double r, theta
    if ox == 0.0 and oy == 0.0:
        lx[0] = 0.0
        ly[0] = 0.0
        return
    if fabs(ox) > fabs(oy):
        r = ox
        theta = (_PI / 4.0) * (oy / ox)
    else:
        r = oy
        theta = (_PI / 2.0) - (_PI / 4.0) * (ox / oy)
    lx[0] = r * cos(theta)
    ly[0] = r * sin(theta)


cdef inline double _safe_inv(double d) noexcept nogil:
    if d != 0.0:
        return 1.0 / d
    return _INF


cdef class Tracer:
    """Holds one packed scene; run_tile renders a film rectangle into out."""

    cdef double[:, ::1] v0, e1, e2, uv0, uv1, uv2, nodes_min, nodes_max
    cdef int[::1] tri_tex, node_left, node_right, node_first, node_count, roots
    cdef double[:, :, ::1] tex0, tex1
    cdef int width, height, spp, lens_mode, glass_behavior, max_orders, max_depth
    cdef u64 seed
    cdef double tan_half_x, tan_half_y, aperture_radius, focus_distance
    cdef double plane_z, thickness, ior, ab_r, ab_g, ab_b

    def __init__(self, geo, params):
        self.v0 = geo.v0
        self.e1 = geo.e1
        self.e2 = geo.e2
        self.uv0 = geo.uv0
        self.uv1 = geo.uv1
        self.uv2 = geo.uv2
        self.tri_tex = geo.tri_tex
        self.nodes_min = geo.nodes_min
        self.nodes_max = geo.nodes_max
        self.node_left = geo.node_left
        self.node_right = geo.node_right
        self.node_first = geo.node_first
        self.node_count = geo.node_count
        self.roots = geo.roots
        self.tex0 = geo.tex0
        self.tex1 = geo.tex1
        self.width = params.width
        self.height = params.height
        self.spp = params.spp
        self.seed = <u64>(params.seed & 0xFFFFFFFFFFFFFFFF)
        self.tan_half_x = params.tan_half_x
        self.tan_half_y = params.tan_half_y
        self.lens_mode = params.lens_mode
        self.aperture_radius = params.aperture_radius
        self.focus_distance = params.focus_distance
        self.glass_behavior = params.glass_behavior
        self.plane_z = params.plane_z
        self.thickness = params.thickness
        self.ior = params.ior
        self.ab_r = params.absorption[0]
        self.ab_g = params.absorption[1]
        self.ab_b = params.absorption[2]
        self.max_orders = params.max_orders
        self.max_depth = params.max_depth
        if self.max_orders + 3 > _RAY_STACK:
            raise ValueError("max_orders too large for the kernel ray stack")

    cdef double _intersect(self, double ox, double oy, double oz,
                           double dx, double dy, double dz,
                           double t_limit, double t_lo,
                           int* out_tri, double* out_u, double* out_v) noexcept nogil:
        cdef double ix = _safe_inv(dx)
        cdef double iy = _safe_inv(dy)
        cdef double iz = _safe_inv(dz)
        cdef double best_t = t_limit
        cdef int best_tri = -1
        cdef double best_u = 0.0
        cdef double best_v = 0.0
        cdef int stack[64]
        cdef int sp, node, r, k, f, c
        cdef double tmin, tmax, t1, t2, tsw
        cdef double e1x, e1y, e1z, e2x, e2y, e2z
        cdef double px, py, pz, det, inv_det, sx, sy, sz, u, qx, qy, qz, v, t
        for r in range(self.roots.shape[0]):
            stack[0] = self.roots[r]
            sp = 1
            while sp > 0:
                sp -= 1
                node = stack[sp]
                # slab test against [t_lo, best_t]
                tmin = t_lo
                tmax = best_t
                t1 = (self.nodes_min[node, 0] - ox) * ix
                t2 = (self.nodes_max[node, 0] - ox) * ix
                if t1 > t2:
                    tsw = t1
                    t1 = t2
                    t2 = tsw
                if t1 > tmin:
                    tmin = t1
                if t2 < tmax:
                    tmax = t2
                t1 = (self.nodes_min[node, 1] - oy) * iy
                t2 = (self.nodes_max[node, 1] - oy) * iy
                if t1 > t2:
                    tsw = t1
                    t1 = t2
                    t2 = tsw
                if t1 > tmin:
                    tmin = t1
                if t2 < tmax:
                    tmax = t2
                t1 = (self.nodes_min[node, 2] - oz) * iz
                t2 = (self.nodes_max[node, 2] - oz) * iz
                if t1 > t2:
                    tsw = t1
                    t1 = t2
                    t2 = tsw
                if t1 > tmin:
                    tmin = t1
                if t2 < tmax:
                    tmax = t2
                if tmax < tmin:
                    continue
                c = self.node_count[node]
                if c > 0:
                    f = self.node_first[node]
                    for k in range(f, f + c):
                        e1x = self.e1[k, 0]
                        e1y = self.e1[k, 1]
                        e1z = self.e1[k, 2]
                        e2x = self.e2[k, 0]
                        e2y = self.e2[k, 1]
                        e2z = self.e2[k, 2]
                        px = dy * e2z - dz * e2y
                        py = dz * e2x - dx * e2z
                        pz = dx * e2y - dy * e2x
                        det = e1x * px + e1y * py + e1z * pz
                        if -_DET_EPS < det < _DET_EPS:
                            continue
                        inv_det = 1.0 / det
                        sx = ox - self.v0[k, 0]
                        sy = oy - self.v0[k, 1]
                        sz = oz - self.v0[k, 2]
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
                    stack[sp] = self.node_left[node]
                    stack[sp + 1] = self.node_right[node]
                    sp += 2
        out_tri[0] = best_tri
        out_u[0] = best_u
        out_v[0] = best_v
        return best_t

    cdef void _emission(self, int tri, double u, double v,
                        double* er, double* eg, double* eb) noexcept nogil:
        cdef double w0 = 1.0 - u - v
        cdef double tu = w0 * self.uv0[tri, 0] + u * self.uv1[tri, 0] + v * self.uv2[tri, 0]
        cdef double tv = w0 * self.uv0[tri, 1] + u * self.uv1[tri, 1] + v * self.uv2[tri, 1]
        cdef double[:, :, ::1] tex
        if self.tri_tex[tri] == 0:
            tex = self.tex0
        else:
            tex = self.tex1
        cdef int th = <int>tex.shape[0]
        cdef int tw = <int>tex.shape[1]
        cdef double fx = tu * tw - 0.5
        cdef double fy = tv * th - 0.5
        if fx < 0.0:
            fx = 0.0
        if fx > tw - 1.0:
            fx = tw - 1.0
        if fy < 0.0:
            fy = 0.0
        if fy > th - 1.0:
            fy = th - 1.0
        cdef int x0 = <int>fx
        cdef int y0 = <int>fy
        cdef int x1 = x0 + 1 if x0 + 1 < tw else tw - 1
        cdef int y1 = y0 + 1 if y0 + 1 < th else th - 1
        cdef double wx = fx - x0
        cdef double wy = fy - y0
        er[0] = (1.0 - wy) * ((1.0 - wx) * tex[y0, x0, 0] + wx * tex[y0, x1, 0]) + wy * (
            (1.0 - wx) * tex[y1, x0, 0] + wx * tex[y1, x1, 0]
        )
        eg[0] = (1.0 - wy) * ((1.0 - wx) * tex[y0, x0, 1] + wx * tex[y0, x1, 1]) + wy * (
            (1.0 - wx) * tex[y1, x0, 1] + wx * tex[y1, x1, 1]
        )
        eb[0] = (1.0 - wy) * ((1.0 - wx) * tex[y0, x0, 2] + wx * tex[y0, x1, 2]) + wy * (
            (1.0 - wx) * tex[y1, x0, 2] + wx * tex[y1, x1, 2]
        )

    cdef void _trace(self, double ox, double oy, double oz,
                     double dx, double dy, double dz,
                     double* rsx, double* rsy, double* rsz,
                     double* rdx, double* rdy, double* rdz,
                     double* rwr, double* rwg, double* rwb, int* rdepth,
                     long long* counters,
                     double* out_r, double* out_g, double* out_b) noexcept nogil:
        cdef double acc_r = 0.0
        cdef double acc_g = 0.0
        cdef double acc_b = 0.0
        cdef int sp = 0
        cdef int depth, tri, m, crossings
        cdef double wr, wg, wb, t_mesh, t_glass, tg, u, v
        cdef double ex, ey, cos_i, mz, inv_eta, sin2_t, cos_t, crossing
        cdef double drift_x, drift_y, refl, trans, ww, rm, ws, glass_len
        cdef double att_r, att_g, att_b, gx, gy, er, eg, eb
        rsx[0] = ox
        rsy[0] = oy
        rsz[0] = oz
        rdx[0] = dx
        rdy[0] = dy
        rdz[0] = dz
        rwr[0] = 1.0
        rwg[0] = 1.0
        rwb[0] = 1.0
        rdepth[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            ox = rsx[sp]
            oy = rsy[sp]
            oz = rsz[sp]
            dx = rdx[sp]
            dy = rdy[sp]
            dz = rdz[sp]
            wr = rwr[sp]
            wg = rwg[sp]
            wb = rwb[sp]
            depth = rdepth[sp]
            t_mesh = self._intersect(ox, oy, oz, dx, dy, dz, _INF, _T_EPS, &tri, &u, &v)
            t_glass = _INF
            if self.glass_behavior != GLASS_ABSENT and oz < self.plane_z and dz > 1e-12:
                tg = (self.plane_z - oz) / dz
                if _T_EPS < tg < t_mesh:
                    t_glass = tg
            if t_glass < _INF:
                if depth + 1 > self.max_depth:
                    continue
                ex = ox + t_glass * dx
                ey = oy + t_glass * dy
                cos_i = dz
                mz = -dz
                if self.glass_behavior == GLASS_VIRTUAL_REFLECT:
                    rsx[sp] = ex
                    rsy[sp] = ey
                    rsz[sp] = self.plane_z
                    rdx[sp] = dx
                    rdy[sp] = dy
                    rdz[sp] = mz
                    rwr[sp] = wr
                    rwg[sp] = wg
                    rwb[sp] = wb
                    rdepth[sp] = depth + 1
                    sp += 1
                    continue
                inv_eta = 1.0 / self.ior
                sin2_t = inv_eta * inv_eta * (1.0 - cos_i * cos_i)
                cos_t = sqrt(1.0 - sin2_t)
                crossing = self.thickness / cos_t
                drift_x = crossing * inv_eta * dx
                drift_y = crossing * inv_eta * dy
                if self.glass_behavior == GLASS_VIRTUAL_TRANSMIT:
                    rsx[sp] = ex + drift_x
                    rsy[sp] = ey + drift_y
                    rsz[sp] = self.plane_z + self.thickness
                    rdx[sp] = dx
                    rdy[sp] = dy
                    rdz[sp] = dz
                    rwr[sp] = wr
                    rwg[sp] = wg
                    rwb[sp] = wb
                    rdepth[sp] = depth + 1
                    sp += 1
                    continue
                # real slab: front reflection + ghost series
                refl = _fresnel(cos_i, self.ior)
                counters[COUNTER_FRESNEL] += 1
                trans = 1.0 - refl
                rsx[sp] = ex
                rsy[sp] = ey
                rsz[sp] = self.plane_z
                rdx[sp] = dx
                rdy[sp] = dy
                rdz[sp] = mz
                rwr[sp] = wr * refl
                rwg[sp] = wg * refl
                rwb[sp] = wb * refl
                rdepth[sp] = depth + 1
                sp += 1
                ww = trans * trans
                rm = 1.0
                for m in range(self.max_orders + 1):
                    ws = ww * rm
                    if ws < 1e-16:
                        break
                    crossings = m + 1
                    glass_len = crossings * crossing
                    att_r = exp(-self.ab_r * glass_len)
                    att_g = exp(-self.ab_g * glass_len)
                    att_b = exp(-self.ab_b * glass_len)
                    counters[COUNTER_ATTENUATION] += 1
                    gx = ex + crossings * drift_x
                    gy = ey + crossings * drift_y
                    rsx[sp] = gx
                    rsy[sp] = gy
                    rdx[sp] = dx
                    rdy[sp] = dy
                    rwr[sp] = wr * ws * att_r
                    rwg[sp] = wg * ws * att_g
                    rwb[sp] = wb * ws * att_b
                    rdepth[sp] = depth + 1
                    if m % 2 == 0:
                        rsz[sp] = self.plane_z + self.thickness
                        rdz[sp] = dz
                    else:
                        rsz[sp] = self.plane_z
                        rdz[sp] = mz
                    sp += 1
                    rm *= refl
            elif tri >= 0:
                self._emission(tri, u, v, &er, &eg, &eb)
                acc_r += wr * er
                acc_g += wg * eg
                acc_b += wb * eb
        out_r[0] = acc_r
        out_g[0] = acc_g
        out_b[0] = acc_b

    def trace_one(self, origin, direction):
        """Radiance estimate for a single ray (diagnostics and tests)."""
        cdef double rsx[300]
        cdef double rsy[300]
        cdef double rsz[300]
        cdef double rdx_a[300]
        cdef double rdy_a[300]
        cdef double rdz_a[300]
        cdef double rwr[300]
        cdef double rwg[300]
        cdef double rwb[300]
        cdef int rdepth[300]
        cdef long long local[3]
        cdef double r, g, b
        local[0] = 0
        local[1] = 0
        local[2] = 0
        self._trace(
            float(origin[0]), float(origin[1]), float(origin[2]),
            float(direction[0]), float(direction[1]), float(direction[2]),
            rsx, rsy, rsz, rdx_a, rdy_a, rdz_a, rwr, rwg, rwb, rdepth,
            local, &r, &g, &b,
        )
        return np.array([r, g, b])

    def run_tile(self, double[:, :, ::1] out, long long[::1] counters,
                 int x0, int y0, int x1, int y1):
        cdef double inv_spp = 1.0 / self.spp
        cdef bint thin = self.lens_mode == LENS_THIN and self.aperture_radius > 0.0
        cdef long long local[3]
        cdef double rsx[300]
        cdef double rsy[300]
        cdef double rsz[300]
        cdef double rdx_a[300]
        cdef double rdy_a[300]
        cdef double rdz_a[300]
        cdef double rwr[300]
        cdef double rwg[300]
        cdef double rwb[300]
        cdef int rdepth[300]
        cdef int x, y, s
        cdef u64 pixel
        cdef double jx, jy, cx, cy, norm, dx, dy, dz, ox, oy
        cdef double u1, u2, lx, ly, fs, fx, fy, fz, fn
        cdef double acc_r, acc_g, acc_b, r, g, b
        local[0] = 0
        local[1] = 0
        local[2] = 0
        with nogil:
            for y in range(y0, y1):
                for x in range(x0, x1):
                    pixel = <u64>y * <u64>self.width + <u64>x
                    acc_r = 0.0
                    acc_g = 0.0
                    acc_b = 0.0
                    for s in range(self.spp):
                        jx = _sample(self.seed, pixel, <u64>s, 0)
                        jy = _sample(self.seed, pixel, <u64>s, 1)
                        cx = (2.0 * (x + jx) / self.width - 1.0) * self.tan_half_x
                        cy = (2.0 * (y + jy) / self.height - 1.0) * self.tan_half_y
                        norm = sqrt(cx * cx + cy * cy + 1.0)
                        dx = cx / norm
                        dy = cy / norm
                        dz = 1.0 / norm
                        ox = 0.0
                        oy = 0.0
                        if thin:
                            u1 = _sample(self.seed, pixel, <u64>s, 2)
                            u2 = _sample(self.seed, pixel, <u64>s, 3)
                            local[COUNTER_APERTURE] += 1
                            _disk_concentric(u1, u2, &lx, &ly)
                            if lx != 0.0 or ly != 0.0:
                                ox = lx * self.aperture_radius
                                oy = ly * self.aperture_radius
                                fs = self.focus_distance / dz
                                fx = dx * fs - ox
                                fy = dy * fs - oy
                                fz = dz * fs
                                fn = sqrt(fx * fx + fy * fy + fz * fz)
                                dx = fx / fn
                                dy = fy / fn
                                dz = fz / fn
                        self._trace(ox, oy, 0.0, dx, dy, dz,
                                    rsx, rsy, rsz, rdx_a, rdy_a, rdz_a,
                                    rwr, rwg, rwb, rdepth, local, &r, &g, &b)
                        acc_r += r
                        acc_g += g
                        acc_b += b
                    out[y, x, 0] = acc_r * inv_spp
                    out[y, x, 1] = acc_g * inv_spp
                    out[y, x, 2] = acc_b * inv_spp
        counters[COUNTER_FRESNEL] += local[COUNTER_FRESNEL]
        counters[COUNTER_ATTENUATION] += local[COUNTER_ATTENUATION]
        counters[COUNTER_APERTURE] += local[COUNTER_APERTURE]


def intersect_batch(geo, double[:, ::1] origins, double[:, ::1] directions,
                    double t_min, double t_max):
    """Nearest hits for a batch of rays; (t, tri, u, v) arrays.

    tri is the packed (leaf-order) triangle index or -1 for a miss.
    """
    from .common import GLASS_ABSENT as _ab
    from .common import TracerParams

    dummy = TracerParams(
        width=1, height=1, spp=1, seed=0, tan_half_x=1.0, tan_half_y=1.0,
        lens_mode=0, aperture_radius=0.0, focus_distance=1.0,
        glass_behavior=_ab, plane_z=0.0, thickness=1.0, ior=1.5,
        absorption=(0.0, 0.0, 0.0), max_orders=0, max_depth=1,
    )
    cdef Tracer tracer = Tracer(geo, dummy)
    cdef Py_ssize_t n = origins.shape[0]
    ts_arr = np.full(n, np.inf)
    tris_arr = np.full(n, -1, dtype=np.int32)
    us_arr = np.zeros(n)
    vs_arr = np.zeros(n)
    cdef double[::1] ts = ts_arr
    cdef int[::1] tris = tris_arr
    cdef double[::1] us = us_arr
    cdef double[::1] vs = vs_arr
    cdef Py_ssize_t i
    cdef int tri
    cdef double t, u, v
    with nogil:
        for i in range(n):
            t = tracer._intersect(
                origins[i, 0], origins[i, 1], origins[i, 2],
                directions[i, 0], directions[i, 1], directions[i, 2],
                t_max, t_min, &tri, &u, &v,
            )
            if tri >= 0:
                ts[i] = t
                tris[i] = tri
                us[i] = u
                vs[i] = v
    return ts_arr, tris_arr, us_arr, vs_arr
