"""Depth-image meshing and ray-intersection acceleration.

A depth image is unprojected through a pinhole camera into a heightfield
mesh (one vertex per pixel, two triangles per grid cell, cells cut at depth
discontinuities). Meshes are immutable after construction; BVHs are flat
arrays shared by the compiled and pure-Python traversal kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vecmath import Ray

_LEAF_SIZE = 4
_MIN_TRIANGLE_AREA = 1e-18  # m^2; drops exactly-degenerate cells


@dataclass(frozen=True)
class DepthImage:
    """Registered linear RGB + metric depth raster with pinhole intrinsics."""

    rgb: np.ndarray      # (H, W, 3) linear color in [0, 1]
    depth: np.ndarray    # (H, W) meters, finite and > 0
    hfov_deg: float      # horizontal field of view

    def __post_init__(self):
        rgb = np.asarray(self.rgb, dtype=np.float64)
        depth = np.asarray(self.depth, dtype=np.float64)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError("rgb must have shape (H, W, 3)")
        if depth.shape != rgb.shape[:2]:
            raise ValueError("depth shape must match rgb")
        if not np.all(np.isfinite(depth)) or np.any(depth <= 0.0):
            raise ValueError("depth must be finite and > 0 everywhere (inpaint first)")
        if not 0.0 < self.hfov_deg < 180.0:
            raise ValueError("hfov_deg must lie in (0, 180)")
        object.__setattr__(self, "rgb", rgb)
        object.__setattr__(self, "depth", depth)

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @property
    def height(self) -> int:
        return self.depth.shape[0]


@dataclass(frozen=True)
class HeightfieldMesh:
    vertices: np.ndarray   # (V, 3) meters
    triangles: np.ndarray  # (T, 3) int32 vertex indices
    uvs: np.ndarray        # (V, 2) in [0, 1]^2
    texture: np.ndarray    # (th, tw, 3) linear color, referenced not copied

    def __post_init__(self):
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise ValueError("triangle index out of range")


def unproject_pixels(depth: np.ndarray, hfov_deg: float) -> np.ndarray:
    """Per-pixel unprojection at pixel centers; z equals the depth value.

    Camera space: +x right, +y down, +z forward (aligned with the raster).
    """
    h, w = depth.shape
    tan_x = math.tan(math.radians(hfov_deg) / 2.0)
    tan_y = tan_x * h / w
    xs = (2.0 * (np.arange(w) + 0.5) / w - 1.0) * tan_x
    ys = (2.0 * (np.arange(h) + 0.5) / h - 1.0) * tan_y
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx * depth, gy * depth, depth], axis=-1)
    return pts.reshape(-1, 3)


def project_to_pixels(points: np.ndarray, width: int, height: int, hfov_deg: float) -> np.ndarray:
    """Inverse of unproject_pixels: camera-space points -> pixel coordinates."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    tan_x = math.tan(math.radians(hfov_deg) / 2.0)
    tan_y = tan_x * height / width
    px = (pts[:, 0] / pts[:, 2] / tan_x + 1.0) * 0.5 * width
    py = (pts[:, 1] / pts[:, 2] / tan_y + 1.0) * 0.5 * height
    return np.stack([px, py], axis=-1)


def build_heightfield(img: DepthImage, split_threshold: float = 0.5) -> HeightfieldMesh:
    """Triangulate a depth image into a displacement mesh.

    Each grid cell yields two triangles; a triangle is dropped when any of
    its edges (cell sides or the cell diagonal) spans a depth step larger
    than split_threshold, so no triangle bridges a discontinuity.
    """
    if split_threshold <= 0.0:
        raise ValueError("split_threshold must be > 0")
    h, w = img.height, img.width
    if h < 2 or w < 2:
        raise ValueError("depth image must be at least 2x2 pixels")

    vertices = unproject_pixels(img.depth, img.hfov_deg)
    us = (np.arange(w) + 0.5) / w
    vs = (np.arange(h) + 0.5) / h
    gu, gv = np.meshgrid(us, vs)
    uvs = np.stack([gu, gv], axis=-1).reshape(-1, 2)

    d = img.depth
    ok_h = np.abs(np.diff(d, axis=1)) <= split_threshold      # (H, W-1) horizontal edges
    ok_v = np.abs(np.diff(d, axis=0)) <= split_threshold      # (H-1, W) vertical edges
    ok_d = np.abs(d[1:, 1:] - d[:-1, :-1]) <= split_threshold  # (H-1, W-1) cell diagonals

    idx = np.arange(h * w).reshape(h, w)
    v00 = idx[:-1, :-1]
    v10 = idx[:-1, 1:]
    v01 = idx[1:, :-1]
    v11 = idx[1:, 1:]

    # Triangle A: (v00, v10, v11) needs top, right and diagonal edges intact.
    keep_a = ok_h[:-1, :] & ok_v[:, 1:] & ok_d
    # Triangle B: (v00, v11, v01) needs diagonal, bottom and left edges intact.
    keep_b = ok_d & ok_h[1:, :] & ok_v[:, :-1]

    tri_a = np.stack([v00[keep_a], v10[keep_a], v11[keep_a]], axis=-1)
    tri_b = np.stack([v00[keep_b], v11[keep_b], v01[keep_b]], axis=-1)
    triangles = np.concatenate([tri_a, tri_b], axis=0).astype(np.int32)

    if len(triangles):
        a = vertices[triangles[:, 0]]
        e1 = vertices[triangles[:, 1]] - a
        e2 = vertices[triangles[:, 2]] - a
        areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=-1)
        triangles = triangles[areas > _MIN_TRIANGLE_AREA]

    return HeightfieldMesh(vertices=vertices, triangles=triangles, uvs=uvs, texture=img.rgb)


def mirror_mesh(mesh: HeightfieldMesh, plane_z: float) -> HeightfieldMesh:
    """Mirror a mesh about the plane z = plane_z, flipping triangle winding."""
    vertices = mesh.vertices.copy()
    vertices[:, 2] = 2.0 * plane_z - vertices[:, 2]
    triangles = mesh.triangles[:, [0, 2, 1]].copy()
    return HeightfieldMesh(vertices=vertices, triangles=triangles, uvs=mesh.uvs, texture=mesh.texture)


@dataclass(frozen=True)
class Bvh:
    """Flat median-split BVH over one mesh's triangles.

    Triangle data is stored in leaf order (v0 + two edges, per-vertex uvs)
    so leaves address contiguous ranges; `tri_order` maps back to the mesh's
    triangle indices.
    """

    mesh: HeightfieldMesh
    nodes_min: np.ndarray    # (N, 3)
    nodes_max: np.ndarray    # (N, 3)
    node_left: np.ndarray    # (N,) int32, -1 for leaves
    node_right: np.ndarray   # (N,) int32
    node_first: np.ndarray   # (N,) int32 into leaf-ordered triangles
    node_count: np.ndarray   # (N,) int32, 0 for internal nodes
    tri_order: np.ndarray    # (T,) int32 leaf order -> mesh triangle index
    v0: np.ndarray           # (T, 3) leaf-ordered
    e1: np.ndarray
    e2: np.ndarray
    uv0: np.ndarray          # (T, 2) leaf-ordered
    uv1: np.ndarray
    uv2: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.node_left)


def build_bvh(mesh: HeightfieldMesh) -> Bvh:
    """Median-split build on triangle centroids, longest axis first.

    Deterministic (stable centroid ordering), O(n log n) overall.
    """
    tris = mesh.triangles
    if len(tris) == 0:
        raise ValueError("cannot build a BVH over an empty mesh")
    verts = mesh.vertices
    corners = verts[tris]                     # (T, 3, 3)
    tri_min = corners.min(axis=1)
    tri_max = corners.max(axis=1)
    centroids = 0.5 * (tri_min + tri_max)

    nodes_min: list[np.ndarray] = []
    nodes_max: list[np.ndarray] = []
    node_left: list[int] = []
    node_right: list[int] = []
    node_first: list[int] = []
    node_count: list[int] = []
    order = np.arange(len(tris))

    def new_node(sel: np.ndarray) -> int:
        i = len(node_left)
        nodes_min.append(tri_min[sel].min(axis=0))
        nodes_max.append(tri_max[sel].max(axis=0))
        node_left.append(-1)
        node_right.append(0)
        node_first.append(0)
        node_count.append(0)
        return i

    out_order: list[np.ndarray] = []
    out_offset = 0
    # (node index, triangle selection) worklist; children appended in order.
    root_sel = order
    stack = [(new_node(root_sel), root_sel)]
    while stack:
        node, sel = stack.pop()
        if len(sel) <= _LEAF_SIZE:
            node_first[node] = out_offset
            node_count[node] = len(sel)
            out_order.append(sel)
            out_offset += len(sel)
            continue
        cmin = centroids[sel].min(axis=0)
        cmax = centroids[sel].max(axis=0)
        axis = int(np.argmax(cmax - cmin))
        if cmax[axis] - cmin[axis] <= 0.0:
            node_first[node] = out_offset
            node_count[node] = len(sel)
            out_order.append(sel)
            out_offset += len(sel)
            continue
        perm = np.argsort(centroids[sel, axis], kind="stable")
        mid = len(sel) // 2
        left_sel = sel[perm[:mid]]
        right_sel = sel[perm[mid:]]
        left = new_node(left_sel)
        right = new_node(right_sel)
        node_left[node] = left
        node_right[node] = right
        stack.append((right, right_sel))
        stack.append((left, left_sel))

    tri_order = np.concatenate(out_order).astype(np.int32)
    ordered = tris[tri_order]
    a = verts[ordered[:, 0]]
    b = verts[ordered[:, 1]]
    c = verts[ordered[:, 2]]
    uv = mesh.uvs
    return Bvh(
        mesh=mesh,
        nodes_min=np.ascontiguousarray(np.array(nodes_min)),
        nodes_max=np.ascontiguousarray(np.array(nodes_max)),
        node_left=np.array(node_left, dtype=np.int32),
        node_right=np.array(node_right, dtype=np.int32),
        node_first=np.array(node_first, dtype=np.int32),
        node_count=np.array(node_count, dtype=np.int32),
        tri_order=tri_order,
        v0=np.ascontiguousarray(a),
        e1=np.ascontiguousarray(b - a),
        e2=np.ascontiguousarray(c - a),
        uv0=np.ascontiguousarray(uv[ordered[:, 0]]),
        uv1=np.ascontiguousarray(uv[ordered[:, 1]]),
        uv2=np.ascontiguousarray(uv[ordered[:, 2]]),
    )


@dataclass(frozen=True)
class Hit:
    t: float
    position: np.ndarray
    normal: np.ndarray     # geometric (per-face) unit normal
    uv: np.ndarray
    tri_index: int         # index into the mesh's triangle list


def intersect(bvh: Bvh, ray: Ray) -> Hit | None:
    """Nearest triangle hit along the ray, or None (a miss is a value)."""
    from .engine import intersect_rays

    t, tri, u, v = intersect_rays(
        bvh, ray.origin[None, :], ray.direction[None, :], ray.t_min, ray.t_max
    )
    if tri[0] < 0:
        return None
    k = int(tri[0])
    uv = (1.0 - u[0] - v[0]) * bvh.uv0[k] + u[0] * bvh.uv1[k] + v[0] * bvh.uv2[k]
    n = np.cross(bvh.e1[k], bvh.e2[k])
    n /= np.linalg.norm(n)
    return Hit(
        t=float(t[0]),
        position=ray.at(float(t[0])),
        normal=n,
        uv=uv,
        tri_index=int(bvh.tri_order[k]),
    )
