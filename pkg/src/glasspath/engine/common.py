"""Flattened scene + parameter bundles consumed by both tracer kernels.

Everything here is plain contiguous numpy arrays so the compiled kernel can
take typed memoryviews and the pure-Python kernel can index scalars; the two
engines must see byte-identical inputs to produce byte-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import Bvh

# glass behavior codes shared with the kernels
GLASS_ABSENT = 0
GLASS_REAL = 1
GLASS_VIRTUAL_TRANSMIT = 2
GLASS_VIRTUAL_REFLECT = 3

# lens mode codes
LENS_PINHOLE = 0
LENS_THIN = 1

# instrumentation counter slots
COUNTER_FRESNEL = 0
COUNTER_ATTENUATION = 1
COUNTER_APERTURE = 2
N_COUNTERS = 3


@dataclass(frozen=True)
class TracerParams:
    width: int
    height: int
    spp: int
    seed: int
    tan_half_x: float
    tan_half_y: float
    lens_mode: int
    aperture_radius: float
    focus_distance: float
    glass_behavior: int
    plane_z: float
    thickness: float
    ior: float
    absorption: tuple[float, float, float]
    max_orders: int
    max_depth: int


@dataclass(frozen=True)
class PackedGeometry:
    """0..2 BVH-accelerated meshes concatenated into single index spaces."""

    v0: np.ndarray          # (T, 3)
    e1: np.ndarray
    e2: np.ndarray
    uv0: np.ndarray         # (T, 2)
    uv1: np.ndarray
    uv2: np.ndarray
    tri_tex: np.ndarray     # (T,) int32 texture slot per triangle
    nodes_min: np.ndarray   # (N, 3)
    nodes_max: np.ndarray
    node_left: np.ndarray   # (N,) int32, child indices rebased
    node_right: np.ndarray
    node_first: np.ndarray  # (N,) int32 into the packed triangle arrays
    node_count: np.ndarray
    roots: np.ndarray       # (M,) int32 root node per mesh
    tex0: np.ndarray        # (h, w, 3) float64
    tex1: np.ndarray


_DUMMY_TEX = np.zeros((1, 1, 3), dtype=np.float64)


def pack_geometry(bvhs: list[Bvh]) -> PackedGeometry:
    if len(bvhs) > 2:
        raise ValueError("at most two meshes per scene")
    tri_parts, node_parts = [], []
    roots = []
    tri_base = 0
    node_base = 0
    for slot, bvh in enumerate(bvhs):
        left = bvh.node_left.copy()
        right = bvh.node_right.copy()
        internal = left >= 0
        left[internal] += node_base
        right[internal] += node_base
        first = bvh.node_first + tri_base
        node_parts.append((bvh.nodes_min, bvh.nodes_max, left, right, first, bvh.node_count))
        tri_parts.append(
            (bvh.v0, bvh.e1, bvh.e2, bvh.uv0, bvh.uv1, bvh.uv2,
             np.full(len(bvh.v0), slot, dtype=np.int32))
        )
        roots.append(node_base)
        tri_base += len(bvh.v0)
        node_base += bvh.n_nodes

    def cat(parts, i, dtype=None):
        arr = np.concatenate([p[i] for p in parts], axis=0)
        return np.ascontiguousarray(arr if dtype is None else arr.astype(dtype))

    if not bvhs:
        empty3 = np.zeros((0, 3), dtype=np.float64)
        empty2 = np.zeros((0, 2), dtype=np.float64)
        zeroi = np.zeros(0, dtype=np.int32)
        return PackedGeometry(
            v0=empty3, e1=empty3, e2=empty3, uv0=empty2, uv1=empty2, uv2=empty2,
            tri_tex=zeroi, nodes_min=empty3, nodes_max=empty3, node_left=zeroi,
            node_right=zeroi, node_first=zeroi, node_count=zeroi,
            roots=zeroi, tex0=_DUMMY_TEX, tex1=_DUMMY_TEX,
        )

    textures = [np.ascontiguousarray(b.mesh.texture, dtype=np.float64) for b in bvhs]
    return PackedGeometry(
        v0=cat(tri_parts, 0), e1=cat(tri_parts, 1), e2=cat(tri_parts, 2),
        uv0=cat(tri_parts, 3), uv1=cat(tri_parts, 4), uv2=cat(tri_parts, 5),
        tri_tex=cat(tri_parts, 6, np.int32),
        nodes_min=cat(node_parts, 0), nodes_max=cat(node_parts, 1),
        node_left=cat(node_parts, 2, np.int32), node_right=cat(node_parts, 3, np.int32),
        node_first=cat(node_parts, 4, np.int32), node_count=cat(node_parts, 5, np.int32),
        roots=np.array(roots, dtype=np.int32),
        tex0=textures[0],
        tex1=textures[1] if len(textures) > 1 else _DUMMY_TEX,
    )
