"""Engine selection: compiled Cython kernels with a pure-Python fallback.

The compiled module is preferred when importable; set GLASSPATH_PURE_PYTHON=1
(or pass engine="python") to force the fallback. Both engines are
deterministic and produce bit-identical images for identical inputs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import purepy
from .common import N_COUNTERS, PackedGeometry, TracerParams, pack_geometry

try:
    from . import _kernels
    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build
    _kernels = None
    HAVE_COMPILED = False

_FORCE_PURE = os.environ.get("GLASSPATH_PURE_PYTHON", "") not in ("", "0")


def active_engine_name(engine: str = "auto") -> str:
    if engine not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernels are not available in this install")
        return "compiled"
    if engine == "python":
        return "python"
    return "compiled" if HAVE_COMPILED and not _FORCE_PURE else "python"


def make_tracer(geo: PackedGeometry, params: TracerParams, engine: str = "auto"):
    if active_engine_name(engine) == "compiled":
        return _kernels.Tracer(geo, params)
    return purepy.Tracer(geo, params)


def tile_rects(width: int, height: int, tile_size: int) -> list[tuple[int, int, int, int]]:
    rects = []
    for y0 in range(0, height, tile_size):
        for x0 in range(0, width, tile_size):
            rects.append((x0, y0, min(x0 + tile_size, width), min(y0 + tile_size, height)))
    return rects


def render_image(
    geo: PackedGeometry,
    params: TracerParams,
    tile_size: int = 32,
    n_threads: int = 1,
    engine: str = "auto",
) -> tuple[np.ndarray, np.ndarray]:
    """Render the full film; returns (rgb (H,W,3) float64, counters (3,) int64).

    Tiles are disjoint and every pixel's sample stream is keyed by its own
    pixel index, so the result is independent of tile order and thread count.
    """
    tracer = make_tracer(geo, params, engine)
    out = np.zeros((params.height, params.width, 3), dtype=np.float64)
    rects = tile_rects(params.width, params.height, tile_size)
    counters = np.zeros((len(rects), N_COUNTERS), dtype=np.int64)

    if n_threads <= 1:
        for i, (x0, y0, x1, y1) in enumerate(rects):
            tracer.run_tile(out, counters[i], x0, y0, x1, y1)
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            futures = [
                pool.submit(tracer.run_tile, out, counters[i], x0, y0, x1, y1)
                for i, (x0, y0, x1, y1) in enumerate(rects)
            ]
            for f in futures:
                f.result()
    return out, counters.sum(axis=0)


def intersect_rays(bvh, origins, directions, t_min: float = 1e-9, t_max: float = np.inf,
                   engine: str = "auto"):
    """Batched nearest-hit queries against a single mesh's BVH.

    Returns (t, tri, u, v); tri indexes the BVH's leaf-ordered triangles,
    -1 for a miss.
    """
    geo = pack_geometry([bvh])
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    directions = np.ascontiguousarray(directions, dtype=np.float64)
    if active_engine_name(engine) == "compiled":
        return _kernels.intersect_batch(geo, origins, directions, t_min, t_max)
    return purepy.intersect_batch(geo, origins, directions, t_min, t_max)
