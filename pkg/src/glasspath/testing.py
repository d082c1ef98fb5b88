"""Synthetic scene fixtures shared by the test suite and the benchmark CLI."""

from __future__ import annotations

import numpy as np

from .geometry import DepthImage
from .optics import GlassSpec, LensSpec
from .scene import SceneDescription, SceneParams, assemble_scene


def noise_texture(size: int, seed: int, low: float = 0.1, high: float = 0.9) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=(size, size, 3))


def checker_texture(size: int, cells: int = 8, lo: float = 0.08, hi: float = 0.92) -> np.ndarray:
    idx = np.arange(size) * cells // size
    board = (idx[:, None] + idx[None, :]) % 2
    tex = np.where(board[..., None] == 0, lo, hi)
    return np.broadcast_to(tex, (size, size, 3)).astype(np.float64).copy()


def front_depth_image(size: int = 48, seed: int = 3, base_depth: float = 2.0,
                      ripple: float = 0.15, hfov_deg: float = 60.0) -> DepthImage:
    rng = np.random.default_rng(seed)
    depth = base_depth + rng.uniform(-ripple, ripple, size=(size, size))
    return DepthImage(rgb=noise_texture(size, seed + 1), depth=depth, hfov_deg=hfov_deg)


def back_depth_image(size: int = 48, seed: int = 5, near: float = 1.0, far: float = 2.5,
                     hfov_deg: float = 60.0) -> DepthImage:
    """Two-plane back scene: left half near, right half far."""
    depth = np.full((size, size), near)
    depth[:, size // 2:] = far
    return DepthImage(rgb=noise_texture(size, seed), depth=depth, hfov_deg=hfov_deg)


def fixture_scene(size: int = 48, seed: int = 3, glass: GlassSpec | None = None,
                  lens: LensSpec | None = None, back_scene_distance: float = 1.5) -> SceneDescription:
    """Standard small scene: rippled front plane plus a two-plane back scene."""
    params = SceneParams(
        glass=glass or GlassSpec(),
        lens=lens or LensSpec(),
        back_scene_distance=back_scene_distance,
    )
    return assemble_scene(
        front_depth_image(size, seed=seed),
        back_depth_image(size, seed=seed + 2),
        params,
    )


def marker_front_image(size: int = 64, marker_xy: tuple[int, int] = (40, 24),
                       depth: float = 2.0, hfov_deg: float = 60.0) -> DepthImage:
    """Constant-depth dark front plane with one bright 3x3 marker."""
    rgb = np.full((size, size, 3), 0.02)
    x, y = marker_xy
    rgb[y - 1:y + 2, x - 1:x + 2] = 1.0
    return DepthImage(rgb=rgb, depth=np.full((size, size), depth), hfov_deg=hfov_deg)
