"""Vector math on 3-vectors (meters) used throughout the renderer.

Vectors are float64 numpy arrays of shape (3,); most functions also accept
stacked arrays of shape (..., 3) so test oracles can vectorize.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

AXIS_X = np.array([1.0, 0.0, 0.0])
AXIS_Y = np.array([0.0, 1.0, 0.0])
AXIS_Z = np.array([0.0, 0.0, 1.0])


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([float(x), float(y), float(z)])


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray | float:
    return np.sum(a * b, axis=-1)


def length(v: np.ndarray) -> np.ndarray | float:
    return np.sqrt(dot(v, v))


def normalize(v: np.ndarray) -> np.ndarray:
    n = length(v)
    if np.any(n == 0.0):
        raise ValueError("cannot normalize a zero-length vector")
    return v / np.expand_dims(n, -1) if np.ndim(v) > 1 else v / n


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.cross(a, b)


def reflect(d: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Mirror direction d about the plane with unit normal n.

    Both arguments must be unit length. Preserves length exactly up to
    floating-point rounding of the two fused expressions.
    """
    return d - 2.0 * np.expand_dims(dot(d, n), -1) * n if np.ndim(d) > 1 else d - 2.0 * dot(d, n) * n


def refract(d: np.ndarray, n: np.ndarray, eta_ratio: float) -> np.ndarray | None:
    """Refract unit direction d at a surface with unit normal n.

    eta_ratio is n_transmitted / n_incident (e.g. 1.6 entering glass from
    air). Returns the unit transmitted direction, or None under total
    internal reflection (a value, not an error). The normal may point to
    either side; it is flipped to oppose d internally.
    """
    if eta_ratio <= 0.0:
        raise ValueError("eta_ratio must be positive")
    cos_i = -float(dot(d, n))
    if cos_i < 0.0:
        n = -n
        cos_i = -cos_i
    inv_eta = 1.0 / eta_ratio
    sin2_t = inv_eta * inv_eta * (1.0 - cos_i * cos_i)
    if sin2_t > 1.0:
        return None
    cos_t = np.sqrt(1.0 - sin2_t)
    return inv_eta * d + (inv_eta * cos_i - cos_t) * n


@dataclass(frozen=True)
class Ray:
    """Parametric ray origin + t*direction, valid for t in (t_min, t_max)."""

    origin: np.ndarray
    direction: np.ndarray
    t_min: float = 1e-9
    t_max: float = np.inf

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=np.float64))
        if not self.t_min < self.t_max:
            raise ValueError(f"t_min ({self.t_min}) must be < t_max ({self.t_max})")
        if abs(length(self.direction) - 1.0) > 1e-6:
            raise ValueError("ray direction must be unit length")

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction
