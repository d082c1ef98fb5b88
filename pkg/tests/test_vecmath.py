import math

import numpy as np
import pytest

from glasspath.vecmath import Ray, length, normalize, reflect, refract, vec3


def test_normalize_unit_length():
    rng = np.random.default_rng(1)
    for _ in range(100):
        v = rng.normal(size=3)
        assert abs(length(normalize(v)) - 1.0) <= 1e-6


def test_normalize_rejects_zero():
    with pytest.raises(ValueError):
        normalize(vec3(0, 0, 0))


def test_reflect_retroreflection():
    n = vec3(0, 0, 1)
    assert np.allclose(reflect(-n, n), n)


def test_reflect_45_degrees_preserves_tangential():
    n = vec3(0, 0, 1)
    d = normalize(vec3(1, 0, -1))  # 45 degrees onto the plane
    out = reflect(d, n)
    assert np.allclose(out, normalize(vec3(1, 0, 1)))
    # tangential component preserved, normal component negated
    assert out[0] == pytest.approx(d[0])
    assert out[2] == pytest.approx(-d[2])


def test_reflect_involution_and_length():
    rng = np.random.default_rng(2)
    for _ in range(200):
        d = normalize(rng.normal(size=3))
        n = normalize(rng.normal(size=3))
        twice = reflect(reflect(d, n), n)
        assert np.allclose(twice, d, atol=1e-12)
        assert abs(length(reflect(d, n)) - 1.0) <= 1e-12


def test_refract_normal_incidence_unchanged():
    d = vec3(0, 0, 1)
    n = vec3(0, 0, -1)
    for eta in (1.1, 1.6, 2.4):
        out = refract(d, n, eta)
        assert np.allclose(out, d, atol=1e-12)


def test_refract_snell_45_into_glass():
    # sin(theta_t) = sin(45)/1.6 -> theta_t = 26.23 deg
    n = vec3(0, 0, -1)
    d = normalize(vec3(math.sin(math.radians(45)), 0, math.cos(math.radians(45))))
    out = refract(d, n, 1.6)
    theta_t = math.degrees(math.asin(math.hypot(out[0], out[1])))
    assert theta_t == pytest.approx(26.23, abs=0.01)


def test_refract_total_internal_reflection():
    # inside glass at 45 deg > critical asin(1/1.6) = 38.68 deg
    n = vec3(0, 0, -1)
    d = normalize(vec3(math.sin(math.radians(45)), 0, math.cos(math.radians(45))))
    assert refract(d, n, 1.0 / 1.6) is None
    just_below = normalize(vec3(math.sin(math.radians(38.0)), 0, math.cos(math.radians(38.0))))
    assert refract(just_below, n, 1.0 / 1.6) is not None


def test_refract_round_trip_recovers_direction():
    rng = np.random.default_rng(3)
    n = vec3(0, 0, -1)
    for _ in range(200):
        theta = rng.uniform(0.0, math.radians(89.0))
        phi = rng.uniform(0.0, 2 * math.pi)
        d = vec3(math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
        inside = refract(d, n, 1.6)
        back = refract(inside, n, 1.0 / 1.6)
        assert back is not None
        assert np.allclose(back, d, atol=1e-6)


def test_ray_validation():
    with pytest.raises(ValueError):
        Ray(vec3(0, 0, 0), vec3(0, 0, 2))  # not unit
    with pytest.raises(ValueError):
        Ray(vec3(0, 0, 0), vec3(0, 0, 1), t_min=1.0, t_max=0.5)
    r = Ray(vec3(1, 2, 3), vec3(0, 0, 1))
    assert np.allclose(r.at(2.0), [1, 2, 5])
