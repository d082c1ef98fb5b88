import math

import numpy as np
import pytest

from glasspath.evaluation import (
    BaselineParams,
    baseline_blend,
    compare_images,
    defocus_variance_profile,
    gradient_energy,
    psnr,
    ssim,
    to_luminance,
)
from oracles import mse_direct


# -- psnr ---------------------------------------------------------------------

def test_psnr_identical_is_infinite():
    a = np.random.default_rng(1).uniform(size=(16, 16, 3))
    assert psnr(a, a) == math.inf


def test_psnr_uniform_offset_is_exactly_20db():
    a = np.full((32, 32), 0.3)
    b = a + 0.1
    assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)


def test_psnr_matches_direct_summation_oracle():
    rng = np.random.default_rng(2)
    a = rng.uniform(size=(12, 9, 3))
    b = rng.uniform(size=(12, 9, 3))
    want = 10.0 * math.log10(1.0 / mse_direct(a, b))
    assert psnr(a, b) == pytest.approx(want, abs=1e-9)


def test_psnr_monotone_in_noise_amplitude():
    rng = np.random.default_rng(3)
    a = rng.uniform(0.2, 0.8, size=(32, 32))
    noise = rng.standard_normal(a.shape)
    values = [psnr(a, np.clip(a + amp * noise, 0, 1)) for amp in (0.01, 0.02, 0.04, 0.08, 0.16)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((4, 4)), np.zeros((5, 4)))


# -- ssim ---------------------------------------------------------------------

def test_ssim_identical_is_one():
    a = np.random.default_rng(4).uniform(size=(24, 24))
    assert ssim(a, a) == 1.0
    rgb = np.random.default_rng(5).uniform(size=(24, 24, 3))
    assert ssim(rgb, rgb) == 1.0


def test_ssim_inverted_checkerboard_is_negative():
    # 16x16 single-pixel checkerboard against its inverse, uniform 8x8 window:
    # means are exactly 0.5, covariance is -variance, so SSIM approaches -1
    idx = np.indices((16, 16)).sum(axis=0) % 2
    a = idx.astype(np.float64)
    b = 1.0 - a
    value = ssim(a, b, window="uniform8")
    # frozen from the closed form: luminance term 1, structure term
    # (2*(-0.25)+C2)/(2*0.25+C2)
    want = (2.0 * -0.25 + 0.03 ** 2) / (2.0 * 0.25 + 0.03 ** 2)
    assert value == pytest.approx(want, abs=1e-9)
    assert -1.0 <= value < 0.0


def test_ssim_constant_images_reduce_to_luminance_term():
    a = np.full((16, 16), 0.3)
    b = np.full((16, 16), 0.6)
    c1 = 0.01 ** 2
    want = (2 * 0.3 * 0.6 + c1) / (0.3 ** 2 + 0.6 ** 2 + c1)
    assert ssim(a, b, window="uniform8") == pytest.approx(want, abs=1e-9)
    assert ssim(a, b) == pytest.approx(want, abs=1e-9)  # gaussian window too


def test_ssim_symmetry():
    rng = np.random.default_rng(6)
    a = rng.uniform(size=(20, 20))
    b = rng.uniform(size=(20, 20))
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-9)


def test_ssim_rejects_small_images():
    with pytest.raises(ValueError):
        ssim(np.zeros((6, 6)), np.zeros((6, 6)))


def test_luminance_weights():
    rgb = np.zeros((2, 2, 3))
    rgb[..., 1] = 1.0
    assert to_luminance(rgb)[0, 0] == pytest.approx(0.7152)


# -- baseline_blend -----------------------------------------------------------

def test_blend_weight_zero_returns_transmission():
    rng = np.random.default_rng(7)
    t = rng.uniform(size=(16, 16, 3))
    r = rng.uniform(size=(16, 16, 3))
    out = baseline_blend(t, r, BaselineParams(blend_weight=0.0))
    assert np.array_equal(out, np.clip(t, 0, 1))


def test_blend_sigma_zero_is_plain_sum():
    rng = np.random.default_rng(8)
    t = rng.uniform(size=(16, 16, 3))
    r = rng.uniform(size=(16, 16, 3))
    p = BaselineParams(blend_weight=1.0, gaussian_sigma=0.0, reflection_scale=1.0)
    assert np.allclose(baseline_blend(t, r, p), np.clip(t + r, 0, 1))


def test_blend_impulse_kernel_normalized():
    t = np.zeros((33, 33))
    r = np.zeros((33, 33))
    r[16, 16] = 1.0
    p = BaselineParams(blend_weight=1.0, gaussian_sigma=2.0, reflection_scale=1.0)
    out = baseline_blend(t, r, p)
    assert out.sum() == pytest.approx(1.0, abs=1e-6)
    assert out[16, 16] < 1.0  # actually spread


def test_blend_linear_in_reflection_below_clipping():
    rng = np.random.default_rng(9)
    t = np.zeros((16, 16))
    r = rng.uniform(0.0, 0.4, size=(16, 16))
    p = BaselineParams(blend_weight=0.5, gaussian_sigma=1.0, reflection_scale=0.5)
    one = baseline_blend(t, r, p)
    two = baseline_blend(t, 2.0 * r, p)
    assert np.allclose(two, 2.0 * one, atol=1e-12)


def test_blend_validation():
    with pytest.raises(ValueError):
        BaselineParams(blend_weight=1.5)
    with pytest.raises(ValueError):
        baseline_blend(np.zeros((4, 4)), np.zeros((5, 5)), BaselineParams())


# -- defocus_variance_profile ---------------------------------------------------

def test_constant_image_has_zero_dispersion():
    _, dispersion = defocus_variance_profile(np.full((64, 64), 0.5), patch=16)
    assert dispersion == 0.0


def test_white_noise_profile_nearly_uniform():
    rng = np.random.default_rng(10)
    img = rng.uniform(size=(128, 128))
    patches, dispersion = defocus_variance_profile(img, patch=16)
    assert patches.shape == (8, 8)
    assert dispersion < 0.1


def test_rendered_reflection_disperses_more_than_uniform_blur():
    # spatially varying defocus vs. a single global gaussian, on a back scene
    # with a strong depth step; baseline sigma matched to the rendered-blur
    # energy so the comparison is fair
    from glasspath.geometry import DepthImage
    from glasspath.integrator import RenderMode, RenderSettings, render
    from glasspath.optics import GlassSpec, LensSpec
    from glasspath.scene import SceneParams, assemble_scene
    from glasspath.testing import checker_texture

    size = 64
    depth = np.full((size, size), 1.0)
    depth[:, size // 2:] = 6.0
    back = DepthImage(rgb=checker_texture(size, cells=24), depth=depth, hfov_deg=60.0)
    front = DepthImage(
        rgb=np.full((size, size, 3), 0.3), depth=np.full((size, size), 2.0), hfov_deg=60.0
    )
    params = SceneParams(
        glass=GlassSpec(), lens=LensSpec(aperture_radius=0.05), back_scene_distance=1.0
    )
    scene = assemble_scene(front, back, params)
    st = RenderSettings(spp=32, resolution=(size, size), seed=4, tile_size=16)
    rt = render(scene, RenderMode.REFLECTION_GLASS_RTILDE, st).rgb
    r = render(scene, RenderMode.REFLECTION_CLEAN_R, st).rgb
    crop = (slice(4, -4), slice(4, -4))
    target = gradient_energy(rt[crop])

    def baseline_at(sigma):
        p = BaselineParams(blend_weight=1.0, gaussian_sigma=sigma, reflection_scale=0.12)
        return baseline_blend(np.zeros_like(r), r, p)[crop]

    # bisect sigma so the baseline's mean blur matches the rendered one
    lo, hi = 0.05, 3.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if gradient_energy(baseline_at(mid)) > target:
            lo = mid
        else:
            hi = mid
    fake = baseline_at(0.5 * (lo + hi))
    _, disp_rendered = defocus_variance_profile(rt[crop], patch=8)
    _, disp_fake = defocus_variance_profile(fake, patch=8)
    assert disp_rendered > 2.0 * disp_fake


def test_profile_rejects_small_image():
    with pytest.raises(ValueError):
        defocus_variance_profile(np.zeros((8, 8)), patch=16)


# -- report -------------------------------------------------------------------

def test_compare_images_report():
    rng = np.random.default_rng(11)
    ref = rng.uniform(size=(16, 16, 3))
    close = np.clip(ref + 0.01 * rng.standard_normal(ref.shape), 0, 1)
    far = np.clip(ref + 0.2 * rng.standard_normal(ref.shape), 0, 1)
    report = compare_images({"close": (close, ref), "far": (far, ref)})
    assert report.per_image["close"]["psnr"] > report.per_image["far"]["psnr"]
    assert report.best_psnr_image == "close"
    assert report.best_ssim_image == "close"
    assert 0 < report.mean_ssim <= 1


def test_evaluate_directories(tmp_path):
    from glasspath import img_io

    rng = np.random.default_rng(12)
    (tmp_path / "pred").mkdir()
    (tmp_path / "gt").mkdir()
    for name in ("a.png", "b.png"):
        ref = rng.uniform(size=(16, 16, 3))
        img_io.write_png_preview(tmp_path / "gt" / name, ref)
        img_io.write_png_preview(tmp_path / "pred" / name, np.clip(ref + 0.05, 0, 1))
    from glasspath.evaluation import evaluate_directories

    report = evaluate_directories(tmp_path / "pred", tmp_path / "gt",
                                  report_path=tmp_path / "report.json")
    assert set(report.per_image) == {"a.png", "b.png"}
    assert (tmp_path / "report.json").exists()
