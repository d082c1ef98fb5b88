"""Image-quality metrics and the image-space blending baseline.

PSNR assumes images in [0,1] (data range 1). SSIM follows the standard
formulation with stabilizers C1=(k1*L)^2, C2=(k2*L)^2, k1=0.01, k2=0.03,
L=1, over either an 11x11 Gaussian window (sigma 1.5, the default) or a
uniform 8x8 window; color images are converted to luminance with Rec.709
weights (0.2126, 0.7152, 0.0722). These constants are fixed here so
reported numbers are reproducible bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter
from scipy.signal import correlate

_K1 = 0.01
_K2 = 0.03
_C1 = (_K1 * 1.0) ** 2
_C2 = (_K2 * 1.0) ** 2
_LUMA = np.array([0.2126, 0.7152, 0.0722])


def _as_image(a) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise ValueError("expected a 2-D grayscale or (H, W, C) image")
    return arr


def psnr(a, b) -> float:
    """10*log10(1/MSE) in dB; math.inf for identical images."""
    a = _as_image(a)
    b = _as_image(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def to_luminance(img: np.ndarray) -> np.ndarray:
    img = _as_image(img)
    if img.ndim == 2:
        return img
    if img.shape[2] == 3:
        return img @ _LUMA
    raise ValueError("color images must have 3 channels")


def _ssim_window(window: str):
    if window == "gaussian11":
        half = 5
        xs = np.arange(-half, half + 1)
        g = np.exp(-(xs ** 2) / (2.0 * 1.5 ** 2))
        k = np.outer(g, g)
        return k / k.sum()
    if window == "uniform8":
        return np.full((8, 8), 1.0 / 64.0)
    raise ValueError(f"unknown SSIM window {window!r}")


def ssim(a, b, window: str = "gaussian11", return_map: bool = False):
    """Mean local SSIM in [-1, 1]; identical images give exactly 1.0."""
    ya = to_luminance(a)
    yb = to_luminance(b)
    if ya.shape != yb.shape:
        raise ValueError(f"shape mismatch: {ya.shape} vs {yb.shape}")
    k = _ssim_window(window)
    if ya.shape[0] < k.shape[0] or ya.shape[1] < k.shape[1]:
        raise ValueError(f"image smaller than the {k.shape} SSIM window")

    def local_mean(x):
        # 'valid' windows only: edge pixels never mix with padding
        return correlate(x, k, mode="valid", method="direct")

    mu_a = local_mean(ya)
    mu_b = local_mean(yb)
    mu_aa = local_mean(ya * ya)
    mu_bb = local_mean(yb * yb)
    mu_ab = local_mean(ya * yb)
    var_a = mu_aa - mu_a * mu_a
    var_b = mu_bb - mu_b * mu_b
    cov = mu_ab - mu_a * mu_b
    ssim_map = ((2.0 * mu_a * mu_b + _C1) * (2.0 * cov + _C2)) / (
        (mu_a * mu_a + mu_b * mu_b + _C1) * (var_a + var_b + _C2)
    )
    value = float(ssim_map.mean())
    if return_map:
        return value, ssim_map
    return value


@dataclass(frozen=True)
class BaselineParams:
    """Image-space synthesis: I = T + blend_weight*reflection_scale*blur(R)."""

    blend_weight: float = 0.8
    gaussian_sigma: float = 2.0
    reflection_scale: float = 0.6

    def __post_init__(self):
        if not 0.0 <= self.blend_weight <= 1.0:
            raise ValueError("blend_weight must lie in [0,1]")
        if not 0.0 <= self.reflection_scale <= 1.0:
            raise ValueError("reflection_scale must lie in [0,1]")
        if self.gaussian_sigma < 0.0:
            raise ValueError("gaussian_sigma must be >= 0")


def baseline_blend(t_img, r_img, params: BaselineParams) -> np.ndarray:
    """Classic image-space mixture of a transmission and a blurred reflection.

    The Gaussian kernel is normalized (sums to 1); sigma 0 degenerates to no
    blur. Output clipped to [0, 1].
    """
    t_img = _as_image(t_img)
    r_img = _as_image(r_img)
    if t_img.shape != r_img.shape:
        raise ValueError("images must share a shape")
    if params.gaussian_sigma > 0.0:
        sigma = (params.gaussian_sigma, params.gaussian_sigma) + (0.0,) * (r_img.ndim - 2)
        blurred = gaussian_filter(r_img, sigma=sigma, mode="nearest")
    else:
        blurred = r_img
    out = t_img + params.blend_weight * params.reflection_scale * blurred
    return np.clip(out, 0.0, 1.0)


def gradient_energy(img) -> float:
    """Mean squared forward-difference gradient magnitude (sharpness proxy)."""
    y = to_luminance(img)
    gx = np.diff(y, axis=1)
    gy = np.diff(y, axis=0)
    return float((gx ** 2).mean() + (gy ** 2).mean())


def defocus_variance_profile(img, patch: int = 16):
    """Per-patch gradient energy map plus its dispersion across patches.

    Dispersion is the coefficient of variation (std/mean) of the patch map;
    a spatially uniform blur yields low dispersion, depth-varying defocus
    yields high dispersion. Constant images return dispersion 0.
    """
    y = to_luminance(img)
    h, w = y.shape
    if h < patch or w < patch:
        raise ValueError("image smaller than the patch size")
    gx = np.zeros_like(y)
    gy = np.zeros_like(y)
    gx[:, :-1] = np.diff(y, axis=1)
    gy[:-1, :] = np.diff(y, axis=0)
    energy = gx ** 2 + gy ** 2
    ph, pw = h // patch, w // patch
    cropped = energy[: ph * patch, : pw * patch]
    patches = cropped.reshape(ph, patch, pw, patch).mean(axis=(1, 3))
    mean = float(patches.mean())
    if mean <= 0.0:
        return patches, 0.0
    dispersion = float(patches.std() / mean)
    return patches, dispersion


@dataclass(frozen=True)
class MetricReport:
    per_image: dict = field(default_factory=dict)  # name -> {"psnr": .., "ssim": ..}
    mean_psnr: float = 0.0
    mean_ssim: float = 0.0
    best_psnr_image: str = ""
    best_ssim_image: str = ""

    def to_dict(self) -> dict:
        return {
            "per_image": self.per_image,
            "mean_psnr": self.mean_psnr,
            "mean_ssim": self.mean_ssim,
            "best_psnr_image": self.best_psnr_image,
            "best_ssim_image": self.best_ssim_image,
        }


def compare_images(pairs: dict[str, tuple[np.ndarray, np.ndarray]]) -> MetricReport:
    """PSNR/SSIM per named (prediction, reference) pair plus aggregates.

    Best-by-PSNR and best-by-SSIM are reported separately; they need not
    agree and no combined ranking is invented.
    """
    per_image = {}
    for name, (pred, ref) in sorted(pairs.items()):
        per_image[name] = {"psnr": psnr(pred, ref), "ssim": ssim(pred, ref)}
    if not per_image:
        raise ValueError("no image pairs to compare")
    finite = [v["psnr"] for v in per_image.values() if math.isfinite(v["psnr"])]
    mean_psnr = float(np.mean(finite)) if finite else math.inf
    mean_ssim = float(np.mean([v["ssim"] for v in per_image.values()]))
    best_psnr = max(per_image, key=lambda n: per_image[n]["psnr"])
    best_ssim = max(per_image, key=lambda n: per_image[n]["ssim"])
    return MetricReport(
        per_image=per_image,
        mean_psnr=mean_psnr,
        mean_ssim=mean_ssim,
        best_psnr_image=best_psnr,
        best_ssim_image=best_ssim,
    )


def evaluate_directories(pred_dir, gt_dir, report_path=None) -> MetricReport:
    """Match files by name across two directories and report PSNR/SSIM."""
    from . import img_io

    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)

    def load(p: Path) -> np.ndarray:
        if p.suffix == ".exr":
            return np.asarray(img_io.read_exr(p), dtype=np.float64)
        return np.asarray(img_io.load_rgb(p))

    pairs = {}
    for pred in sorted(pred_dir.iterdir()):
        if pred.suffix not in (".png", ".exr"):
            continue
        ref = gt_dir / pred.name
        if not ref.exists():
            continue
        pairs[pred.name] = (np.clip(load(pred), 0.0, 1.0), np.clip(load(ref), 0.0, 1.0))
    if not pairs:
        raise ValueError(f"no matching image names between {pred_dir} and {gt_dir}")
    report = compare_images(pairs)
    if report_path is not None:
        with open(report_path, "w") as f:
            json.dump(report.to_dict(), f, indent=1, sort_keys=True)
    return report
