"""Command line interface: render-tuple, render-dataset, validate, evaluate,
benchmark."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np


def _parse_res(text: str) -> tuple[int, int]:
    w, _, h = text.partition("x")
    return int(w), int(h)


def cmd_render_tuple(args) -> int:
    from . import img_io
    from .geometry import DepthImage
    from .integrator import RenderSettings, render_tuple
    from .scene import SceneParams, assemble_scene

    front = DepthImage(
        rgb=img_io.load_rgb(args.front),
        depth=img_io.load_depth(args.front_depth, scale=args.depth_scale),
        hfov_deg=args.hfov,
    )
    back = DepthImage(
        rgb=img_io.load_rgb(args.back),
        depth=img_io.load_depth(args.back_depth, scale=args.depth_scale),
        hfov_deg=args.hfov,
    )
    settings = RenderSettings(spp=args.spp, resolution=_parse_res(args.res), seed=args.seed)
    scene = assemble_scene(front, back, SceneParams())
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    tup = render_tuple(scene, settings, include_ttilde=args.include_ttilde,
                       n_threads=args.threads, engine_name=args.engine)
    elapsed = time.perf_counter() - t0
    scale = img_io.preview_exposure_scale(tup.i.rgb)
    for member, image in tup.images().items():
        img_io.write_exr(out_dir / f"{member}.exr", image.rgb)
        img_io.write_png_preview(out_dir / f"{member}.png", image.rgb, exposure_scale=scale)
    with open(out_dir / "metadata.json", "w") as f:
        json.dump(tup.metadata, f, indent=1, sort_keys=True)
    print(f"rendered {len(tup.images())} images to {out_dir} in {elapsed:.1f}s")
    return 0


def cmd_render_dataset(args) -> int:
    from .pipeline import load_job_config, run_dataset_job

    job = load_job_config(args.config)
    manifest = run_dataset_job(job)
    ok = sum(1 for r in manifest["tuples"] if r["status"] == "ok")
    failed = len(manifest["tuples"]) - ok
    print(f"job complete: {ok} tuples ok, {failed} failed; manifest in {job.output_dir}")
    return 0 if failed == 0 else 1


def cmd_validate(args) -> int:
    from .pipeline import validate_manifest

    ok, problems = validate_manifest(args.manifest)
    for p in problems:
        print(p)
    print("manifest OK" if ok else f"manifest has {len(problems)} problem(s)")
    return 0 if ok else 1


def cmd_evaluate(args) -> int:
    from .evaluation import evaluate_directories

    report = evaluate_directories(args.pred, args.gt, report_path=args.report)
    for name, vals in report.per_image.items():
        print(f"{name}: psnr={vals['psnr']:.3f} dB  ssim={vals['ssim']:.4f}")
    print(f"mean: psnr={report.mean_psnr:.3f} dB  ssim={report.mean_ssim:.4f}")
    print(f"best psnr: {report.best_psnr_image}  best ssim: {report.best_ssim_image}")
    if args.report:
        print(f"report written to {args.report}")
    return 0


def cmd_benchmark(args) -> int:
    from . import engine
    from .integrator import RenderMode, RenderSettings, render
    from .testing import fixture_scene

    scene = fixture_scene(size=args.size, seed=7)
    settings = RenderSettings(
        spp=args.spp, resolution=(args.size, args.size), seed=11, tile_size=16
    )
    engines = ["python"]
    if engine.HAVE_COMPILED:
        engines.insert(0, "compiled")
    results = {}
    for name in engines:
        t0 = time.perf_counter()
        img = render(scene, RenderMode.INPUT_I, settings, engine_name=name)
        results[name] = (time.perf_counter() - t0, img.rgb)
        print(f"{name:>9}: {results[name][0]:8.3f}s "
              f"({args.size}x{args.size}, {args.spp} spp, mode I)")
    if len(results) == 2:
        identical = np.array_equal(results["compiled"][1], results["python"][1])
        speedup = results["python"][0] / results["compiled"][0]
        print(f"speedup: {speedup:.1f}x; outputs bit-identical: {identical}")
        if not identical:
            return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="glasspath", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render-tuple", help="render one tuple from an RGB-D pair")
    p.add_argument("--front", required=True, help="front scene RGB image")
    p.add_argument("--front-depth", required=True, help="front depth raster (.npy/.png/.tiff)")
    p.add_argument("--back", required=True, help="back scene RGB image")
    p.add_argument("--back-depth", required=True, help="back depth raster")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--spp", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--res", default="256x256", help="WxH")
    p.add_argument("--include-ttilde", action="store_true")
    p.add_argument("--depth-scale", type=float, default=1.0)
    p.add_argument("--hfov", type=float, default=60.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--engine", default="auto", choices=["auto", "compiled", "python"])
    p.set_defaults(func=cmd_render_tuple)

    p = sub.add_parser("render-dataset", help="run a dataset job from a YAML config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_render_dataset)

    p = sub.add_parser("validate", help="verify a job manifest against its files")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("evaluate", help="PSNR/SSIM between two image directories")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", default=None, help="write a JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="compare the compiled and pure-Python engines")
    p.add_argument("--size", type=int, default=48)
    p.add_argument("--spp", type=int, default=8)
    p.set_defaults(func=cmd_benchmark)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
