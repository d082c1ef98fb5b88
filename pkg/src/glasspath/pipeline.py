"""Dataset jobs: batch tuple rendering, manifests with content digests,
resume, and validation.

A job is described by a YAML config whose sections mirror GlassSpec /
LensSpec / RenderSettings field names exactly. The manifest is JSON; every
output file is listed with its sha256, which makes jobs resumable (tuples
whose outputs verify are skipped) and manifests checkable both ways.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import img_io
from .geometry import DepthImage
from .integrator import ImageTuple, RenderSettings, render_tuple
from .optics import GlassSpec, LensSpec
from .sampling import splitmix64
from .scene import SceneParams, assemble_scene, sample_pairs, scale_depth

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class ImageSource:
    id: str
    rgb: str
    depth: str
    hfov_deg: float = 60.0
    depth_scale: float | None = None
    category: str | None = None


@dataclass(frozen=True)
class DatasetJob:
    front_images: tuple[ImageSource, ...]
    back_images: tuple[ImageSource, ...]
    seed: int
    count: int
    output_dir: str
    settings: RenderSettings = field(default_factory=RenderSettings)
    scene_params: SceneParams = field(default_factory=SceneParams)
    include_ttilde: bool = False
    n_threads: int = 1
    parallel_tuples: int = 1
    engine: str = "auto"
    depth_scale_table: dict = field(default_factory=dict)
    exr_compression: str = "none"

    def __post_init__(self):
        total = len(self.front_images) * len(self.back_images)
        if self.count > total:
            raise ValueError(f"count {self.count} exceeds the {total} distinct pairs available")


def load_job_config(path) -> DatasetJob:
    with open(path) as f:
        cfg = yaml.safe_load(f)
    base = Path(path).parent

    def sources(entries):
        out = []
        for e in entries:
            out.append(ImageSource(
                id=str(e["id"]),
                rgb=str(base / e["rgb"]),
                depth=str(base / e["depth"]),
                hfov_deg=float(e.get("hfov_deg", 60.0)),
                depth_scale=e.get("depth_scale"),
                category=e.get("category"),
            ))
        return tuple(out)

    render_cfg = cfg.get("render", {})
    settings = RenderSettings(
        spp=int(render_cfg.get("spp", 256)),
        resolution=tuple(render_cfg.get("resolution", (256, 256))),
        max_path_depth=int(render_cfg.get("max_path_depth", 8)),
        tile_size=int(render_cfg.get("tile_size", 32)),
        max_orders=int(render_cfg.get("max_orders", 4)),
    )
    glass_cfg = cfg.get("glass", {})
    glass = GlassSpec(
        thickness=float(glass_cfg.get("thickness", 0.010)),
        ior=float(glass_cfg.get("ior", 1.6)),
        absorption=tuple(glass_cfg.get("absorption", (9.0, 7.0, 5.0))),
        distance_to_camera=float(glass_cfg.get("distance_to_camera", 0.30)),
    )
    lens_cfg = cfg.get("lens", {})
    lens = LensSpec(
        focal_length=float(lens_cfg.get("focal_length", 0.055)),
        aperture_radius=float(lens_cfg.get("aperture_radius", 0.00893)),
    )
    scene_cfg = cfg.get("scene", {})
    scene_params = SceneParams(
        glass=glass,
        lens=lens,
        back_scene_distance=float(scene_cfg.get("back_scene_distance", 1.5)),
        split_threshold=float(scene_cfg.get("split_threshold", 0.5)),
    )
    out_dir = cfg["output_dir"]
    if not os.path.isabs(out_dir):
        out_dir = str(base / out_dir)
    return DatasetJob(
        front_images=sources(cfg["front_images"]),
        back_images=sources(cfg["back_images"]),
        seed=int(cfg.get("seed", 0)),
        count=int(cfg["count"]),
        output_dir=out_dir,
        settings=settings,
        scene_params=scene_params,
        include_ttilde=bool(cfg.get("include_ttilde", False)),
        n_threads=int(cfg.get("n_threads", 1)),
        parallel_tuples=int(cfg.get("parallel_tuples", 1)),
        engine=str(cfg.get("engine", "auto")),
        depth_scale_table={k: float(v) for k, v in (cfg.get("depth_scale_table") or {}).items()},
        exr_compression=str(cfg.get("exr_compression", "none")),
    )


def load_source(src: ImageSource, table: dict) -> DepthImage:
    rgb = img_io.load_rgb(src.rgb) if not src.rgb.endswith(".npy") else np.load(src.rgb)
    depth = img_io.load_depth(src.depth, scale=src.depth_scale or 1.0)
    if src.category is not None:
        depth = scale_depth(src.category, depth, table)
    return DepthImage(rgb=rgb, depth=depth, hfov_deg=src.hfov_deg)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _job_record(job: DatasetJob) -> dict:
    g = job.scene_params.glass
    lens = job.scene_params.lens
    s = job.settings
    return {
        "seed": job.seed,
        "count": job.count,
        "include_ttilde": job.include_ttilde,
        "render": {
            "spp": s.spp, "resolution": list(s.resolution),
            "max_path_depth": s.max_path_depth, "tile_size": s.tile_size,
            "max_orders": s.max_orders,
        },
        "glass": {
            "thickness": g.thickness, "ior": g.ior,
            "absorption": list(g.absorption),
            "distance_to_camera": g.distance_to_camera,
        },
        "lens": {
            "focal_length": lens.focal_length,
            "aperture_radius": lens.aperture_radius,
        },
        "scene": {
            "back_scene_distance": job.scene_params.back_scene_distance,
            "split_threshold": job.scene_params.split_threshold,
        },
        "exr_compression": job.exr_compression,
    }


def _write_manifest(path: Path, data: dict) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as f:
        json.dump(data, f, indent=1, sort_keys=True)
    os.replace(tmp, path)


def _tuple_verifies(record: dict, out_dir: Path) -> bool:
    if record.get("status") != "ok":
        return False
    for rel, digest in record.get("files", {}).items():
        p = out_dir / rel
        if not p.exists() or sha256_file(p) != digest:
            return False
    return True


def _render_one(job: DatasetJob, index: int, front: DepthImage, back: DepthImage,
                front_id: str, back_id: str) -> dict:
    from dataclasses import replace

    tuple_seed = splitmix64(splitmix64(job.seed & ((1 << 64) - 1)) ^ (index + 1))
    settings = replace(job.settings, seed=tuple_seed)
    t0 = time.perf_counter()
    scene = assemble_scene(front, back, job.scene_params)
    scene.meta.update({"front_id": front_id, "back_id": back_id})
    t1 = time.perf_counter()
    tup = render_tuple(
        scene, settings, include_ttilde=job.include_ttilde,
        n_threads=job.n_threads, engine_name=job.engine,
    )
    t2 = time.perf_counter()
    out_dir = Path(job.output_dir)
    scale = img_io.preview_exposure_scale(tup.i.rgb)
    files: dict[str, str] = {}
    for member, image in tup.images().items():
        exr_rel = f"{index:05d}_{member}.exr"
        png_rel = f"{index:05d}_{member}.png"
        img_io.write_exr(out_dir / exr_rel, image.rgb, compression=job.exr_compression)
        img_io.write_png_preview(out_dir / png_rel, image.rgb, exposure_scale=scale)
        files[exr_rel] = sha256_file(out_dir / exr_rel)
        files[png_rel] = sha256_file(out_dir / png_rel)
    return {
        "index": index,
        "front_id": front_id,
        "back_id": back_id,
        "seed": tuple_seed,
        "status": "ok",
        "error": None,
        "files": files,
        "preview_scale": scale,
        "metadata": tup.metadata,
        "timings": {"assemble_s": t1 - t0, "render_s": t2 - t1},
    }


def run_dataset_job(job: DatasetJob) -> dict:
    """Render every tuple of the job; returns the manifest dict.

    Resumable: tuples whose recorded outputs still verify are skipped.
    Per-tuple failures are recorded and the job continues.
    """
    out_dir = Path(job.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / MANIFEST_NAME

    previous: dict[int, dict] = {}
    if manifest_path.exists():
        with open(manifest_path) as f:
            for rec in json.load(f).get("tuples", []):
                previous[rec["index"]] = rec

    pairs = sample_pairs(
        [s.id for s in job.front_images], [s.id for s in job.back_images], job.seed, job.count
    )
    front_by_id = {s.id: s for s in job.front_images}
    back_by_id = {s.id: s for s in job.back_images}
    image_cache: dict[str, DepthImage] = {}

    def cached(src: ImageSource) -> DepthImage:
        if src.id not in image_cache:
            image_cache[src.id] = load_source(src, job.depth_scale_table)
        return image_cache[src.id]

    manifest = {"version": 1, "job": _job_record(job), "tuples": []}
    records: dict[int, dict] = {}

    def finish(record: dict) -> None:
        records[record["index"]] = record
        manifest["tuples"] = [records[i] for i in sorted(records)]
        _write_manifest(manifest_path, manifest)

    todo = []
    for index, (front_id, back_id) in enumerate(pairs):
        prior = previous.get(index)
        if prior is not None and prior.get("front_id") == front_id \
                and prior.get("back_id") == back_id and _tuple_verifies(prior, out_dir):
            prior["resumed"] = True
            finish(prior)
            continue
        todo.append((index, front_id, back_id))

    def work(item):
        index, front_id, back_id = item
        try:
            return _render_one(job, index, cached(front_by_id[front_id]),
                               cached(back_by_id[back_id]), front_id, back_id)
        except Exception as exc:  # per-tuple failure: record, keep going
            return {
                "index": index, "front_id": front_id, "back_id": back_id,
                "status": "failed", "error": f"{type(exc).__name__}: {exc}",
                "files": {},
            }

    if job.parallel_tuples > 1:
        # images are preloaded on the main thread so the cache stays single-writer
        for item in todo:
            cached(front_by_id[item[1]])
            cached(back_by_id[item[2]])
        with ThreadPoolExecutor(max_workers=job.parallel_tuples) as pool:
            futures = [pool.submit(work, item) for item in todo]
            for fut in as_completed(futures):
                finish(fut.result())
    else:
        for item in todo:
            finish(work(item))
    return manifest


def validate_manifest(manifest_path) -> tuple[bool, list[str]]:
    """Check manifest/file-system agreement in both directions."""
    manifest_path = Path(manifest_path)
    out_dir = manifest_path.parent
    problems: list[str] = []
    with open(manifest_path) as f:
        manifest = json.load(f)
    referenced = set()
    for rec in manifest.get("tuples", []):
        for rel, digest in rec.get("files", {}).items():
            referenced.add(rel)
            p = out_dir / rel
            if not p.exists():
                problems.append(f"missing file: {rel}")
            elif sha256_file(p) != digest:
                problems.append(f"digest mismatch: {rel}")
    on_disk = {
        str(p.relative_to(out_dir))
        for p in out_dir.rglob("*")
        if p.is_file() and p.name != MANIFEST_NAME
    }
    for rel in sorted(on_disk - referenced):
        problems.append(f"unreferenced file: {rel}")
    return (not problems), problems
