"""Render the tuple dataset the trainer tests consume.

Talks to the renderer exclusively through its public surfaces: source
images on disk, a YAML job config, and the `glasspath render-dataset` CLI.
Run from the frontend directory; skips work if the manifest already exists.
"""

import pathlib
import subprocess
import sys

import numpy as np
from PIL import Image

ROOT = pathlib.Path(__file__).parent / ".fixtures"
OUT = ROOT / "out"
SIZE = 48
N_FRONT, N_BACK = 4, 3


def write_sources():
    rng = np.random.default_rng(2024)
    entries = {"front": [], "back": []}
    for kind, count in (("front", N_FRONT), ("back", N_BACK)):
        for i in range(count):
            base = rng.uniform(0.15, 0.85, size=(SIZE, SIZE, 3))
            # blocky structure so separation has something to learn
            blocks = rng.uniform(0.1, 0.9, size=(6, 6, 3))
            structured = np.kron(blocks, np.ones((8, 8, 1)))
            rgb = (0.5 * base + 0.5 * structured).clip(0, 1)
            Image.fromarray((rgb * 255).astype(np.uint8)).save(ROOT / f"{kind}{i}.png")
            depth = rng.uniform(1.2, 1.8) + rng.uniform(0.0, 1.5) * np.linspace(
                0, 1, SIZE
            )[None, :] * np.ones((SIZE, 1))
            np.save(ROOT / f"{kind}{i}_depth.npy", depth)
            entries[kind].append(
                {"id": f"{kind}{i}", "rgb": f"{kind}{i}.png", "depth": f"{kind}{i}_depth.npy"}
            )
    return entries


def main():
    if (OUT / "manifest.json").exists():
        print("fixtures already rendered")
        return 0
    ROOT.mkdir(parents=True, exist_ok=True)
    entries = write_sources()
    job = {
        "output_dir": "out",
        "count": 10,
        "seed": 404,
        "render": {"spp": 24, "resolution": [SIZE, SIZE], "tile_size": 16},
        "lens": {"focal_length": 0.055, "aperture_radius": 0.02},
        "front_images": entries["front"],
        "back_images": entries["back"],
    }
    import yaml

    (ROOT / "job.yaml").write_text(yaml.safe_dump(job))
    subprocess.run(
        ["glasspath", "render-dataset", "--config", str(ROOT / "job.yaml")], check=True
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
