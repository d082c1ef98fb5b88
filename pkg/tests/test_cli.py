import json
from pathlib import Path

import numpy as np
import pytest
import yaml
from PIL import Image

from glasspath.cli import main


def _write_pair(tmp_path, size=24):
    rng = np.random.default_rng(15)
    rgb = (rng.uniform(0.1, 0.9, size=(size, size, 3)) * 255).astype(np.uint8)
    Image.fromarray(rgb).save(tmp_path / "front.png")
    Image.fromarray(rgb[::-1]).save(tmp_path / "back.png")
    np.save(tmp_path / "front_d.npy", np.full((size, size), 2.0))
    np.save(tmp_path / "back_d.npy", np.full((size, size), 1.5))


def test_render_tuple_command(tmp_path, capsys):
    _write_pair(tmp_path)
    out = tmp_path / "tuple"
    rc = main([
        "render-tuple",
        "--front", str(tmp_path / "front.png"),
        "--front-depth", str(tmp_path / "front_d.npy"),
        "--back", str(tmp_path / "back.png"),
        "--back-depth", str(tmp_path / "back_d.npy"),
        "--out", str(out),
        "--spp", "4", "--res", "16x16", "--seed", "9",
    ])
    assert rc == 0
    assert {p.name for p in out.glob("*.exr")} == {"I.exr", "T.exr", "Rtilde.exr", "R.exr"}
    assert (out / "metadata.json").exists()
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["glass"]["ior"] == 1.6


def test_dataset_validate_evaluate_commands(tmp_path):
    _write_pair(tmp_path)
    cfg = {
        "output_dir": "out",
        "count": 1,
        "seed": 5,
        "render": {"spp": 2, "resolution": [16, 16], "tile_size": 8},
        "front_images": [{"id": "f", "rgb": "front.png", "depth": "front_d.npy"}],
        "back_images": [{"id": "b", "rgb": "back.png", "depth": "back_d.npy"}],
    }
    cfg_path = tmp_path / "job.yaml"
    cfg_path.write_text(yaml.safe_dump(cfg))
    assert main(["render-dataset", "--config", str(cfg_path)]) == 0
    manifest = tmp_path / "out" / "manifest.json"
    assert main(["validate", "--manifest", str(manifest)]) == 0

    # evaluate the previews against themselves
    report = tmp_path / "report.json"
    rc = main([
        "evaluate", "--pred", str(tmp_path / "out"), "--gt", str(tmp_path / "out"),
        "--report", str(report),
    ])
    assert rc == 0
    data = json.loads(report.read_text())
    assert data["mean_ssim"] == 1.0


def test_benchmark_command(capsys):
    assert main(["benchmark", "--size", "24", "--spp", "2"]) == 0
    captured = capsys.readouterr().out
    assert "python" in captured