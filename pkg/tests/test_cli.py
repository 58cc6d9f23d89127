import json

import numpy as np
import pytest
from PIL import Image

from dragwarp import io as dio
from dragwarp.cli import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, run


@pytest.fixture
def workspace(tmp_path):
    rng = np.random.default_rng(0)
    image = (rng.random((48, 48, 3)) * 255).astype(np.uint8)
    Image.fromarray(image).save(tmp_path / "scene.png")

    mask = np.zeros((48, 48), dtype=np.uint8)
    mask[10:36, 10:36] = 255
    Image.fromarray(mask, mode="L").save(tmp_path / "mask.png")

    spec = {
        "image": "scene.png",
        "mask": "mask.png",
        "instructions": [{"handle": [20, 20], "target": [28, 24]}],
    }
    (tmp_path / "edit.json").write_text(json.dumps(spec))
    return tmp_path


def test_valid_spec_exits_zero_and_writes_output(workspace, capsys):
    out = workspace / "result.png"
    code = run(["--spec", str(workspace / "edit.json"), "--out", str(out)])
    assert code == EXIT_OK
    assert out.exists()
    assert dio.load_image(out).shape == (48, 48, 3)


def test_missing_spec_flag_is_usage_error(capsys):
    code = run(["--out", "x.png"])
    assert code == EXIT_USAGE
    captured = capsys.readouterr()
    assert "usage" in captured.err.lower()


def test_unknown_flag_is_usage_error():
    assert run(["--spec", "a", "--out", "b", "--frobnicate"]) == EXIT_USAGE


def test_empty_mask_is_validation_error(workspace, capsys):
    Image.fromarray(np.zeros((48, 48), dtype=np.uint8), mode="L").save(workspace / "mask.png")
    code = run(["--spec", str(workspace / "edit.json"), "--out", str(workspace / "r.png")])
    assert code == EXIT_VALIDATION
    assert "mask" in capsys.readouterr().err


def test_malformed_spec_is_validation_error(workspace, capsys):
    (workspace / "edit.json").write_text('{"image": "scene.png"}')
    code = run(["--spec", str(workspace / "edit.json"), "--out", str(workspace / "r.png")])
    assert code == EXIT_VALIDATION
    err = capsys.readouterr().err
    assert "mask" in err and "instructions" in err


def test_missing_spec_file_is_validation_error(workspace):
    code = run(["--spec", str(workspace / "nope.json"), "--out", str(workspace / "r.png")])
    assert code == EXIT_VALIDATION


def test_same_seed_byte_identical_outputs(workspace):
    out1 = workspace / "a.png"
    out2 = workspace / "b.png"
    spec = str(workspace / "edit.json")
    assert run(["--spec", spec, "--out", str(out1), "--seed", "9"]) == EXIT_OK
    assert run(["--spec", spec, "--out", str(out2), "--seed", "9"]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_diagnostics_file_written(workspace):
    diag = workspace / "diag.json"
    code = run([
        "--spec", str(workspace / "edit.json"),
        "--out", str(workspace / "r.png"),
        "--diag", str(diag),
    ])
    assert code == EXIT_OK
    record = json.loads(diag.read_text())
    assert record["optimization_passes"] == 1
    assert record["backend"] == "pixel"
    assert "stage_ms" in record


def test_backend_override_toy_latent(workspace):
    out = workspace / "latent.png"
    code = run([
        "--spec", str(workspace / "edit.json"),
        "--out", str(out),
        "--backend", "toy-latent",
    ])
    assert code == EXIT_OK
    assert out.exists()
