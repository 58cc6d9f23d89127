"""Serialization: images, masks, drag specification documents, diagnostics.

Drag specs are JSON documents:

    {
      "image": "scene.png",
      "mask": "mask.png",                       # or inline run-length form
      "instructions": [{"handle": [x, y], "target": [x, y]}, ...],
      "mode": "stretch" | "move" | "replicate",
      "config": {"inversionSteps": 10, "optimizeStep": 7, ...}
    }

The inline mask form is {"width": W, "height": H, "runs": [...]} with
row-major run lengths alternating unmasked/masked, starting unmasked.
Mask images are 8-bit grayscale; values >= 128 count as masked. Unknown
fields anywhere are rejected with a path-like locator.

Warpage diagnostics dump: tab-separated lines, one mask point per line:
``x  y  vx  vy`` followed by ``w_i  lambda_i`` pairs per instruction when
diagnostics were computed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .config import EditConfig
from .geometry import (
    DragInstruction,
    DragSet,
    MODE_OBJECT_MOVE,
    MODE_OBJECT_REPLICATE,
    MODE_STRETCH,
)
from .pipeline import EditOutcome
from .warpage import WarpageField

MASK_THRESHOLD = 128

_MODE_ALIASES = {
    "stretch": MODE_STRETCH,
    "move": MODE_OBJECT_MOVE,
    "object-move": MODE_OBJECT_MOVE,
    "replicate": MODE_OBJECT_REPLICATE,
    "object-replicate": MODE_OBJECT_REPLICATE,
}

_CONFIG_KEYS = {
    "inversionSteps": "inversion_steps",
    "optimizeStep": "optimize_step",
    "cpEnabled": "cp_enabled",
    "cpStartStep": "cp_start_step",
    "sigma": "sigma",
    "nullFill": "null_fill",
    "objectMoveRadius": "object_move_radius",
    "seed": "seed",
    "backend": "backend",
    "downsampleFactor": "downsample_factor",
    "resampleFrom": "resample_from",
}


class SpecError(ValueError):
    """Malformed drag specification; carries (path, message) pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{p}: {m}" for p, m in errors))


def load_image(path) -> np.ndarray:
    """Decode PNG or binary PPM to an (h, w, 3) float array in [0, 1]."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P6":
        return _decode_ppm(data)
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float64) / 255.0
    except Exception as exc:
        raise ValueError(f"unsupported or corrupt image file {path}: {exc}") from exc
    return arr


def save_image(path, image: np.ndarray) -> None:
    """Write an (h, w, 3) float image as 8-bit PNG (or PPM by extension)."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=2)
    quantized = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        header = f"P6\n{quantized.shape[1]} {quantized.shape[0]}\n255\n".encode()
        path.write_bytes(header + quantized.tobytes())
        return
    Image.fromarray(quantized, mode="RGB").save(path, format="PNG")


def _decode_ppm(data: bytes) -> np.ndarray:
    # Header tokens separated by whitespace; '#' starts a comment.
    pos = 0
    tokens = []
    while len(tokens) < 4:
        if pos >= len(data):
            raise ValueError("truncated PPM header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise ValueError(f"unsupported PPM magic {tokens[0]!r}")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError(f"only maxval 255 PPM supported, got {maxval}")
    pos += 1  # single whitespace after maxval
    expected = width * height * 3
    if len(data) - pos < expected:
        raise ValueError("truncated PPM pixel data")
    pixels = np.frombuffer(data, dtype=np.uint8, count=expected, offset=pos)
    return pixels.reshape(height, width, 3).astype(np.float64) / 255.0


def load_mask(path) -> np.ndarray:
    """Grayscale mask image to boolean bitmap; >= 128 counts as masked."""
    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"))
    return gray >= MASK_THRESHOLD


def mask_from_runs(width: int, height: int, runs: list[int]) -> np.ndarray:
    if any((not isinstance(r, int)) or r < 0 for r in runs):
        raise ValueError("runs must be non-negative integers")
    total = sum(runs)
    if total != width * height:
        raise ValueError(f"runs cover {total} cells, expected {width * height}")
    flat = np.zeros(width * height, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        flat[pos : pos + run] = value
        pos += run
        value = not value
    return flat.reshape(height, width)


def mask_to_runs(bitmap: np.ndarray) -> dict:
    flat = np.asarray(bitmap, dtype=bool).reshape(-1)
    runs = []
    current = False
    count = 0
    for v in flat:
        if v == current:
            count += 1
        else:
            runs.append(count)
            current = bool(v)
            count = 1
    runs.append(count)
    return {"width": int(bitmap.shape[1]), "height": int(bitmap.shape[0]), "runs": runs}


@dataclass
class DragSpecDocument:
    """Parsed and validated edit request, paths still unresolved."""

    image: str
    mask: str | dict
    instructions: list[dict]
    mode: str = MODE_STRETCH
    config: EditConfig = field(default_factory=EditConfig)

    def drag_set(self) -> DragSet:
        return DragSet(
            tuple(
                DragInstruction(tuple(ins["handle"]), tuple(ins["target"]))
                for ins in self.instructions
            ),
            mode=self.mode,
        )

    def load_mask_bitmap(self, base_dir: Path | None = None) -> np.ndarray:
        if isinstance(self.mask, dict):
            return mask_from_runs(self.mask["width"], self.mask["height"], self.mask["runs"])
        return load_mask(_resolve(self.mask, base_dir))

    def load_image_array(self, base_dir: Path | None = None) -> np.ndarray:
        return load_image(_resolve(self.image, base_dir))

    def to_json(self) -> str:
        from dataclasses import asdict

        cfg = asdict(self.config)
        defaults = asdict(EditConfig())
        overrides = {
            camel: cfg[snake]
            for camel, snake in _CONFIG_KEYS.items()
            if cfg[snake] != defaults[snake]
        }
        doc = {
            "image": self.image,
            "mask": self.mask,
            "instructions": self.instructions,
            "mode": self.mode,
        }
        if overrides:
            doc["config"] = overrides
        return json.dumps(doc, indent=2, sort_keys=True)


def _resolve(path: str, base_dir: Path | None) -> Path:
    p = Path(path)
    if base_dir is not None and not p.is_absolute():
        return Path(base_dir) / p
    return p


def _want(obj, key, kind, errors, path, required=True, default=None):
    if key not in obj:
        if required:
            errors.append((f"{path}{key}", "missing required field"))
        return default
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        errors.append((f"{path}{key}", f"expected {kind.__name__}"))
        return default
    return value


def _parse_point(raw, errors, path):
    ok = (
        isinstance(raw, list)
        and len(raw) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
    )
    if not ok:
        errors.append((path, "expected [x, y] numeric pair"))
        return [0.0, 0.0]
    return [float(raw[0]), float(raw[1])]


def parse_drag_spec(text: str) -> DragSpecDocument:
    """Parse, validate, and default-fill a drag spec; raises SpecError with locators."""
    errors: list[tuple[str, str]] = []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError([("$", f"invalid JSON: {exc}")]) from exc
    if not isinstance(raw, dict):
        raise SpecError([("$", "top-level value must be an object")])

    allowed = {"image", "mask", "instructions", "mode", "config"}
    for key in raw:
        if key not in allowed:
            errors.append((key, "unknown field"))

    image = _want(raw, "image", str, errors, "")
    mask = raw.get("mask")
    if mask is None:
        errors.append(("mask", "missing required field"))
    elif isinstance(mask, dict):
        for key in mask:
            if key not in {"width", "height", "runs"}:
                errors.append((f"mask.{key}", "unknown field"))
        width = _want(mask, "width", int, errors, "mask.")
        height = _want(mask, "height", int, errors, "mask.")
        runs = _want(mask, "runs", list, errors, "mask.")
        if width and height and runs is not None:
            try:
                mask_from_runs(width, height, runs)
            except ValueError as exc:
                errors.append(("mask.runs", str(exc)))
    elif not isinstance(mask, str):
        errors.append(("mask", "expected file path or {width, height, runs} object"))

    mode_raw = raw.get("mode", "stretch")
    if not isinstance(mode_raw, str) or mode_raw not in _MODE_ALIASES:
        errors.append(("mode", f"unknown mode {mode_raw!r}"))
        mode = MODE_STRETCH
    else:
        mode = _MODE_ALIASES[mode_raw]

    instructions = []
    raw_instructions = raw.get("instructions")
    if not isinstance(raw_instructions, list) or not raw_instructions:
        errors.append(("instructions", "expected a non-empty array"))
    else:
        for i, ins in enumerate(raw_instructions):
            locator = f"instructions[{i}]"
            if not isinstance(ins, dict):
                errors.append((locator, "expected an object"))
                continue
            for key in ins:
                if key not in {"handle", "target"}:
                    errors.append((f"{locator}.{key}", "unknown field"))
            handle = _parse_point(ins.get("handle"), errors, f"{locator}.handle")
            target = _parse_point(ins.get("target"), errors, f"{locator}.target")
            instructions.append({"handle": handle, "target": target})

    config_kwargs = {}
    raw_config = raw.get("config", {})
    if not isinstance(raw_config, dict):
        errors.append(("config", "expected an object"))
        raw_config = {}
    for key, value in raw_config.items():
        if key not in _CONFIG_KEYS:
            errors.append((f"config.{key}", "unknown field"))
            continue
        config_kwargs[_CONFIG_KEYS[key]] = value
    try:
        config = EditConfig(**config_kwargs)
    except TypeError as exc:
        errors.append(("config", str(exc)))
        config = EditConfig()
    for problem in config.issues():
        errors.append(("config", problem))

    if mode in (MODE_OBJECT_MOVE, MODE_OBJECT_REPLICATE) and len(instructions) != 1:
        errors.append(("mode", f"object mode requires exactly one instruction, got {len(instructions)}"))

    if errors:
        raise SpecError(errors)
    return DragSpecDocument(
        image=image, mask=mask, instructions=instructions, mode=mode, config=config
    )


def dump_warpage_table(field_: WarpageField) -> str:
    """Line-delimited diagnostics table for a warpage field."""
    lines = ["# x\ty\tvx\tvy" + ("\t[w_i\tlambda_i ...]" if field_.weights is not None else "")]
    for row in range(len(field_)):
        x, y = field_.points[row]
        vx, vy = field_.vectors[row]
        cells = [str(int(x)), str(int(y)), f"{vx:.9g}", f"{vy:.9g}"]
        if field_.weights is not None:
            for w, lam in zip(field_.weights[row], field_.stretch_factors[row]):
                cells.extend([f"{w:.9g}", f"{lam:.9g}"])
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def diagnostics_record(outcome: EditOutcome) -> str:
    """One JSON object per edit, machine-readable."""
    return json.dumps(outcome.diagnostics.to_dict(), indent=2, sort_keys=True)


def write_diagnostics(path, outcome: EditOutcome) -> None:
    Path(path).write_text(diagnostics_record(outcome) + "\n")
