"""Cross-type request validation and array checking helpers.

``validate_edit_request`` collects every violation instead of stopping at
the first, so callers (CLI, HTTP API) can report them all at once. A request
that validates clean satisfies the preconditions of every downstream stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import EditConfig
from .geometry import DragSet, MaskPointSet
from .grids import LatentGrid


@dataclass(frozen=True)
class ValidationIssue:
    """One violated constraint, addressed by a path-like field locator."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class InvalidRequestError(ValueError):
    """Raised when an edit is attempted with a request that fails validation."""

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


def check_image(image, channels: int | None = None) -> np.ndarray:
    """Coerce to a float64 (h, w, c) array, rejecting junk shapes."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"image must be 2-d or 3-d, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image must be non-empty, got shape {arr.shape}")
    if channels is not None and arr.shape[2] != channels:
        raise ValueError(f"expected {channels} channels, got {arr.shape[2]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


def check_mask_bitmap(mask, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Coerce to a boolean (h, w) bitmap, optionally checking its shape."""
    bitmap = np.asarray(mask)
    if bitmap.ndim != 2:
        raise ValueError(f"mask must be 2-d, got shape {bitmap.shape}")
    bitmap = bitmap.astype(bool)
    if shape is not None and bitmap.shape != tuple(shape):
        raise ValueError(f"mask shape {bitmap.shape} does not match image {tuple(shape)}")
    return bitmap


def validate_edit_request(
    grid: LatentGrid,
    drag_set: DragSet,
    mask_points: MaskPointSet,
    config: EditConfig,
) -> list[ValidationIssue]:
    """Check all cross-type invariants; returns every violation found."""
    issues: list[ValidationIssue] = []

    if len(drag_set) < 1:
        issues.append(ValidationIssue("instructions", "at least one drag instruction required"))
    if drag_set.is_object_mode() and len(drag_set) != 1:
        issues.append(
            ValidationIssue(
                "mode",
                f"object mode requires exactly one instruction, got {len(drag_set)}",
            )
        )

    for i, ins in enumerate(drag_set.instructions):
        if not grid.in_bounds(*ins.handle):
            issues.append(
                ValidationIssue(f"instructions[{i}].handle", f"handle {ins.handle} out of grid bounds")
            )
        if not grid.in_bounds(*ins.target):
            issues.append(
                ValidationIssue(f"instructions[{i}].target", f"target {ins.target} out of grid bounds")
            )

    if len(mask_points) < 1:
        issues.append(ValidationIssue("mask", "mask has no cells"))
    else:
        pts = mask_points.points
        oob = (
            (pts[:, 0] < 0)
            | (pts[:, 0] >= grid.width)
            | (pts[:, 1] < 0)
            | (pts[:, 1] >= grid.height)
        )
        if np.any(oob):
            issues.append(
                ValidationIssue("mask", f"{int(oob.sum())} mask cells fall outside the grid")
            )

    # Stretch geometry needs every handle strictly inside the reference circle.
    if drag_set.mode == "stretch":
        for i, ins in enumerate(drag_set.instructions):
            if not mask_points.circle.strictly_contains(ins.handle):
                issues.append(
                    ValidationIssue(
                        f"instructions[{i}].handle",
                        "handle lies on or outside the mask's reference circle",
                    )
                )

    for problem in config.issues():
        issues.append(ValidationIssue("config", problem))

    return issues


def require_valid(grid, drag_set, mask_points, config) -> None:
    issues = validate_edit_request(grid, drag_set, mask_points, config)
    if issues:
        raise InvalidRequestError(issues)
