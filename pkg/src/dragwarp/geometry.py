"""Drag instructions, mask point sets, and the reference circle.

Points are (x, y) pairs in cell units. Handle and target coordinates are
real valued (users click sub-pixel); mask points are integer cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MODE_STRETCH = "stretch"
MODE_OBJECT_MOVE = "object-move"
MODE_OBJECT_REPLICATE = "object-replicate"
MODES = (MODE_STRETCH, MODE_OBJECT_MOVE, MODE_OBJECT_REPLICATE)

# Degenerate masks (single cell, zero-diagonal rect) get this radius so the
# stretch geometry always has a positive reference circle.
MIN_CIRCLE_RADIUS = 0.5


class MaskError(ValueError):
    """Raised for empty or out-of-bounds mask bitmaps."""


@dataclass(frozen=True)
class DragInstruction:
    """One drag: move content at ``handle`` toward ``target``."""

    handle: tuple[float, float]
    target: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "handle", (float(self.handle[0]), float(self.handle[1])))
        object.__setattr__(self, "target", (float(self.target[0]), float(self.target[1])))

    @property
    def vector(self) -> np.ndarray:
        """Displacement target - handle."""
        return np.array(
            [self.target[0] - self.handle[0], self.target[1] - self.handle[1]],
            dtype=np.float64,
        )

    def is_noop(self) -> bool:
        return self.handle == self.target


@dataclass(frozen=True)
class DragSet:
    """Ordered drag instructions plus the edit mode.

    Object modes express uniform translation of the masked region and are
    only meaningful with a single instruction.
    """

    instructions: tuple[DragInstruction, ...]
    mode: str = MODE_STRETCH

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.mode not in MODES:
            raise ValueError(f"unknown drag mode {self.mode!r}; expected one of {MODES}")

    def __len__(self) -> int:
        return len(self.instructions)

    @property
    def handles(self) -> np.ndarray:
        """(k, 2) array of handle points."""
        return np.array([ins.handle for ins in self.instructions], dtype=np.float64)

    @property
    def vectors(self) -> np.ndarray:
        """(k, 2) array of displacement vectors."""
        return np.array([ins.vector for ins in self.instructions], dtype=np.float64)

    def is_object_mode(self) -> bool:
        return self.mode in (MODE_OBJECT_MOVE, MODE_OBJECT_REPLICATE)


@dataclass(frozen=True)
class ReferenceCircle:
    """Circle on which warpage vanishes: circumscribes the mask's bounding rect."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError(f"reference circle radius must be positive, got {self.radius}")

    def contains(self, point, tol: float = 1e-9) -> bool:
        dx = point[0] - self.center[0]
        dy = point[1] - self.center[1]
        return float(np.hypot(dx, dy)) <= self.radius + tol

    def strictly_contains(self, point, tol: float = 1e-12) -> bool:
        dx = point[0] - self.center[0]
        dy = point[1] - self.center[1]
        return float(np.hypot(dx, dy)) < self.radius - tol


@dataclass(frozen=True)
class MaskPointSet:
    """Editable cells in canonical row-major order plus derived geometry.

    ``points`` is an (m, 2) integer array of (x, y) cells sorted by y then x,
    so every consumer sees the same deterministic order no matter how the
    source bitmap was scanned.
    """

    points: np.ndarray
    bounding_rect: tuple[int, int, int, int]  # xmin, ymin, xmax, ymax
    circle: ReferenceCircle

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_bitmap(self, width: int, height: int) -> np.ndarray:
        bitmap = np.zeros((height, width), dtype=bool)
        bitmap[self.points[:, 1], self.points[:, 0]] = True
        return bitmap

    def contains_cell(self, x: int, y: int) -> bool:
        xmin, ymin, xmax, ymax = self.bounding_rect
        if not (xmin <= x <= xmax and ymin <= y <= ymax):
            return False
        return bool(np.any((self.points[:, 0] == x) & (self.points[:, 1] == y)))


def build_mask_point_set(mask_bitmap: np.ndarray) -> MaskPointSet:
    """Collect mask cells and construct the reference circle.

    The circle is centered on the bounding rectangle's center with radius
    half the rectangle's diagonal, floored at MIN_CIRCLE_RADIUS for
    degenerate rectangles.
    """
    bitmap = np.asarray(mask_bitmap, dtype=bool)
    if bitmap.ndim != 2:
        raise MaskError(f"mask bitmap must be 2-d, got shape {bitmap.shape}")
    ys, xs = np.nonzero(bitmap)
    if xs.size == 0:
        raise MaskError("mask is empty: at least one cell must be set")
    # np.nonzero scans row-major, which is already (y, x) ascending.
    points = np.stack([xs, ys], axis=1).astype(np.int64)
    xmin, xmax = int(xs.min()), int(xs.max())
    ymin, ymax = int(ys.min()), int(ys.max())
    center = ((xmin + xmax) / 2.0, (ymin + ymax) / 2.0)
    diag = float(np.hypot(xmax - xmin, ymax - ymin))
    radius = max(diag / 2.0, MIN_CIRCLE_RADIUS)
    circle = ReferenceCircle(center, radius)
    return MaskPointSet(points=points, bounding_rect=(xmin, ymin, xmax, ymax), circle=circle)
