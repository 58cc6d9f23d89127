"""Filling null regions left behind by relocation.

The bilateral strategy looks up the nearest valued cell in each of the four
axis directions, then blends them with inverse-distance weights. Lookups run
against a frozen snapshot of the relocated grid, never against freshly
filled cells, so the result is independent of visiting order. Alternative
strategies (restore original, zero, random) exist for comparison runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import FILL_BNNI, FILL_ORIGINAL, FILL_RANDOM, FILL_STRATEGIES, FILL_ZERO
from .grids import LatentGrid
from .relocation import RelocationResult

DIRECTIONS = ("up", "right", "down", "left")


class NoReferencesError(ValueError):
    """All four directional scans came up empty for a cell."""


@dataclass(frozen=True)
class DirectionalReference:
    value: np.ndarray
    distance: int  # exact cell count to the nearest valued cell, >= 1


@dataclass(frozen=True)
class ReferenceSet:
    up: DirectionalReference | None = None
    right: DirectionalReference | None = None
    down: DirectionalReference | None = None
    left: DirectionalReference | None = None

    def present(self) -> list[DirectionalReference]:
        return [r for r in (self.up, self.right, self.down, self.left) if r is not None]


def find_references(grid: LatentGrid, cell: tuple[int, int]) -> ReferenceSet:
    """Scan outward from a null cell along its row and column.

    The scan crosses mask boundaries and runs to the grid border; it reads
    the grid as given (the frozen snapshot).
    """
    x, y = int(cell[0]), int(cell[1])
    if not grid.is_null(x, y):
        raise ValueError(f"cell ({x}, {y}) is not null")

    def scan(dx: int, dy: int) -> DirectionalReference | None:
        cx, cy, steps = x + dx, y + dy, 1
        while 0 <= cx < grid.width and 0 <= cy < grid.height:
            if not grid.is_null(cx, cy):
                return DirectionalReference(grid.data[cy, cx].copy(), steps)
            cx, cy, steps = cx + dx, cy + dy, steps + 1
        return None

    return ReferenceSet(up=scan(0, -1), right=scan(1, 0), down=scan(0, 1), left=scan(-1, 0))


def interpolate_point(refs: ReferenceSet) -> np.ndarray:
    """Inverse-distance blend of the present directional references."""
    present = refs.present()
    if not present:
        raise NoReferencesError("no valued reference in any direction")
    inv = np.array([1.0 / r.distance for r in present])
    weights = inv / inv.sum()
    values = np.stack([r.value for r in present])
    return weights @ values


def _directional_scan(data: np.ndarray, valued: np.ndarray):
    """Nearest valued value and distance per cell in all four directions.

    Returns (values, distances, present), shaped (4, h, w, c), (4, h, w),
    (4, h, w) with direction order matching DIRECTIONS.
    """
    h, w, c = data.shape
    values = np.zeros((4, h, w, c))
    dists = np.zeros((4, h, w))
    present = np.zeros((4, h, w), dtype=bool)

    def sweep(axis_dir: int, rows):
        # rows iterates scanlines in the direction of propagation.
        last_val = np.zeros((w, c))
        last_pos = np.full(w, -1, dtype=np.int64)
        for pos, y in rows:
            seen = last_pos >= 0
            present[axis_dir, y, seen] = True
            dists[axis_dir, y, seen] = pos - last_pos[seen]
            values[axis_dir, y, seen] = last_val[seen]
            rowv = valued[y]
            last_pos[rowv] = pos
            last_val[rowv] = data[y, rowv]

    sweep(0, ((i, i) for i in range(h)))  # up: nearest valued above
    sweep(2, ((i, y) for i, y in zip(range(h), range(h - 1, -1, -1))))  # down

    # Left/right reuse the vertical sweeps on the transposed grid.
    data_t = np.ascontiguousarray(np.swapaxes(data, 0, 1))
    valued_t = np.ascontiguousarray(valued.T)
    values_t = np.zeros((2, w, h, c))
    dists_t = np.zeros((2, w, h))
    present_t = np.zeros((2, w, h), dtype=bool)

    def sweep_t(slot: int, rows):
        last_val = np.zeros((h, c))
        last_pos = np.full(h, -1, dtype=np.int64)
        for pos, yy in rows:
            seen = last_pos >= 0
            present_t[slot, yy, seen] = True
            dists_t[slot, yy, seen] = pos - last_pos[seen]
            values_t[slot, yy, seen] = last_val[seen]
            rowv = valued_t[yy]
            last_pos[rowv] = pos
            last_val[rowv] = data_t[yy, rowv]

    sweep_t(0, ((i, i) for i in range(w)))  # left: nearest valued to the left
    sweep_t(1, ((i, x) for i, x in zip(range(w), range(w - 1, -1, -1))))  # right

    values[3] = np.swapaxes(values_t[0], 0, 1)
    dists[3] = dists_t[0].T
    present[3] = present_t[0].T
    values[1] = np.swapaxes(values_t[1], 0, 1)
    dists[1] = dists_t[1].T
    present[1] = present_t[1].T
    return values, dists, present


def bilateral_fill(grid: LatentGrid, fallback: LatentGrid) -> LatentGrid:
    """Fill every null cell from its four directional nearest neighbors.

    Cells whose entire row and column are null fall back to ``fallback``
    (the pre-relocation grid), keeping the output free of invented values.
    """
    if not grid.has_nulls():
        return grid
    values, dists, present = _directional_scan(grid.data, ~grid.null_mask)
    nulls = grid.null_mask

    inv = np.where(present, 1.0 / np.where(dists == 0, 1.0, dists), 0.0)
    total = inv.sum(axis=0)
    any_present = present.any(axis=0)
    safe_total = np.where(total == 0, 1.0, total)
    weights = inv / safe_total
    blended = np.einsum("dhw,dhwc->hwc", weights, values)

    data = grid.mutable_data()
    fill_cells = nulls & any_present
    data[fill_cells] = blended[fill_cells]
    orphan = nulls & ~any_present
    if np.any(orphan):
        data[orphan] = fallback.data[orphan]
    return LatentGrid(data)


def interpolate_grid(
    relocated: RelocationResult,
    strategy: str = FILL_BNNI,
    seed: int = 0,
    original: LatentGrid | None = None,
) -> LatentGrid:
    """Produce a fully valued grid from a relocation result.

    ``original`` (the pre-relocation grid) is required for the
    original-value strategy and for the bilateral fallback.
    """
    if strategy not in FILL_STRATEGIES:
        raise ValueError(f"unknown null fill strategy {strategy!r}")
    grid = relocated.grid
    if not grid.has_nulls():
        return LatentGrid(grid.data)

    if strategy in (FILL_BNNI, FILL_ORIGINAL) and original is None:
        raise ValueError(f"strategy {strategy!r} requires the pre-relocation grid")

    if strategy == FILL_BNNI:
        return bilateral_fill(grid, original)

    data = grid.mutable_data()
    nulls = grid.null_mask
    if strategy == FILL_ORIGINAL:
        data[nulls] = original.data[nulls]
    elif strategy == FILL_ZERO:
        data[nulls] = 0.0
    else:  # random
        rng = np.random.default_rng(seed)
        data[nulls] = rng.standard_normal((int(nulls.sum()), grid.channels))
    return LatentGrid(data)
