"""Whole-cell relocation of masked content along warpage vectors.

Each mask cell's value is copied, bit-exact, to its displaced integer
position. Targets are claimed first-writer-wins in row-major mask order;
losers and out-of-bounds targets are dropped and counted. Mask cells that
nothing landed on become null.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import LatentGrid
from .geometry import MaskPointSet
from .warpage import WarpageField


@dataclass(frozen=True)
class RelocationCounters:
    """Where the m mask values went: written + dropped_oob + dropped_occupied = m."""

    written: int
    dropped_out_of_bounds: int
    dropped_occupied: int

    @property
    def total(self) -> int:
        return self.written + self.dropped_out_of_bounds + self.dropped_occupied


@dataclass(frozen=True)
class RelocationResult:
    grid: LatentGrid
    null_cells: np.ndarray  # (n, 2) int cells, row-major order
    written_targets: dict  # (tx, ty) -> (sx, sy) source cell
    counters: RelocationCounters

    def __post_init__(self):
        cells = np.ascontiguousarray(self.null_cells)
        cells.setflags(write=False)
        object.__setattr__(self, "null_cells", cells)


def round_half_away(values: np.ndarray) -> np.ndarray:
    """Per-axis round-half-away-from-zero to integer cells."""
    values = np.asarray(values, dtype=np.float64)
    return np.where(values >= 0, np.floor(values + 0.5), np.ceil(values - 0.5)).astype(np.int64)


def relocate(grid: LatentGrid, mask_points: MaskPointSet, field: WarpageField) -> RelocationResult:
    """Apply the warpage field to the grid's mask cells.

    The input grid must be fully valued. Mask points and field rows are
    processed in the canonical row-major order of ``mask_points``, which
    fixes the occupancy tie-break deterministically.
    """
    if grid.has_nulls():
        raise ValueError("relocation requires a grid with no null cells")
    if field.points.shape != mask_points.points.shape or not np.array_equal(
        field.points, mask_points.points
    ):
        raise ValueError("warpage field must be defined on exactly the mask points")

    h, w = grid.height, grid.width
    sources = mask_points.points  # (m, 2), row-major
    targets = sources + round_half_away(field.vectors)
    m = sources.shape[0]

    in_bounds = (
        (targets[:, 0] >= 0)
        & (targets[:, 0] < w)
        & (targets[:, 1] >= 0)
        & (targets[:, 1] < h)
    )
    valid_idx = np.nonzero(in_bounds)[0]
    dropped_oob = int(m - valid_idx.size)

    flat_targets = targets[valid_idx, 1] * w + targets[valid_idx, 0]
    # First occurrence within valid_idx preserves row-major priority.
    unique_flat, first_pos = np.unique(flat_targets, return_index=True)
    winner_idx = valid_idx[first_pos]
    dropped_occupied = int(valid_idx.size - winner_idx.size)

    data = grid.mutable_data()
    flat_data = data.reshape(h * w, grid.channels)
    src_flat = sources[winner_idx, 1] * w + sources[winner_idx, 0]
    flat_data[unique_flat] = grid.data.reshape(h * w, grid.channels)[src_flat]

    written_mask = np.zeros(h * w, dtype=bool)
    written_mask[unique_flat] = True
    mask_flat = sources[:, 1] * w + sources[:, 0]
    null_flat = mask_flat[~written_mask[mask_flat]]
    null_mask = np.zeros((h, w), dtype=bool)
    null_mask.reshape(-1)[null_flat] = True

    written_targets = {
        (int(targets[i, 0]), int(targets[i, 1])): (int(sources[i, 0]), int(sources[i, 1]))
        for i in winner_idx
    }
    counters = RelocationCounters(
        written=int(winner_idx.size),
        dropped_out_of_bounds=dropped_oob,
        dropped_occupied=dropped_occupied,
    )
    null_cells = np.stack(
        [null_flat % w, null_flat // w], axis=1
    ) if null_flat.size else np.zeros((0, 2), dtype=np.int64)
    # null_flat is ascending because mask points are row-major sorted.
    return RelocationResult(
        grid=LatentGrid(data, null_mask),
        null_cells=null_cells.astype(np.int64),
        written_targets=written_targets,
        counters=counters,
    )
