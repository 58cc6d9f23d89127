"""Feature grids with optional null cells.

A grid stores one channel vector per cell plus a per-cell validity mask.
Coordinates follow image convention: origin top-left, x rightward,
y downward, integer cell centers. Arrays are indexed ``[y, x, channel]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Invalid grid construction or incompatible grid operands."""


@dataclass(frozen=True)
class LatentGrid:
    """Immutable w x h x c grid; a cell is either fully valued or null.

    ``data`` has shape (height, width, channels); ``null_mask`` has shape
    (height, width) with True marking null cells. Both arrays are made
    read-only on construction, so grids can be shared freely.
    """

    data: np.ndarray
    null_mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise GridError(f"grid data must be 2-d or 3-d, got shape {data.shape}")
        h, w, c = data.shape
        if h < 1 or w < 1 or c < 1:
            raise GridError(f"grid dimensions must be positive, got {data.shape}")
        if self.null_mask is None:
            mask = np.zeros((h, w), dtype=bool)
        else:
            mask = np.asarray(self.null_mask, dtype=bool)
            if mask.shape != (h, w):
                raise GridError(
                    f"null mask shape {mask.shape} does not match grid {(h, w)}"
                )
            mask = mask.copy()
        data = data.copy()
        data.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "null_mask", mask)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def null_count(self) -> int:
        return int(self.null_mask.sum())

    def has_nulls(self) -> bool:
        return bool(self.null_mask.any())

    def in_bounds(self, x: float, y: float) -> bool:
        """True when (x, y) lies within cell-center bounds."""
        return 0 <= x <= self.width - 1 and 0 <= y <= self.height - 1

    def value_at(self, x: int, y: int) -> np.ndarray:
        if self.null_mask[y, x]:
            raise GridError(f"cell ({x}, {y}) is null")
        return self.data[y, x]

    def is_null(self, x: int, y: int) -> bool:
        return bool(self.null_mask[y, x])

    def mutable_data(self) -> np.ndarray:
        """Writable copy of the channel data."""
        return self.data.copy()

    def with_data(self, data: np.ndarray, null_mask: np.ndarray | None = None) -> "LatentGrid":
        return LatentGrid(data, null_mask)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "LatentGrid":
        """Fully valued grid from an (h, w, c) or (h, w) array."""
        return cls(np.asarray(array, dtype=np.float64))

    @classmethod
    def full(cls, width: int, height: int, channels: int, value: float = 0.0) -> "LatentGrid":
        return cls(np.full((height, width, channels), value, dtype=np.float64))
