"""Desk-scale drag-fidelity metric via template matching.

Correlates a known planted feature (the probe template) against the edited
image and reports how far the best match landed from the drag target.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

from .geometry import DragSet


class MetricError(ValueError):
    """Metric undefined for this input (e.g. zero-variance image)."""


def gaussian_patch(sigma: float, radius: int | None = None) -> np.ndarray:
    """Normalized 2-d Gaussian bump used both as probe and as template."""
    if radius is None:
        radius = max(1, int(np.ceil(3 * sigma)))
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2 * sigma**2))
    return g / g.max()


def normalized_cross_correlation(image: np.ndarray, template: np.ndarray) -> np.ndarray:
    """NCC map in 'same' geometry: out[y, x] scores the template centered at (x, y)."""
    image = np.asarray(image, dtype=np.float64)
    template = np.asarray(template, dtype=np.float64)
    if template.shape[0] > image.shape[0] or template.shape[1] > image.shape[1]:
        raise MetricError("template larger than image")
    t = template - template.mean()
    t_energy = float((t**2).sum())
    if t_energy == 0:
        raise MetricError("template has zero variance")

    flipped = t[::-1, ::-1]
    num = fftconvolve(image, flipped, mode="same")
    window = np.ones_like(template)
    local_sum = fftconvolve(image, window, mode="same")
    local_sq = fftconvolve(image**2, window, mode="same")
    n = template.size
    local_var = np.maximum(local_sq - local_sum**2 / n, 0.0)
    den = np.sqrt(local_var * t_energy)
    with np.errstate(divide="ignore", invalid="ignore"):
        ncc = num / den
    ncc[~np.isfinite(ncc)] = 0.0
    return ncc


def drag_fidelity(output_image: np.ndarray, drag_set: DragSet, template: np.ndarray) -> float:
    """Distance in cells from the matched-filter peak to the first drag target."""
    image = np.asarray(output_image, dtype=np.float64)
    if image.ndim == 3:
        image = image.mean(axis=2)
    if image.std() == 0:
        raise MetricError("output image has zero variance; matched filter undefined")
    ncc = normalized_cross_correlation(image, template)
    peak = np.unravel_index(int(np.argmax(ncc)), ncc.shape)
    py, px = peak
    ex, ey = drag_set.instructions[0].target
    return float(np.hypot(px - ex, py - ey))
