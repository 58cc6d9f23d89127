import numpy as np
import pytest

from dragwarp.geometry import DragInstruction, DragSet
from dragwarp.metrics import (
    MetricError,
    drag_fidelity,
    gaussian_patch,
    normalized_cross_correlation,
)


def plant(image, template, cx, cy, amp=1.0):
    r = template.shape[0] // 2
    image[cy - r : cy + r + 1, cx - r : cx + r + 1] += amp * template
    return image


def test_gaussian_patch_shape_and_peak():
    t = gaussian_patch(2.0)
    assert t.shape == (13, 13)
    assert t[6, 6] == 1.0
    assert t[0, 0] < 0.02


def test_ncc_peak_at_planted_feature():
    rng = np.random.default_rng(0)
    img = 0.05 * rng.standard_normal((64, 64))
    t = gaussian_patch(2.0)
    plant(img, t, 41, 23)
    ncc = normalized_cross_correlation(img, t)
    peak = np.unravel_index(np.argmax(ncc), ncc.shape)
    assert peak == (23, 41)
    assert ncc[peak] > 0.9


def test_drag_fidelity_exact_hit():
    img = np.zeros((64, 64, 3))
    t = gaussian_patch(2.0)
    for ch in range(3):
        plant(img[:, :, ch], t, 30, 40)
    ds = DragSet((DragInstruction((10, 10), (30, 40)),))
    assert drag_fidelity(img, ds, t) == pytest.approx(0.0)


def test_drag_fidelity_offset_by_construction():
    img = np.zeros((64, 64, 3))
    t = gaussian_patch(2.0)
    for ch in range(3):
        plant(img[:, :, ch], t, 32, 40)
    ds = DragSet((DragInstruction((10, 10), (30, 40)),))
    assert drag_fidelity(img, ds, t) == pytest.approx(2.0)


def test_drag_fidelity_flat_image_errors():
    ds = DragSet((DragInstruction((1, 1), (2, 2)),))
    with pytest.raises(MetricError, match="zero variance"):
        drag_fidelity(np.full((32, 32, 3), 0.5), ds, gaussian_patch(2.0))


def test_ncc_template_guards():
    with pytest.raises(MetricError, match="larger than image"):
        normalized_cross_correlation(np.zeros((4, 4)), np.zeros((8, 8)))
    with pytest.raises(MetricError, match="zero variance"):
        normalized_cross_correlation(np.random.default_rng(0).random((16, 16)), np.ones((3, 3)))
