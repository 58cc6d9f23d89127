import numpy as np
import pytest

from dragwarp.geometry import (
    DragInstruction,
    DragSet,
    MaskError,
    MODE_OBJECT_MOVE,
    build_mask_point_set,
)


def test_single_cell_mask_gets_floored_radius():
    bitmap = np.zeros((8, 8), dtype=bool)
    bitmap[3, 3] = True
    mps = build_mask_point_set(bitmap)
    assert mps.circle.center == (3.0, 3.0)
    assert mps.circle.radius == 0.5
    assert len(mps) == 1


def test_full_4x4_mask_circle():
    mps = build_mask_point_set(np.ones((4, 4), dtype=bool))
    assert mps.circle.center == (1.5, 1.5)
    assert mps.circle.radius == pytest.approx(0.5 * np.sqrt(9 + 9), abs=1e-12)
    assert mps.bounding_rect == (0, 0, 3, 3)


def test_rect_mask_circle():
    bitmap = np.zeros((10, 10), dtype=bool)
    bitmap[1:6, 2:7] = True  # x in [2,6], y in [1,5]
    mps = build_mask_point_set(bitmap)
    assert mps.circle.center == (4.0, 3.0)
    assert mps.circle.radius == pytest.approx(0.5 * np.sqrt(16 + 16), abs=1e-12)


def test_empty_mask_rejected():
    with pytest.raises(MaskError, match="empty"):
        build_mask_point_set(np.zeros((4, 4), dtype=bool))


def test_points_are_row_major_sorted():
    rng = np.random.default_rng(7)
    bitmap = rng.random((12, 9)) < 0.4
    bitmap[0, 0] = True
    mps = build_mask_point_set(bitmap)
    order = np.lexsort((mps.points[:, 0], mps.points[:, 1]))
    assert np.array_equal(order, np.arange(len(mps)))


def test_reference_circle_contains_every_mask_point():
    rng = np.random.default_rng(11)
    for _ in range(50):
        bitmap = rng.random((16, 20)) < 0.3
        if not bitmap.any():
            continue
        mps = build_mask_point_set(bitmap)
        cx, cy = mps.circle.center
        d = np.hypot(mps.points[:, 0] - cx, mps.points[:, 1] - cy)
        assert np.all(d <= mps.circle.radius + 1e-9)


def test_build_is_deterministic():
    rng = np.random.default_rng(3)
    bitmap = rng.random((9, 9)) < 0.5
    bitmap[4, 4] = True
    a = build_mask_point_set(bitmap)
    b = build_mask_point_set(bitmap.copy(order="F"))
    assert np.array_equal(a.points, b.points)
    assert a.circle == b.circle


def test_drag_instruction_vector_and_noop():
    ins = DragInstruction((1.0, 2.0), (4.0, 0.0))
    assert np.allclose(ins.vector, [3.0, -2.0])
    assert not ins.is_noop()
    assert DragInstruction((1, 1), (1, 1)).is_noop()


def test_drag_set_mode_checked():
    with pytest.raises(ValueError, match="unknown drag mode"):
        DragSet((DragInstruction((0, 0), (1, 1)),), mode="sideways")
    ds = DragSet((DragInstruction((0, 0), (1, 1)),), mode=MODE_OBJECT_MOVE)
    assert ds.is_object_mode()
