import numpy as np
import pytest

from dragwarp.config import EditConfig
from dragwarp.geometry import (
    DragInstruction,
    DragSet,
    MODE_OBJECT_MOVE,
    build_mask_point_set,
)
from dragwarp.grids import LatentGrid
from dragwarp.validation import (
    InvalidRequestError,
    check_image,
    check_mask_bitmap,
    require_valid,
    validate_edit_request,
)


def _mask(h=16, w=16, y0=4, y1=12, x0=4, x1=12):
    bitmap = np.zeros((h, w), dtype=bool)
    bitmap[y0:y1, x0:x1] = True
    return build_mask_point_set(bitmap)


def _grid(h=16, w=16, c=3):
    return LatentGrid(np.random.default_rng(0).random((h, w, c)))


def test_valid_stretch_request_is_ok():
    ds = DragSet((DragInstruction((7, 7), (9, 9)),))
    issues = validate_edit_request(_grid(), ds, _mask(), EditConfig())
    assert issues == []


def test_handle_out_of_bounds():
    ds = DragSet((DragInstruction((-1, 0), (2, 2)),))
    issues = validate_edit_request(_grid(), ds, _mask(), EditConfig())
    assert any("handle" in i.path and "out of grid bounds" in i.message for i in issues)


def test_object_mode_requires_single_instruction():
    ds = DragSet(
        (DragInstruction((7, 7), (9, 9)), DragInstruction((5, 5), (6, 6))),
        mode=MODE_OBJECT_MOVE,
    )
    issues = validate_edit_request(_grid(), ds, _mask(), EditConfig())
    assert any("one instruction" in i.message for i in issues)


def test_all_violations_reported_not_just_first():
    ds = DragSet(
        (DragInstruction((-1, 0), (99, 99)), DragInstruction((5, 5), (6, 6))),
        mode=MODE_OBJECT_MOVE,
    )
    cfg = EditConfig(optimize_step=99, sigma=-1.0)
    issues = validate_edit_request(_grid(), ds, _mask(), cfg)
    paths = {i.path for i in issues}
    assert "instructions[0].handle" in paths
    assert "instructions[0].target" in paths
    assert "mode" in paths
    assert sum(1 for i in issues if i.path == "config") == 2


def test_handle_outside_reference_circle_rejected_for_stretch():
    # Mask in one corner, handle way across the grid but still in bounds.
    ds = DragSet((DragInstruction((15, 15), (14, 14)),))
    issues = validate_edit_request(_grid(), ds, _mask(y0=1, y1=4, x0=1, x1=4), EditConfig())
    assert any("reference circle" in i.message for i in issues)


def test_require_valid_raises_with_all_issues():
    ds = DragSet((DragInstruction((-1, 0), (2, 2)),))
    with pytest.raises(InvalidRequestError) as err:
        require_valid(_grid(), ds, _mask(), EditConfig())
    assert err.value.issues


def test_config_issue_messages():
    assert EditConfig().issues() == []
    cfg = EditConfig(optimize_step=0, cp_start_step=11, null_fill="nope", object_move_radius=0)
    msgs = "\n".join(cfg.issues())
    assert "optimize step" in msgs
    assert "cp start step" in msgs
    assert "null fill" in msgs
    assert "radius" in msgs


def test_check_image_shapes():
    arr = check_image(np.zeros((4, 5)))
    assert arr.shape == (4, 5, 1)
    with pytest.raises(ValueError, match="channels"):
        check_image(np.zeros((4, 5, 2)), channels=3)
    with pytest.raises(ValueError, match="non-finite"):
        check_image(np.full((2, 2), np.nan))


def test_check_mask_bitmap_shape_guard():
    with pytest.raises(ValueError, match="does not match"):
        check_mask_bitmap(np.zeros((3, 3)), shape=(4, 4))
    out = check_mask_bitmap(np.array([[0, 2], [1, 0]]))
    assert out.dtype == bool and out[0, 1]
