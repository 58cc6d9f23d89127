import numpy as np
import pytest

from dragwarp.diffusion.schedule import (
    BETA_END,
    BETA_START,
    VIRTUAL_STEPS,
    DiffusionSchedule,
    _virtual_alpha_bars,
)


def test_virtual_curve_endpoints():
    virtual = _virtual_alpha_bars()
    assert virtual.shape == (VIRTUAL_STEPS,)
    assert virtual[0] == pytest.approx(1.0 - BETA_START, abs=1e-15)
    # Final retention is tiny but positive.
    assert 0 < virtual[-1] < 0.01


def test_subsampling_is_uniform_tail_anchored():
    sched = DiffusionSchedule.create(10)
    virtual = _virtual_alpha_bars()
    expected = virtual[np.arange(1, 11) * 100 - 1]
    assert np.array_equal(sched.alpha_bars, expected)


def test_monotone_strictly_decreasing_in_unit_interval():
    for steps in (1, 2, 7, 10, 50, 1000):
        sched = DiffusionSchedule.create(steps)
        ab = sched.alpha_bars
        assert ab.shape == (steps,)
        assert np.all(ab > 0) and np.all(ab < 1)
        assert np.all(np.diff(ab) < 0) or steps == 1


def test_boundary_alpha_before_step_one():
    sched = DiffusionSchedule.create(10)
    assert sched.alpha_bar_before(1) == sched.alpha_bar(1)
    assert sched.alpha_bar_before(2) == sched.alpha_bar(1)
    assert sched.alpha_bar_before(10) == sched.alpha_bar(9)


def test_step_bounds_checked():
    sched = DiffusionSchedule.create(4)
    with pytest.raises(ValueError):
        sched.alpha_bar(0)
    with pytest.raises(ValueError):
        sched.alpha_bar(5)
    with pytest.raises(ValueError):
        DiffusionSchedule.create(0)
    with pytest.raises(ValueError):
        DiffusionSchedule.create(1001)


def test_rejects_non_monotone_values():
    with pytest.raises(ValueError, match="strictly decreasing"):
        DiffusionSchedule(steps=3, alpha_bars=np.array([0.5, 0.6, 0.4]))
    with pytest.raises(ValueError, match="strictly in"):
        DiffusionSchedule(steps=2, alpha_bars=np.array([1.0, 0.5]))
