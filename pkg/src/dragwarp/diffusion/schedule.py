"""Noise-retention schedule for inversion and sampling.

Betas follow the scaled-linear ramp (linear in sqrt space) from 0.00085 to
0.012 over 1000 virtual steps; cumulative products are subsampled uniformly
to the requested step count. The retention value "before" step 1 is defined
as the step-1 value itself, which makes the first inversion step and the
last sampling step exact mirrors and keeps a small positive noise budget
available at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BETA_START = 0.00085
BETA_END = 0.012
VIRTUAL_STEPS = 1000


def _virtual_alpha_bars() -> np.ndarray:
    sqrt_betas = np.linspace(np.sqrt(BETA_START), np.sqrt(BETA_END), VIRTUAL_STEPS)
    betas = sqrt_betas**2
    return np.cumprod(1.0 - betas)


@dataclass(frozen=True)
class DiffusionSchedule:
    steps: int
    alpha_bars: np.ndarray  # (steps,) strictly decreasing, each in (0, 1)

    def __post_init__(self):
        ab = np.ascontiguousarray(self.alpha_bars, dtype=np.float64)
        if ab.shape != (self.steps,):
            raise ValueError(f"expected {self.steps} retention values, got {ab.shape}")
        if not (np.all(ab > 0) and np.all(ab < 1)):
            raise ValueError("retention values must lie strictly in (0, 1)")
        if not np.all(np.diff(ab) < 0):
            raise ValueError("retention values must be strictly decreasing")
        ab.setflags(write=False)
        object.__setattr__(self, "alpha_bars", ab)

    @classmethod
    def create(cls, steps: int) -> "DiffusionSchedule":
        if not (1 <= steps <= VIRTUAL_STEPS):
            raise ValueError(f"steps must be in [1, {VIRTUAL_STEPS}], got {steps}")
        virtual = _virtual_alpha_bars()
        indices = (np.arange(1, steps + 1) * VIRTUAL_STEPS) // steps
        return cls(steps=steps, alpha_bars=virtual[indices - 1])

    def alpha_bar(self, t: int) -> float:
        """Retention at step t, 1-indexed."""
        if not (1 <= t <= self.steps):
            raise ValueError(f"step {t} outside [1, {self.steps}]")
        return float(self.alpha_bars[t - 1])

    def alpha_bar_before(self, t: int) -> float:
        """Retention at step t-1; the step-1 boundary reuses step 1's value."""
        if not (1 <= t <= self.steps):
            raise ValueError(f"step {t} outside [1, {self.steps}]")
        return float(self.alpha_bars[max(t - 2, 0)])
