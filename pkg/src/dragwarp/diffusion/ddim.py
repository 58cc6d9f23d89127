"""Deterministic inversion and sampling over the retention schedule.

Inversion maps a clean latent step by step onto its noisy trajectory while
recording attention key/value pairs. Sampling walks back down, optionally
replacing self-attention key/value with the recorded pairs from the same
step (the consistency-preserving mode), optionally adding seeded Gaussian
noise when the noise level is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grids import LatentGrid
from .attention import AttentionKVCache
from .predictor import KV_INJECT, KV_RECORD, KV_SELF
from .schedule import DiffusionSchedule


@dataclass(frozen=True)
class InversionResult:
    """Noisy trajectory z_1..z_T plus the recorded key/value cache."""

    trajectory: tuple[LatentGrid, ...]
    cache: AttentionKVCache

    def at(self, t: int) -> LatentGrid:
        """Latent after inversion step t (1-indexed)."""
        if not (1 <= t <= len(self.trajectory)):
            raise ValueError(f"step {t} outside [1, {len(self.trajectory)}]")
        return self.trajectory[t - 1]


def invert(
    z0: LatentGrid,
    schedule: DiffusionSchedule,
    predictor,
    cache: AttentionKVCache | None = None,
    record_kv: bool = True,
) -> InversionResult:
    """Noise the clean latent up the full schedule.

    Step t computes eps from the current latent and blends it per the
    retention ratio between steps t-1 and t.
    """
    if z0.has_nulls():
        raise ValueError("inversion requires a latent with no null cells")
    if cache is None:
        cache = AttentionKVCache()
    z = z0.data
    trajectory = []
    for t in range(1, schedule.steps + 1):
        eps = predictor.predict(z, t, kv_mode=KV_RECORD if record_kv else KV_SELF, cache=cache)
        if eps.shape != z.shape:
            raise ValueError(f"predictor returned shape {eps.shape} for latent {z.shape}")
        ab = schedule.alpha_bar(t)
        ab_prev = schedule.alpha_bar_before(t)
        z = np.sqrt(ab / ab_prev) * (z - np.sqrt(1.0 - ab_prev) * eps) + np.sqrt(1.0 - ab) * eps
        trajectory.append(LatentGrid(z))
    return InversionResult(trajectory=tuple(trajectory), cache=cache)


def continue_inversion(
    z_from: LatentGrid,
    from_step: int,
    schedule: DiffusionSchedule,
    predictor,
) -> LatentGrid:
    """Re-noise an (edited) latent from after step ``from_step`` up to the top."""
    z = z_from.data
    for t in range(from_step + 1, schedule.steps + 1):
        eps = predictor.predict(z, t, kv_mode=KV_SELF)
        ab = schedule.alpha_bar(t)
        ab_prev = schedule.alpha_bar_before(t)
        z = np.sqrt(ab / ab_prev) * (z - np.sqrt(1.0 - ab_prev) * eps) + np.sqrt(1.0 - ab) * eps
    return LatentGrid(z)


def sample(
    z_start: LatentGrid,
    schedule: DiffusionSchedule,
    predictor,
    cache: AttentionKVCache | None = None,
    from_step: int | None = None,
    cp_enabled: bool = False,
    cp_start_step: int = 0,
    sigma: float = 0.0,
    seed: int = 0,
) -> LatentGrid:
    """Denoise from ``from_step`` (default: the top of the schedule) down to clean.

    With cp_enabled, sampling steps whose ordinal (0 at the start of
    sampling) is >= cp_start_step inject the cached inversion key/value
    pairs into self-attention. sigma > 0 adds seeded Gaussian noise scaled
    by sigma^2, bounded by the per-step noise budget.
    """
    if z_start.has_nulls():
        raise ValueError("sampling requires a latent with no null cells")
    if from_step is None:
        from_step = schedule.steps
    if not (1 <= from_step <= schedule.steps):
        raise ValueError(f"from_step {from_step} outside [1, {schedule.steps}]")
    if cp_enabled and cache is None:
        raise ValueError("consistency-preserving sampling requires the inversion cache")

    rng = np.random.default_rng(seed) if sigma > 0 else None
    z = z_start.data
    for ordinal, t in enumerate(range(from_step, 0, -1)):
        inject = cp_enabled and ordinal >= cp_start_step
        eps = predictor.predict(z, t, kv_mode=KV_INJECT if inject else KV_SELF, cache=cache)
        ab = schedule.alpha_bar(t)
        ab_prev = schedule.alpha_bar_before(t)
        radicand = 1.0 - ab_prev - sigma**2
        if radicand < 0:
            raise ValueError(
                f"noise level too large at step {t}: sigma^2={sigma**2:.6g} "
                f"exceeds budget {1.0 - ab_prev:.6g}"
            )
        z = (
            np.sqrt(ab_prev) * ((z - np.sqrt(1.0 - ab) * eps) / np.sqrt(ab))
            + np.sqrt(radicand) * eps
        )
        if rng is not None:
            z = z + sigma**2 * rng.standard_normal(z.shape)
    return LatentGrid(z)
