"""Edit configuration with the pipeline defaults."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

FILL_BNNI = "bnni"
FILL_ORIGINAL = "original-value"
FILL_ZERO = "zero"
FILL_RANDOM = "random"
FILL_STRATEGIES = (FILL_BNNI, FILL_ORIGINAL, FILL_ZERO, FILL_RANDOM)

BACKEND_PIXEL = "pixel"
BACKEND_TOY_LATENT = "toy-latent"
BACKENDS = (BACKEND_PIXEL, BACKEND_TOY_LATENT)

RESAMPLE_OPTIMIZE_STEP = "optimize-step"
RESAMPLE_FINAL_STEP = "final-step"
RESAMPLE_CHOICES = (RESAMPLE_OPTIMIZE_STEP, RESAMPLE_FINAL_STEP)


@dataclass(frozen=True)
class EditConfig:
    """Knobs for one edit.

    Defaults: 10 inversion steps with the latent warped at step 7,
    consistency-preserving attention from the first sampling step,
    deterministic sampling (sigma = 0), and bilateral fill for null cells.
    """

    inversion_steps: int = 10
    optimize_step: int = 7
    cp_enabled: bool = True
    cp_start_step: int = 0
    sigma: float = 0.0
    null_fill: str = FILL_BNNI
    object_move_radius: int = 2
    seed: int = 0
    backend: str = BACKEND_PIXEL
    downsample_factor: int = 4
    resample_from: str = RESAMPLE_OPTIMIZE_STEP

    def issues(self) -> list[str]:
        """Range violations, empty when the config is usable."""
        problems = []
        if self.inversion_steps < 1:
            problems.append(f"inversion steps must be >= 1, got {self.inversion_steps}")
        if not (1 <= self.optimize_step <= self.inversion_steps):
            problems.append(
                f"optimize step must be in [1, {self.inversion_steps}], got {self.optimize_step}"
            )
        if not (0 <= self.cp_start_step <= self.inversion_steps):
            problems.append(
                f"cp start step must be in [0, {self.inversion_steps}], got {self.cp_start_step}"
            )
        if self.sigma < 0:
            problems.append(f"sigma must be >= 0, got {self.sigma}")
        if self.null_fill not in FILL_STRATEGIES:
            problems.append(f"unknown null fill strategy {self.null_fill!r}")
        if self.object_move_radius < 1:
            problems.append(
                f"object move radius must be >= 1, got {self.object_move_radius}"
            )
        if self.backend not in BACKENDS:
            problems.append(f"unknown backend {self.backend!r}")
        if self.downsample_factor < 1:
            problems.append(
                f"downsample factor must be >= 1, got {self.downsample_factor}"
            )
        if self.resample_from not in RESAMPLE_CHOICES:
            problems.append(f"unknown resample-from choice {self.resample_from!r}")
        return problems

    def replace(self, **kwargs) -> "EditConfig":
        return replace(self, **kwargs)
