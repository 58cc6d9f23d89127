"""End-to-end edits: the pixel backend and the toy-latent backend.

Both backends share the same optimization core, which runs exactly once per
edit: compute the warpage field, relocate, fill nulls. The pixel backend
applies it directly to image channels; the latent backend wraps it between
inversion and consistency-preserving sampling at the configured step.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import (
    BACKEND_PIXEL,
    BACKEND_TOY_LATENT,
    FILL_ORIGINAL,
    RESAMPLE_FINAL_STEP,
    EditConfig,
)
from .diffusion.autoencoder import ToyAutoencoder
from .diffusion.ddim import continue_inversion, invert, sample
from .diffusion.predictor import ToyNoisePredictor
from .diffusion.schedule import DiffusionSchedule
from .geometry import DragInstruction, DragSet, build_mask_point_set
from .grids import LatentGrid
from .interpolation import interpolate_grid
from .relocation import RelocationResult, relocate, round_half_away
from .validation import (
    InvalidRequestError,
    ValidationIssue,
    check_image,
    check_mask_bitmap,
    require_valid,
    validate_edit_request,
)
from .warpage import compute_warpage_field


@dataclass
class EditDiagnostics:
    backend: str
    mask_cells: int
    instructions: int
    written: int
    dropped_out_of_bounds: int
    dropped_occupied: int
    null_count: int
    optimization_passes: int
    stage_ms: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EditOutcome:
    image: np.ndarray
    diagnostics: EditDiagnostics


class _StageClock:
    def __init__(self):
        self.stage_ms: dict[str, float] = {}

    def time(self, name: str):
        clock = self

        class _Timer:
            def __enter__(self):
                self.start = time.perf_counter()

            def __exit__(self, *exc):
                clock.stage_ms[name] = clock.stage_ms.get(name, 0.0) + (
                    (time.perf_counter() - self.start) * 1000.0
                )

        return _Timer()


def apply_object_move_fill(
    relocated: RelocationResult,
    pre_grid: LatentGrid,
    drag_set: DragSet,
    config: EditConfig,
) -> LatentGrid:
    """Fill the vacated region for the object modes.

    Object-move restores background semantics by tiling a 2r x 2r patch
    sampled around the target point from the pre-warp grid over the null
    region. Object-replicate restores the source content instead, which
    duplicates the object.
    """
    if not drag_set.is_object_mode():
        raise ValueError("object fill only applies to object-move / object-replicate modes")
    if len(drag_set) != 1:
        raise ValueError("object modes carry exactly one instruction")
    if config.object_move_radius < 1:
        raise ValueError("object move radius must be >= 1")

    grid = relocated.grid
    if not grid.has_nulls():
        return LatentGrid(grid.data)

    if drag_set.mode == "object-replicate":
        return interpolate_grid(relocated, FILL_ORIGINAL, original=pre_grid)

    r = config.object_move_radius
    ex, ey = (int(v) for v in round_half_away(np.asarray(drag_set.instructions[0].target)))
    x0, x1 = max(ex - r, 0), min(ex + r, grid.width)
    y0, y1 = max(ey - r, 0), min(ey + r, grid.height)
    block = pre_grid.data[y0:y1, x0:x1]
    bh, bw = block.shape[:2]

    data = grid.mutable_data()
    nulls = grid.null_mask
    ys, xs = np.nonzero(nulls)
    ax, ay = int(xs.min()), int(ys.min())  # anchor tiling at the null region's corner
    data[ys, xs] = block[(ys - ay) % bh, (xs - ax) % bw]
    return LatentGrid(data)


def _optimize(grid: LatentGrid, mask_points, drag_set, config, clock: _StageClock):
    """The single warpage-relocation-fill pass shared by both backends."""
    with clock.time("warpage"):
        field_ = compute_warpage_field(mask_points, drag_set)
    with clock.time("relocation"):
        relocated = relocate(grid, mask_points, field_)
    with clock.time("fill"):
        if drag_set.is_object_mode():
            filled = apply_object_move_fill(relocated, grid, drag_set, config)
        else:
            filled = interpolate_grid(relocated, config.null_fill, config.seed, original=grid)
    return relocated, filled


def _diagnostics(backend, mask_points, drag_set, relocated, config, clock):
    return EditDiagnostics(
        backend=backend,
        mask_cells=len(mask_points),
        instructions=len(drag_set),
        written=relocated.counters.written,
        dropped_out_of_bounds=relocated.counters.dropped_out_of_bounds,
        dropped_occupied=relocated.counters.dropped_occupied,
        null_count=int(relocated.grid.null_count()),
        optimization_passes=1,
        stage_ms=clock.stage_ms,
        config=asdict(config),
    )


def edit_pixel(image, mask_bitmap, drag_set: DragSet, config: EditConfig | None = None) -> EditOutcome:
    """Warp image channels directly; no diffusion involved."""
    config = config or EditConfig()
    image = check_image(image)
    bitmap = check_mask_bitmap(mask_bitmap, image.shape[:2])
    grid = LatentGrid(image)
    mask_points = build_mask_point_set(bitmap)
    require_valid(grid, drag_set, mask_points, config)

    clock = _StageClock()
    relocated, filled = _optimize(grid, mask_points, drag_set, config, clock)
    return EditOutcome(
        image=filled.data.copy(),
        diagnostics=_diagnostics(BACKEND_PIXEL, mask_points, drag_set, relocated, config, clock),
    )


def _scale_to_latent(drag_set: DragSet, bitmap: np.ndarray, factor: int):
    """Map pixel-space drags and mask to latent resolution.

    Mask cells floor-divide (any masked pixel marks its latent cell);
    handle and target points divide exactly to keep sub-cell precision.
    """
    f = factor
    h, w = bitmap.shape
    lh, lw = (h + f - 1) // f, (w + f - 1) // f
    lat_bitmap = np.zeros((lh, lw), dtype=bool)
    ys, xs = np.nonzero(bitmap)
    lat_bitmap[ys // f, xs // f] = True
    scaled = tuple(
        DragInstruction(
            (ins.handle[0] / f, ins.handle[1] / f),
            (ins.target[0] / f, ins.target[1] / f),
        )
        for ins in drag_set.instructions
    )
    return DragSet(scaled, mode=drag_set.mode), lat_bitmap


def edit_latent(
    image,
    mask_bitmap,
    drag_set: DragSet,
    config: EditConfig | None = None,
    predictor: ToyNoisePredictor | None = None,
) -> EditOutcome:
    """Invert, warp the latent at the configured step, fill, then sample back.

    Sampling restarts from the optimized step by default (the warped latent
    carries that step's noise level); the final-step choice re-noises the
    edited latent to the top of the schedule first.
    """
    config = (config or EditConfig()).replace(backend=BACKEND_TOY_LATENT)
    image = check_image(image, channels=3)
    bitmap = check_mask_bitmap(mask_bitmap, image.shape[:2])
    grid = LatentGrid(image)
    mask_points = build_mask_point_set(bitmap)
    require_valid(grid, drag_set, mask_points, config)

    predictor = predictor or ToyNoisePredictor.load_golden()
    autoencoder = ToyAutoencoder(config.downsample_factor)
    schedule = DiffusionSchedule.create(config.inversion_steps)
    clock = _StageClock()

    with clock.time("encode"):
        z0 = autoencoder.encode(image)
    with clock.time("inversion"):
        inversion = invert(z0, schedule, predictor)

    lat_drags, lat_bitmap = _scale_to_latent(drag_set, bitmap, config.downsample_factor)
    if not lat_bitmap.any():
        raise InvalidRequestError(
            [ValidationIssue("mask", "mask vanishes at latent resolution")]
        )
    lat_mask_points = build_mask_point_set(lat_bitmap)
    z_n = inversion.at(config.optimize_step)
    issues = [
        i
        for i in validate_edit_request(z_n, lat_drags, lat_mask_points, config)
        if i.path != "config"
    ]
    if issues:
        raise InvalidRequestError(
            [ValidationIssue(f"latent.{i.path}", i.message) for i in issues]
        )

    relocated, filled = _optimize(z_n, lat_mask_points, lat_drags, config, clock)

    with clock.time("sampling"):
        if config.resample_from == RESAMPLE_FINAL_STEP:
            top = continue_inversion(filled, config.optimize_step, schedule, predictor)
            z_out = sample(
                top, schedule, predictor, cache=inversion.cache,
                cp_enabled=config.cp_enabled, cp_start_step=config.cp_start_step,
                sigma=config.sigma, seed=config.seed,
            )
        else:
            z_out = sample(
                filled, schedule, predictor, cache=inversion.cache,
                from_step=config.optimize_step,
                cp_enabled=config.cp_enabled, cp_start_step=config.cp_start_step,
                sigma=config.sigma, seed=config.seed,
            )
    with clock.time("decode"):
        out = autoencoder.decode(z_out, size=image.shape[:2])

    return EditOutcome(
        image=out,
        diagnostics=_diagnostics(
            BACKEND_TOY_LATENT, lat_mask_points, lat_drags, relocated, config, clock
        ),
    )


def reconstruct(image, config: EditConfig | None = None, predictor: ToyNoisePredictor | None = None) -> np.ndarray:
    """Round-trip an image through inversion and sampling with no edit."""
    config = config or EditConfig()
    image = check_image(image, channels=3)
    predictor = predictor or ToyNoisePredictor.load_golden()
    autoencoder = ToyAutoencoder(config.downsample_factor)
    schedule = DiffusionSchedule.create(config.inversion_steps)
    z0 = autoencoder.encode(image)
    inversion = invert(z0, schedule, predictor)
    z_out = sample(
        inversion.at(schedule.steps), schedule, predictor, cache=inversion.cache,
        cp_enabled=config.cp_enabled, cp_start_step=config.cp_start_step,
        sigma=config.sigma, seed=config.seed,
    )
    return autoencoder.decode(z_out, size=image.shape[:2])


def edit(image, mask_bitmap, drag_set: DragSet, config: EditConfig | None = None) -> EditOutcome:
    """Dispatch on the configured backend."""
    config = config or EditConfig()
    if config.backend == BACKEND_TOY_LATENT:
        return edit_latent(image, mask_bitmap, drag_set, config)
    return edit_pixel(image, mask_bitmap, drag_set, config)
