"""One-step drag editing on image grids and toy diffusion latents."""

__version__ = "0.1.0"

from .config import EditConfig
from .estimators import LatentDragEditor, PixelDragEditor
from .geometry import (
    DragInstruction,
    DragSet,
    MaskPointSet,
    ReferenceCircle,
    build_mask_point_set,
)
from .grids import LatentGrid
from .interpolation import find_references, interpolate_grid, interpolate_point
from .metrics import drag_fidelity
from .pipeline import EditOutcome, edit, edit_latent, edit_pixel, reconstruct
from .relocation import RelocationResult, relocate
from .validation import ValidationIssue, validate_edit_request
from .warpage import WarpageField, compute_warpage_field, stretch_factor, warpage_vector

__all__ = [
    "__version__",
    "EditConfig",
    "LatentDragEditor",
    "PixelDragEditor",
    "DragInstruction",
    "DragSet",
    "MaskPointSet",
    "ReferenceCircle",
    "build_mask_point_set",
    "LatentGrid",
    "find_references",
    "interpolate_grid",
    "interpolate_point",
    "drag_fidelity",
    "EditOutcome",
    "edit",
    "edit_latent",
    "edit_pixel",
    "reconstruct",
    "RelocationResult",
    "relocate",
    "ValidationIssue",
    "validate_edit_request",
    "WarpageField",
    "compute_warpage_field",
    "stretch_factor",
    "warpage_vector",
]
