"""Estimator-style wrappers so edits compose with scikit-learn tooling.

The editors are stateless transformers in the sklearn sense: ``fit``
validates the drag request against the image shape and freezes the mask
geometry, ``transform`` applies the edit to an image (or a list of images)
of that shape. Parameters follow the constructor-storage convention, so
``get_params`` / ``set_params`` / ``clone`` work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .config import EditConfig
from .geometry import DragInstruction, DragSet, build_mask_point_set
from .grids import LatentGrid
from .pipeline import edit_latent, edit_pixel
from .validation import check_image, check_mask_bitmap, require_valid


def _as_drag_set(instructions, mode: str) -> DragSet:
    parsed = []
    for ins in instructions:
        if isinstance(ins, DragInstruction):
            parsed.append(ins)
        else:
            handle, target = ins
            parsed.append(DragInstruction(tuple(handle), tuple(target)))
    return DragSet(tuple(parsed), mode=mode)


class _DragEditorBase(BaseEstimator, TransformerMixin):
    _backend = "pixel"

    def _edit_config(self) -> EditConfig:
        raise NotImplementedError

    def fit(self, X, y=None):
        """Validate the request against the image (shape and geometry)."""
        image = check_image(np.asarray(X))
        bitmap = check_mask_bitmap(self.mask, image.shape[:2])
        drag_set = _as_drag_set(self.instructions, self.mode)
        mask_points = build_mask_point_set(bitmap)
        config = self._edit_config()
        require_valid(LatentGrid(image), drag_set, mask_points, config)
        self.drag_set_ = drag_set
        self.mask_points_ = mask_points
        self.config_ = config
        self.image_shape_ = image.shape
        return self

    def _check_fitted(self):
        if not hasattr(self, "drag_set_"):
            raise NotFittedError("call fit before transform")

    def transform(self, X):
        """Edit one image (h, w, c) or a list of same-shape images."""
        self._check_fitted()
        arr = np.asarray(X)
        if arr.ndim == 4:
            return np.stack([self._edit_one(img) for img in arr])
        if isinstance(X, (list, tuple)):
            return [self._edit_one(np.asarray(img)) for img in X]
        return self._edit_one(arr)

    def _edit_one(self, image) -> np.ndarray:
        image = check_image(image)
        if image.shape != self.image_shape_:
            raise ValueError(
                f"image shape {image.shape} does not match fitted shape {self.image_shape_}"
            )
        bitmap = check_mask_bitmap(self.mask, image.shape[:2])
        if self._backend == "pixel":
            return edit_pixel(image, bitmap, self.drag_set_, self.config_).image
        return edit_latent(image, bitmap, self.drag_set_, self.config_).image

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).transform(X)


class PixelDragEditor(_DragEditorBase):
    """Drag edit applied directly to image channels."""

    _backend = "pixel"

    def __init__(self, instructions=(), mask=None, mode="stretch",
                 null_fill="bnni", object_move_radius=2, seed=0):
        self.instructions = instructions
        self.mask = mask
        self.mode = mode
        self.null_fill = null_fill
        self.object_move_radius = object_move_radius
        self.seed = seed

    def _edit_config(self) -> EditConfig:
        return EditConfig(
            null_fill=self.null_fill,
            object_move_radius=self.object_move_radius,
            seed=self.seed,
            backend="pixel",
        )


class LatentDragEditor(_DragEditorBase):
    """Drag edit applied to the toy diffusion latent between inversion and sampling."""

    _backend = "toy-latent"

    def __init__(self, instructions=(), mask=None, mode="stretch",
                 null_fill="bnni", object_move_radius=2, seed=0,
                 inversion_steps=10, optimize_step=7, cp_enabled=True,
                 cp_start_step=0, sigma=0.0, downsample_factor=4,
                 resample_from="optimize-step"):
        self.instructions = instructions
        self.mask = mask
        self.mode = mode
        self.null_fill = null_fill
        self.object_move_radius = object_move_radius
        self.seed = seed
        self.inversion_steps = inversion_steps
        self.optimize_step = optimize_step
        self.cp_enabled = cp_enabled
        self.cp_start_step = cp_start_step
        self.sigma = sigma
        self.downsample_factor = downsample_factor
        self.resample_from = resample_from

    def _edit_config(self) -> EditConfig:
        return EditConfig(
            inversion_steps=self.inversion_steps,
            optimize_step=self.optimize_step,
            cp_enabled=self.cp_enabled,
            cp_start_step=self.cp_start_step,
            sigma=self.sigma,
            null_fill=self.null_fill,
            object_move_radius=self.object_move_radius,
            seed=self.seed,
            backend="toy-latent",
            downsample_factor=self.downsample_factor,
            resample_from=self.resample_from,
        )
