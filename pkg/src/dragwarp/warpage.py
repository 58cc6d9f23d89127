"""Closed-form warpage vectors for drag editing.

Each drag instruction acts like a force pulling grid content toward its
target. A mask point p receives, from instruction i, a component
displacement lambda * d_i where the stretch factor lambda is the ratio
|p q| / |s q| along the ray from handle s through p to its far
intersection q with the reference circle: 1 at the handle, 0 on the
circle. Components are blended with inverse-distance weights over the
handles. Object modes bypass the geometry and translate uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DragSet, MaskPointSet, ReferenceCircle

# Slack for points numerically on the circle; anything farther outside is an error.
_OUTSIDE_TOL = 1e-9


class StretchGeometryError(ValueError):
    """Ray-circle geometry precondition violated."""


@dataclass(frozen=True)
class WarpageField:
    """Per-mask-point displacement vectors, with optional per-instruction diagnostics.

    ``points`` is the (m, 2) mask cell array in row-major order and
    ``vectors`` the matching (m, 2) displacements. ``weights`` and
    ``stretch_factors`` are (m, k) when diagnostics were requested.
    """

    points: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray | None = None
    stretch_factors: np.ndarray | None = None

    def __post_init__(self):
        for name in ("points", "vectors", "weights", "stretch_factors"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.ascontiguousarray(arr)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        if self.vectors.shape != self.points.shape:
            raise ValueError("one displacement vector per mask point required")

    def __len__(self) -> int:
        return self.points.shape[0]


def _ray_circle_far_distance(handles: np.ndarray, directions: np.ndarray, circle: ReferenceCircle) -> np.ndarray:
    """Distance from each handle to the far circle intersection along each unit ray.

    Solves |s + t*u - center|^2 = R^2 for the positive root. Handles must be
    strictly inside the circle, which guarantees exactly one positive root.
    """
    center = np.array(circle.center, dtype=np.float64)
    offset = handles - center
    b = np.sum(directions * offset, axis=-1)
    c0 = np.sum(offset * offset, axis=-1) - circle.radius**2
    disc = b * b - c0
    # c0 < 0 inside the circle, so disc > 0; clip guards roundoff at the rim.
    return -b + np.sqrt(np.clip(disc, 0.0, None))


def _check_handles_inside(handles: np.ndarray, circle: ReferenceCircle) -> None:
    center = np.array(circle.center, dtype=np.float64)
    dist = np.hypot(handles[:, 0] - center[0], handles[:, 1] - center[1])
    bad = np.nonzero(dist >= circle.radius)[0]
    if bad.size:
        raise StretchGeometryError(
            f"handle outside reference circle: instruction(s) {bad.tolist()} "
            f"at distance {dist[bad].max():.6g} >= radius {circle.radius:.6g}"
        )


def _stretch_kernel(points: np.ndarray, handles: np.ndarray, circle: ReferenceCircle):
    """Stretch factors and inverse-distance weights for all (point, handle) pairs.

    Returns (lambdas, weights), each (m, k). Exact handle coincidences get
    lambda 1 and full weight on the lowest-index coincident instruction.
    """
    _check_handles_inside(handles, circle)
    diff = points[:, None, :] - handles[None, :, :]  # (m, k, 2)
    dist = np.hypot(diff[..., 0], diff[..., 1])  # (m, k)
    coincident = dist == 0.0

    safe_dist = np.where(coincident, 1.0, dist)
    directions = diff / safe_dist[..., None]
    far = _ray_circle_far_distance(handles[None, :, :], directions, circle)

    lambdas = np.where(coincident, 1.0, 1.0 - dist / far)
    if np.any(lambdas < -_OUTSIDE_TOL):
        worst = float(lambdas.min())
        raise StretchGeometryError(
            f"mask point outside reference circle (stretch factor {worst:.3g} < 0)"
        )
    lambdas = np.clip(lambdas, 0.0, 1.0)

    inv = 1.0 / safe_dist
    any_coincident = coincident.any(axis=1)
    # Limit of the inverse-distance weights when p hits a handle exactly:
    # all weight on the first coincident instruction.
    first_coincident = np.argmax(coincident, axis=1)
    weights = inv / inv.sum(axis=1, keepdims=True)
    if np.any(any_coincident):
        rows = np.nonzero(any_coincident)[0]
        weights[rows, :] = 0.0
        weights[rows, first_coincident[rows]] = 1.0
    return lambdas, weights


def stretch_factor(p, s, circle: ReferenceCircle) -> float:
    """Stretch factor for one point-handle pair; see the kernel for the geometry."""
    lambdas, _ = _stretch_kernel(
        np.asarray([p], dtype=np.float64), np.asarray([s], dtype=np.float64), circle
    )
    return float(lambdas[0, 0])


def instruction_weights(p, drag_set: DragSet) -> np.ndarray:
    """Inverse-distance weights of each instruction at point p; sums to 1."""
    handles = drag_set.handles
    diff = np.asarray(p, dtype=np.float64)[None, :] - handles
    dist = np.hypot(diff[:, 0], diff[:, 1])
    coincident = dist == 0.0
    if np.any(coincident):
        weights = np.zeros(len(drag_set))
        weights[int(np.argmax(coincident))] = 1.0
        return weights
    inv = 1.0 / dist
    return inv / inv.sum()


def warpage_vector(p, drag_set: DragSet, circle: ReferenceCircle) -> np.ndarray:
    """Blended displacement at point p (stretch mode)."""
    points = np.asarray([p], dtype=np.float64)
    lambdas, weights = _stretch_kernel(points, drag_set.handles, circle)
    coef = weights * lambdas
    return np.sum(coef[:, :, None] * drag_set.vectors[None, :, :], axis=1)[0]


def compute_warpage_field(
    mask_points: MaskPointSet,
    drag_set: DragSet,
    circle: ReferenceCircle | None = None,
    diagnostics: bool = False,
) -> WarpageField:
    """Displacement for every mask point.

    Stretch mode blends per-instruction components; object modes assign the
    single instruction's displacement to every point unchanged.
    """
    if circle is None:
        circle = mask_points.circle
    points = mask_points.points.astype(np.float64)
    m = points.shape[0]
    k = len(drag_set)

    if drag_set.is_object_mode():
        if k != 1:
            raise ValueError(f"object mode requires exactly one instruction, got {k}")
        vectors = np.broadcast_to(drag_set.vectors[0], (m, 2)).copy()
        weights = np.ones((m, 1)) if diagnostics else None
        lambdas = np.ones((m, 1)) if diagnostics else None
        return WarpageField(mask_points.points, vectors, weights, lambdas)

    lambdas, weights = _stretch_kernel(points, drag_set.handles, circle)
    coef = weights * lambdas
    vectors = np.sum(coef[:, :, None] * drag_set.vectors[None, :, :], axis=1)
    return WarpageField(
        mask_points.points,
        vectors,
        weights if diagnostics else None,
        lambdas if diagnostics else None,
    )
