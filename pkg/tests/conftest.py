import numpy as np

from dragwarp.geometry import DragInstruction, DragSet
from dragwarp.metrics import gaussian_patch


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion, printed after the run."""
    try:
        from test_acceptance import ACCEPTANCE_RESULTS
    except ImportError:
        return
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}: {name}")


def blob_scene(size=256, blob_sigma=2.5, seed=0, max_drag=40, min_drag=10, margin=36):
    """Synthetic drag scenario: textured background, one Gaussian blob, one drag.

    Returns (image, mask_bitmap, drag_set, template). The blob sits at the
    handle; the mask is the bounding rectangle of handle and target inflated
    by ``margin`` so the reference circle comfortably contains both.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.indices((size, size), dtype=np.float64)
    base = 0.25 + 0.05 * np.sin(xx / 17.0) + 0.05 * np.cos(yy / 23.0)
    image = np.stack([base, base, base], axis=2)
    image += 0.01 * rng.standard_normal((size, size, 3))

    length = rng.uniform(min_drag, max_drag)
    angle = rng.uniform(0, 2 * np.pi)
    d = np.array([np.cos(angle), np.sin(angle)]) * length
    lo = margin + 12
    hi = size - margin - 12
    while True:
        s = rng.uniform(lo, hi, size=2)
        e = s + d
        if lo <= e[0] <= hi and lo <= e[1] <= hi:
            break
    s = np.round(s)
    e = np.round(e)

    template = gaussian_patch(blob_sigma)
    radius = template.shape[0] // 2
    sx, sy = int(s[0]), int(s[1])
    patch = 0.7 * template[:, :, None]
    image[sy - radius : sy + radius + 1, sx - radius : sx + radius + 1] += patch

    mask = np.zeros((size, size), dtype=bool)
    x0 = int(max(min(s[0], e[0]) - margin, 0))
    x1 = int(min(max(s[0], e[0]) + margin, size - 1))
    y0 = int(max(min(s[1], e[1]) - margin, 0))
    y1 = int(min(max(s[1], e[1]) + margin, size - 1))
    mask[y0 : y1 + 1, x0 : x1 + 1] = True

    drag_set = DragSet((DragInstruction((float(s[0]), float(s[1])), (float(e[0]), float(e[1]))),))
    return image, mask, drag_set, template
