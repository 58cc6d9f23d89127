"""Toy autoencoder: block-mean encode, mean-preserving bilinear decode.

Encoding pads the image to a multiple of the factor by edge replication and
averages each f x f block per channel. Decoding bilinearly upsamples and
then adds a per-block constant so that re-encoding the decoded image
recovers the latent exactly, including through the pad-and-crop path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grids import LatentGrid


def _bilinear_resize(data: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Pixel-center-aligned bilinear resampling with edge clamping."""
    in_h, in_w = data.shape[:2]
    if (out_h, out_w) == (in_h, in_w):
        return data.copy()
    ys = (np.arange(out_h) + 0.5) * in_h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * in_w / out_w - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, in_h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, in_w - 1)
    y1 = np.clip(y0 + 1, 0, in_h - 1)
    x1 = np.clip(x0 + 1, 0, in_w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[:, None, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, :, None]
    top = data[y0][:, x0] * (1 - wx) + data[y0][:, x1] * wx
    bot = data[y1][:, x0] * (1 - wx) + data[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


@dataclass(frozen=True)
class ToyAutoencoder:
    factor: int = 4

    def __post_init__(self):
        if self.factor < 1:
            raise ValueError(f"downsample factor must be >= 1, got {self.factor}")

    def latent_shape(self, height: int, width: int) -> tuple[int, int]:
        f = self.factor
        return (height + f - 1) // f, (width + f - 1) // f

    def _pad(self, data: np.ndarray) -> np.ndarray:
        f = self.factor
        h, w = data.shape[:2]
        lh, lw = self.latent_shape(h, w)
        return np.pad(data, ((0, lh * f - h), (0, lw * f - w), (0, 0)), mode="edge")

    def _block_means(self, data: np.ndarray) -> np.ndarray:
        f = self.factor
        padded = self._pad(data)
        lh, lw = padded.shape[0] // f, padded.shape[1] // f
        return padded.reshape(lh, f, lw, f, data.shape[2]).mean(axis=(1, 3))

    def encode(self, image: np.ndarray) -> LatentGrid:
        """Per-channel block means; factor 1 is the identity."""
        image = np.asarray(image, dtype=np.float64)
        if image.ndim == 2:
            image = image[:, :, None]
        return LatentGrid(self._block_means(image))

    def decode(self, latent: LatentGrid, size: tuple[int, int] | None = None) -> np.ndarray:
        """Upsample back to pixels; ``size`` crops to the original image shape."""
        if latent.has_nulls():
            raise ValueError("cannot decode a latent with null cells")
        f = self.factor
        lh, lw = latent.height, latent.width
        out_h, out_w = size if size is not None else (lh * f, lw * f)
        if not (lh * f - f < out_h <= lh * f and lw * f - f < out_w <= lw * f):
            raise ValueError(
                f"requested size {(out_h, out_w)} incompatible with latent {(lh, lw)} at factor {f}"
            )
        up = _bilinear_resize(latent.data, lh * f, lw * f)[:out_h, :out_w]
        # Block-constant correction so that encode(decode(z)) == z exactly,
        # matching the replicate-pad block means encode will compute.
        residual = latent.data - self._block_means(up)
        correction = np.repeat(np.repeat(residual, f, axis=0), f, axis=1)[:out_h, :out_w]
        return up + correction
