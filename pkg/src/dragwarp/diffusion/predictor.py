"""Deterministic toy noise predictor with one self-attention site.

The network is intentionally tiny: 2x mean-pool, bias-free channel embed,
per-token normalization, single-head self-attention, linear mix back to
channels, nearest-neighbor 2x upsample. The timestep enters as a sinusoidal
scalar embedding added to normalized tokens. Weights are drawn once from a
seeded generator, frozen as float32, and shipped as a golden binary; the
checksum is surfaced by the HTTP health endpoint.

The embed stage is linear and the normalization is per token, so tokens are
invariant to a global rescaling of the latent. Latents at matching inversion
and sampling steps differ mostly by such a rescaling, which keeps cached
key/value pairs interchangeable with freshly computed ones on unmodified
trajectories.

The output gain keeps the predictor a small perturbation on top of the
retention schedule; round-trip reconstruction error scales with it.
"""

from __future__ import annotations

import hashlib
import io
import struct
from importlib import resources

import numpy as np

from .attention import AttentionKVCache, attend

WEIGHTS_MAGIC = b"DWTOYP1\n"
GOLDEN_SEED = 7
GOLDEN_CHANNELS = 3
GOLDEN_EMBED_DIM = 16
OUTPUT_GAIN = 5e-5

KV_SELF = "self"
KV_RECORD = "record"
KV_INJECT = "inject"

_WEIGHT_ORDER = ("w_embed", "time_freq", "time_amp", "w_query", "w_key", "w_value", "w_mix")


class PredictorShapeError(ValueError):
    """Latent shape incompatible with the predictor's weights."""


def generate_weights(seed: int, channels: int, embed_dim: int) -> dict[str, np.ndarray]:
    """Draw the frozen weight set; float32 so serialization is lossless."""
    rng = np.random.default_rng(seed)
    d = embed_dim
    w = {
        "w_embed": rng.standard_normal((channels, d)) / np.sqrt(channels),
        "time_freq": rng.uniform(0.1, 1.5, size=d),
        "time_amp": 0.5 * rng.standard_normal(d),
        "w_query": rng.standard_normal((d, d)) / np.sqrt(d),
        "w_key": rng.standard_normal((d, d)) / np.sqrt(d),
        "w_value": rng.standard_normal((d, d)) / np.sqrt(d),
        "w_mix": rng.standard_normal((d, channels)) / np.sqrt(d),
    }
    return {name: arr.astype(np.float32) for name, arr in w.items()}


def serialize_weights(weights: dict[str, np.ndarray]) -> bytes:
    """Magic header, dimension table, then flat little-endian float32 payload."""
    buf = io.BytesIO()
    buf.write(WEIGHTS_MAGIC)
    buf.write(struct.pack("<I", len(_WEIGHT_ORDER)))
    for name in _WEIGHT_ORDER:
        arr = weights[name]
        encoded = name.encode("ascii")
        buf.write(struct.pack("<I", len(encoded)))
        buf.write(encoded)
        buf.write(struct.pack("<I", arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
    for name in _WEIGHT_ORDER:
        buf.write(weights[name].astype("<f4").tobytes(order="C"))
    return buf.getvalue()


def deserialize_weights(blob: bytes) -> dict[str, np.ndarray]:
    if blob[:8] != WEIGHTS_MAGIC:
        raise ValueError("bad magic header in predictor weights")
    view = io.BytesIO(blob[8:])

    def read_u32(n=1):
        vals = struct.unpack(f"<{n}I", view.read(4 * n))
        return vals[0] if n == 1 else vals

    count = read_u32()
    shapes = []
    for _ in range(count):
        name_len = read_u32()
        name = view.read(name_len).decode("ascii")
        ndim = read_u32()
        dims = read_u32(ndim)
        shapes.append((name, (dims,) if isinstance(dims, int) else dims))
    weights = {}
    for name, shape in shapes:
        size = int(np.prod(shape))
        data = np.frombuffer(view.read(4 * size), dtype="<f4")
        weights[name] = data.reshape(shape).copy()
    return weights


def _mean_pool2(data: np.ndarray) -> np.ndarray:
    h, w, c = data.shape
    ph, pw = (h + 1) // 2, (w + 1) // 2
    padded = np.pad(data, ((0, 2 * ph - h), (0, 2 * pw - w), (0, 0)), mode="edge")
    return padded.reshape(ph, 2, pw, 2, c).mean(axis=(1, 3))


def _upsample2_nearest(data: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    up = np.repeat(np.repeat(data, 2, axis=0), 2, axis=1)
    return up[:out_h, :out_w]


def _normalize_tokens(tokens: np.ndarray) -> np.ndarray:
    mean = tokens.mean(axis=1, keepdims=True)
    centered = tokens - mean
    var = (centered**2).mean(axis=1, keepdims=True)
    return centered / np.sqrt(var + 1e-12)


class ToyNoisePredictor:
    """Predict a noise field for (latent, step); same output shape as input."""

    def __init__(self, weights: dict[str, np.ndarray], output_gain: float = OUTPUT_GAIN):
        self.weights = {name: np.asarray(weights[name], dtype=np.float64) for name in _WEIGHT_ORDER}
        self.channels = self.weights["w_embed"].shape[0]
        self.embed_dim = self.weights["w_embed"].shape[1]
        self.output_gain = float(output_gain)

    @classmethod
    def generate(cls, seed: int = GOLDEN_SEED, channels: int = GOLDEN_CHANNELS,
                 embed_dim: int = GOLDEN_EMBED_DIM) -> "ToyNoisePredictor":
        return cls(generate_weights(seed, channels, embed_dim))

    @classmethod
    def load_golden(cls) -> "ToyNoisePredictor":
        blob = resources.files("dragwarp.data").joinpath("predictor_weights.bin").read_bytes()
        return cls(deserialize_weights(blob))

    def time_embedding(self, t: int) -> np.ndarray:
        return np.sin(self.weights["time_freq"] * float(t)) * self.weights["time_amp"]

    def predict(
        self,
        latent: np.ndarray,
        t: int,
        kv_mode: str = KV_SELF,
        cache: AttentionKVCache | None = None,
        site: int = 0,
    ) -> np.ndarray:
        """One forward pass; kv_mode selects self, record, or inject attention."""
        latent = np.asarray(latent, dtype=np.float64)
        if latent.ndim != 3 or latent.shape[2] != self.channels:
            raise PredictorShapeError(
                f"latent must be (h, w, {self.channels}), got {latent.shape}"
            )
        if kv_mode not in (KV_SELF, KV_RECORD, KV_INJECT):
            raise ValueError(f"unknown kv mode {kv_mode!r}")
        if kv_mode in (KV_RECORD, KV_INJECT) and cache is None:
            raise ValueError(f"kv mode {kv_mode!r} requires a cache")

        h, w, _ = latent.shape
        pooled = _mean_pool2(latent)
        ph, pw, _ = pooled.shape
        tokens = pooled.reshape(ph * pw, self.channels) @ self.weights["w_embed"]
        tokens = _normalize_tokens(tokens) + self.time_embedding(t)

        queries = tokens @ self.weights["w_query"]
        keys = tokens @ self.weights["w_key"]
        values = tokens @ self.weights["w_value"]
        if kv_mode == KV_RECORD:
            cache.put(t, site, keys, values)
        elif kv_mode == KV_INJECT:
            keys, values = cache.get(t, site)
            if keys.shape != queries.shape:
                raise PredictorShapeError(
                    f"cached keys {keys.shape} incompatible with queries {queries.shape}"
                )
        attended = attend(queries, keys, values)

        mixed = (attended @ self.weights["w_mix"]).reshape(ph, pw, self.channels)
        return self.output_gain * _upsample2_nearest(mixed, h, w)


class ZeroPredictor:
    """Predicts identically zero noise; shape-compatible with any latent."""

    def predict(self, latent, t, kv_mode=KV_SELF, cache=None, site=0):
        return np.zeros_like(np.asarray(latent, dtype=np.float64))


def weights_checksum(blob: bytes | None = None) -> str:
    """SHA-256 of the golden weights file (or of the given blob)."""
    if blob is None:
        blob = resources.files("dragwarp.data").joinpath("predictor_weights.bin").read_bytes()
    return hashlib.sha256(blob).hexdigest()
