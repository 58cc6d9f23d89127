"""Scaled dot-product attention and the inversion key/value cache."""

from __future__ import annotations

import numpy as np


class CacheMissError(KeyError):
    """Key/value pair requested for a step the inversion never recorded."""


class CacheWriteError(ValueError):
    """Attempt to overwrite an existing cache entry; the cache is write-once."""


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row softmax, numerically shifted; each row sums to 1."""
    shifted = scores - scores.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def attend(queries: np.ndarray, keys: np.ndarray, values: np.ndarray) -> np.ndarray:
    """softmax(Q K^T / sqrt(d)) V for a single head.

    queries: (nq, d); keys: (nk, d); values: (nk, dv).
    """
    d = queries.shape[-1]
    if keys.shape[-1] != d:
        raise ValueError(f"query dim {d} does not match key dim {keys.shape[-1]}")
    if keys.shape[0] != values.shape[0]:
        raise ValueError("keys and values must agree on token count")
    scores = queries @ keys.T / np.sqrt(d)
    return softmax(scores) @ values


class AttentionKVCache:
    """Per-(step, site) key/value tensors recorded during inversion.

    Write-once: inversion records each entry exactly once; sampling only
    reads. Stored arrays are frozen read-only.
    """

    def __init__(self):
        self._entries: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def put(self, step: int, site: int, keys: np.ndarray, values: np.ndarray) -> None:
        key = (int(step), int(site))
        if key in self._entries:
            raise CacheWriteError(f"cache entry for step={step} site={site} already recorded")
        keys = np.ascontiguousarray(keys)
        values = np.ascontiguousarray(values)
        keys.setflags(write=False)
        values.setflags(write=False)
        self._entries[key] = (keys, values)

    def get(self, step: int, site: int) -> tuple[np.ndarray, np.ndarray]:
        try:
            return self._entries[(int(step), int(site))]
        except KeyError:
            raise CacheMissError(f"no cached key/value for step={step} site={site}") from None

    def has(self, step: int, site: int) -> bool:
        return (int(step), int(site)) in self._entries

    def steps(self) -> list[int]:
        return sorted({s for s, _ in self._entries})

    def __len__(self) -> int:
        return len(self._entries)
