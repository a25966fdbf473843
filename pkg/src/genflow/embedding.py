"""Embedding providers and cosine similarity.

The local provider is a signed feature-hashed bag of words: FNV-1a 64 is
fixed (not Python's salted ``hash``) so the same text produces the same
vector on every run and platform. A remote provider slot covers hosted
embedding models behind the same interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import requests

from .errors import DimensionMismatch, EmbedderUnavailable, ZeroVector

DEFAULT_DIMENSION = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    normalizable: bool = True

    @property
    def dimension(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def normalize(values, *, allow_zero: bool = False) -> EmbeddingVector:
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("embedding values must be finite")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        if allow_zero:
            return EmbeddingVector(tuple(arr.tolist()), normalizable=False)
        raise ZeroVector("cannot normalize the zero vector")
    return EmbeddingVector(tuple((arr / norm).tolist()))


def cosine(u: EmbeddingVector, v: EmbeddingVector) -> float:
    if not u.normalizable or not v.normalizable:
        raise ZeroVector("cosine undefined for a non-normalizable vector")
    if u.dimension != v.dimension:
        raise DimensionMismatch(f"{u.dimension} vs {v.dimension}")
    return float(np.dot(u.as_array(), v.as_array()))


class LocalEmbedder:
    """Deterministic signed feature hashing over whitespace tokens."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension

    def embed(self, text: str) -> EmbeddingVector:
        accum = np.zeros(self.dimension, dtype=np.float64)
        for token in text.split():
            h = fnv1a_64(token.encode("utf-8"))
            bucket = h % self.dimension
            sign = -1.0 if (h >> 63) & 1 else 1.0
            accum[bucket] += sign
        return normalize(accum, allow_zero=True)


class RemoteEmbedder:
    """HTTP provider: POST {"text": ...} -> {"embedding": [...]}."""

    def __init__(
        self,
        endpoint: str,
        dimension: int = DEFAULT_DIMENSION,
        timeout_s: float = 5.0,
        retries: int = 2,
        session: requests.Session | None = None,
    ):
        if not endpoint:
            raise ValueError("remote embedder requires an endpoint")
        self.endpoint = endpoint
        self.dimension = dimension
        self.timeout_s = timeout_s
        self.retries = retries
        self._session = session or requests.Session()

    def embed(self, text: str) -> EmbeddingVector:
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = self._session.post(
                    self.endpoint, json={"text": text}, timeout=self.timeout_s
                )
                resp.raise_for_status()
                values = resp.json()["embedding"]
                break
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
        else:
            raise EmbedderUnavailable(str(last_error))
        if len(values) != self.dimension:
            raise DimensionMismatch(
                f"provider returned {len(values)}, expected {self.dimension}"
            )
        return normalize(values, allow_zero=True)


def make_embedder(config) -> LocalEmbedder | RemoteEmbedder:
    dimension = config.get_int("embed.dimension")
    if config.get("embed.provider") == "remote":
        return RemoteEmbedder(
            endpoint=config.get("embed.remote.endpoint"),
            dimension=dimension,
            timeout_s=config.get_float("embed.remote.timeout_s"),
            retries=config.get_int("embed.remote.retries"),
        )
    return LocalEmbedder(dimension)
