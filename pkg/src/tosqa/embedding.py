"""Text embedding backends and cosine similarity.

Two backends share one contract: unit-norm float64 vectors.

* ``reference_hash`` is fully deterministic and dependency free. Tokens are
  hashed into 2^15 signed buckets (FNV-1a 64, bucket = low 15 bits, sign from
  bit 15) and the signed bag of buckets is projected to ``dim`` through a
  pseudo-random Gaussian matrix whose rows are generated lazily from the
  backend seed. The generator is splitmix64 feeding a Box-Muller transform;
  all constants are fixed below so any implementation can reproduce the
  vectors bit for bit.

* ``external`` delegates to an HTTP endpoint speaking
  ``{"texts": [...]}`` -> ``{"vectors": [[...]], "dim": n}``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import requests

from .errors import BackendUnavailable, DimensionMismatch, EmptyText
from .text import tokenize, token_counts

N_BUCKETS = 1 << 15
DEFAULT_DIM = 384
DEFAULT_SEED = 42
EXTERNAL_TIMEOUT_S = 30.0

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MIX_MUL_1 = 0xBF58476D1CE4E5B9
_MIX_MUL_2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix64(z: int) -> int:
    """splitmix64 output scrambler for a single 64-bit state."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_MUL_1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_MUL_2) & _MASK64
    return z ^ (z >> 31)


def _splitmix_outputs(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of splitmix64 starting from ``seed``."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + idx * np.uint64(_SPLITMIX_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_MUL_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_MUL_2)
    return z ^ (z >> np.uint64(31))


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def token_bucket(token: str) -> Tuple[int, int]:
    """Map a token to (bucket, sign): bucket = low 15 hash bits, sign from bit 15."""
    h = _fnv1a64(token.encode("utf-8"))
    bucket = h & (N_BUCKETS - 1)
    sign = 1 if (h >> 15) & 1 == 0 else -1
    return bucket, sign


def _gaussian_row(seed: int, bucket: int, dim: int) -> np.ndarray:
    """Projection-matrix row for one bucket.

    Row stream seed = mix64(seed XOR (bucket+1)*GAMMA). Each splitmix64
    output z becomes a uniform via (z >> 11) * 2^-53; pairs map to Gaussians
    with Box-Muller using u1 = 1 - uniform (so the log argument is never 0).
    """
    row_seed = _mix64(seed ^ (((bucket + 1) * _SPLITMIX_GAMMA) & _MASK64))
    n_pairs = (dim + 1) // 2
    z = _splitmix_outputs(row_seed, 2 * n_pairs)
    u1 = 1.0 - (z[0::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    u2 = (z[1::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * math.pi * u2
    row = np.empty(2 * n_pairs, dtype=np.float64)
    row[0::2] = radius * np.cos(theta)
    row[1::2] = radius * np.sin(theta)
    return row[:dim]


@dataclass(frozen=True)
class EmbeddingBackendSpec:
    """Declares which embedding backend produced (or will produce) vectors."""

    kind: str = "reference_hash"
    seed: int = DEFAULT_SEED
    dim: int = DEFAULT_DIM
    external_endpoint: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("reference_hash", "external"):
            raise ValueError(f"unknown backend kind: {self.kind!r}")
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.kind == "external" and not self.external_endpoint:
            raise ValueError("external backend requires external_endpoint")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed, "dim": self.dim}
        if self.external_endpoint:
            d["external_endpoint"] = self.external_endpoint
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EmbeddingBackendSpec":
        return cls(
            kind=d.get("kind", "reference_hash"),
            seed=int(d.get("seed", DEFAULT_SEED)),
            dim=int(d.get("dim", DEFAULT_DIM)),
            external_endpoint=d.get("external_endpoint"),
        )


class ReferenceHashBackend:
    """Deterministic hashing + seeded Gaussian projection backend.

    Immutable after construction apart from internal memo caches, so safe to
    share across threads. ``embed_calls`` counts texts encoded (used by tests
    that assert the store's re-encoding short circuit).
    """

    def __init__(self, seed: int = DEFAULT_SEED, dim: int = DEFAULT_DIM):
        self.seed = int(seed)
        self.dim = int(dim)
        self.embed_calls = 0
        self._rows: Dict[int, np.ndarray] = {}
        self._token_cache: Dict[str, Tuple[int, int]] = {}
        self._lock = threading.Lock()

    @property
    def spec(self) -> EmbeddingBackendSpec:
        return EmbeddingBackendSpec(kind="reference_hash", seed=self.seed, dim=self.dim)

    def _row(self, bucket: int) -> np.ndarray:
        row = self._rows.get(bucket)
        if row is None:
            row = _gaussian_row(self.seed, bucket, self.dim)
            row.setflags(write=False)
            with self._lock:
                self._rows.setdefault(bucket, row)
                row = self._rows[bucket]
        return row

    def embed(self, text: str) -> np.ndarray:
        """Encode one text to a unit-norm float64 vector."""
        tokens = tokenize(text)
        if not tokens:
            raise EmptyText("text has no word tokens")
        self.embed_calls += 1
        weights: Dict[int, int] = {}
        for token, count in token_counts(tokens).items():
            cached = self._token_cache.get(token)
            if cached is None:
                cached = token_bucket(token)
                self._token_cache[token] = cached
            bucket, sign = cached
            weights[bucket] = weights.get(bucket, 0) + sign * count
        vec = np.zeros(self.dim, dtype=np.float64)
        # Accumulate in ascending bucket order so identical token multisets
        # produce bitwise-identical vectors.
        for bucket in sorted(weights):
            w = weights[bucket]
            if w != 0:
                vec += w * self._row(bucket)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise EmptyText("token hash cancellation produced a zero vector")
        return vec / norm

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            out[i] = self.embed(text)
        return out


class ExternalEmbeddingBackend:
    """Client for an external embedding service (MiniLM-style)."""

    def __init__(self, endpoint: str, dim: Optional[int] = None,
                 timeout: float = EXTERNAL_TIMEOUT_S, session: Optional[requests.Session] = None):
        self.endpoint = endpoint
        self.dim = dim
        self.timeout = timeout
        self._session = session or requests.Session()
        self.embed_calls = 0

    @property
    def spec(self) -> EmbeddingBackendSpec:
        return EmbeddingBackendSpec(
            kind="external", dim=self.dim or DEFAULT_DIM, external_endpoint=self.endpoint
        )

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        for text in texts:
            if not tokenize(text):
                raise EmptyText("text has no word tokens")
        try:
            resp = self._session.post(
                self.endpoint, json={"texts": list(texts)}, timeout=self.timeout
            )
            resp.raise_for_status()
            payload = resp.json()
            vectors = np.asarray(payload["vectors"], dtype=np.float64)
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise BackendUnavailable(f"embedding endpoint failed: {exc}") from exc
        if vectors.ndim != 2 or vectors.shape[0] != len(texts):
            raise BackendUnavailable("embedding endpoint returned a malformed matrix")
        self.embed_calls += len(texts)
        if self.dim is None:
            self.dim = int(vectors.shape[1])
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise BackendUnavailable("embedding endpoint returned a zero vector")
        return vectors / norms

    def embed(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]


def make_backend(spec: EmbeddingBackendSpec):
    if spec.kind == "reference_hash":
        return ReferenceHashBackend(seed=spec.seed, dim=spec.dim)
    return ExternalEmbeddingBackend(endpoint=spec.external_endpoint, dim=spec.dim)


def embed(text: str, backend) -> np.ndarray:
    """Encode text with a backend instance or an EmbeddingBackendSpec."""
    if isinstance(backend, EmbeddingBackendSpec):
        backend = make_backend(backend)
    return backend.embed(text)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dims differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity of a zero vector is undefined")
    return float(min(1.0, max(-1.0, float(np.dot(a, b)) / (na * nb))))
