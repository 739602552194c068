"""Deterministic k-means with k-means++ seeding.

Distances are squared Euclidean, which over unit-norm embeddings orders
points identically to cosine distance. Runs are reproducible for a fixed
(vectors, k, seed) triple.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .errors import DimensionMismatch, TooFewPoints

MAX_ITERATIONS = 300
CONVERGENCE_TOL = 1e-6


@dataclass
class ClusterModel:
    """Fitted centroids plus the bookkeeping needed to reproduce the run."""

    k: int
    dim: int
    centroids: np.ndarray  # (k, dim) float64
    seed: int
    inertia: float
    iterations_run: int
    inertia_history: List[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "dim": self.dim,
            "centroids": self.centroids.tolist(),
            "seed": self.seed,
            "inertia": self.inertia,
            "iterations_run": self.iterations_run,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterModel":
        centroids = np.asarray(d["centroids"], dtype=np.float64)
        return cls(
            k=int(d["k"]),
            dim=int(d["dim"]),
            centroids=centroids,
            seed=int(d["seed"]),
            inertia=float(d["inertia"]),
            iterations_run=int(d["iterations_run"]),
        )


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, (n, k)."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    centroids[0] = points[rng.integers(n)]
    closest = np.einsum("nd,nd->n", points - centroids[0], points - centroids[0])
    for i in range(1, k):
        total = closest.sum()
        if total > 0:
            probs = closest / total
        else:
            probs = np.full(n, 1.0 / n)
        idx = rng.choice(n, p=probs)
        centroids[i] = points[idx]
        diff = points - centroids[i]
        closest = np.minimum(closest, np.einsum("nd,nd->n", diff, diff))
    return centroids


def fit_kmeans(vectors: Sequence[np.ndarray], k: int, seed: int) -> ClusterModel:
    """Lloyd's algorithm from a k-means++ start.

    Iterates until the largest centroid movement drops below 1e-6 or 300
    iterations pass. An empty cluster is repaired by reseeding its centroid
    to the point currently farthest from its assigned centroid. The recorded
    inertia history (sum of squared distances at each assignment step) is
    non-increasing.
    """
    points = np.asarray(vectors, dtype=np.float64)
    if points.ndim != 2:
        points = np.vstack([np.asarray(v, dtype=np.float64) for v in vectors])
    n, dim = points.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise TooFewPoints(f"{n} points cannot form {k} clusters")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, k, rng)
    history: List[float] = []
    iterations = 0

    for _ in range(MAX_ITERATIONS):
        dists = _squared_distances(points, centroids)
        labels = np.argmin(dists, axis=1)
        history.append(float(dists[np.arange(n), labels].sum()))
        iterations += 1

        new_centroids = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = points[members].mean(axis=0)
        empties = [c for c in range(k) if not (labels == c).any()]
        if empties:
            point_dists = dists[np.arange(n), labels].copy()
            for c in empties:
                farthest = int(np.argmax(point_dists))
                new_centroids[c] = points[farthest]
                point_dists[farthest] = -1.0  # do not reuse for another empty
        movement = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if movement < CONVERGENCE_TOL:
            break

    final_dists = _squared_distances(points, centroids)
    inertia = float(final_dists[np.arange(n), np.argmin(final_dists, axis=1)].sum())
    return ClusterModel(
        k=k,
        dim=dim,
        centroids=centroids,
        seed=seed,
        inertia=inertia,
        iterations_run=iterations,
        inertia_history=history,
    )


def assign_cluster(model: ClusterModel, v: np.ndarray) -> int:
    """Index of the nearest centroid; ties go to the lowest cluster id."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (model.dim,):
        raise DimensionMismatch(f"vector dim {v.shape} does not match model dim {model.dim}")
    diff = model.centroids - v
    return int(np.argmin(np.einsum("kd,kd->k", diff, diff)))


def assign_many(model: ClusterModel, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.shape[1] != model.dim:
        raise DimensionMismatch(f"matrix dim {points.shape[1]} does not match model dim {model.dim}")
    return np.argmin(_squared_distances(points, model.centroids), axis=1)
