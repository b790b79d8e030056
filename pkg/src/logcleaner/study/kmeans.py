"""K-means with k-means++ seeding and seeded restarts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float


def _plusplus(X, k, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers.append(X[rng.integers(n)])
        else:
            centers.append(X[rng.choice(n, p=d2 / total)])
        d2 = np.minimum(d2, np.sum((X - centers[-1]) ** 2, axis=1))
    return np.array(centers, dtype=float)


def _lloyd(X, centers, max_iter):
    for _ in range(max_iter):
        dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dist.argmin(axis=1)
        new = centers.copy()
        for c in range(centers.shape[0]):
            members = X[labels == c]
            if len(members):
                new[c] = members.mean(axis=0)
        if np.array_equal(new, centers):
            break
        centers = new
    dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = dist.argmin(axis=1)
    return centers, labels, float(dist[np.arange(X.shape[0]), labels].sum())


def kmeans(X, k: int = 2, n_init: int = 50, max_iter: int = 100, seed: int = 0) -> KMeansResult:
    """Best of *n_init* Lloyd runs (lowest inertia, first wins ties)."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] < k:
        raise ValueError(f"need at least {k} points, got {X.shape[0]}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        centers, labels, inertia = _lloyd(X, _plusplus(X, k, rng), max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(centers, labels, inertia)
    return best
