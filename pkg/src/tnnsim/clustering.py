"""In-repo k-means baseline and the purity metric.

Kept dependency-free (numpy only) so the "on par with k-means" comparison in
the cluster experiment does not hinge on an external implementation.
"""

from __future__ import annotations

import numpy as np


def kmeans(data: np.ndarray, k: int = 10, iters: int = 20,
           seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm with k-means++ seeding; fixed iteration count.

    Returns (assignments, centers). Deterministic for a given seed. An
    emptied cluster is re-seeded to the point farthest from its center.
    """
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    rng = np.random.default_rng(seed)

    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(n)]
    d2 = ((data - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        probs = d2 / d2.sum() if d2.sum() > 0 else np.full(n, 1.0 / n)
        centers[j] = data[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, ((data - centers[j]) ** 2).sum(axis=1))

    assign = np.zeros(n, dtype=np.int64)
    x2 = (data ** 2).sum(axis=1)
    for _ in range(iters):
        dists = x2[:, None] - 2.0 * (data @ centers.T) + (centers ** 2).sum(axis=1)[None, :]
        assign = dists.argmin(axis=1)
        for j in range(k):
            members = assign == j
            if members.any():
                centers[j] = data[members].mean(axis=0)
            else:
                centers[j] = data[dists.min(axis=1).argmax()]
    return assign, centers


def purity(assignments: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of samples whose cluster's majority label matches their own."""
    assignments = np.asarray(assignments)
    labels = np.asarray(labels)
    if assignments.shape != labels.shape:
        raise ValueError("assignments and labels must have equal length")
    correct = 0
    for c in np.unique(assignments):
        members = labels[assignments == c]
        correct += np.bincount(members).max()
    return correct / len(labels)
