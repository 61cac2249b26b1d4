"""K-means with k-means++ seeding, restarts, and deterministic repair.

Used on raw observations (cluster-then-inverse stage 1) and on inferred cost
vectors (inverse-then-cluster stage 2). Squared-Euclidean objective, Lloyd
iterations until the centroid shift drops below 1e-9 or 300 iterations,
best-of-restarts selection by inertia with ties broken by restart index.
Empty clusters are repaired by donating the point farthest from its current
centroid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TooFewPoints(ValueError):
    """Fewer distinct points than requested clusters."""


@dataclass
class KmeansResult:
    assignment: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    inertia_trace: list = field(default_factory=list)


def _seed_centroids(points: np.ndarray, L: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: several D^2-sampled candidates per step, keeping the
    one that most reduces the total potential."""
    K = points.shape[0]
    n_cand = 2 + int(np.log(L + 1))
    chosen = [int(rng.integers(K))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(-1)
    for _ in range(1, L):
        total = d2.sum()
        if total <= 0.0:
            cands = [int(rng.integers(K))]
        else:
            cands = rng.choice(K, size=n_cand, p=d2 / total).tolist()
        best_c, best_d2, best_pot = None, None, np.inf
        for c in cands:
            trial = np.minimum(d2, ((points - points[c]) ** 2).sum(-1))
            pot = trial.sum()
            if pot < best_pot:
                best_c, best_d2, best_pot = int(c), trial, pot
        chosen.append(best_c)
        d2 = best_d2
    return points[chosen].astype(float)


def _lloyd(points: np.ndarray, centroids: np.ndarray, max_iter: int,
           shift_tol: float):
    K, _ = points.shape
    L = centroids.shape[0]
    trace = []
    labels = np.zeros(K, dtype=int)
    for it in range(1, max_iter + 1):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(-1)
        labels = np.argmin(d2, axis=1)
        own = d2[np.arange(K), labels]
        counts = np.bincount(labels, minlength=L)
        for lab in range(L):
            if counts[lab] == 0:
                donors = np.nonzero(counts[labels] >= 2)[0]
                far = donors[int(np.argmax(own[donors]))]
                counts[labels[far]] -= 1
                labels[far] = lab
                counts[lab] = 1
                own[far] = 0.0
        trace.append(float(((points - centroids[labels]) ** 2).sum()))
        new_centroids = np.empty_like(centroids)
        for lab in range(L):
            new_centroids[lab] = points[labels == lab].mean(axis=0)
        shift = float(np.max(np.abs(new_centroids - centroids)))
        centroids = new_centroids
        if shift < shift_tol:
            break
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(-1)
    relabeled = np.argmin(d2, axis=1)
    if np.bincount(relabeled, minlength=L).min() > 0:
        labels = relabeled
    inertia = float(d2[np.arange(K), labels].sum())
    trace.append(inertia)
    return labels, centroids, inertia, it, trace


def kmeans(points, L: int, seed: int = 0, restarts: int = 10,
           max_iter: int = 300, shift_tol: float = 1e-9) -> KmeansResult:
    """Best-of-restarts k-means. Deterministic given the seed."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if L < 1:
        raise ValueError("L must be at least 1")
    distinct = np.unique(points, axis=0).shape[0]
    if L > distinct:
        raise TooFewPoints(f"requested {L} clusters from {distinct} distinct points")
    rng = np.random.default_rng(seed)
    best = None
    for r in range(restarts):
        centroids = _seed_centroids(points, L, rng)
        labels, cents, inertia, iters, trace = _lloyd(points, centroids,
                                                      max_iter, shift_tol)
        if best is None or inertia < best.inertia - 1e-15:
            best = KmeansResult(assignment=labels, centroids=cents,
                                inertia=inertia, iterations=iters,
                                inertia_trace=trace)
    return best
