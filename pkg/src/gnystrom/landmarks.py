"""Landmark selection: uniform random rows or k-means cluster centers."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ._arrays import as_data_matrix
from .errors import InputError

INIT_SCHEMES = ("spread", "uniform")
LANDMARK_METHODS = ("kmeans", "random")


@dataclass(frozen=True)
class KMeansConfig:
    """Settings for Lloyd's algorithm.

    ``tol`` is a relative movement tolerance: iteration stops once the
    largest center shift falls below ``tol * (1 + max|X|)``. The "spread"
    init seeds centers with distance-weighted sampling; "uniform" picks
    distinct rows uniformly.
    """

    k: int
    max_iters: int = 100
    tol: float = 1e-6
    seed: int = 0
    init: str = "spread"

    def __post_init__(self):
        if self.k < 1:
            raise InputError(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise InputError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol >= 0:
            raise InputError(f"tol must be >= 0, got {self.tol}")
        if self.init not in INIT_SCHEMES:
            raise InputError(f"unknown init scheme {self.init!r}")


@dataclass(frozen=True)
class LandmarkSet:
    """Landmark points plus the provenance of their selection.

    ``source_indices`` is set only for random selection, where landmarks are
    actual dataset rows; k-means centers are synthetic means.
    """

    points: np.ndarray
    method: str
    seed: int
    source_indices: np.ndarray | None = None

    def __post_init__(self):
        points = as_data_matrix(self.points, "landmark points")
        object.__setattr__(self, "points", points)
        if self.method not in LANDMARK_METHODS:
            raise InputError(f"unknown landmark method {self.method!r}")

    @property
    def m(self):
        return int(self.points.shape[0])


def select_random(X, m, seed):
    """Pick m distinct rows of X uniformly at random, reproducibly."""
    X = as_data_matrix(X)
    n = X.shape[0]
    if not 1 <= m <= n:
        raise InputError(f"need 1 <= m <= n, got m={m} with n={n}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=m, replace=False)
    return LandmarkSet(points=X[idx].copy(), method="random", seed=int(seed),
                       source_indices=idx)


def select_kmeans(X, cfg):
    """Landmarks as k-means centers, deterministic for a given config."""
    X = as_data_matrix(X)
    if cfg.k > X.shape[0]:
        raise InputError(f"k={cfg.k} exceeds the number of samples {X.shape[0]}")
    rng = np.random.default_rng(cfg.seed)
    if cfg.init == "spread":
        centers = _init_spread(X, cfg.k, rng)
    else:
        centers = _init_uniform(X, cfg.k, rng)
    centers, _ = lloyd_iterations(X, centers, cfg.max_iters, cfg.tol)
    return LandmarkSet(points=centers, method="kmeans", seed=int(cfg.seed))


def lloyd_iterations(X, centers, max_iters, tol):
    """Run Lloyd updates from the given centers.

    Returns ``(centers, trace)`` where ``trace`` holds the clustering
    objective (total squared distance to the nearest center) evaluated after
    each assignment step; the sequence is non-increasing. Clusters that come
    up empty are re-seeded with points farthest from their assigned center,
    which also cannot increase the objective.
    """
    X = as_data_matrix(X)
    centers = np.array(centers, dtype=np.float64)
    n = X.shape[0]
    k = centers.shape[0]
    if centers.ndim != 2 or centers.shape[1] != X.shape[1]:
        raise InputError("initial centers must match the feature dimension")
    if k > n:
        raise InputError(f"cannot maintain {k} nonempty clusters with {n} samples")
    scale = 1.0 + float(np.abs(X).max())
    trace = []
    for _ in range(max_iters):
        d2 = cdist(X, centers, "sqeuclidean")
        assign = d2.argmin(axis=1)
        nearest = d2[np.arange(n), assign]
        trace.append(float(nearest.sum()))

        assign = _repair_empty(assign, nearest, k)
        counts = np.bincount(assign, minlength=k)
        new_centers = np.zeros_like(centers)
        np.add.at(new_centers, assign, X)
        new_centers /= counts[:, None]

        movement = float(np.sqrt(np.max(np.sum((new_centers - centers) ** 2, axis=1))))
        centers = new_centers
        if movement <= tol * scale:
            break
    return centers, trace


def _repair_empty(assign, nearest, k):
    """Donate the farthest points (from clusters with spare members) to any
    empty clusters; n >= k guarantees enough donors."""
    counts = np.bincount(assign, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return assign
    assign = assign.copy()
    order = np.argsort(-nearest)
    cursor = 0
    for cluster in empty:
        while counts[assign[order[cursor]]] <= 1:
            cursor += 1
        donor = order[cursor]
        counts[assign[donor]] -= 1
        assign[donor] = cluster
        counts[cluster] += 1
        cursor += 1
    return assign


def _init_spread(X, k, rng):
    # Distance-weighted seeding: first center uniform, each later center
    # drawn with probability proportional to the squared distance to the
    # closest center picked so far.
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[int(rng.integers(n))]
    closest = np.sum((X - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=closest / total))
        centers[i] = X[pick]
        closest = np.minimum(closest, np.sum((X - centers[i]) ** 2, axis=1))
    return centers


def _init_uniform(X, k, rng):
    idx = rng.choice(X.shape[0], size=k, replace=False)
    return X[idx].astype(np.float64, copy=True)
