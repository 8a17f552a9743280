"""Point sets, center sets, weighted coresets and squared-Euclidean cost primitives.

Every cost in this package is an unnormalized weighted sum of squared
distances; ratios between two such costs are what the evaluators report.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Memory cap (in float64 entries) for one block of the n x k x d difference tensor.
_BLOCK_ENTRIES = 1 << 22
# Relative slack under which two squared distances count as a tie.
_TIE_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_rng(seed) -> np.random.Generator:
    """Return a numpy Generator for ``seed`` (int, sequence, SeedSequence or Generator)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class PointSet:
    """Dense n x d data matrix with nonnegative per-point weights."""

    data: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"point set must be a nonempty n x d matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("point set contains NaN or infinite coordinates")
        if self.weights is None:
            weights = np.ones(data.shape[0])
        else:
            weights = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
            if weights.shape[0] != data.shape[0]:
                raise ValueError(f"expected {data.shape[0]} weights, got {weights.shape[0]}")
            if not np.all(np.isfinite(weights)) or np.any(weights < 0):
                raise ValueError("point weights must be finite and nonnegative")
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def subset(self, idx) -> "PointSet":
        idx = np.asarray(idx)
        return PointSet(self.data[idx], self.weights[idx])

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class CenterSet:
    """Ordered k x d matrix of centers."""

    centers: np.ndarray

    def __post_init__(self):
        c = np.array(self.centers, dtype=np.float64, copy=True)
        if c.ndim == 1:
            c = c.reshape(1, -1)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError(f"center set must be a nonempty k x d matrix, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("center set contains NaN or infinite coordinates")
        object.__setattr__(self, "centers", _frozen(c))

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]

    def __len__(self):
        return self.k


@dataclass(frozen=True)
class WeightedCoreset:
    """Weighted summary of a point set.

    ``source_indices`` maps each coreset point to a row of the original data,
    or is ``None`` when the construction synthesizes its points.  Individual
    entries equal to -1 mark synthetic points inside an otherwise indexed coreset.
    """

    points: np.ndarray
    weights: np.ndarray
    source_indices: np.ndarray | None = None

    def __post_init__(self):
        p = np.array(self.points, dtype=np.float64, copy=True)
        if p.ndim == 1:
            p = p.reshape(-1, 1)
        w = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
        if p.ndim != 2 or p.shape[0] < 1:
            raise ValueError(f"coreset must hold at least one point, got shape {p.shape}")
        if w.shape[0] != p.shape[0]:
            raise ValueError(f"expected {p.shape[0]} coreset weights, got {w.shape[0]}")
        if not np.all(np.isfinite(w)):
            raise ValueError("coreset weights must be finite")
        object.__setattr__(self, "points", _frozen(p))
        object.__setattr__(self, "weights", _frozen(w))
        if self.source_indices is not None:
            s = np.array(self.source_indices, dtype=np.int64, copy=True).reshape(-1)
            if s.shape[0] != p.shape[0]:
                raise ValueError("source_indices length differs from coreset size")
            object.__setattr__(self, "source_indices", _frozen(s))

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def as_pointset(self) -> PointSet:
        """View as a PointSet; negative weights are not representable and raise."""
        return PointSet(self.points, self.weights)

    @classmethod
    def from_pointset(cls, points: PointSet) -> "WeightedCoreset":
        return cls(points.data, points.weights, np.arange(points.n))

    def __len__(self):
        return self.m


@dataclass(frozen=True)
class Assignment:
    """Nearest-center labels and the squared distance of each point to its center."""

    labels: np.ndarray
    sq_distances: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", _frozen(np.asarray(self.labels, dtype=np.int64)))
        object.__setattr__(self, "sq_distances", _frozen(np.asarray(self.sq_distances, dtype=np.float64)))

    @property
    def n(self) -> int:
        return self.labels.shape[0]


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, PointSet):
        return x.data
    if isinstance(x, CenterSet):
        return x.centers
    if isinstance(x, WeightedCoreset):
        return x.points
    a = np.asarray(x, dtype=np.float64)
    return a.reshape(-1, 1) if a.ndim == 1 else a


def squared_distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape[0]} vs {q.shape[0]}")
    diff = p - q
    return float(diff @ diff)


def pairwise_sq_distances(X, C) -> np.ndarray:
    """Exact n x k squared distances, computed by explicit differencing in blocks."""
    X = _as_matrix(X)
    C = _as_matrix(C)
    if X.shape[1] != C.shape[1]:
        raise ValueError(f"dimension mismatch: points have d={X.shape[1]}, centers d={C.shape[1]}")
    n, d = X.shape
    k = C.shape[0]
    out = np.empty((n, k))
    step = max(1, _BLOCK_ENTRIES // max(1, k * d))
    for start in range(0, n, step):
        diff = X[start:start + step, None, :] - C[None, :, :]
        out[start:start + step] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def nearest(X, C) -> tuple[np.ndarray, np.ndarray]:
    """Index of and squared distance to the nearest row of C, ties to the lowest index."""
    C = _as_matrix(C)
    if C.shape[0] == 0:
        raise ValueError("empty center set")
    D = pairwise_sq_distances(X, C)
    dmin = D.min(axis=1)
    tied = D <= dmin[:, None] * (1.0 + _TIE_RTOL)
    labels = np.argmax(tied, axis=1)
    return labels, D[np.arange(D.shape[0]), labels]


def assign(points, centers) -> Assignment:
    labels, dist = nearest(points, centers)
    return Assignment(labels, dist)


def clustering_cost(points, centers, weights=None) -> float:
    """Weighted k-means cost: sum over points of w(p) times the squared distance to C."""
    if weights is None:
        weights = points.weights if isinstance(points, (PointSet, WeightedCoreset)) else None
    C = _as_matrix(centers)
    if C.shape[0] == 0:
        raise ValueError("empty center set")
    _, dist = nearest(points, C)
    if weights is None:
        return float(np.sum(dist))
    return float(np.dot(np.asarray(weights, dtype=np.float64), dist))


def centroid(points: PointSet, subset=None) -> np.ndarray:
    """Weighted mean of ``points`` (restricted to ``subset`` when given)."""
    if subset is None:
        X, w = points.data, points.weights
    else:
        idx = np.asarray(subset, dtype=np.int64).reshape(-1)
        if idx.size == 0:
            raise ValueError("centroid of an empty subset")
        X, w = points.data[idx], points.weights[idx]
    total = float(np.sum(w))
    if total <= 0:
        raise ValueError("centroid of a subset with zero total weight")
    return (w @ X) / total


def cluster_costs(points: PointSet, assignment: Assignment, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster weighted cost and weight mass for an assignment with k labels."""
    costs = np.bincount(assignment.labels, weights=points.weights * assignment.sq_distances, minlength=k)
    sizes = np.bincount(assignment.labels, weights=points.weights, minlength=k)
    return costs, sizes
