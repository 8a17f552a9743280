"""Movement-based coreset constructions: BICO and Ray Maker."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PointSet, WeightedCoreset, as_rng, clustering_cost
from .kmeans import kmeanspp_seed, lloyd, optimal_1d_kmeans

# BICO recursion depth after which a new feature is always opened
MAX_LEVEL = 64
# per-ray point count above which projections are quantized before the 1D DP
RAY_QUANTIZE = 5000
AUTO_SAMPLE = 1000


class ClusteringFeature:
    """Weighted summary of the points absorbed at one node of the BICO tree.

    Stored as (count, mean, centered square sum) for numerical stability; the
    classic linear and square sums are derived properties.
    """

    __slots__ = ("count", "mean", "m2", "reference", "level", "_refs")

    def __init__(self, reference: np.ndarray, level: int, count: float, mean: np.ndarray, m2: float = 0.0):
        self.reference = reference
        self.level = level
        self.count = count
        self.mean = mean
        self.m2 = m2
        self._refs = None

    @property
    def children(self) -> list["ClusteringFeature"]:
        return [] if self._refs is None else self._refs.items

    @property
    def linear_sum(self) -> np.ndarray:
        return self.count * self.mean

    @property
    def square_sum(self) -> float:
        return self.m2 + self.count * float(self.mean @ self.mean)

    @property
    def cost(self) -> float:
        """Sum of w * |p - centroid|^2 over absorbed points."""
        return self.m2

    def merged_cost(self, count: float, mean: np.ndarray, m2: float) -> float:
        total = self.count + count
        delta = mean - self.mean
        return self.m2 + m2 + self.count * count / total * float(delta @ delta)

    def absorb(self, count: float, mean: np.ndarray, m2: float):
        total = self.count + count
        delta = mean - self.mean
        self.m2 = self.m2 + m2 + self.count * count / total * float(delta @ delta)
        self.mean = self.mean + (count / total) * delta
        self.count = total


class _Children:
    """Child list plus a growable matrix of child references for nearest search."""

    __slots__ = ("items", "refs")

    def __init__(self, d: int):
        self.items: list[ClusteringFeature] = []
        self.refs = np.empty((4, d))

    def nearest(self, p: np.ndarray):
        m = len(self.items)
        diff = self.refs[:m] - p
        d2 = np.einsum("ij,ij->i", diff, diff)
        j = int(np.argmin(d2))
        return self.items[j], float(d2[j])

    def add(self, cf: ClusteringFeature):
        m = len(self.items)
        if m == self.refs.shape[0]:
            grown = np.empty((2 * m, self.refs.shape[1]))
            grown[:m] = self.refs
            self.refs = grown
        self.refs[m] = cf.reference
        self.items.append(cf)


@dataclass(frozen=True)
class BicoConfig:
    target_size: int
    initial_threshold: float | str = "auto"
    rebuild_factor: float = 2.0

    def __post_init__(self):
        if self.target_size < 1:
            raise ValueError("target size must be at least 1")
        if self.rebuild_factor <= 1:
            raise ValueError("rebuild_factor must exceed 1")
        if self.initial_threshold != "auto" and not float(self.initial_threshold) > 0:
            raise ValueError("initial threshold must be positive or 'auto'")


class BicoTree:
    """Streaming BICO summary.

    Level ``i`` uses radius ``R_i = sqrt(t) / 2^(i-1)``.  A feature absorbs a
    point while its cost stays within the threshold ``t``; when the number of
    features exceeds ``rebuild_factor * target_size`` the threshold doubles
    and all features are re-inserted into a fresh tree.
    """

    def __init__(self, d: int, target_size: int, threshold: float, rebuild_factor: float = 2.0):
        if threshold <= 0:
            raise ValueError("threshold must be positive")
        self.d = d
        self.target_size = target_size
        self.rebuild_factor = rebuild_factor
        self.threshold = float(threshold)
        self.rebuilds = 0
        self._reset()

    def _reset(self):
        self.root = _Children(self.d)
        self.num_features = 0
        self.radius = math.sqrt(self.threshold)

    @property
    def capacity(self) -> int:
        return int(math.floor(self.rebuild_factor * self.target_size))

    def insert(self, p, w: float = 1.0):
        p = np.asarray(p, dtype=np.float64).reshape(-1)
        if p.shape[0] != self.d:
            raise ValueError(f"dimension mismatch: tree has d={self.d}, point has {p.shape[0]}")
        if w < 0:
            raise ValueError("weights must be nonnegative")
        if w == 0:
            return
        self._insert(p, float(w), p, 0.0)
        while self.num_features > self.capacity:
            self._rebuild()

    def _open(self, container: _Children, ref, count, mean, m2, level):
        container.add(ClusteringFeature(ref.copy(), level, count, mean.copy(), m2))
        self.num_features += 1

    def _insert(self, ref: np.ndarray, count: float, mean: np.ndarray, m2: float):
        container = self.root
        level = 1
        R2 = self.threshold
        while True:
            if not container.items or level > MAX_LEVEL:
                self._open(container, ref, count, mean, m2, level)
                return
            q, d2 = container.nearest(ref)
            if d2 > R2:
                self._open(container, ref, count, mean, m2, level)
                return
            if q.merged_cost(count, mean, m2) <= self.threshold:
                q.absorb(count, mean, m2)
                return
            if q._refs is None:
                q._refs = _Children(self.d)
            container = q._refs
            level += 1
            R2 /= 4.0

    def features(self) -> list[ClusteringFeature]:
        out = []
        stack = list(reversed(self.root.items))
        while stack:
            cf = stack.pop()
            out.append(cf)
            if cf._refs is not None:
                stack.extend(reversed(cf._refs.items))
        return out

    def _rebuild(self):
        old = self.features()
        self.threshold *= 2.0
        self.rebuilds += 1
        self._reset()
        for cf in old:
            self._insert(cf.reference, cf.count, cf.mean, cf.m2)

    @property
    def total_mass(self) -> float:
        return math.fsum(cf.count for cf in self.features())

    def finalize(self) -> WeightedCoreset:
        feats = self.features()
        if not feats:
            raise ValueError("no points inserted")
        return WeightedCoreset(np.stack([cf.mean for cf in feats]), np.array([cf.count for cf in feats]))


def auto_threshold(points: PointSet, k: int, target_size: int, rng=None) -> float:
    """Threshold giving each feature a 1/T share of a k-means++ cost estimate.

    The estimate is the seeding cost on a uniform sample of at most 1000
    points, rescaled to the full point count.
    """
    rng = as_rng(rng)
    n = points.n
    if n > AUTO_SAMPLE:
        sample = points.subset(np.sort(rng.choice(n, AUTO_SAMPLE, replace=False)))
    else:
        sample = points
    seeds = kmeanspp_seed(sample, min(k, sample.n), rng)
    est = clustering_cost(sample, seeds) * (points.total_weight / sample.total_weight)
    if est <= 0:
        # every sampled point coincides with a seed; any positive threshold works
        est = 1e-12
    return est / target_size


def bico_coreset(points: PointSet, cfg: BicoConfig, k: int = 1, rng=None) -> WeightedCoreset:
    """Stream ``points`` in row order through a BICO tree and return its features."""
    if cfg.initial_threshold == "auto":
        t0 = auto_threshold(points, k, cfg.target_size, rng)
    else:
        t0 = float(cfg.initial_threshold)
    tree = BicoTree(points.d, cfg.target_size, t0, cfg.rebuild_factor)
    for p, w in zip(points.data, points.weights):
        tree.insert(p, w)
    return tree.finalize()


@dataclass(frozen=True)
class RayConfig:
    k: int
    rays_per_center: int
    per_ray_centers: int = 10
    seed: int | None = None

    def __post_init__(self):
        if self.k < 1 or self.rays_per_center < 1 or self.per_ray_centers < 1:
            raise ValueError("k, rays_per_center and per_ray_centers must all be at least 1")

    @classmethod
    def for_target(cls, k: int, target_size: int, per_ray_centers: int = 10, seed=None) -> "RayConfig":
        r = max(1, math.ceil(target_size / (k * per_ray_centers)))
        return cls(k, r, per_ray_centers, seed)


def random_directions(k: int, r: int, d: int, rng) -> np.ndarray:
    """k x r x d unit vectors, uniform on the sphere."""
    U = rng.standard_normal((k, r, d))
    norms = np.linalg.norm(U, axis=2, keepdims=True)
    norms[norms == 0] = 1.0
    return U / norms


def snap_to_rays(X: np.ndarray, centers: np.ndarray, directions: np.ndarray):
    """Closest half-line for every point.

    Ray ``(j, t)`` starts at ``centers[j]`` with direction ``directions[j, t]``.
    Returns flat ray index ``j * r + t``, the clamped projection length and
    the squared distance to the ray.
    """
    n = X.shape[0]
    k, r, _ = directions.shape
    best = np.full(n, np.inf)
    ray = np.zeros(n, dtype=np.int64)
    proj = np.zeros(n)
    for j in range(k):
        rel = X - centers[j]
        norm2 = np.einsum("ij,ij->i", rel, rel)
        s = np.maximum(rel @ directions[j].T, 0.0)
        d2 = np.maximum(norm2[:, None] - s * s, 0.0)
        t = np.argmin(d2, axis=1)
        dj = d2[np.arange(n), t]
        better = dj < best
        best[better] = dj[better]
        ray[better] = j * r + t[better]
        proj[better] = s[better, t[better]]
    return ray, proj, best


def _quantize(s: np.ndarray, w: np.ndarray, bins: int):
    """Collapse sorted values into ``bins`` contiguous groups of about equal count."""
    edges = np.linspace(0, s.shape[0], bins + 1).round().astype(np.int64)
    qs, qw = np.empty(bins), np.empty(bins)
    for b in range(bins):
        ss, ww = s[edges[b]:edges[b + 1]], w[edges[b]:edges[b + 1]]
        tot = ww.sum()
        qw[b] = tot
        qs[b] = (ww @ ss) / tot if tot > 0 else ss.mean()
    return qs, qw


def raymaker_coreset(points: PointSet, cfg: RayConfig, rng=None) -> WeightedCoreset:
    """Snap points to random rays around k centers, then cluster each ray in 1D.

    Each interval of a ray's optimal 1D clustering becomes one coreset point at
    ``c + mean(s) u`` weighted by the interval's mass.
    """
    rng = as_rng(cfg.seed if rng is None else rng)
    X, w = points.data, points.weights
    k = min(cfg.k, points.n)
    centers, _ = lloyd(points, kmeanspp_seed(points, k, rng))
    C = centers.centers
    U = random_directions(k, cfg.rays_per_center, points.d, rng)
    ray, proj, _ = snap_to_rays(X, C, U)

    out_p, out_w = [], []
    order = np.lexsort((proj, ray))
    ray_sorted = ray[order]
    cuts = np.flatnonzero(np.diff(ray_sorted)) + 1
    for grp in np.split(order, cuts):
        rid = int(ray[grp[0]])
        j, t = divmod(rid, cfg.rays_per_center)
        s, ws = proj[grp], w[grp]
        if ws.sum() <= 0:
            continue
        if s.shape[0] > RAY_QUANTIZE:
            s, ws = _quantize(s, ws, RAY_QUANTIZE)
        bounds, mus, _ = optimal_1d_kmeans(s, ws, cfg.per_ray_centers)
        for a, b, mu in zip(bounds[:-1], bounds[1:], mus):
            mass = ws[a:b].sum()
            if mass > 0:
                out_p.append(C[j] + mu * U[j, t])
                out_w.append(mass)
    return WeightedCoreset(np.array(out_p), np.array(out_w))
