"""Distortion measurement: candidate solutions, the benchmark deficiency probes, aggregation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .benchmark import BenchmarkInstance, planted_centers
from .core import CenterSet, PointSet, WeightedCoreset, as_rng, clustering_cost, nearest
from .kmeans import approx_meb, bicriteria, kmeanspp_indices

log = logging.getLogger(__name__)

METHODS = ("kmeanspp", "convex", "meb")
DEFAULT_DELTAS = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class EvalConfig:
    candidates_per_method: int = 5
    methods: tuple = METHODS
    delta_grid: tuple = DEFAULT_DELTAS
    repetitions: int = 10
    domain: str = "coreset"
    seed: int | None = None

    def __post_init__(self):
        if self.candidates_per_method < 1:
            raise ValueError("candidates_per_method must be at least 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValueError(f"unknown candidate methods {bad}; choose from {METHODS}")
        if any(not 0 < d < 1 for d in self.delta_grid):
            raise ValueError("delta values must lie strictly inside (0, 1)")
        if self.domain not in ("coreset", "data"):
            raise ValueError("domain must be 'coreset' or 'data'")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")


@dataclass
class DistortionReport:
    """Per-candidate distortions grouped by method, and their maximum."""

    distortions: dict = field(default_factory=dict)
    probes: list = field(default_factory=list)

    def add(self, method: str, value: float, label: str | None = None):
        self.distortions.setdefault(method, []).append(value)
        self.probes.append((label or method, value))

    @property
    def max_distortion(self) -> float:
        return max(v for vals in self.distortions.values() for v in vals)

    @property
    def worst_method(self) -> str:
        best, arg = -math.inf, None
        for method, vals in self.distortions.items():
            m = max(vals)
            if m > best:
                best, arg = m, method
        return arg

    def method_max(self, method: str) -> float:
        return max(self.distortions[method])

    def mean_distortion(self) -> float:
        vals = [v for vals in self.distortions.values() for v in vals]
        return float(np.mean(vals))


def _weighted(obj) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(obj, PointSet):
        return obj.data, obj.weights
    if isinstance(obj, WeightedCoreset):
        return obj.points, obj.weights
    X = np.asarray(obj, dtype=np.float64)
    return X, np.ones(X.shape[0])


def distortion(points: PointSet, coreset: WeightedCoreset, centers: CenterSet) -> float:
    """max(cost_A/cost_Omega, cost_Omega/cost_A); infinite when either cost is not positive."""
    cost_a = clustering_cost(points, centers)
    cost_o = clustering_cost(coreset.points, centers, coreset.weights)
    if cost_a <= 0 or cost_o <= 0:
        log.warning("degenerate costs (data %.6g, coreset %.6g): distortion reported as infinite",
                    cost_a, cost_o)
        return math.inf
    return max(cost_a / cost_o, cost_o / cost_a)


def candidates_kmeanspp(domain, k: int, count: int, rng=None) -> list[CenterSet]:
    """``count`` independent k-means++ seedings on ``domain`` (negative weights clipped)."""
    rng = as_rng(rng)
    X, w = _weighted(domain)
    ps = PointSet(X, np.clip(w, 0.0, None))
    return [CenterSet(X[kmeanspp_indices(ps, k, rng)]) for _ in range(count)]


def candidates_convex(bic: CenterSet, k: int, count: int, rng=None) -> list[CenterSet]:
    """Centers that are flat-Dirichlet convex combinations of the bicriteria centers."""
    rng = as_rng(rng)
    B = bic.centers
    return [CenterSet(rng.dirichlet(np.ones(B.shape[0]), size=k) @ B) for _ in range(count)]


def sample_in_ball(center: np.ndarray, radius: float, size: int, rng) -> np.ndarray:
    d = center.shape[0]
    u = rng.standard_normal((size, d))
    norms = np.linalg.norm(u, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    rad = radius * rng.random((size, 1)) ** (1.0 / d)
    return center + u / norms * rad


def candidates_meb(domain, k: int, count: int, rng=None, iters: int = 100) -> list[CenterSet]:
    """Centers drawn uniformly inside an approximate minimum enclosing ball of ``domain``."""
    rng = as_rng(rng)
    X, _ = _weighted(domain)
    ball = approx_meb(X, iters)
    return [CenterSet(sample_in_ball(ball.center, ball.radius, k, rng)) for _ in range(count)]


def evaluate_real(points: PointSet, coreset: WeightedCoreset, k: int, cfg: EvalConfig | None = None,
                  rng=None) -> DistortionReport:
    """Distortion over sampled candidate solutions; the max is a lower bound on the true distortion."""
    cfg = cfg or EvalConfig()
    rng = as_rng(cfg.seed if rng is None else rng)
    domain = coreset if cfg.domain == "coreset" else points
    report = DistortionReport()
    count = cfg.candidates_per_method
    for method in cfg.methods:
        if method == "kmeanspp":
            cands = candidates_kmeanspp(domain, k, count, rng)
        elif method == "convex":
            X, w = _weighted(domain)
            bic = bicriteria(PointSet(X, np.clip(w, 0.0, None)), k, 2.0, rng)
            cands = candidates_convex(bic, k, count, rng)
        else:
            cands = candidates_meb(domain, k, count, rng)
        for i, C in enumerate(cands):
            report.add(method, distortion(points, coreset, C), f"{method}[{i}]")
    return report


def planted_membership(instance: BenchmarkInstance, coreset: WeightedCoreset, a: int) -> np.ndarray:
    """Planted cluster of each coreset point under clustering ``a``.

    Indexed points inherit the label of their source row; synthetic points
    go to the nearest planted mean.
    """
    labels = np.empty(coreset.m, dtype=np.int64)
    src = coreset.source_indices
    synthetic = np.ones(coreset.m, dtype=bool) if src is None else src < 0
    if np.any(~synthetic):
        labels[~synthetic] = instance.planted[a][src[~synthetic]]
    if np.any(synthetic):
        lab, _ = nearest(coreset.points[synthetic], planted_centers(instance, a))
        labels[synthetic] = lab
    return labels


def planted_masses(instance: BenchmarkInstance, coreset: WeightedCoreset) -> np.ndarray:
    """alpha x k matrix of coreset weight landing in each planted cluster."""
    out = np.empty((instance.alpha, instance.k))
    for a in range(instance.alpha):
        out[a] = np.bincount(planted_membership(instance, coreset, a), weights=coreset.weights,
                             minlength=instance.k)
    return out


def evaluate_benchmark(instance: BenchmarkInstance, coreset: WeightedCoreset,
                       cfg: EvalConfig | None = None) -> DistortionReport:
    """Deficiency probes on every planted clustering and every delta.

    A planted cluster is deficient at ``delta`` when the coreset mass it
    receives is below ``(1 - delta)`` of its size; the probe solution keeps
    only the means of the non-deficient clusters.  When no (a, delta) pair
    has a proper, nonempty set of deficient clusters, the full planted
    solutions are probed instead.
    """
    cfg = cfg or EvalConfig()
    if coreset.d != instance.d:
        raise ValueError(f"coreset dimension {coreset.d} differs from instance dimension {instance.d}")
    points = instance.points
    size = instance.n / instance.k
    masses = planted_masses(instance, coreset)
    report = DistortionReport()
    for a in range(instance.alpha):
        centers = planted_centers(instance, a).centers
        seen = {}
        for delta in sorted(cfg.delta_grid):
            deficient = masses[a] < size * (1.0 - delta)
            n_def = int(deficient.sum())
            if n_def == 0 or n_def == instance.k:
                continue
            key = deficient.tobytes()
            if key not in seen:
                seen[key] = distortion(points, coreset, CenterSet(centers[~deficient]))
            report.add("deficient", seen[key], f"a={a},delta={delta:g},deficient={n_def}")
    if not report.distortions:
        for a in range(instance.alpha):
            report.add("planted", distortion(points, coreset, planted_centers(instance, a)), f"a={a}")
    return report


def aggregate(reports) -> tuple[float, float]:
    """Mean and sample standard deviation of the per-run maximum distortions."""
    vals = np.array([r.max_distortion if isinstance(r, DistortionReport) else float(r) for r in reports])
    if vals.size == 0:
        raise ValueError("no reports to aggregate")
    std = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
    return float(np.mean(vals)), std
