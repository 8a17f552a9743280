"""Shared clustering subroutines.

k-means++ seeding, Lloyd iterations, bicriteria seeding, exact weighted 1D
k-means and an approximate minimum enclosing ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CenterSet, PointSet, as_rng, nearest


@dataclass(frozen=True)
class SeedConfig:
    k: int
    candidate_pool: int = 1
    seed: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.candidate_pool < 1:
            raise ValueError("candidate_pool must be at least 1")


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")


def draw_index(rng: np.random.Generator, mass: np.ndarray, size=None):
    """Draw indices with probability proportional to ``mass`` (nonnegative, positive sum)."""
    cdf = np.cumsum(mass)
    total = cdf[-1]
    u = rng.random(size) * total
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(mass) - 1)


def _sq_to(X: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = X - c
    return np.einsum("ij,ij->i", diff, diff)


def kmeanspp_indices(points: PointSet, k: int, rng=None, candidate_pool: int = 1) -> np.ndarray:
    """Row indices chosen by weighted D^2 seeding.

    The first index is drawn proportionally to point weight, later ones
    proportionally to ``w(p) * D^2(p)``.  Once every point has zero potential
    the remaining draws are uniform over all rows.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    rng = as_rng(rng)
    X = points.data
    n = X.shape[0]
    w = np.clip(points.weights, 0.0, None)
    chosen = np.empty(k, dtype=np.int64)

    if w.sum() > 0:
        chosen[0] = draw_index(rng, w)
    else:
        chosen[0] = rng.integers(n)
    d2 = _sq_to(X, X[chosen[0]])

    for t in range(1, k):
        mass = w * d2
        if not mass.sum() > 0:
            chosen[t] = rng.integers(n)
            continue
        if candidate_pool == 1:
            chosen[t] = draw_index(rng, mass)
            d2 = np.minimum(d2, _sq_to(X, X[chosen[t]]))
            continue
        cands = draw_index(rng, mass, size=candidate_pool)
        best, best_pot, best_d2 = -1, np.inf, None
        for c in cands:
            cand_d2 = np.minimum(d2, _sq_to(X, X[c]))
            pot = float(w @ cand_d2)
            if pot < best_pot:
                best, best_pot, best_d2 = c, pot, cand_d2
        chosen[t] = best
        d2 = best_d2
    return chosen


def kmeanspp_seed(points: PointSet, cfg: SeedConfig | int, rng=None) -> CenterSet:
    """k-means++ seeding; ``cfg`` may be a SeedConfig or just k."""
    if isinstance(cfg, int):
        cfg = SeedConfig(k=cfg)
    if rng is None:
        rng = cfg.seed
    idx = kmeanspp_indices(points, cfg.k, rng, cfg.candidate_pool)
    return CenterSet(points.data[idx])


def lloyd(points: PointSet, init: CenterSet, max_iters: int = 100, rel_tol: float = 1e-6,
          history: list | None = None) -> tuple[CenterSet, float]:
    """Lloyd's algorithm from ``init``.

    Stops when the relative cost improvement drops below ``rel_tol`` or after
    ``max_iters`` center updates.  A center that loses all its points is moved
    onto the currently farthest point.  If ``history`` is a list the cost
    before the first update and after every update is appended to it.
    """
    if max_iters < 0:
        raise ValueError("max_iters must be nonnegative")
    X, w = points.data, points.weights
    C = np.array(init.centers, dtype=np.float64)
    k = C.shape[0]
    labels, dist = nearest(X, C)
    cost = float(w @ dist)
    if history is not None:
        history.append(cost)

    for _ in range(max_iters):
        mass = np.bincount(labels, weights=w, minlength=k)
        sums = np.zeros_like(C)
        np.add.at(sums, labels, w[:, None] * X)
        new_C = C.copy()
        live = mass > 0
        new_C[live] = sums[live] / mass[live, None]
        if not np.all(live):
            # repair on the post-update distances so stolen points are truly farthest
            _, new_dist = nearest(X, new_C[live])
            contrib = w * new_dist
            for j in np.flatnonzero(~live):
                far = int(np.argmax(contrib))
                new_C[j] = X[far]
                contrib[far] = 0.0
        new_labels, new_dist = nearest(X, new_C)
        new_cost = float(w @ new_dist)
        if new_cost > cost:
            # guards against round-off; a Lloyd step cannot increase the cost
            break
        C, labels, dist = new_C, new_labels, new_dist
        improvement = cost - new_cost
        prev, cost = cost, new_cost
        if history is not None:
            history.append(cost)
        if prev <= 0 or improvement <= rel_tol * prev:
            break
    return CenterSet(C), cost


def bicriteria(points: PointSet, k: int, beta: float = 2.0, rng=None, refine: bool = False) -> CenterSet:
    """ceil(beta * k) centers by k-means++ seeding, optionally polished by Lloyd."""
    idx = bicriteria_indices(points, k, beta, rng)
    centers = CenterSet(points.data[idx])
    if refine:
        centers, _ = lloyd(points, centers)
    return centers


def bicriteria_indices(points: PointSet, k: int, beta: float = 2.0, rng=None) -> np.ndarray:
    if beta < 1:
        raise ValueError("beta must be at least 1")
    return kmeanspp_indices(points, int(math.ceil(beta * k)), rng)


def kmeans_cost_after_lloyd(points: PointSet, k: int, rng=None, max_iters: int = 100) -> tuple[CenterSet, float]:
    """k-means++ seeding followed by Lloyd; the standard local optimizer."""
    rng = as_rng(rng)
    return lloyd(points, kmeanspp_seed(points, k, rng), max_iters=max_iters)


def _interval_cost(x, w, i, j) -> float:
    xs, ws = x[i:j], w[i:j]
    total = ws.sum()
    if total <= 0:
        return 0.0
    mu = (ws @ xs) / total
    r = xs - mu
    return float(ws @ (r * r))


def optimal_1d_kmeans(values, weights=None, g: int = 1):
    """Exact weighted 1D k-means over sorted ``values`` with at most ``g`` intervals.

    Dynamic program over prefix sums, O(g n^2) with the inner minimization
    vectorized.  Returns ``(boundaries, centers, cost)`` where interval ``t``
    covers ``values[boundaries[t]:boundaries[t + 1]]``.  The returned cost is
    recomputed directly from the chosen partition.
    """
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    n = x.shape[0]
    if n == 0:
        raise ValueError("no values")
    if g < 1:
        raise ValueError("g must be at least 1")
    if np.any(np.diff(x) < 0):
        raise ValueError("values must be sorted ascending")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape[0] != n:
        raise ValueError("weights and values differ in length")

    if g >= n:
        bounds = np.arange(n + 1)
    else:
        bounds = _dp_boundaries(x, w, g)

    centers = []
    cost = 0.0
    for a, b in zip(bounds[:-1], bounds[1:]):
        ws = w[a:b]
        total = ws.sum()
        centers.append(float(ws @ x[a:b] / total) if total > 0 else float(x[a:b].mean()))
        cost += _interval_cost(x, w, a, b)
    return bounds, np.asarray(centers), cost


def _dp_boundaries(x: np.ndarray, w: np.ndarray, g: int) -> np.ndarray:
    n = x.shape[0]
    # shift for conditioning of the prefix-sum cost formula
    xc = x - (w @ x) / w.sum() if w.sum() > 0 else x
    W = np.concatenate(([0.0], np.cumsum(w)))
    S1 = np.concatenate(([0.0], np.cumsum(w * xc)))
    S2 = np.concatenate(([0.0], np.cumsum(w * xc * xc)))

    def seg_cost(i: np.ndarray, j: int) -> np.ndarray:
        m = W[j] - W[i]
        s = S1[j] - S1[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (S2[j] - S2[i]) - np.where(m > 0, s * s / m, 0.0)
        return np.maximum(c, 0.0)

    # best[l][j]: optimal cost of the first j values with l+1 intervals
    best = np.full((g, n + 1), np.inf)
    arg = np.zeros((g, n + 1), dtype=np.int64)
    js = np.arange(n + 1)
    best[0, 1:] = [seg_cost(np.array([0]), j)[0] for j in range(1, n + 1)]
    for l in range(1, g):
        for j in range(l + 1, n + 1):
            i = js[l:j]
            cand = best[l - 1, i] + seg_cost(i, j)
            t = int(np.argmin(cand))
            best[l, j] = cand[t]
            arg[l, j] = i[t]
    # fewer intervals never beat more, but a tie prefers the smaller count
    l = int(np.argmin(best[:, n]))
    bounds = [n]
    j = n
    while l > 0:
        j = int(arg[l, j])
        bounds.append(j)
        l -= 1
    bounds.append(0)
    return np.asarray(bounds[::-1], dtype=np.int64)


def approx_meb(points, iters: int = 100) -> Ball:
    """Approximate minimum enclosing ball by farthest-point iterations.

    Starts at the centroid and moves a 1/(t+1) fraction toward the farthest
    point at step t.  The best iterate is kept and its radius is the exact
    maximum distance, so the ball always encloses every point.
    """
    X = points.data if isinstance(points, PointSet) else np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if iters < 1:
        raise ValueError("iters must be at least 1")
    c = X.mean(axis=0)
    best_c, best_r2 = c.copy(), -1.0
    for t in range(1, iters + 1):
        d2 = _sq_to(X, c)
        far = int(np.argmax(d2))
        if best_r2 < 0 or d2[far] < best_r2:
            best_c, best_r2 = c.copy(), float(d2[far])
        if d2[far] == 0:
            break
        c = c + (X[far] - c) / (t + 1)
    d2 = _sq_to(X, c)
    if d2.max() < best_r2:
        best_c, best_r2 = c, float(d2.max())
    return Ball(best_c, math.sqrt(best_r2))

