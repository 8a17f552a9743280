"""Importance-sampling coreset constructions: sensitivity sampling, group sampling, StreamKM++."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CenterSet, PointSet, WeightedCoreset, as_rng, nearest
from .kmeans import bicriteria_indices, draw_index, kmeanspp_indices

BICRITERIA_BETA = 2.0


@dataclass(frozen=True)
class SamplingConfig:
    k: int
    coreset_size: int
    epsilon: float = 0.0
    clamp_negative_weights: bool = True
    seed: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.coreset_size < self.k:
            raise ValueError(f"coreset size {self.coreset_size} is smaller than k={self.k}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass(frozen=True)
class GroupingConfig(SamplingConfig):
    epsilon_group: float = 0.1

    def __post_init__(self):
        super().__post_init__()
        if not 0 < self.epsilon_group < 1:
            raise ValueError("epsilon_group must lie in (0, 1)")


def _initial_solution(points: PointSet, k: int, rng, centers):
    """Bicriteria centers and their source rows (-1 for externally supplied centers)."""
    if centers is None:
        idx = bicriteria_indices(points, k, BICRITERIA_BETA, rng)
        return points.data[idx], idx
    C = centers.centers if isinstance(centers, CenterSet) else np.asarray(centers, dtype=np.float64)
    return C, np.full(C.shape[0], -1, dtype=np.int64)


def _assemble(points: PointSet, sample_idx, sample_w, center_X, center_src, center_w) -> WeightedCoreset:
    """Merge duplicate source rows by summing weights, drop zero weights."""
    src = np.concatenate([sample_idx, center_src])
    w = np.concatenate([sample_w, center_w])
    X = np.concatenate([points.data[sample_idx], center_X])

    indexed = src >= 0
    uniq, inv = np.unique(src[indexed], return_inverse=True)
    merged_w = np.bincount(inv, weights=w[indexed], minlength=uniq.shape[0])
    out_X = [points.data[uniq]]
    out_w = [merged_w]
    out_s = [uniq]
    if np.any(~indexed):
        out_X.append(X[~indexed])
        out_w.append(w[~indexed])
        out_s.append(src[~indexed])
    X, w, s = np.concatenate(out_X), np.concatenate(out_w), np.concatenate(out_s)
    keep = w != 0
    if not np.any(keep):
        raise ValueError("construction produced no positive weight")
    return WeightedCoreset(X[keep], w[keep], s[keep])


def _center_weights(labels, sample_idx, sample_w, sizes, epsilon, clamp):
    """(1+eps)|K_i| minus the sampled mass landing in K_i, optionally clamped at zero."""
    landed = np.bincount(labels[sample_idx], weights=sample_w, minlength=sizes.shape[0])
    cw = (1.0 + epsilon) * sizes - landed
    if clamp:
        cw = np.maximum(cw, 0.0)
    return cw


def sensitivity_coreset(points: PointSet, cfg: SamplingConfig, rng=None, centers=None) -> WeightedCoreset:
    """Sensitivity sampling around a 2k-center k-means++ solution.

    A point p in cluster K_i is drawn with probability proportional to
    ``dist^2(p, q_i)/cost(K_i) + 1/|K_i|`` (times its own weight) and gets
    weight ``w(p)/(T Pr[p])``; each q_i then carries the mass of K_i that the
    sample did not account for.  ``centers`` overrides the initial solution.
    """
    T = cfg.coreset_size
    if T > points.n:
        raise ValueError(f"coreset size {T} exceeds the number of points {points.n}")
    rng = as_rng(cfg.seed if rng is None else rng)
    X, w = points.data, points.weights
    C, C_src = _initial_solution(points, cfg.k, rng, centers)
    labels, dist = nearest(X, C)
    kk = C.shape[0]
    costs = np.bincount(labels, weights=w * dist, minlength=kk)
    sizes = np.bincount(labels, weights=w, minlength=kk)

    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(costs[labels] > 0, dist / costs[labels], 0.0)
        score = w * (rel + np.where(sizes[labels] > 0, 1.0 / sizes[labels], 0.0))
    prob = score / score.sum()
    drawn = draw_index(rng, score, size=T)
    drawn_w = w[drawn] / (T * prob[drawn])

    cw = _center_weights(labels, drawn, drawn_w, sizes, cfg.epsilon, cfg.clamp_negative_weights)
    return _assemble(points, drawn, drawn_w, C, C_src, cw)


def ring_budgets(ring_costs: np.ndarray, ring_counts: np.ndarray, T: int) -> np.ndarray:
    """Split T draws across rings proportionally to cost, capped at each ring's point count.

    Rounding uses largest remainders; capped surplus is redistributed over the
    rings that still have room, again proportionally to cost.
    """
    ring_costs = np.asarray(ring_costs, dtype=np.float64)
    ring_counts = np.asarray(ring_counts, dtype=np.int64)
    budget = np.zeros(ring_costs.shape[0], dtype=np.int64)
    remaining = min(int(T), int(ring_counts[ring_costs > 0].sum()))
    open_ = (ring_costs > 0) & (ring_counts > 0)
    while remaining > 0 and np.any(open_):
        share = np.where(open_, ring_costs, 0.0)
        quota = remaining * share / share.sum()
        add = np.floor(quota).astype(np.int64)
        left = remaining - int(add.sum())
        if left > 0:
            order = np.argsort(-(quota - add), kind="stable")
            add[order[:left]] += 1
        budget += add
        over = np.maximum(budget - ring_counts, 0)
        budget -= over
        remaining = int(over.sum())
        open_ &= budget < ring_counts
    return budget


def group_coreset(points: PointSet, cfg: GroupingConfig, rng=None, centers=None) -> WeightedCoreset:
    """Group sampling over cost rings of a 2k-center k-means++ solution.

    Points whose cost is at most ``epsilon_group`` times their cluster's mean
    cost are snapped to the cluster center.  The others fall into rings
    ``floor(log2(cost / (epsilon_group * mean cost)))`` (the top ring collects
    everything beyond ``ceil(2 log2(1/epsilon_group))``); the T draws are
    split across rings by ring cost and each ring is sampled proportionally
    to point cost.  Center weights absorb the remaining cluster mass.
    """
    T = cfg.coreset_size
    if T > points.n:
        raise ValueError(f"coreset size {T} exceeds the number of points {points.n}")
    rng = as_rng(cfg.seed if rng is None else rng)
    X, w = points.data, points.weights
    C, C_src = _initial_solution(points, cfg.k, rng, centers)
    labels, dist = nearest(X, C)
    kk = C.shape[0]
    pcost = w * dist
    costs = np.bincount(labels, weights=pcost, minlength=kk)
    sizes = np.bincount(labels, weights=w, minlength=kk)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_cost = np.where(sizes > 0, costs / sizes, 0.0)

    eg = cfg.epsilon_group
    thresh = eg * mean_cost[labels] * w
    grouped = pcost > thresh
    top = int(math.ceil(2.0 * math.log2(1.0 / eg)))
    ring = np.full(points.n, -1, dtype=np.int64)
    with np.errstate(divide="ignore"):
        level = np.floor(np.log2(pcost[grouped] / thresh[grouped]))
    ring[grouped] = np.clip(level, 0, top).astype(np.int64)

    members = [np.flatnonzero(ring == r) for r in range(top + 1)]
    ring_costs = np.array([pcost[m].sum() for m in members])
    ring_counts = np.array([m.size for m in members])
    budgets = ring_budgets(ring_costs, ring_counts, T)

    drawn_parts, weight_parts = [], []
    for m, b, c in zip(members, budgets, ring_costs):
        if b == 0:
            continue
        pick = m[draw_index(rng, pcost[m], size=int(b))]
        prob = pcost[pick] / c
        drawn_parts.append(pick)
        weight_parts.append(w[pick] / (b * prob))
    drawn = np.concatenate(drawn_parts) if drawn_parts else np.zeros(0, dtype=np.int64)
    drawn_w = np.concatenate(weight_parts) if weight_parts else np.zeros(0)

    cw = _center_weights(labels, drawn, drawn_w, sizes, cfg.epsilon, cfg.clamp_negative_weights)
    return _assemble(points, drawn, drawn_w, C, C_src, cw)


def streamkmpp_coreset(points: PointSet, T: int, rng=None) -> WeightedCoreset:
    """T k-means++ centers, each weighted by the mass of the points nearest to it."""
    if not 1 <= T <= points.n:
        raise ValueError(f"coreset size {T} must lie in [1, {points.n}]")
    rng = as_rng(rng)
    idx = kmeanspp_indices(points, T, rng)
    labels, _ = nearest(points.data, points.data[idx])
    mass = np.bincount(labels, weights=points.weights, minlength=T)
    keep = mass > 0
    return WeightedCoreset(points.data[idx[keep]], mass[keep], idx[keep])
