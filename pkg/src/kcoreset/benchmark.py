"""Adversarial k-means instances with alpha planted, maximally dissimilar optimal clusterings.

Row ``i`` of an instance is read as the base-k digit string of ``i``; the
coordinate block ``a`` one-hot encodes digit ``a`` (shifted to zero mean), so
the a-th planted clustering groups rows by their a-th digit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Assignment, CenterSet, PointSet, as_rng

MAX_ENTRIES = 1 << 28


@dataclass(frozen=True)
class BenchmarkInstance:
    k: int
    alpha: int
    matrix: np.ndarray = field(repr=False)
    planted: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    @property
    def points(self) -> PointSet:
        return PointSet(self.matrix)

    def cluster_members(self, a: int, j: int) -> np.ndarray:
        return np.flatnonzero(self.planted[a] == j)


@dataclass(frozen=True)
class CompositeSpec:
    blocks: list
    offset_scale: float | None = None

    def __post_init__(self):
        if len(self.blocks) < 1:
            raise ValueError("composite needs at least one block")
        for k, alpha in self.blocks:
            _check(k, alpha)

    @property
    def k(self) -> int:
        return sum(k for k, _ in self.blocks)


def _check(k: int, alpha: int, max_entries: int = MAX_ENTRIES):
    if k < 2 or alpha < 2:
        raise ValueError(f"benchmark needs k >= 2 and alpha >= 2, got k={k}, alpha={alpha}")
    if k ** alpha * alpha * k > max_entries:
        raise ValueError(f"benchmark k={k}, alpha={alpha} needs {k ** alpha * alpha * k} entries, "
                         f"over the limit of {max_entries}")


def base_vector(i: int, k: int) -> np.ndarray:
    """Length-k vector with (k-1)/k at 1-based position i and -1/k elsewhere."""
    if not 1 <= i <= k:
        raise ValueError(f"index {i} outside [1, {k}]")
    v = np.full(k, -1.0 / k)
    v[i - 1] = (k - 1) / k
    return v


def generate(k: int, alpha: int, max_entries: int = MAX_ENTRIES) -> BenchmarkInstance:
    """Build the k^alpha x (alpha k) benchmark matrix and its planted clusterings.

    Column ``a*k + b`` (b zero-based) is ``1_{k^(alpha-a-1)} (x) v_b^(a+1)``,
    i.e. row i holds ``v_b^1[digit_a(i)]``.
    """
    _check(k, alpha, max_entries)
    n = k ** alpha
    rows = np.arange(n)
    digits = np.stack([(rows // k ** a) % k for a in range(alpha)])
    hi, lo = (k - 1) / k, -1.0 / k
    A = np.full((n, alpha * k), lo)
    for a in range(alpha):
        A[rows, a * k + digits[a]] = hi
    A.setflags(write=False)
    digits.setflags(write=False)
    return BenchmarkInstance(k, alpha, A, digits)


def planted_labels_from_matrix(matrix: np.ndarray, k: int, alpha: int) -> np.ndarray:
    """Recover planted labels by the sign test on each coordinate block."""
    out = np.empty((alpha, matrix.shape[0]), dtype=np.int64)
    for a in range(alpha):
        block = matrix[:, a * k:(a + 1) * k]
        pos = block > 0
        if not np.all(pos.sum(axis=1) == 1):
            raise ValueError(f"block {a} is not a benchmark block")
        out[a] = np.argmax(pos, axis=1)
    return out


def planted_centers(instance: BenchmarkInstance, a: int) -> CenterSet:
    """Means of the a-th planted clustering: v_j^1 on block a, zero elsewhere."""
    k, alpha = instance.k, instance.alpha
    if not 0 <= a < alpha:
        raise ValueError(f"clustering index {a} outside [0, {alpha})")
    C = np.zeros((k, alpha * k))
    for j in range(k):
        C[j, a * k:(a + 1) * k] = base_vector(j + 1, k)
    return CenterSet(C)


def planted_cluster_cost(k: int, alpha: int) -> float:
    """Cost of one planted cluster about its own mean."""
    _check(k, alpha, max_entries=float("inf"))
    return float((alpha - 1) * k ** (alpha - 2) * (k - 1))


def confusion_matrix(a, b, k: int) -> np.ndarray:
    la = a.labels if isinstance(a, Assignment) else np.asarray(a, dtype=np.int64)
    lb = b.labels if isinstance(b, Assignment) else np.asarray(b, dtype=np.int64)
    if la.shape != lb.shape:
        raise ValueError("clusterings have different numbers of points")
    for lab in (la, lb):
        if lab.size and (lab.min() < 0 or lab.max() >= k):
            raise ValueError(f"label outside [0, {k})")
    M = np.zeros((k, k), dtype=np.int64)
    np.add.at(M, (la, lb), 1)
    return M


def clustering_distance(a, b, k: int) -> float:
    """1 - (best permutation-matched overlap)/n, via an exact assignment solve."""
    M = confusion_matrix(a, b, k)
    n = int(M.sum())
    if n == 0:
        raise ValueError("empty clusterings")
    r, c = linear_sum_assignment(M, maximize=True)
    return 1.0 - M[r, c].sum() / n


def block_diameter(k: int, alpha: int) -> float:
    # two rows differing in every digit are at squared distance 2 * alpha
    return float(np.sqrt(2.0 * alpha))


def composite(spec: CompositeSpec, rng=None) -> PointSet:
    """Stack several benchmarks in disjoint coordinate ranges, pushed apart by offsets.

    Block ``t`` is translated by ``t * offset_scale`` along its own first
    coordinate.  Rows are shuffled when ``rng`` is given.
    """
    insts = [generate(k, alpha) for k, alpha in spec.blocks]
    if len(insts) == 1:
        X = np.array(insts[0].matrix)
    else:
        scale = spec.offset_scale
        if scale is None:
            scale = 10.0 * max(block_diameter(k, a) for k, a in spec.blocks)
        n = sum(b.n for b in insts)
        d = sum(b.d for b in insts)
        X = np.zeros((n, d))
        r = c = 0
        for t, inst in enumerate(insts):
            X[r:r + inst.n, c:c + inst.d] = inst.matrix
            X[r:r + inst.n, c] += t * scale
            r += inst.n
            c += inst.d
    if rng is not None:
        X = X[as_rng(rng).permutation(X.shape[0])]
    return PointSet(X)
