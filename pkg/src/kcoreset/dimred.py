"""PCA and Gaussian random projections used as preprocessing."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PointSet, as_rng

OVERSAMPLE = 8


@dataclass(frozen=True)
class ProjectionModel:
    kind: str
    basis: np.ndarray = field(repr=False)
    mean: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("pca", "random"):
            raise ValueError(f"unknown projection kind {self.kind!r}")

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def r(self) -> int:
        return self.basis.shape[1]

    def save(self, path):
        arrays = {"kind": np.array(self.kind), "basis": self.basis}
        if self.mean is not None:
            arrays["mean"] = self.mean
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path) -> "ProjectionModel":
        with np.load(path) as z:
            mean = z["mean"] if "mean" in z.files else None
            return cls(str(z["kind"]), z["basis"], mean)


def _orth(M: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(M)
    return q


def fit_pca(points: PointSet, r: int, power_iters: int = 4, rng=None) -> ProjectionModel:
    """Top-r principal directions via randomized subspace iteration.

    Data are centered on the weighted mean and rows scaled by sqrt(weight)
    before factorization.
    """
    d = points.d
    if not 1 <= r <= d:
        raise ValueError(f"target dimension {r} outside [1, {d}]")
    rng = as_rng(rng)
    w = points.weights
    mean = (w @ points.data) / w.sum()
    Xc = (points.data - mean) * np.sqrt(w)[:, None]
    ell = min(d, r + OVERSAMPLE)
    if ell >= min(Xc.shape):
        # sketch would not be smaller than the matrix itself
        _, _, vt = np.linalg.svd(Xc, full_matrices=True)
        return ProjectionModel("pca", np.ascontiguousarray(vt[:r].T), mean)
    Q = _orth(Xc @ rng.standard_normal((d, ell)))
    for _ in range(power_iters):
        Z = _orth(Xc.T @ Q)
        Q = _orth(Xc @ Z)
    B = Q.T @ Xc
    _, _, vt = np.linalg.svd(B, full_matrices=False)
    return ProjectionModel("pca", np.ascontiguousarray(vt[:r].T), mean)


def fit_random(d: int, r: int, rng=None) -> ProjectionModel:
    """Gaussian projection with i.i.d. N(0, 1/r) entries."""
    if r < 1 or d < 1:
        raise ValueError("dimensions must be positive")
    rng = as_rng(rng)
    return ProjectionModel("random", rng.standard_normal((d, r)) / np.sqrt(r))


def project(points, model: ProjectionModel) -> PointSet:
    X = points.data if isinstance(points, PointSet) else np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.d:
        raise ValueError(f"dimension mismatch: model expects d={model.d}, points have {X.shape[1]}")
    if model.mean is not None:
        X = X - model.mean
    Y = X @ model.basis
    weights = points.weights if isinstance(points, PointSet) else None
    return PointSet(Y, weights)


def explained_variance(points: PointSet, model: ProjectionModel) -> tuple[float, float]:
    """(captured, total) weighted variance mass about the mean."""
    w = points.weights
    mean = (w @ points.data) / w.sum()
    Xc = points.data - mean
    total = float(w @ np.einsum("ij,ij->i", Xc, Xc))
    Y = Xc @ model.basis
    captured = float(w @ np.einsum("ij,ij->i", Y, Y))
    return captured, total
