"""Synthetic Gaussian-mixture data for tests and experiments."""
from __future__ import annotations

import numpy as np

from .core import PointSet, as_rng


def gaussian_mixture(n: int, d: int, components: int, rng=None, separation: float = 10.0,
                     scale: float = 1.0, noise_dims: int = 0, noise_scale: float = 1.0):
    """Isotropic Gaussian blobs in ``d - noise_dims`` dimensions plus pure-noise coordinates.

    Component means are drawn uniformly from a cube of side ``separation``
    times ``components ** (1/informative_dims)``.  Returns ``(points, labels)``.
    """
    if not 0 <= noise_dims < d:
        raise ValueError("noise_dims must leave at least one informative dimension")
    rng = as_rng(rng)
    inf_d = d - noise_dims
    side = separation * components ** (1.0 / inf_d)
    means = rng.uniform(0.0, side, size=(components, inf_d))
    labels = rng.integers(components, size=n)
    X = np.empty((n, d))
    X[:, :inf_d] = means[labels] + scale * rng.standard_normal((n, inf_d))
    if noise_dims:
        X[:, inf_d:] = noise_scale * rng.standard_normal((n, noise_dims))
    return PointSet(X), labels
