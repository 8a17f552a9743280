import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcoreset.benchmark import generate
from kcoreset.core import PointSet, clustering_cost
from kcoreset.datasets import gaussian_mixture
from kcoreset.evaluation import evaluate_benchmark
from kcoreset.movement import (BicoConfig, BicoTree, ClusteringFeature, RayConfig, bico_coreset,
                               raymaker_coreset, snap_to_rays)
from kcoreset.sampling import SamplingConfig, sensitivity_coreset


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 20))
def test_feature_merge_matches_direct_sums(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    w = rng.uniform(0.1, 2.0, n)
    cf = ClusteringFeature(X[0], 1, w[0], X[0].copy())
    for x, wi in zip(X[1:], w[1:]):
        cf.absorb(wi, x, 0.0)
    mu = (w @ X) / w.sum()
    assert cf.count == pytest.approx(w.sum())
    np.testing.assert_allclose(cf.linear_sum, w @ X, rtol=1e-10, atol=1e-10)
    assert cf.square_sum == pytest.approx(float(w @ (X * X).sum(1)), rel=1e-10)
    assert cf.cost == pytest.approx(float(w @ ((X - mu) ** 2).sum(1)), rel=1e-9, abs=1e-9)


def test_tree_keeps_mass_and_bounds_size():
    ps, _ = gaussian_mixture(1500, 4, 5, rng=1)
    tree = BicoTree(ps.d, 50, threshold=0.01)
    for p in ps.data:
        tree.insert(p)
    assert tree.total_mass == ps.n
    assert len(tree.features()) <= tree.capacity
    assert tree.rebuilds > 0


def test_bico_coreset_mass_exact():
    ps, _ = gaussian_mixture(2000, 6, 8, rng=2)
    cs = bico_coreset(ps, BicoConfig(200), k=8, rng=2)
    assert cs.total_weight == ps.n
    assert cs.m <= 400
    assert cs.source_indices is None


def test_bico_fixed_threshold_large_keeps_one_feature_per_region():
    X = np.vstack([np.zeros((10, 2)), np.full((10, 2), 100.0)])
    cs = bico_coreset(PointSet(X), BicoConfig(5, initial_threshold=1.0))
    assert cs.m == 2
    np.testing.assert_allclose(np.sort(cs.weights), [10, 10])


def test_bico_rejects_bad_config():
    with pytest.raises(ValueError):
        BicoConfig(0)
    with pytest.raises(ValueError):
        BicoConfig(5, rebuild_factor=1.0)
    with pytest.raises(ValueError):
        BicoConfig(5, initial_threshold=-1)


def test_snap_to_rays_matches_loop():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 3))
    C = rng.normal(size=(2, 3))
    U = rng.normal(size=(2, 4, 3))
    U /= np.linalg.norm(U, axis=2, keepdims=True)
    ray, proj, d2 = snap_to_rays(X, C, U)
    for i, x in enumerate(X):
        best = np.inf
        for j in range(2):
            for t in range(4):
                s = max(0.0, float((x - C[j]) @ U[j, t]))
                dd = float(np.sum((x - C[j] - s * U[j, t]) ** 2))
                best = min(best, dd)
        assert d2[i] == pytest.approx(best, abs=1e-9)
        j, t = divmod(ray[i], 4)
        assert proj[i] >= 0
        assert float(np.sum((x - C[j] - proj[i] * U[j, t]) ** 2)) == pytest.approx(best, abs=1e-9)


def test_raymaker_mass_and_size():
    ps, _ = gaussian_mixture(1000, 5, 4, rng=4)
    cfg = RayConfig.for_target(4, 120)
    assert cfg.rays_per_center == 3
    cs = raymaker_coreset(ps, cfg, rng=4)
    assert cs.total_weight == ps.n
    assert cs.m <= 4 * 3 * 10


def test_movement_worse_than_sampling_when_compressing_hard():
    # benchmark k=5, alpha=4 (n=625) compressed 25-fold
    inst = generate(5, 4)
    ps = inst.points
    T = 25
    sens, bico = [], []
    for s in range(5):
        sens.append(evaluate_benchmark(inst, sensitivity_coreset(ps, SamplingConfig(5, T), rng=s)).max_distortion)
        bico.append(evaluate_benchmark(inst, bico_coreset(ps, BicoConfig(T), k=5, rng=s)).max_distortion)
    assert np.mean(bico) >= 1.3 * np.mean(sens)


def test_raymaker_lloyd_center_costs_are_finite():
    ps, _ = gaussian_mixture(300, 3, 3, rng=5)
    cs = raymaker_coreset(ps, RayConfig(3, 2), rng=5)
    assert np.isfinite(clustering_cost(cs.points, ps.data[:3], cs.weights))
