import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcoreset.benchmark import generate, planted_centers
from kcoreset.core import CenterSet, PointSet, WeightedCoreset
from kcoreset.datasets import gaussian_mixture
from kcoreset.evaluation import (DistortionReport, EvalConfig, aggregate, candidates_convex, candidates_meb,
                                 distortion, evaluate_benchmark, evaluate_real, planted_masses, sample_in_ball)
from kcoreset.kmeans import approx_meb


def test_distortion_two_sided():
    ps = PointSet([[0.0], [2.0]])
    C = CenterSet([[1.0]])
    half = WeightedCoreset(np.array([[0.0]]), np.array([1.0]))
    assert distortion(ps, half, C) == 2.0
    triple = WeightedCoreset(np.array([[0.0], [2.0]]), np.array([3.0, 3.0]))
    assert distortion(ps, triple, C) == 3.0


def test_distortion_degenerate_is_infinite():
    ps = PointSet([[1.0]])
    cs = WeightedCoreset(np.array([[1.0]]), np.array([1.0]))
    assert math.isinf(distortion(ps, cs, CenterSet([[1.0]])))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_identity_coreset_distortion_is_one(seed):
    rng = np.random.default_rng(seed)
    ps = PointSet(rng.normal(size=(40, 3)), rng.uniform(0.5, 2, 40))
    cs = WeightedCoreset.from_pointset(ps)
    C = CenterSet(rng.normal(size=(3, 3)))
    assert distortion(ps, cs, C) == 1.0


def test_convex_candidates_lie_in_hull():
    B = CenterSet(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    for C in candidates_convex(B, 4, 5, rng=0):
        assert np.all(C.centers >= -1e-12) and np.all(C.centers.sum(1) <= 1 + 1e-12)


def test_ball_samples_inside_ball():
    rng = np.random.default_rng(0)
    P = sample_in_ball(np.array([1.0, 2.0, 3.0]), 2.0, 2000, rng)
    r = np.linalg.norm(P - [1, 2, 3], axis=1)
    assert r.max() <= 2.0 + 1e-12
    # uniform in a 3-ball: P(r <= R/2) = 1/8
    assert np.mean(r <= 1.0) == pytest.approx(1 / 8, abs=0.03)


def test_meb_candidates_inside_domain_ball():
    X = np.random.default_rng(1).normal(size=(100, 4))
    ball = approx_meb(X)
    for C in candidates_meb(X, 3, 4, rng=1):
        assert np.all(np.linalg.norm(C.centers - ball.center, axis=1) <= ball.radius + 1e-12)


def test_evaluate_real_report():
    ps, _ = gaussian_mixture(300, 3, 3, rng=2)
    cs = WeightedCoreset.from_pointset(ps)
    rep = evaluate_real(ps, cs, 3, EvalConfig(candidates_per_method=2), rng=2)
    assert set(rep.distortions) == {"kmeanspp", "convex", "meb"}
    assert rep.max_distortion == 1.0
    assert len(rep.probes) == 6


def test_eval_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(methods=("nope",))
    with pytest.raises(ValueError):
        EvalConfig(delta_grid=(1.0,))
    with pytest.raises(ValueError):
        EvalConfig(domain="elsewhere")


def test_full_instance_has_no_deficiency_and_falls_back():
    inst = generate(3, 3)
    cs = WeightedCoreset(inst.matrix, np.ones(inst.n), np.arange(inst.n))
    rep = evaluate_benchmark(inst, cs)
    assert set(rep.distortions) == {"planted"}
    assert rep.max_distortion == pytest.approx(1.0)


def test_deficient_probe_value():
    # keep only rows whose digit 0 is not 0: cluster 0 of clustering 0 is fully deficient
    inst = generate(3, 2)
    keep = np.flatnonzero(inst.planted[0] != 0)
    cs = WeightedCoreset(inst.matrix[keep], np.full(keep.size, 1.5), keep)
    masses = planted_masses(inst, cs)
    np.testing.assert_allclose(masses[0], [0, 4.5, 4.5])
    rep = evaluate_benchmark(inst, cs)
    from kcoreset.core import clustering_cost

    C = CenterSet(planted_centers(inst, 0).centers[1:])
    a = clustering_cost(inst.points, C)
    o = clustering_cost(cs.points, C, cs.weights)
    assert any(abs(v - max(a / o, o / a)) < 1e-12 for v in rep.distortions["deficient"])


def test_synthetic_points_use_nearest_planted_mean():
    inst = generate(3, 2)
    C = planted_centers(inst, 0).centers
    cs = WeightedCoreset(C.copy(), np.full(3, 3.0))
    np.testing.assert_allclose(planted_masses(inst, cs)[0], [3, 3, 3])


def test_aggregate():
    r1, r2 = DistortionReport(), DistortionReport()
    r1.add("a", 1.0)
    r1.add("b", 1.5)
    r2.add("a", 2.5)
    mean, std = aggregate([r1, r2])
    assert mean == 2.0 and std == pytest.approx(math.sqrt(0.5))
    assert aggregate([1.2]) == (1.2, 0.0)
    assert r1.worst_method == "b"
