import numpy as np
import pytest

from kcoreset.core import PointSet
from kcoreset.dimred import ProjectionModel, explained_variance, fit_pca, fit_random, project


def low_rank(n=400, d=30, r=4, seed=0, noise=1e-3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, r)) @ rng.normal(size=(r, d)) * 3 + noise * rng.normal(size=(n, d)) + 5.0
    return PointSet(X)


def top_subspace(ps, r):
    # oracle: plain SVD of the centered matrix
    Xc = ps.data - ps.data.mean(0)
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    return vt[:r].T


def test_pca_recovers_top_subspace():
    ps = low_rank()
    model = fit_pca(ps, 4, rng=0)
    V = top_subspace(ps, 4)
    # principal angles: projector difference is tiny
    P1, P2 = model.basis @ model.basis.T, V @ V.T
    assert np.linalg.norm(P1 - P2, 2) < 1e-6
    np.testing.assert_allclose(model.basis.T @ model.basis, np.eye(4), atol=1e-10)


def test_pca_explained_variance_near_one_for_low_rank():
    ps = low_rank()
    cap, tot = explained_variance(ps, fit_pca(ps, 4, rng=1))
    assert cap / tot > 0.9999


def test_pca_full_rank_path():
    ps = low_rank(n=20, d=6)
    model = fit_pca(ps, 6, rng=0)
    cap, tot = explained_variance(ps, model)
    assert cap == pytest.approx(tot, rel=1e-10)


def test_pca_weighted_equals_duplicated_rows():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(15, 5)) * [5, 3, 1, 0.5, 0.1]
    w = rng.integers(1, 4, 15).astype(float)
    a = fit_pca(PointSet(X, w), 2, rng=0)
    b = fit_pca(PointSet(np.repeat(X, w.astype(int), axis=0)), 2, rng=0)
    np.testing.assert_allclose(a.basis @ a.basis.T, b.basis @ b.basis.T, atol=1e-8)


def test_random_projection_scaling():
    model = fit_random(200, 50, rng=3)
    # E|x R|^2 = |x|^2 with N(0, 1/r) entries
    x = np.ones(200)
    norms = [np.sum((x @ fit_random(200, 50, rng=s).basis) ** 2) for s in range(100)]
    assert np.mean(norms) == pytest.approx(200, rel=0.05)
    assert model.basis.shape == (200, 50)


def test_project_checks_dimension_and_keeps_weights():
    ps = PointSet(np.ones((3, 4)), [1.0, 2.0, 3.0])
    model = fit_random(4, 2, rng=0)
    out = project(ps, model)
    np.testing.assert_array_equal(out.weights, ps.weights)
    with pytest.raises(ValueError):
        project(np.ones((2, 5)), model)
    with pytest.raises(ValueError):
        fit_pca(ps, 5)


def test_model_roundtrip(tmp_path):
    ps = low_rank(n=50, d=10)
    model = fit_pca(ps, 3, rng=0)
    model.save(tmp_path / "m.npz")
    back = ProjectionModel.load(tmp_path / "m.npz")
    assert back.kind == "pca"
    np.testing.assert_array_equal(back.basis, model.basis)
    np.testing.assert_array_equal(back.mean, model.mean)
    r = fit_random(10, 3, rng=0)
    r.save(tmp_path / "r.npz")
    assert ProjectionModel.load(tmp_path / "r.npz").mean is None
