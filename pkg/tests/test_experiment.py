import csv

import numpy as np
import pytest
import yaml

from kcoreset.benchmark import generate
from kcoreset.core import PointSet
from kcoreset.datasets import gaussian_mixture
from kcoreset.experiment import (TIMING_COLUMNS, ExperimentConfig, build_coreset, cost_curve, read_records,
                                 run_experiment, summarize)
from kcoreset.io import save_dataset


def strip_timing(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for c in TIMING_COLUMNS:
            r.pop(c, None)
        for c in ("construction_time_mean_s", "eval_time_mean_s"):
            r.pop(c, None)
    return rows


def bench_cfg(tmp_path, **kw):
    base = dict(dataset={"benchmark": {"k": 3, "alpha": 3}}, algorithms=["sensitivity"], k=[3], m=[3],
                repetitions=1, seed=7, output=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


def test_single_record(tmp_path):
    recs = run_experiment(bench_cfg(tmp_path))
    assert len(recs) == 1
    r = recs[0]
    assert r.error == "" and r.distortion_max >= 1.0 and r.coreset_size == 9
    assert (tmp_path / "out" / "records.csv").exists()
    assert (tmp_path / "out" / "summary.csv").exists()
    assert not (tmp_path / "out" / "records.partial.csv").exists()


def test_same_seed_same_bytes_modulo_timing(tmp_path):
    kw = dict(algorithms=["sensitivity", "group", "streamkm", "bico", "raymaker"], m=[2, 3], repetitions=2)
    run_experiment(bench_cfg(tmp_path / "a", **kw))
    run_experiment(bench_cfg(tmp_path / "b", **kw))
    for name in ("records.csv", "summary.csv"):
        assert strip_timing(tmp_path / "a" / "out" / name) == strip_timing(tmp_path / "b" / "out" / name)


def test_workers_do_not_change_output(tmp_path):
    kw = dict(algorithms=["sensitivity", "bico"], repetitions=3)
    run_experiment(bench_cfg(tmp_path / "a", **kw))
    run_experiment(bench_cfg(tmp_path / "b", workers=2, **kw))
    assert strip_timing(tmp_path / "a" / "out" / "records.csv") == strip_timing(tmp_path / "b" / "out" / "records.csv")


def test_summary_recomputes_from_records(tmp_path):
    cfg = bench_cfg(tmp_path, algorithms=["group", "sensitivity"], repetitions=3)
    run_experiment(cfg)
    recs = read_records(tmp_path / "out" / "records.csv")
    assert [r.algorithm for r in recs] == ["sensitivity"] * 3 + ["group"] * 3
    with open(tmp_path / "out" / "summary.csv", newline="") as fh:
        summary = list(csv.DictReader(fh))
    for row in summary:
        vals = np.array([r.distortion_max for r in recs if r.algorithm == row["algorithm"]])
        assert float(row["distortion_mean"]) == vals.mean()
        assert float(row["distortion_std"]) == vals.std(ddof=1)
    assert summarize(recs)[0]["algorithm"] == "sensitivity"


def test_failures_are_recorded(tmp_path):
    # without capping, m*k exceeds n for sampling methods
    recs = run_experiment(bench_cfg(tmp_path, m=[20], cap_to_n=False, algorithms=["sensitivity", "bico"]))
    by = {r.algorithm: r for r in recs}
    assert "exceeds" in by["sensitivity"].error
    assert by["bico"].error == ""


def test_config_from_yaml(tmp_path):
    data = tmp_path / "d.csv"
    save_dataset(np.random.default_rng(0).normal(size=(200, 4)), data)
    cfg_path = tmp_path / "c.yaml"
    cfg_path.write_text(yaml.safe_dump({
        "dataset": {"path": str(data)}, "algorithms": "streamkm", "k": 3, "m": [5], "repetitions": 2,
        "seed": 1, "preprocessing": {"kind": "pca", "r": 2}, "output": str(tmp_path / "o"),
        "evaluation": {"candidates_per_method": 2, "methods": ["kmeanspp"]},
    }))
    cfg = ExperimentConfig.from_file(cfg_path)
    recs = run_experiment(cfg)
    assert len(recs) == 2 and all(r.preprocessing == "pca2" for r in recs)
    assert all(r.worst_method == "kmeanspp" for r in recs)


def test_config_errors(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("dataset: {benchmark: {k: 3, alpha: 2}}\n")
    with pytest.raises(ValueError, match="seed"):
        ExperimentConfig.from_file(p)
    p.write_text("dataset: {benchmark: {k: 3, alpha: 2}}\nseed: 1\nbogus: 2\n")
    with pytest.raises(ValueError, match="bogus"):
        ExperimentConfig.from_file(p)
    with pytest.raises(ValueError):
        ExperimentConfig(dataset={}, algorithms=["kmedian"])
    with pytest.raises(ValueError):
        ExperimentConfig(dataset={}, repetitions=0)


def test_build_coreset_unknown():
    with pytest.raises(ValueError):
        build_coreset("nope", PointSet(np.ones((3, 1))), 1, 2, 0)


def test_cost_curve_k_equals_n_is_zero():
    ps = PointSet(np.random.default_rng(0).normal(size=(12, 2)))
    rows = cost_curve(ps, [12], seeds=1)
    assert rows[0]["cost"] == 0.0


def test_cost_curve_monotone():
    ps, _ = gaussian_mixture(300, 3, 6, rng=1)
    rows = cost_curve(ps, [1, 2, 3, 5, 8, 13], seeds=3, seed=2)
    costs = [r["cost"] for r in rows]
    assert all(b <= a for a, b in zip(costs, costs[1:]))
    with pytest.raises(ValueError):
        cost_curve(ps, [])


def test_benchmark_cost_curve_is_flat_and_mixture_is_not():
    bench = cost_curve(generate(10, 3).points, [10, 20], seeds=3, seed=0)
    ratio_bench = bench[0]["cost"] / bench[1]["cost"]
    assert ratio_bench <= 1.5
    # a one-dimensional 10-component mixture: splitting every component roughly thirds the cost
    gmm, _ = gaussian_mixture(1000, 1, 10, rng=0)
    mix = cost_curve(gmm, [10, 20], seeds=3, seed=0)
    assert mix[0]["cost"] / mix[1]["cost"] >= 2.0
