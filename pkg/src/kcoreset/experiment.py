"""Experiment pipelines: coreset construction, distortion and cost evaluation, CSV output.

Config files are YAML mappings::

    dataset:
      benchmark: {k: 10, alpha: 3}       # or
      # path: data.csv                   # format: csv_dense | svmlight_sparse
      # meta: data.csv.meta              # optional benchmark sidecar
      # gaussian: {n: 2000, d: 60, components: 10, noise_dims: 50}
    preprocessing: {kind: none}          # or {kind: pca, r: 10} / {kind: random, r: 100}
    algorithms: [sensitivity, group, streamkm, bico, raymaker]
    k: [10]
    m: [50, 200]
    repetitions: 10
    seed: 1
    output: results
    cap_to_n: true                       # coreset size is min(m * k, n)
    workers: 1
    timeout_s: null                      # soft per-record budget
    evaluation: {candidates_per_method: 5, methods: [kmeanspp, convex, meb], domain: coreset}

``records.csv`` holds one row per (algorithm, k, m, repetition) and
``summary.csv`` the mean and sample standard deviation per
(dataset, preprocessing, algorithm, k, m).
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .benchmark import BenchmarkInstance, generate
from .core import CenterSet, PointSet, WeightedCoreset, clustering_cost
from .datasets import gaussian_mixture
from .dimred import fit_pca, fit_random, project
from .evaluation import EvalConfig, evaluate_benchmark, evaluate_real
from .io import load_benchmark, load_dataset, meta_path
from .kmeans import kmeanspp_indices, kmeanspp_seed, lloyd
from .movement import BicoConfig, RayConfig, bico_coreset, raymaker_coreset
from .sampling import GroupingConfig, SamplingConfig, group_coreset, sensitivity_coreset, streamkmpp_coreset

ALGORITHMS = ("sensitivity", "group", "streamkm", "bico", "raymaker")
TIMING_COLUMNS = ("construction_wall_time_s", "eval_wall_time_s")


def build_coreset(name: str, points: PointSet, k: int, size: int, rng) -> WeightedCoreset:
    if name == "sensitivity":
        return sensitivity_coreset(points, SamplingConfig(k, size), rng)
    if name == "group":
        return group_coreset(points, GroupingConfig(k, size), rng)
    if name == "streamkm":
        return streamkmpp_coreset(points, size, rng)
    if name == "bico":
        return bico_coreset(points, BicoConfig(size), k, rng)
    if name == "raymaker":
        return raymaker_coreset(points, RayConfig.for_target(k, size), rng)
    raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")


def optimized_cost(points: PointSet, coreset: WeightedCoreset, k: int, rng) -> float:
    """Cost on the full data of Lloyd run on the coreset from a k-means++ start."""
    cs = PointSet(coreset.points, np.clip(coreset.weights, 0.0, None))
    centers, _ = lloyd(cs, kmeanspp_seed(cs, min(k, cs.n), rng))
    return clustering_cost(points, centers)


@dataclass
class ExperimentConfig:
    dataset: dict
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    k: list = field(default_factory=lambda: [10])
    m: list = field(default_factory=lambda: [200])
    repetitions: int = 10
    seed: int = 0
    output: str | None = None
    preprocessing: dict = field(default_factory=lambda: {"kind": "none"})
    cap_to_n: bool = True
    workers: int = 1
    timeout_s: float | None = None
    evaluation: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
        if self.preprocessing.get("kind", "none") not in ("none", "pca", "random"):
            raise ValueError("preprocessing kind must be none, pca or random")
        EvalConfig(**self.eval_kwargs())

    def eval_kwargs(self) -> dict:
        kw = dict(self.evaluation)
        for key in ("methods", "delta_grid"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return kw

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        raw = yaml.safe_load(Path(path).read_text())
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        if "seed" not in raw:
            raise ValueError(f"{path}: 'seed' is required")
        for key in ("k", "m", "algorithms"):
            if key in raw and not isinstance(raw[key], list):
                raw[key] = [raw[key]]
        return cls(**raw)


@dataclass
class ExperimentRecord:
    dataset: str
    algorithm: str
    preprocessing: str
    k: int
    m: int
    coreset_size: int
    repetition: int
    seed: int
    distortion_max: float = math.nan
    worst_method: str = ""
    distortions: str = ""
    optimized_cost: float = math.nan
    construction_wall_time_s: float = 0.0
    eval_wall_time_s: float = 0.0
    error: str = ""


@dataclass
class Prepared:
    name: str
    preprocessing: str
    points: PointSet
    instance: BenchmarkInstance | None


def prepare_dataset(cfg: ExperimentConfig) -> Prepared:
    spec = cfg.dataset
    instance = None
    if "benchmark" in spec:
        b = spec["benchmark"]
        instance = generate(int(b["k"]), int(b["alpha"]))
        points, name = instance.points, f"benchmark-k{instance.k}-a{instance.alpha}"
    elif "gaussian" in spec:
        g = dict(spec["gaussian"])
        gseed = g.pop("seed", cfg.seed)
        points, _ = gaussian_mixture(rng=np.random.default_rng([gseed, 7]), **g)
        name = "gaussian-" + "-".join(f"{k}{v}" for k, v in sorted(spec["gaussian"].items()))
    elif "path" in spec:
        path = Path(spec["path"])
        meta = spec.get("meta")
        if meta is None and meta_path(path).exists():
            meta = meta_path(path)
        if meta is not None:
            instance = load_benchmark(path, meta)
            points = instance.points
        else:
            points = load_dataset(path, spec.get("format", "csv_dense"))
        name = spec.get("name", path.stem)
    else:
        raise ValueError("dataset needs one of 'benchmark', 'gaussian' or 'path'")

    pre = cfg.preprocessing
    kind = pre.get("kind", "none")
    label = "none"
    if kind != "none":
        r = int(pre["r"])
        prng = np.random.default_rng([cfg.seed, 11])
        model = fit_pca(points, r, rng=prng) if kind == "pca" else fit_random(points.d, r, prng)
        points = project(points, model)
        instance = None
        label = f"{kind}{r}"
    return Prepared(name, label, points, instance)


def _task_rng(seed: int, algorithm: str, k: int, m: int, rep: int) -> np.random.Generator:
    return np.random.default_rng([seed, ALGORITHMS.index(algorithm), k, m, rep])


def run_record(prep: Prepared, cfg: ExperimentConfig, algorithm: str, k: int, m: int, rep: int) -> ExperimentRecord:
    n = prep.points.n
    size = min(m * k, n) if cfg.cap_to_n else m * k
    rec = ExperimentRecord(prep.name, algorithm, prep.preprocessing, k, m, size, rep, cfg.seed)
    rng = _task_rng(cfg.seed, algorithm, k, m, rep)
    try:
        t0 = time.perf_counter()
        coreset = build_coreset(algorithm, prep.points, k, size, rng)
        rec.construction_wall_time_s = time.perf_counter() - t0
        if cfg.timeout_s is not None and rec.construction_wall_time_s > cfg.timeout_s:
            raise TimeoutError(f"construction took {rec.construction_wall_time_s:.1f}s, budget {cfg.timeout_s}s")
        t0 = time.perf_counter()
        ecfg = EvalConfig(**cfg.eval_kwargs())
        if prep.instance is not None:
            report = evaluate_benchmark(prep.instance, coreset, ecfg)
        else:
            report = evaluate_real(prep.points, coreset, k, ecfg, rng)
        rec.optimized_cost = optimized_cost(prep.points, coreset, k, rng)
        rec.eval_wall_time_s = time.perf_counter() - t0
        rec.distortion_max = report.max_distortion
        rec.worst_method = report.worst_method
        rec.distortions = ";".join(f"{meth}={max(v)!r}" for meth, v in sorted(report.distortions.items()))
    except Exception as exc:  # noqa: BLE001 - one failed record must not stop the run
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_records(records, path):
    cols = [f.name for f in fields(ExperimentRecord)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow([_fmt(getattr(r, c)) for c in cols])


def read_records(path) -> list[ExperimentRecord]:
    types = {f.name: f.type for f in fields(ExperimentRecord)}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {}
            for key, raw in row.items():
                t = types[key]
                vals[key] = int(raw) if t == "int" else float(raw) if t == "float" else raw
            out.append(ExperimentRecord(**vals))
    return out


SUMMARY_COLUMNS = ("dataset", "preprocessing", "algorithm", "k", "m", "runs", "failed",
                   "distortion_mean", "distortion_std", "cost_mean", "cost_std",
                   "construction_time_mean_s", "eval_time_mean_s")


def _mean_std(vals):
    if not vals:
        return math.nan, math.nan
    a = np.array(vals, dtype=np.float64)
    return float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0


def summarize(records) -> list[dict]:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.dataset, r.preprocessing, r.algorithm, r.k, r.m), []).append(r)
    rows = []
    for key in sorted(groups, key=lambda t: (t[0], t[1], ALGORITHMS.index(t[2]), t[3], t[4])):
        rs = groups[key]
        ok = [r for r in rs if not r.error]
        dm, ds = _mean_std([r.distortion_max for r in ok])
        cm, cs = _mean_std([r.optimized_cost for r in ok])
        rows.append(dict(zip(SUMMARY_COLUMNS, (*key, len(ok), len(rs) - len(ok), dm, ds, cm, cs,
                                                _mean_std([r.construction_wall_time_s for r in ok])[0],
                                                _mean_std([r.eval_wall_time_s for r in ok])[0]))))
    return rows


def write_summary(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])


def _canonical(rec: ExperimentRecord):
    return (ALGORITHMS.index(rec.algorithm), rec.k, rec.m, rec.repetition)


def _run_task(args):
    prep, cfg, alg, k, m, rep = args
    return run_record(prep, cfg, alg, k, m, rep)


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Run every (algorithm, k, m, repetition) and write records.csv and summary.csv."""
    prep = prepare_dataset(cfg)
    tasks = [(prep, cfg, a, k, m, rep) for a in cfg.algorithms for k in cfg.k for m in cfg.m
             for rep in range(cfg.repetitions)]
    out_dir = Path(cfg.output) if cfg.output else None
    partial = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        partial = open(out_dir / "records.partial.csv", "w")
        partial.write(",".join(f.name for f in fields(ExperimentRecord)) + "\n")

    records = []

    def done(rec):
        records.append(rec)
        if partial is not None:
            partial.write(",".join(_fmt(v) for v in asdict(rec).values()) + "\n")
            partial.flush()

    try:
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for rec in pool.map(_run_task, tasks):
                    done(rec)
        else:
            for t in tasks:
                done(_run_task(t))
    finally:
        if partial is not None:
            partial.close()

    records.sort(key=_canonical)
    if out_dir is not None:
        write_records(records, out_dir / "records.csv")
        write_summary(summarize(records), out_dir / "summary.csv")
        (out_dir / "records.partial.csv").unlink()
    return records


def cost_curve(points: PointSet, k_list, seeds=5, seed: int = 0, max_iters: int = 100) -> list[dict]:
    """Best-of-seeds Lloyd cost per k, built on nested k-means++ prefixes.

    For each seed one k-means++ sequence of ``max(k_list)`` centers is drawn.
    The solution for each k starts either from the first k seeds or from the
    previous k's solution extended by the next seeds, whichever ends lower,
    so every per-seed curve (and hence the best-of-seeds curve) is
    non-increasing in k.
    """
    ks = sorted(set(int(k) for k in k_list))
    if not ks:
        raise ValueError("empty k list")
    if ks[0] < 1 or ks[-1] > points.n:
        raise ValueError(f"k values must lie in [1, {points.n}]")
    n_seeds = seeds if isinstance(seeds, int) else len(seeds)
    best = {k: math.inf for k in ks}
    seeding = {k: math.inf for k in ks}
    for s in range(n_seeds):
        rng = np.random.default_rng([seed, s])
        idx = kmeanspp_indices(points, ks[-1], rng)
        prev_k, prev_C, prev_cost = 0, None, math.inf
        for k in ks:
            init = CenterSet(points.data[idx[:k]])
            seeding[k] = min(seeding[k], clustering_cost(points, init))
            C, c = lloyd(points, init, max_iters=max_iters)
            if prev_C is not None:
                ext = CenterSet(np.vstack([prev_C.centers, points.data[idx[prev_k:k]]]))
                C2, c2 = lloyd(points, ext, max_iters=max_iters)
                if c2 < c:
                    C, c = C2, c2
            c = min(c, prev_cost)
            prev_k, prev_C, prev_cost = k, C, c
            best[k] = min(best[k], c)
    return [{"k": k, "cost": best[k], "seeding_cost": seeding[k]} for k in ks]


def write_cost_curve(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "cost", "seeding_cost"])
        for r in rows:
            w.writerow([r["k"], repr(r["cost"]), repr(r["seeding_cost"])])
