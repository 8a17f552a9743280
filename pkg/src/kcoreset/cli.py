"""Command line entry point: ``kcoreset <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .benchmark import CompositeSpec, composite, generate
from .core import PointSet
from .dimred import explained_variance, fit_pca, fit_random, project
from .evaluation import METHODS, EvalConfig, evaluate_benchmark, evaluate_real
from .experiment import (ALGORITHMS, ExperimentConfig, build_coreset, cost_curve, run_experiment,
                         write_cost_curve)
from .io import (FORMATS, DatasetError, load_benchmark, load_coreset, load_dataset, meta_path,
                 save_benchmark, save_coreset, save_dataset)


def parse_composite(text: str) -> CompositeSpec:
    """``"10x3,5x4"`` -> blocks [(10, 3), (5, 4)]."""
    blocks = []
    for part in text.split(","):
        try:
            k, alpha = part.lower().split("x")
            blocks.append((int(k), int(alpha)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad composite block {part!r}; expected KxALPHA") from None
    return CompositeSpec(blocks)


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _load_points(args) -> PointSet:
    return load_dataset(args.dataset, args.format)


def cmd_gen_benchmark(args):
    out = Path(args.out)
    if args.composite:
        rng = None if args.seed is None else np.random.default_rng(args.seed)
        points = composite(parse_composite(args.composite), rng)
        save_dataset(points, out)
        print(f"wrote composite {points.n}x{points.d} to {out}")
        return
    if args.k is None or args.alpha is None:
        raise SystemExit("gen-benchmark needs --k and --alpha (or --composite)")
    inst = generate(args.k, args.alpha)
    save_benchmark(inst, out)
    print(f"wrote benchmark {inst.n}x{inst.d} to {out} (metadata {meta_path(out)})")


def cmd_build_coreset(args):
    points = _load_points(args)
    size = args.m * args.k
    if args.cap_to_n:
        size = min(size, points.n)
    coreset = build_coreset(args.algo, points, args.k, size, np.random.default_rng(args.seed))
    save_coreset(coreset, args.out)
    print(f"wrote {args.algo} coreset with {coreset.m} points (target {size}, "
          f"total weight {coreset.total_weight!r}) to {args.out}")


def cmd_evaluate(args):
    meta = args.benchmark_meta
    if meta is None and meta_path(args.dataset).exists():
        meta = meta_path(args.dataset)
    coreset = load_coreset(args.coreset)
    cfg = EvalConfig(candidates_per_method=args.candidates, methods=tuple(args.methods), domain=args.domain)
    if meta is not None:
        report = evaluate_benchmark(load_benchmark(args.dataset, meta), coreset, cfg)
    else:
        if args.k is None:
            raise SystemExit("evaluate needs --k for non-benchmark data")
        report = evaluate_real(_load_points(args), coreset, args.k, cfg, np.random.default_rng(args.seed))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["probe", "distortion"])
    if args.verbose:
        for label, value in report.probes:
            w.writerow([label, repr(value)])
    for method in sorted(report.distortions):
        w.writerow([f"max:{method}", repr(report.method_max(method))])
    w.writerow(["max", repr(report.max_distortion)])


def cmd_experiment(args):
    cfg = ExperimentConfig.from_file(args.config)
    if args.output:
        cfg.output = args.output
    if args.workers:
        cfg.workers = args.workers
    if cfg.output is None:
        raise SystemExit("experiment needs an output directory (config 'output' or --output)")
    records = run_experiment(cfg)
    failed = sum(1 for r in records if r.error)
    print(f"{len(records)} records ({failed} failed) written to {cfg.output}")


def cmd_cost_curve(args):
    points = _load_points(args)
    rows = cost_curve(points, _int_list(args.k_list), args.seeds, args.seed)
    if args.out:
        write_cost_curve(rows, args.out)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["k", "cost", "seeding_cost"])
        for r in rows:
            w.writerow([r["k"], repr(r["cost"]), repr(r["seeding_cost"])])


def cmd_project(args):
    points = _load_points(args)
    rng = np.random.default_rng(args.seed)
    model = fit_pca(points, args.r, rng=rng) if args.kind == "pca" else fit_random(points.d, args.r, rng)
    save_dataset(project(points, model), args.out)
    if args.model:
        model.save(args.model)
    if args.kind == "pca":
        captured, total = explained_variance(points, model)
        print(f"explained variance {captured / total if total else 1.0:.6f}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kcoreset", description="k-means coreset construction and evaluation")
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True)

    def dataset_args(sp):
        sp.add_argument("--dataset", required=True)
        sp.add_argument("--format", choices=FORMATS, default="csv_dense")

    g = sub.add_parser("gen-benchmark", help="write a benchmark instance and its metadata sidecar")
    g.add_argument("--k", type=int)
    g.add_argument("--alpha", type=int)
    g.add_argument("--composite", help="blocks as KxALPHA[,KxALPHA...]; writes the dataset only")
    g.add_argument("--seed", type=int, help="row shuffle seed for --composite")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_benchmark)

    b = sub.add_parser("build-coreset", help="build a coreset of size m*k")
    dataset_args(b)
    b.add_argument("--algo", choices=ALGORITHMS, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--no-cap", dest="cap_to_n", action="store_false", help="do not cap m*k at n")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build_coreset)

    e = sub.add_parser("evaluate", help="measure the distortion of a coreset file")
    dataset_args(e)
    e.add_argument("--coreset", required=True)
    e.add_argument("--benchmark-meta", help="metadata sidecar; <dataset>.meta is used when present")
    e.add_argument("--k", type=int)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--candidates", type=int, default=5)
    e.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    e.add_argument("--domain", choices=("coreset", "data"), default="coreset")
    e.add_argument("-v", "--verbose", action="store_true", help="print every probe")
    e.set_defaults(func=cmd_evaluate)

    x = sub.add_parser("experiment", help="run a YAML-configured experiment grid")
    x.add_argument("--config", required=True)
    x.add_argument("--output")
    x.add_argument("--workers", type=int)
    x.set_defaults(func=cmd_experiment)

    c = sub.add_parser("cost-curve", help="best-of-seeds Lloyd cost for a list of k")
    dataset_args(c)
    c.add_argument("--k-list", required=True, help="comma-separated, e.g. 5,10,20")
    c.add_argument("--seeds", type=int, default=5)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_cost_curve)

    pr = sub.add_parser("project", help="PCA or Gaussian random projection of a dataset")
    dataset_args(pr)
    pr.add_argument("--kind", choices=("pca", "random"), required=True)
    pr.add_argument("--r", type=int, required=True)
    pr.add_argument("--seed", type=int, required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--model", help="also save the projection as .npz")
    pr.set_defaults(func=cmd_project)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (DatasetError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
