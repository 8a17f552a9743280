"""Dataset, coreset and benchmark-metadata files.

Dense datasets are comma-separated text, one point per line, with an
optional header line.  Floats are written with 17 significant digits so a
save/load round trip is bit-exact.  Benchmark metadata lives next to the
dataset in ``<dataset>.meta`` as ``key = value`` lines::

    k = 3
    alpha = 2
    planted.0 = 0,1,2,0,1,2,0,1,2
    planted.1 = 0,0,0,1,1,1,2,2,2
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .benchmark import BenchmarkInstance
from .core import PointSet, WeightedCoreset

FORMATS = ("csv_dense", "svmlight_sparse")


class DatasetError(ValueError):
    pass


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _read_dense(path: Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(t.strip() for t in r)]
    if not rows:
        raise DatasetError(f"{path}: empty file")
    if not all(_is_number(t) for t in rows[0]):
        rows = rows[1:]
        if not rows:
            raise DatasetError(f"{path}: header but no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DatasetError(f"{path}: ragged row {i + 1}: expected {width} fields, found {len(row)}")
        for j, tok in enumerate(row):
            try:
                out[i, j] = float(tok)
            except ValueError:
                raise DatasetError(f"{path}: non-numeric field {tok!r} in row {i + 1}, column {j + 1}") from None
    return out


def _read_svmlight(path: Path) -> np.ndarray:
    entries = []
    max_index = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            row = {}
            for tok in line.split():
                if ":" not in tok:
                    # leading label column
                    continue
                idx, _, val = tok.partition(":")
                try:
                    i, v = int(idx), float(val)
                except ValueError:
                    raise DatasetError(f"{path}: non-numeric field {tok!r} on line {lineno}") from None
                if i < 1:
                    raise DatasetError(f"{path}: feature index {i} on line {lineno} is not 1-based")
                row[i] = v
                max_index = max(max_index, i)
            entries.append(row)
    if not entries:
        raise DatasetError(f"{path}: empty file")
    if max_index == 0:
        raise DatasetError(f"{path}: no index:value pairs")
    out = np.zeros((len(entries), max_index))
    for r, row in enumerate(entries):
        for i, v in row.items():
            out[r, i - 1] = v
    return out


def load_dataset(path, fmt: str = "csv_dense") -> PointSet:
    path = Path(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
    if not path.exists():
        raise DatasetError(f"{path}: no such file")
    X = _read_dense(path) if fmt == "csv_dense" else _read_svmlight(path)
    try:
        return PointSet(X)
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}") from None


def save_dataset(points, path, header: bool = False):
    X = points.data if isinstance(points, PointSet) else np.asarray(points)
    with open(path, "w") as fh:
        if header:
            fh.write(",".join(f"x{j}" for j in range(X.shape[1])) + "\n")
        np.savetxt(fh, X, fmt="%.17g", delimiter=",")


def meta_path(dataset_path) -> Path:
    return Path(str(dataset_path) + ".meta")


def save_benchmark(instance: BenchmarkInstance, path):
    save_dataset(instance.matrix, path)
    lines = [f"k = {instance.k}", f"alpha = {instance.alpha}"]
    for a in range(instance.alpha):
        lines.append(f"planted.{a} = " + ",".join(map(str, instance.planted[a])))
    meta_path(path).write_text("\n".join(lines) + "\n")


def read_meta(path) -> dict:
    meta = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DatasetError(f"{path}: line {lineno} is not 'key = value'")
        meta[key.strip()] = value.strip()
    return meta


def load_benchmark(path, meta=None) -> BenchmarkInstance:
    """Read a dataset and its metadata sidecar back into a BenchmarkInstance."""
    meta = read_meta(meta or meta_path(path))
    try:
        k, alpha = int(meta["k"]), int(meta["alpha"])
    except KeyError as exc:
        raise DatasetError(f"benchmark metadata lacks {exc.args[0]!r}") from None
    X = load_dataset(path).data
    planted = np.array([[int(v) for v in meta[f"planted.{a}"].split(",")] for a in range(alpha)],
                       dtype=np.int64)
    if planted.shape[1] != X.shape[0] or X.shape[1] != alpha * k:
        raise DatasetError(f"{path}: metadata (k={k}, alpha={alpha}) does not match a {X.shape} matrix")
    X.setflags(write=False)
    planted.setflags(write=False)
    return BenchmarkInstance(k, alpha, X, planted)


def save_coreset(coreset: WeightedCoreset, path):
    """Columns: weight, source index (-1 when synthetic), coordinates."""
    src = coreset.source_indices if coreset.source_indices is not None else np.full(coreset.m, -1)
    with open(path, "w") as fh:
        fh.write("weight,source," + ",".join(f"x{j}" for j in range(coreset.d)) + "\n")
        for w, s, p in zip(coreset.weights, src, coreset.points):
            fh.write(f"{float(w)!r},{int(s)}," + ",".join(repr(float(v)) for v in p) + "\n")


def load_coreset(path) -> WeightedCoreset:
    M = _read_dense(Path(path))
    if M.shape[1] < 3:
        raise DatasetError(f"{path}: coreset file needs weight, source and at least one coordinate")
    src = M[:, 1].astype(np.int64)
    return WeightedCoreset(M[:, 2:], M[:, 0], None if np.all(src < 0) else src)
