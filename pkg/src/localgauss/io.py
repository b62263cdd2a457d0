"""Reading point files and writing labels, reports, and model artifacts.

Floats are written with repr (and by json.dump, which does the same), so
every value round-trips exactly through 64-bit parsing and write -> read ->
write is byte stable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .assign import Labeling
from .errors import DataError
from .gaussian import RIDGE_BASE, GaussianModel
from .pipeline import ClusterConfig, RunReport
from .spatial import PointSet

SCHEMA_VERSION = 1


def _parse_cell(cell: str, line: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"non-numeric value {cell!r} at line {line}, column {col + 1}")
    if not np.isfinite(value):
        raise DataError(f"non-finite value {cell!r} at line {line}, column {col + 1}")
    return value


def _read_csv(path: Path) -> PointSet:
    rows = []
    width = None
    first = True
    with open(path, newline="") as fh:
        for line_no, cells in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in cells]
            if not cells or all(c == "" for c in cells):
                continue
            if first:
                first = False
                try:
                    [float(c) for c in cells]
                except ValueError:
                    continue  # single header row, detected by non-numeric cells
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise DataError(
                    f"ragged row at line {line_no}: expected {width} columns, got {len(cells)}"
                )
            rows.append([_parse_cell(c, line_no, i) for i, c in enumerate(cells)])
    if not rows:
        raise DataError(f"no data rows in {path}")
    return PointSet(np.asarray(rows, dtype=np.float64))


def _read_json(path: Path) -> PointSet:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise DataError(f"{path} must hold a non-empty array of coordinate rows")
    width = None
    rows = []
    for r, row in enumerate(data):
        if not isinstance(row, list):
            raise DataError(f"row {r} is not an array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(f"ragged row {r}: expected {width} values, got {len(row)}")
        for c, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
                raise DataError(f"non-numeric value at row {r}, column {c + 1}")
        rows.append([float(v) for v in row])
    return PointSet(np.asarray(rows, dtype=np.float64))


def read_points(path, fmt: str | None = None) -> PointSet:
    """Read points from CSV or a JSON array of arrays.

    fmt None sniffs by extension (.json means JSON, anything else CSV).
    CSV may carry one header row, detected by a non-numeric first line.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" else "csv"
    if fmt == "csv":
        return _read_csv(path)
    if fmt == "json":
        return _read_json(path)
    raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")


def write_points(path, points: PointSet) -> None:
    """Plain numeric CSV, one point per row, repr precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in points.points:
            writer.writerow([repr(float(v)) for v in row])


def write_labels(path, labeling: Labeling) -> None:
    """CSV of point_id,cluster_id,p_value ordered by point id; DROPPED is -1."""
    top = labeling.top_density()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point_id", "cluster_id", "p_value"])
        for i, label in enumerate(labeling.labels):
            writer.writerow([i, int(label), repr(float(top[i]))])


def read_labels(path) -> np.ndarray:
    """Labels column of a file written by write_labels."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return np.asarray([int(row[1]) for row in reader], dtype=np.int64)


def write_report(path, report: RunReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(include_timings=True), fh, indent=2)
        fh.write("\n")


@dataclass
class ModelArtifact:
    """Everything needed to reuse a fit: models, config echo, run summary."""

    schema_version: int
    k: int
    config: dict
    models: list
    summary: dict


def save_model(
    path, models: list, config: ClusterConfig, report: RunReport | None = None
) -> None:
    """Write the model artifact as schema-versioned JSON.

    The summary holds structural counts only; wall-clock timings stay out
    so artifacts from identical fits are byte identical.
    """
    clusters = []
    for i, m in enumerate(models):
        clusters.append(
            {
                "id": i,
                "mu": [float(v) for v in m.mu],
                "sigma": [float(v) for v in np.asarray(m.sigma).ravel()],
                "iterations": m.iterations,
                "converged": m.converged,
                "degenerate": m.degenerate,
                "weight_underflow": m.weight_underflow,
            }
        )
    cfg = asdict(config)
    del cfg["threads"]  # execution resource, not part of the fit
    doc = {
        "schema_version": SCHEMA_VERSION,
        "k": int(models[0].k) if models else 0,
        "config": cfg,
        "clusters": clusters,
        "summary": report.summary() if report is not None else {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_model(path) -> ModelArtifact:
    """Rebuild models from an artifact; mu and sigma parse back bit exact."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DataError(
            f"unsupported model schema {doc.get('schema_version')!r}; expected {SCHEMA_VERSION}"
        )
    k = int(doc["k"])
    ridge = float(doc.get("config", {}).get("ridge", RIDGE_BASE))
    models = []
    for c in doc["clusters"]:
        mu = np.asarray(c["mu"], dtype=np.float64)
        sigma = np.asarray(c["sigma"], dtype=np.float64).reshape(k, k)
        models.append(
            GaussianModel.from_covariance(
                mu,
                sigma,
                ridge=ridge,
                iterations=int(c.get("iterations", 0)),
                converged=bool(c.get("converged", True)),
                degenerate=bool(c.get("degenerate", False)),
                weight_underflow=bool(c.get("weight_underflow", False)),
            )
        )
    return ModelArtifact(
        schema_version=int(doc["schema_version"]),
        k=k,
        config=doc.get("config", {}),
        models=models,
        summary=doc.get("summary", {}),
    )
