"""Command line interface: fit, gen, and bench subcommands.

Exit codes: 0 success, 1 usage error, 2 data error, 3 no clusters found.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .errors import DataError, NoClustersError, SeedBudgetError
from .gaussian import DENSITY_FORMS
from .pipeline import ClusterConfig, run
from .testkit import BlobSpec, gen_blobs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_CLUSTERS = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="localgauss", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fit = sub.add_parser("fit", help="cluster a point file and write model/labels")
    fit.add_argument("--input", required=True, help="CSV or JSON point file")
    fit.add_argument("--ds", type=float, required=True,
                     help="seed spacing and local window side length")
    fit.add_argument("--l", type=int, default=0, dest="min_count",
                     help="seed count floor (default 0)")
    fit.add_argument("--eps", type=float, default=0.01,
                     help="convergence tolerance for both loops (default 0.01)")
    fit.add_argument("--lp", type=float, default=None,
                     help="density cutoff filter")
    fit.add_argument("--lpct", type=float, default=None,
                     help="per-cluster percent trim filter, in [0, 1)")
    fit.add_argument("--ls", type=float, default=None,
                     help="top-two density separation filter, in [0, 1]")
    fit.add_argument("--density-form", choices=DENSITY_FORMS, default="standard")
    fit.add_argument("--threads", type=int, default=0,
                     help="worker threads; 0 means all cores (default 0)")
    fit.add_argument("--model-out", default=None,
                     help="model JSON path (default <input>.model.json)")
    fit.add_argument("--labels-out", default=None,
                     help="labels CSV path (default <input>.labels.csv)")
    fit.add_argument("--report-out", default=None,
                     help="run report JSON path; also renders a PNG figure next to it")

    gen = sub.add_parser("gen", help="generate synthetic Gaussian blobs")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--k", type=int, required=True, help="dimension")
    gen.add_argument("--clusters", required=True,
                     help="semicolon list of blobs, each 'm1,..,mK:std:count'")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--truth-out", default=None,
                     help="optional ground-truth labels CSV")

    bench = sub.add_parser("bench", help="time the pipeline across data sizes")
    bench.add_argument("--sizes", default="10000,20000,40000",
                       help="comma list of point counts")
    bench.add_argument("--k", type=int, default=2)
    bench.add_argument("--blobs", type=int, default=5)
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", required=True,
                       help="CSV of per-step median milliseconds; PNG lands next to it")
    return parser


def _cmd_fit(args) -> int:
    try:
        points = io.read_points(args.input)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    try:
        config = ClusterConfig(
            window=args.ds,
            min_count=args.min_count,
            centroid_tol=args.eps,
            cov_tol=args.eps,
            density_form=args.density_form,
            min_density=args.lp,
            trim_fraction=args.lpct,
            min_separation=args.ls,
            threads=args.threads,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    t0 = time.perf_counter()
    try:
        models, labeling, report = run(points, config)
    except NoClustersError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CLUSTERS
    except (SeedBudgetError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    elapsed = time.perf_counter() - t0

    stem = Path(args.input)
    model_out = Path(args.model_out) if args.model_out else stem.with_suffix(stem.suffix + ".model.json")
    labels_out = Path(args.labels_out) if args.labels_out else stem.with_suffix(stem.suffix + ".labels.csv")
    io.save_model(model_out, models, config, report)
    io.write_labels(labels_out, labeling)

    print(f"{points.n} points, {points.k} axes: {report.n_clusters} cluster(s) "
          f"in {elapsed:.2f} s ({report.seeds_total} seeds, "
          f"{report.seeds_after_prune} past the floor)")
    for stat in report.clusters:
        print(f"  cluster {stat.id}: {stat.count} members, "
              f"{stat.centroid_iterations} center steps, "
              f"{stat.cov_iterations} covariance steps")
    dropped = labeling.n_dropped
    if dropped:
        print(f"  dropped by filters: {dropped}")
    print(f"model: {model_out}")
    print(f"labels: {labels_out}")

    if args.report_out:
        report_out = Path(args.report_out)
        io.write_report(report_out, report)
        from . import plots

        figure_out = report_out.with_suffix(".png")
        plots.plot_clusters(points, labeling, models, figure_out)
        print(f"report: {report_out}")
        print(f"figure: {figure_out}")
    return EXIT_OK


def _parse_cluster_spec(text: str, k: int) -> list:
    specs = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) != 3:
            raise ValueError(f"bad blob spec {part!r}; want 'm1,..,mK:std:count'")
        mean = [float(v) for v in pieces[0].split(",")]
        if len(mean) != k:
            raise ValueError(f"blob mean {pieces[0]!r} has {len(mean)} values, expected {k}")
        std = float(pieces[1])
        if std <= 0:
            raise ValueError(f"blob std must be positive, got {std}")
        count = int(pieces[2])
        specs.append(BlobSpec.isotropic(mean, std, count))
    if not specs:
        raise ValueError("no blobs given")
    return specs


def _cmd_gen(args) -> int:
    try:
        specs = _parse_cluster_spec(args.clusters, args.k)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    points, truth = gen_blobs(args.seed, specs)
    io.write_points(args.out, points)
    print(f"wrote {points.n} points ({points.k} axes, {len(specs)} blobs) to {args.out}")
    if args.truth_out:
        with open(args.truth_out, "w") as fh:
            fh.write("point_id,blob_id\n")
            for i, t in enumerate(truth):
                fh.write(f"{i},{int(t)}\n")
        print(f"wrote ground truth to {args.truth_out}")
    return EXIT_OK


def _bench_specs(n: int, k: int, blobs: int) -> list:
    # blobs on a circle with unit sigma and pairwise spacing 10
    sep = 10.0
    radius = sep / (2.0 * np.sin(np.pi / blobs)) if blobs > 1 else 0.0
    counts = [n // blobs] * blobs
    counts[0] += n - sum(counts)
    specs = []
    for b in range(blobs):
        angle = 2.0 * np.pi * b / blobs
        mean = np.zeros(k)
        mean[0] = radius * np.cos(angle)
        if k > 1:
            mean[1] = radius * np.sin(angle)
        specs.append(BlobSpec.isotropic(mean, 1.0, counts[b]))
    return specs


def _cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as exc:
        print(f"error: bad --sizes: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not sizes:
        print("error: --sizes is empty", file=sys.stderr)
        return EXIT_USAGE

    step_names = ["index", "seed", "converge", "fit", "assign", "filter"]
    rows = []
    for n in sizes:
        specs = _bench_specs(n, args.k, args.blobs)
        points, _ = gen_blobs(args.seed, specs)
        config = ClusterConfig(window=4.0, min_count=10, threads=1)
        samples = {s: [] for s in step_names + ["total"]}
        for _ in range(args.repeats):
            _, _, report = run(points, config)
            total = 0.0
            for s in step_names:
                ms = report.step_seconds[s] * 1000.0
                samples[s].append(ms)
                total += ms
            samples["total"].append(total)
        row = {"n": n}
        for s in step_names + ["total"]:
            row[s] = statistics.median(samples[s])
        rows.append(row)
        print(f"n={n}: total {row['total']:.1f} ms " +
              " ".join(f"{s}={row[s]:.1f}" for s in step_names))

    out = Path(args.out)
    with open(out, "w") as fh:
        fh.write(",".join(["n"] + [f"{s}_ms" for s in step_names + ["total"]]) + "\n")
        for row in rows:
            fh.write(",".join([str(row["n"])] +
                              [f"{row[s]:.3f}" for s in step_names + ["total"]]) + "\n")
    from . import plots

    figure_out = out.with_suffix(".png")
    plots.plot_scaling(rows, figure_out)
    print(f"bench table: {out}")
    print(f"bench figure: {figure_out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    if args.command == "fit":
        return _cmd_fit(args)
    if args.command == "gen":
        return _cmd_gen(args)
    if args.command == "bench":
        return _cmd_bench(args)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
