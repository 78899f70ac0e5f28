"""Command-line front end: simulate | fit | eval | bench.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BenchGrid, run_bench
from .core import precision_to_pcor
from .estimator import FitConfig, fit_ggm
from .exceptions import (
    DataFormatError,
    DegenerateInputError,
    DegenerateResidualError,
    DimensionalityError,
    InvalidParameterError,
    NonConvergenceError,
    NonPDConstructionError,
    ProjggmError,
    SamplerDivergenceError,
    SingularMatrixError,
)
from .generate import STRUCTURES, generate, sample_mvn
from .io import (
    read_data_csv,
    read_edges_csv,
    read_matrix_csv,
    write_data_csv,
    write_edges_csv,
    write_khat_csv,
    write_manifest,
    write_matrix_csv,
    write_selection_path_csv,
)
from .metrics import edge_metrics, loss_report

USAGE_ERROR, DATA_ERROR, NUMERICAL_ERROR = 1, 2, 3

_DATA_ERRORS = (DataFormatError, DegenerateInputError, DimensionalityError)
_NUMERICAL_ERRORS = (
    SingularMatrixError,
    NonPDConstructionError,
    SamplerDivergenceError,
    NonConvergenceError,
    DegenerateResidualError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _add_fit_flags(parser):
    parser.add_argument("--method", choices=("auto", "horseshoe", "bayes-boot"),
                        default="auto")
    parser.add_argument("--tau0", type=float, default=1.0)
    parser.add_argument("--p0", type=float, default=None,
                        help="expected edge count used to derive tau0")
    parser.add_argument("--warmup", type=int, default=1000)
    parser.add_argument("--draws", type=int, default=1000)
    parser.add_argument("--delta-u-frac", type=float, default=0.10)
    parser.add_argument("--prob-threshold", type=float, default=0.10)
    parser.add_argument("--bootstrap-draws", type=int, default=1000)
    parser.add_argument("--max-size", type=int, default=None)
    parser.add_argument("--eps-pd", type=float, default=1e-6)
    parser.add_argument("--exact-loo", action="store_true")
    parser.add_argument("--no-standardize", action="store_true",
                        help="trust the input to be standardized already")


def _config_from_args(args) -> FitConfig:
    return FitConfig(
        method=args.method,
        tau0=args.tau0,
        p0=args.p0,
        warmup=args.warmup,
        draws=args.draws,
        delta_u_frac=args.delta_u_frac,
        prob_threshold=args.prob_threshold,
        bootstrap_draws=args.bootstrap_draws,
        max_size=args.max_size,
        eps_pd=args.eps_pd,
        exact_loo=args.exact_loo,
        seed=args.seed,
        threads=args.threads,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="projggm", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic truth and dataset")
    sim.add_argument("--structure", choices=STRUCTURES, required=True)
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--rho", type=float, default=0.7)
    sim.add_argument("--lag1", type=float, default=0.5)
    sim.add_argument("--lag2", type=float, default=0.25)
    sim.add_argument("--edge-prob", type=float, default=0.1)
    sim.add_argument("--df", type=int, default=3)
    sim.add_argument("--out-dir", default=".")

    fit = sub.add_parser("fit", help="fit the graphical model to a CSV")
    fit.add_argument("--data", required=True)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--threads", type=int, default=1)
    fit.add_argument("--out-dir", default=".")
    _add_fit_flags(fit)

    ev = sub.add_parser("eval", help="score an estimate against a truth")
    ev.add_argument("--truth-omega", required=True)
    ev.add_argument("--truth-edges", required=True)
    ev.add_argument("--est-omega", required=True)
    ev.add_argument("--est-pcor", required=True)
    ev.add_argument("--est-edges", required=True)
    ev.add_argument("--out", default="metrics.csv")

    bench = sub.add_parser("bench", help="run a simulation grid from a grid file")
    bench.add_argument("--grid", required=True)
    bench.add_argument("--out-dir", default="bench")
    return parser


def _structure_params(args) -> dict:
    if args.structure == "ar1":
        return {"rho": args.rho}
    if args.structure == "ar2":
        return {"lag1": args.lag1, "lag2": args.lag2}
    if args.structure == "random":
        return {"edge_prob": args.edge_prob, "df": args.df}
    if args.structure == "cluster":
        return {"edge_prob": args.edge_prob, "df": args.df}
    return {"df": args.df}


def cmd_simulate(args) -> int:
    params = _structure_params(args)
    model = generate(args.structure, args.p, seed=args.seed, **params)
    data = sample_mvn(model, args.n, seed=np.random.SeedSequence(
        entropy=args.seed, spawn_key=(1,)))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_data_csv(out / "data.csv", data)
    write_matrix_csv(out / "omega_true.csv", model.omega, data.names)
    write_edges_csv(out / "edges_true.csv", model.adjacency, names=data.names)
    write_manifest(out / "manifest.json", {
        "version": __version__,
        "command": "simulate",
        "structure": args.structure,
        "p": args.p,
        "n": args.n,
        "seed": args.seed,
        "parameters": params,
        "true_edge_count": len(model.adjacency),
    })
    print(f"wrote {out / 'data.csv'} ({args.n} x {args.p}, "
          f"{len(model.adjacency)} true edges)")
    return 0


def cmd_fit(args) -> int:
    data = read_data_csv(args.data)
    if args.no_standardize:
        data = type(data)(data.values, data.names, standardized=True)
    config = _config_from_args(args)
    started = time.time()
    graph, paths, manifest = fit_ggm(data, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_edges_csv(out / "edges.csv", graph.edges, names=data.names,
                    pcor=graph.pcor, omega=graph.omega_hat)
    write_matrix_csv(out / "pcor.csv", graph.pcor, data.names)
    write_matrix_csv(out / "omega.csv", graph.omega_hat, data.names)
    path_dir = out / "paths"
    path_dir.mkdir(exist_ok=True)
    for sel in paths:
        write_selection_path_csv(path_dir / f"node_{sel.node + 1:03d}.csv", sel)
    write_khat_csv(out / "khat.csv", paths)
    manifest["command"] = "fit"
    manifest["data_file"] = str(args.data)
    manifest["standardize"] = not args.no_standardize
    write_manifest(out / "manifest.json", manifest)
    rep = graph.pd_report
    print(f"edges: {len(graph.edges)}")
    print(f"pd correction: corrected={rep.corrected} iterations={rep.iterations} "
          f"min_eig {rep.min_eig_before:.3e} -> {rep.min_eig_after:.3e}")
    print(f"wall time: {time.time() - started:.1f}s")
    return 0


def cmd_eval(args) -> int:
    truth_omega, _ = read_matrix_csv(args.truth_omega, symmetric=True)
    truth_edges = read_edges_csv(args.truth_edges)
    est_omega, _ = read_matrix_csv(args.est_omega, symmetric=True)
    est_pcor, _ = read_matrix_csv(args.est_pcor, symmetric=True)
    est_edges = read_edges_csv(args.est_edges)
    p = truth_omega.shape[0]
    losses = loss_report(truth_omega, est_omega, precision_to_pcor(truth_omega), est_pcor)
    em = edge_metrics(truth_edges, est_edges, p)
    row = {
        "p": p,
        "kl": losses.kl, "ql": losses.ql, "l2": losses.l2, "mse": losses.mse_pcor,
        "sp": em.sp, "sn": em.sn, "mcc": em.mcc, "f1": em.f1,
        "tp": em.tp, "fp": em.fp, "tn": em.tn, "fn": em.fn,
    }
    with Path(args.out).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(row))
        writer.writeheader()
        writer.writerow({k: repr(v) if isinstance(v, float) else v
                         for k, v in row.items()})
    print(",".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                   for k, v in row.items()))
    return 0


def cmd_bench(args) -> int:
    grid = BenchGrid.from_file(args.grid)
    result = run_bench(grid, args.out_dir)
    print(f"{len(result['rows'])} replicates, {len(result['failures'])} failures, "
          f"summary in {Path(args.out_dir) / 'summary.csv'}")
    for failure in result["failures"]:
        print(f"FAILED {failure}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "fit": cmd_fit,
        "eval": cmd_eval,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except InvalidParameterError as exc:
        print(f"projggm: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (*_DATA_ERRORS, OSError) as exc:
        print(f"projggm: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (_NUMERICAL_ERRORS, FloatingPointError) as exc:
        print(f"projggm: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except ProjggmError as exc:
        print(f"projggm: error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
