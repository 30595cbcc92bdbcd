"""Command-line front end.

Subcommands cover the full pipeline: ``synth`` writes reproducible toy
datasets, ``landmarks`` exports selected landmark coordinates,
``fit`` learns and saves an inductive model, ``embed`` applies a saved
model to new samples, ``evaluate`` runs the comparison harness, and
``select-lambda`` prints the per-candidate selection table.

Exit codes: 0 success, 2 input or parse error, 3 numerical failure.
"""

import argparse
import sys

import numpy as np

from .datasets import load_dataset, make_blobs, make_two_moons, sample_labeled
from .dictlearn import LearnConfig, SideInformation, fit
from .errors import InputError, NumericalError
from .experiment import (build_core_for, default_landmark_count, emit_report,
                         experiment_config_from_file, run_experiment)
from .inductive import InductiveModel, embed, load, save
from .kernels import KernelParams, bandwidth_heuristic
from .landmarks import KMeansConfig, select_kmeans, select_random
from .modelselect import DEFAULT_LAMBDA_GRID, select_lambda
from .nystrom import build_core


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gnystrom",
        description="Low-rank kernel decompositions with learned dictionaries.")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    synth.add_argument("--kind", choices=("blobs", "moons"), default="blobs")
    synth.add_argument("--n", type=int, default=600)
    synth.add_argument("--d", type=int, default=10)
    synth.add_argument("--classes", type=int, default=2)
    synth.add_argument("--separation", type=float, default=3.0)
    synth.add_argument("--noise", type=float, default=0.1)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=_cmd_synth)

    landmarks = sub.add_parser("landmarks", help="select landmarks and write them as CSV")
    _add_input_args(landmarks)
    landmarks.add_argument("--m", type=int, required=True)
    landmarks.add_argument("--method", choices=("kmeans", "random"), default="kmeans")
    landmarks.add_argument("--seed", type=int, default=0)
    landmarks.add_argument("--out", required=True)
    landmarks.set_defaults(func=_cmd_landmarks)

    fit_cmd = sub.add_parser("fit", help="learn a dictionary and save the model")
    _add_input_args(fit_cmd)
    fit_cmd.add_argument("--labels-per-class", type=int, required=True,
                         help="labeled samples drawn per class")
    fit_cmd.add_argument("--m", type=int, default=None,
                         help="landmark count (default: a tenth of the data)")
    fit_cmd.add_argument("--method", choices=("kmeans", "random"), default="kmeans")
    fit_cmd.add_argument("--lambda", dest="lam", type=float, default=None,
                         help="fixed prior weight")
    fit_cmd.add_argument("--lambda-grid", default=None,
                         help="comma-separated candidates; overrides --lambda")
    fit_cmd.add_argument("--bandwidth", default="heuristic",
                         help="'heuristic' or a positive number")
    fit_cmd.add_argument("--seed", type=int, default=0)
    fit_cmd.add_argument("--model-out", required=True)
    fit_cmd.set_defaults(func=_cmd_fit)

    embed_cmd = sub.add_parser("embed", help="embed samples with a saved model")
    embed_cmd.add_argument("--model", required=True)
    _add_input_args(embed_cmd)
    embed_cmd.add_argument("--out", required=True)
    embed_cmd.set_defaults(func=_cmd_embed)

    evaluate = sub.add_parser("evaluate", help="run the comparison harness")
    _add_input_args(evaluate)
    evaluate.add_argument("--config", required=True)
    evaluate.add_argument("--method", choices=("baseline", "generalized"),
                          default="generalized")
    evaluate.add_argument("--report", choices=("text", "csv"), default="text")
    evaluate.set_defaults(func=_cmd_evaluate)

    select = sub.add_parser("select-lambda", help="print the per-candidate table")
    _add_input_args(select)
    select.add_argument("--config", required=True)
    select.set_defaults(func=_cmd_select_lambda)
    return parser


def _add_input_args(cmd):
    cmd.add_argument("--input", required=True)
    cmd.add_argument("--format", choices=("csv", "svmlight"), default="csv")


def _cmd_synth(args):
    if args.kind == "blobs":
        ds = make_blobs(args.n, args.d, n_classes=args.classes,
                        separation=args.separation, seed=args.seed)
    else:
        ds = make_two_moons(args.n, noise=args.noise, seed=args.seed)
    rows = np.column_stack([ds.y.astype(np.float64), ds.X])
    fmt = ["%d"] + ["%.17g"] * ds.d
    np.savetxt(args.out, rows, delimiter=",", fmt=fmt)
    print(f"wrote {ds.n} samples ({ds.d} features, "
          f"{ds.classes.size} classes) to {args.out}")
    return 0


def _cmd_landmarks(args):
    ds = load_dataset(args.input, format=args.format)
    if args.method == "kmeans":
        Z = select_kmeans(ds.X, KMeansConfig(k=args.m, seed=args.seed))
    else:
        Z = select_random(ds.X, args.m, args.seed)
    np.savetxt(args.out, Z.points, delimiter=",", fmt="%.17g")
    print(f"wrote {Z.m} {Z.method} landmarks to {args.out}")
    return 0


def _cmd_fit(args):
    ds = load_dataset(args.input, format=args.format)
    count = args.labels_per_class * ds.classes.size
    labeled = sample_labeled(ds, count, args.seed)
    side = SideInformation.from_labels(labeled)

    if args.bandwidth == "heuristic":
        bandwidth = bandwidth_heuristic(ds.X)
    else:
        bandwidth = float(args.bandwidth)
    params = KernelParams(bandwidth=bandwidth)
    m = args.m if args.m is not None else default_landmark_count(ds.n)
    if args.method == "kmeans":
        Z = select_kmeans(ds.X, KMeansConfig(k=m, seed=args.seed))
    else:
        Z = select_random(ds.X, m, args.seed)
    core = build_core(ds.X, Z, params)

    if args.lambda_grid is not None:
        grid = tuple(float(tok) for tok in args.lambda_grid.split(",") if tok.strip())
        selection = select_lambda(core, side, grid)
        record = selection.chosen
        lam = record.lam
        state_s = record.S
        report = record.solver
        print(f"selected lambda={lam:g} "
              f"(criterion={record.criterion:.6f} over {len(grid)} candidates)")
    else:
        lam = args.lam if args.lam is not None else 1.0
        result = fit(core, side, LearnConfig(lam=lam))
        state_s = result.state.S
        report = result.report
    model = InductiveModel.from_state(Z, params, state_s, lam=lam, report=report)
    save(model, args.model_out)
    print(f"fitted on {count} labeled samples, m={m}: "
          f"{report.iterations} iterations, stopped by {report.converged_by}, "
          f"objective {report.objective_trace[-1]:.6g}")
    print(f"saved model to {args.model_out}")
    return 0


def _cmd_embed(args):
    model = load(args.model)
    ds = load_dataset(args.input, format=args.format)  # labels ignored
    G = embed(model, ds.X)
    np.savetxt(args.out, G, delimiter=",", fmt="%.17g")
    print(f"embedded {G.shape[0]} samples into {G.shape[1]} dimensions -> {args.out}")
    return 0


def _cmd_evaluate(args):
    ds = load_dataset(args.input, format=args.format)
    cfg = experiment_config_from_file(args.config)
    method = "nystrom_baseline" if args.method == "baseline" else "generalized"
    report = run_experiment(ds, cfg, method)
    fmt = "csv" if args.report == "csv" else "text_table"
    sys.stdout.write(emit_report(report, format=fmt))
    return 0


def _cmd_select_lambda(args):
    ds = load_dataset(args.input, format=args.format)
    cfg = experiment_config_from_file(args.config)
    labeled = sample_labeled(ds, cfg.labeled_per_run, cfg.seed)
    side = SideInformation.from_labels(labeled)
    m = cfg.m if cfg.m is not None else default_landmark_count(ds.n)
    if cfg.landmark_method == "kmeans":
        Z = select_kmeans(ds.X, KMeansConfig(k=m, seed=cfg.seed))
    else:
        Z = select_random(ds.X, m, cfg.seed)
    core = build_core_for(ds.X, Z, cfg)
    grid = cfg.lambda_grid if cfg.lambda_grid is not None else DEFAULT_LAMBDA_GRID
    selection = select_lambda(core, side, grid)
    print(f"{'lambda':>12}  {'rho_prior':>10}  {'rho_align':>10}  "
          f"{'criterion':>10}  {'iters':>5}  stopped_by")
    for rec in selection.records:
        print(f"{rec.lam:>12g}  {rec.rho_prior:>10.6f}  {rec.rho_align:>10.6f}  "
              f"{rec.criterion:>10.6f}  {rec.solver.iterations:>5d}  "
              f"{rec.solver.converged_by}")
    print(f"chosen lambda = {selection.chosen_lambda:g}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
