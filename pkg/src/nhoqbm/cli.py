"""Command-line interface: ``nhoqbm <subcommand> [options]``.

Subcommands print their primary table to standard output. With ``--out DIR``
they also write CSV files and a ``manifest.json`` into ``DIR``; ``run``
always writes (to ``--out`` or ``output.dir`` from the config).

Exit status is 0 on success, 1 when ``oracle-compare`` fails its
tolerances and 2 on any error (reported as one JSON line on stderr).
"""

import argparse
import contextlib
import json
import os
import sys

import numpy as np

from . import pipeline
from .config import ConfigError, load_config
from .diagnostics import trajectory_columns
from .io import render, write_csv, write_manifest, write_svg_plot
from .transform import build_transform

SUBCOMMANDS = ("transform", "kernels", "coeffs", "evolve", "oracle-compare", "run")


def _phase_labels(n):
    return [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]


def _trajectory_table(traj, cfg, diag):
    n = traj.n_modes
    labels = _phase_labels(n)
    iu = np.triu_indices(2 * n)
    header = ["t"] + [f"mean_{lab}" for lab in labels]
    header += [f"cov_{labels[i]}_{labels[j]}" for i, j in zip(*iu)]
    header += ["min_symplectic_eigenvalue"]
    cols = [traj.grid[:, None], traj.means, traj.covs[:, iu[0], iu[1]],
            traj.min_symplectic[:, None]]
    if diag:
        extra = trajectory_columns(traj, diag, build_transform(n),
                                   base=cfg.output.negativity_base)
        header += list(extra)
        cols += [np.asarray(v)[:, None] for v in extra.values()]
    return header, np.hstack(cols)


def _transform_table(n):
    tr = build_transform(n)
    header = ["block", "row"] + [f"c{j + 1}" for j in range(n)]
    rows = []
    for code, mat in ((0.0, tr.t_matrix), (1.0, tr.s_matrix)):
        for i, r in enumerate(mat):
            rows.append([code, i + 1, *r])
    rows.append([2.0, 1, *tr.eff_masses])
    return header, np.array(rows) + 0.0  # drop negative zeros


def _coeff_table(series):
    return ["t", "a", "b", "c", "d", "caustic_flag"], series.as_array()


def _report_table(report):
    return ["t", "deviation", "collective", "relative", "cross"], report.as_array()


def _emit(args, name, header, rows, written):
    sys.stdout.write(render(header, rows, args.format))
    if args.out:
        written.append(write_csv(os.path.join(args.out, f"{name}.csv"), header, rows))


def _report_line(run, cfg):
    rep = run.report
    status = "PASS" if run.passed(cfg) else "FAIL"
    return (f"{status} oracle-compare n_scaling={run.n_scaling} "
            f"max_deviation={rep.max_deviation:.3e} (tol {cfg.oracle.cov_tol:g}) "
            f"relative_sector={rep.max_relative:.3e} (tol {cfg.oracle.relative_tol:g}) "
            f"worst_t={rep.worst_time:.6g} window={rep.window}")


def _run_command(args, cfg):
    written = []
    extra = {}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    status = 0
    if args.command == "transform":
        n = cfg.n_osc if args.n_osc is None else args.n_osc
        _emit(args, "transform", *_transform_table(n), written)
    elif args.command == "kernels":
        k = pipeline.kernel_table(cfg)
        _emit(args, "kernels", ["s", "eta", "nu"], np.column_stack([k.grid, k.eta, k.nu]),
              written)
    elif args.command == "coeffs":
        _, _, series = pipeline.coefficient_series(cfg)
        _emit(args, "coefficients", *_coeff_table(series), written)
        extra["caustic_samples"] = int(series.caustic.sum())
    elif args.command == "evolve":
        _, _, series = pipeline.coefficient_series(cfg)
        traj = pipeline.master_trajectory(cfg, series)
        _emit(args, "trajectory", *_trajectory_table(traj, cfg, args.diag), written)
        extra["warnings"] = traj.diagnostics["warnings"]
    elif args.command == "oracle-compare":
        run = pipeline.oracle_comparison(cfg)
        _emit(args, "comparison", *_report_table(run.report), written)
        line = _report_line(run, cfg)
        print(line)
        extra["result"] = line
        status = 0 if run.passed(cfg) else 1
    else:
        status = _run_pipeline(args, cfg, written, extra)
    if args.out:
        write_manifest(args.out, cfg, args.command, written, extra)
    return status


def _run_pipeline(args, cfg, written, extra):
    args.out = args.out or cfg.output.dir
    os.makedirs(args.out, exist_ok=True)
    kernels, _, series = pipeline.coefficient_series(cfg)
    path = os.path.join(args.out, "{}.csv")
    written.append(write_csv(path.format("kernels"), ["s", "eta", "nu"],
                             np.column_stack([kernels.grid, kernels.eta, kernels.nu])))
    written.append(write_csv(path.format("coefficients"), *_coeff_table(series)))
    traj = pipeline.master_trajectory(cfg, series)
    header, rows = _trajectory_table(traj, cfg, args.diag)
    written.append(write_csv(path.format("trajectory"), header, rows))
    extra["warnings"] = traj.diagnostics["warnings"]
    extra["caustic_samples"] = int(series.caustic.sum())
    status = 0
    if args.with_oracle:
        run = pipeline.oracle_comparison(cfg)
        written.append(write_csv(path.format("comparison"), *_report_table(run.report)))
        line = _report_line(run, cfg)
        extra["result"] = line
        print(line)
        status = 0 if run.passed(cfg) else 1
    if cfg.output.plot:
        svg = os.path.join(args.out, "{}.svg")
        written.append(write_svg_plot(
            svg.format("coefficients"), series.grid,
            {k: getattr(series, k) for k in "abcd"}, "master-equation coefficients"))
        written.append(write_svg_plot(
            svg.format("trajectory"), traj.grid,
            {lab: rows[:, header.index(lab)] for lab in header
             if lab.startswith("cov_x1_x1") or lab.startswith("cov_p1_p1")},
            "covariance"))
    print(f"wrote {len(written)} files to {args.out}")
    return status


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nhoqbm",
        description="Master-equation dynamics of N interacting oscillators in a harmonic bath.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON scenario file")
    common.add_argument("--out", metavar="DIR", help="write CSV files and a manifest here")
    common.add_argument("--format", choices=("csv", "table"), default="csv")
    common.add_argument("--diag", metavar="LIST", default=None,
                        help="comma-separated: uncertainty,purity,negativity,physicality")
    common.add_argument("--threads", metavar="N", type=int, default=None,
                        help="cap on BLAS threads")
    common.add_argument("--n-scaling", choices=("as_printed", "com_reduced"), default=None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "transform":
            p.add_argument("-n", "--n-osc", type=int, default=None,
                           help="number of oscillators (overrides the config)")
        if name == "run":
            p.add_argument("--with-oracle", action="store_true",
                           help="also run the exact-bath comparison")
    return parser


def _apply_overrides(cfg, args):
    updates = {}
    if args.n_scaling:
        updates["solver"] = cfg.solver.model_copy(update={"n_scaling": args.n_scaling})
    cfg = cfg.model_copy(update=updates) if updates else cfg
    if args.diag is None:
        args.diag = list(cfg.output.diagnostics)
    else:
        args.diag = [d.strip() for d in args.diag.split(",") if d.strip()]
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        limit = contextlib.nullcontext()
        if args.threads:
            from threadpoolctl import threadpool_limits

            limit = threadpool_limits(limits=args.threads)
        with limit:
            return _run_command(args, cfg)
    except (ConfigError, ValueError, ArithmeticError, OSError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError):
            payload["path"] = exc.path
        sys.stderr.write(json.dumps(payload) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
