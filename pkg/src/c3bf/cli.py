"""Command-line front end: ``c3bf run | verify | sweep``.

Exit status: 0 success, 1 safety violation or property failure,
2 usage/config error, 3 infeasible safety QP.
"""

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import verify
from .config import VERTICAL, load_config
from .errors import ConfigError, SafetyInfeasibleError
from .logs import write_csv, write_jsonl, write_summary
from .scenario import passage_metrics, run

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3
FORMATS = ("csv", "jsonl")


def _positive_int(text):
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {n}")
    return n


def _positive_float(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {x}")
    return x


def _float_list(text):
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty range")
    return vals


def _apply_overrides(cfg, args):
    changes = {}
    if getattr(args, "dt", None) is not None:
        changes["dt"] = args.dt
    if getattr(args, "duration", None) is not None:
        changes["duration"] = args.duration
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    return replace(cfg, **changes) if changes else cfg


def _export(result, out_dir, formats, plots):
    os.makedirs(out_dir, exist_ok=True)
    if "csv" in formats:
        write_csv(result, os.path.join(out_dir, "trajectory.csv"))
    if "jsonl" in formats:
        write_jsonl(result, os.path.join(out_dir, "trajectory.jsonl"))
    summary = dict(result.summary, passage=passage_metrics(result))
    write_summary([summary], os.path.join(out_dir, "summary.jsonl"))
    with open(os.path.join(out_dir, "config.echo"), "w") as fh:
        fh.write(result.config.to_json())
    if plots:
        from .plots import write_plots

        write_plots(result, os.path.join(out_dir, "plots"))
    return summary


def cmd_run(args):
    cfg = _apply_overrides(load_config(args.config), args)
    try:
        result = run(cfg)
    except SafetyInfeasibleError as exc:
        print(f"safety QP infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    summary = _export(result, args.out, args.format or FORMATS, args.plots)
    print(json.dumps({k: summary[k] for k in ("name", "status", "steps", "min_h", "min_distance",
                                              "radius", "active_fraction")}))
    if not result.ok:
        v = summary["violation"]
        print(
            f"safety violation: penetration of obstacle {v['obstacle']} at t={v['t']:.4g} s "
            f"(distance {v['distance']:.6g} <= r {v['radius']:.6g})",
            file=sys.stderr,
        )
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_verify(args):
    reports = verify.run_all(args.samples, seed=args.seed, inject_fault=args.inject_fault)
    for rep in reports:
        print(rep.line())
    failed = [r for r in reports if not r.passed]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verify.json"), "w") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2)
    for rep in failed:
        print(f"counterexample[{rep.name}] {json.dumps(rep.counterexample)}")
    return EXIT_VIOLATION if failed else EXIT_OK


def _scale_obstacle_speed(spec, speed):
    vel = np.asarray(spec.velocity, dtype=float)
    norm = float(np.linalg.norm(vel))
    # obstacles at rest start moving along -x, toward an ego heading +x
    direction = vel / norm if norm > 0 else np.array([-1.0, 0.0])
    return replace(spec, velocity=tuple((speed * direction).tolist()))


def sweep_cells(cfg, gammas=None, speeds=None, targets=None):
    """Expand the parameter grid into ``(params, config)`` pairs in a fixed order."""
    axes = [("gamma", gammas), ("obstacle_speed", speeds), ("target_velocity", targets)]
    axes = [(name, vals) for name, vals in axes if vals is not None]
    cells = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        params = dict(zip((name for name, _ in axes), combo))
        c = cfg
        if "gamma" in params:
            c = replace(c, gamma=params["gamma"])
        if "obstacle_speed" in params:
            c = replace(c, obstacles=tuple(_scale_obstacle_speed(o, params["obstacle_speed"])
                                           for o in c.obstacles))
        if "target_velocity" in params:
            key = "v" if c.mode == VERTICAL else "vx"
            c = replace(c, target={**c.target, key: params["target_velocity"]})
        cells.append((params, c))
    return cells


def _sweep_cell(job):
    index, params, cfg, out_dir, formats = job
    row = {"cell": index, **params}
    try:
        result = run(cfg)
    except SafetyInfeasibleError as exc:
        row.update(status="infeasible", violating=True, error=str(exc))
        return row
    summary = _export(result, os.path.join(out_dir, f"cell_{index:03d}"), formats, False)
    row.update(
        status=summary["status"],
        violating=summary["status"] != "ok",
        min_h=summary["min_h"],
        min_distance=summary["min_distance"],
        radius=summary["radius"],
        active_fraction=summary["active_fraction"],
    )
    return row


def cmd_sweep(args):
    cfg = _apply_overrides(load_config(args.config), args)
    if args.gamma is None and args.obstacle_speed is None and args.target_velocity is None:
        print("sweep needs at least one of --gamma, --obstacle-speed, --target-velocity",
              file=sys.stderr)
        return EXIT_USAGE
    cells = sweep_cells(cfg, args.gamma, args.obstacle_speed, args.target_velocity)
    jobs = [(i, p, c, args.out, args.format or FORMATS) for i, (p, c) in enumerate(cells)]
    os.makedirs(args.out, exist_ok=True)
    if args.workers == 1:
        rows = [_sweep_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    write_summary(rows, os.path.join(args.out, "sweep.jsonl"))
    for row in rows:
        flag = "VIOLATION" if row["violating"] else "ok"
        print(f"cell {row['cell']:3d} {json.dumps({k: row[k] for k in row if k in ('gamma', 'obstacle_speed', 'target_velocity')})} {flag}")
    if any(r["status"] == "infeasible" for r in rows):
        return EXIT_INFEASIBLE
    return EXIT_VIOLATION if any(r["violating"] for r in rows) else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="c3bf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def sim_flags(p):
        p.add_argument("--config", required=True,
                       help="scenario JSON file or bundled scenario name")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--dt", type=_positive_float)
        p.add_argument("--duration", type=_positive_float)
        p.add_argument("--format", choices=FORMATS, action="append",
                       help="trajectory export format (repeatable; default: both)")

    p_run = sub.add_parser("run", help="simulate one scenario")
    sim_flags(p_run)
    p_run.add_argument("--plots", action="store_true", help="write SVG plots to OUT/plots")
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify", help="run the randomized property suites")
    p_ver.add_argument("--samples", type=_positive_int, default=10_000)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--out", help="directory for verify.json")
    p_ver.add_argument("--inject-fault", action="store_true",
                       help="negate L_g h before checking (mutation smoke test)")
    p_ver.set_defaults(func=cmd_verify)

    p_sw = sub.add_parser("sweep", help="grid of runs over gamma, obstacle speed, target velocity")
    sim_flags(p_sw)
    p_sw.add_argument("--gamma", type=_float_list, help="comma-separated values")
    p_sw.add_argument("--obstacle-speed", type=_float_list, help="comma-separated values")
    p_sw.add_argument("--target-velocity", type=_float_list, help="comma-separated values")
    p_sw.add_argument("--workers", type=_positive_int, default=1)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
