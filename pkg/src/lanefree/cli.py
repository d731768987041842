"""Command-line interface: run simulations, inspect road geometry, run the
self-check suites, and export trace columns to CSV.

Exit codes: 0 success, 1 configuration error, 2 a runtime monitor or
self-check failed, 3 a hard state-constraint violation aborted the run.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

from .config import SimConfig, apply_overrides, load_config
from .errors import ConfigError, InfeasibleScenarioError, IntegrityError
from .geometry import (
    lateral_capacity,
    max_collision_distance_bruteforce,
    optimal_eccentricity,
    safety_distance,
)
from .sim import compute_metrics, run_simulation
from .trace import SimTrace, dumps_json
from .verify import run_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MONITOR = 2
EXIT_INTEGRITY = 3


def _build_config(args) -> SimConfig:
    cfg = load_config(args.config)
    apply_overrides(cfg, args.set or [])
    cfg.validate()
    return cfg


def _output_dir(args) -> Path:
    out = args.output_dir or os.environ.get("LANEFREE_OUTPUT_DIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_fleet_csv(trace: SimTrace, path: Path) -> None:
    n = trace.header["n"]
    cols = ["t"]
    for i in range(n):
        cols += [f"x{i}", f"y{i}", f"theta{i}", f"v{i}", f"u{i}", f"F{i}",
                 f"delta{i}"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for rec in trace.records:
            row = [repr(rec["t"])]
            for veh in rec["vehicles"]:
                row += [repr(veh[key])
                        for key in ("x", "y", "theta", "v", "u", "F", "delta")]
            writer.writerow(row)


def _run_one(cfg: SimConfig, out: Path) -> tuple[int, str]:
    """Worker for seed sweeps: run one config into its own directory."""
    out.mkdir(parents=True, exist_ok=True)
    try:
        trace = run_simulation(cfg)
    except IntegrityError as exc:
        return EXIT_INTEGRITY, f"seed {cfg.seed}: state-constraint violation: {exc}"
    trace.write_jsonl(out / "trace.jsonl")
    (out / "metrics.json").write_text(dumps_json(compute_metrics(trace)) + "\n")
    _write_fleet_csv(trace, out / "vehicles.csv")
    if not trace.summary["monitor"]["all_ok"]:
        return EXIT_MONITOR, f"seed {cfg.seed}: monitor failure"
    return EXIT_OK, f"seed {cfg.seed}: ok (outputs in {out})"


def _cmd_sweep(cfg: SimConfig, seeds: list[int], out: Path) -> int:
    import concurrent.futures
    import copy

    jobs = []
    for seed in seeds:
        c = copy.deepcopy(cfg)
        c.seed = seed
        jobs.append((c, out / f"seed-{seed}"))
    worst = EXIT_OK
    with concurrent.futures.ProcessPoolExecutor() as pool:
        for code, msg in pool.map(_run_one, *zip(*jobs)):
            print(msg, file=sys.stderr if code else sys.stdout)
            worst = max(worst, code)
    return worst


def cmd_simulate(args) -> int:
    try:
        cfg = _build_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _output_dir(args)
    if args.sweep:
        try:
            seeds = [int(tok) for tok in args.sweep.split(",") if tok.strip()]
        except ValueError:
            print("configuration error: --sweep expects comma-separated "
                  "integer seeds", file=sys.stderr)
            return EXIT_CONFIG
        return _cmd_sweep(cfg, seeds, out)
    trace_path = out / "trace.jsonl"
    try:
        trace = run_simulation(cfg)
    except InfeasibleScenarioError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrityError as exc:
        partial = getattr(exc, "trace", None)
        if partial is not None:
            partial.write_jsonl(trace_path)
            print(f"partial trace written to {trace_path}", file=sys.stderr)
        print(f"state-constraint violation: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY

    trace.write_jsonl(trace_path)
    metrics = compute_metrics(trace)
    (out / "metrics.json").write_text(dumps_json(metrics) + "\n")
    _write_fleet_csv(trace, out / "vehicles.csv")

    monitor = trace.summary["monitor"]
    d_min = trace.summary["d_min_global"]
    d_min_txt = "n/a" if d_min is None else f"{d_min:.4f} m"
    print(f"simulated {cfg.n} vehicles for {trace.summary['t_final']:.1f} s "
          f"({trace.summary['steps']} steps), min separation {d_min_txt}")
    print(f"outputs: {trace_path}, {out / 'metrics.json'}, {out / 'vehicles.csv'}")
    if not monitor["all_ok"]:
        failed = [k for k, vv in monitor.items()
                  if isinstance(vv, bool) and not vv and k != "all_ok"]
        print(f"monitor failures: {', '.join(failed)}", file=sys.stderr)
        return EXIT_MONITOR
    print("all runtime monitors passed")
    return EXIT_OK


def cmd_geometry(args) -> int:
    sigma, phi = args.sigma, args.phi
    if phi <= 0.0 or phi >= math.pi / 2.0:
        print("configuration error: phi must lie in (0, pi/2)", file=sys.stderr)
        return EXIT_CONFIG
    p = args.p if args.p is not None else optimal_eccentricity(phi)
    if p < 1.0:
        print("configuration error: eccentricity p must be at least 1",
              file=sys.stderr)
        return EXIT_CONFIG
    L = safety_distance(sigma, phi, p)
    print(f"vehicle length sigma      : {sigma:.4f} m")
    print(f"orientation limit phi     : {phi:.4f} rad")
    print(f"metric eccentricity p     : {p:.4f}"
          + ("  (optimal)" if args.p is None else ""))
    print(f"safety distance L         : {L:.4f} m")
    if args.half_width is not None:
        N = lateral_capacity(args.half_width, p, L)
        print(f"lateral capacity          : {N:.4f} vehicles abreast "
              f"(half-width {args.half_width:.2f} m)")
    if args.check:
        d = max_collision_distance_bruteforce(sigma, phi, p, grid=args.grid)
        print(f"brute-force max collision : {d:.6f} m "
              f"(closed form {L:.6f}, gap {L - d:.3e})")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        cfg = _build_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        checks = run_suite(args.suite, cfg)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failures = 0
    for name, ok, detail in checks:
        tag = "PASS" if ok else "FAIL"
        print(f"[{tag}] {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_MONITOR


_EXPORT_KINDS = ("speeds", "accelerations", "lateral", "orientation", "dmin",
                 "snapshots")
_KIND_FIELD = {"speeds": "v", "accelerations": "F", "lateral": "y",
               "orientation": "theta"}


def cmd_export(args) -> int:
    try:
        trace = SimTrace.read_jsonl(args.trace)
    except (OSError, ValueError) as exc:
        print(f"configuration error: cannot read trace: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not trace.records:
        print("configuration error: trace has no records", file=sys.stderr)
        return EXIT_CONFIG
    n = trace.header["n"]
    out = Path(args.output) if args.output else Path(f"{args.kind}.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        if args.kind == "dmin":
            writer.writerow(["t", "d_min"])
            for rec in trace.records:
                d = rec["d_min"]
                writer.writerow([repr(rec["t"]), "" if d is None else repr(d)])
        elif args.kind == "snapshots":
            target = args.time if args.time is not None else trace.records[-1]["t"]
            rec = min(trace.records, key=lambda r: abs(r["t"] - target))
            writer.writerow(["vehicle", "t", "x", "y", "theta"])
            for i, veh in enumerate(rec["vehicles"]):
                writer.writerow([i, repr(rec["t"]), repr(veh["x"]),
                                 repr(veh["y"]), repr(veh["theta"])])
        else:
            key = _KIND_FIELD[args.kind]
            writer.writerow(["t"] + [f"{key}{i}" for i in range(n)])
            for rec in trace.records:
                writer.writerow([repr(rec["t"])]
                                + [repr(veh[key]) for veh in rec["vehicles"]])
    print(f"wrote {out}")
    return EXIT_OK


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="configuration file (JSON or key = value lines)")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        help="override a configuration key (repeatable; "
                             "dotted keys reach nested sections)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lanefree",
        description="Deterministic simulator for decentralized two-dimensional "
                    "cruise control on lane-free roads.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a closed-loop simulation")
    _add_config_args(sim)
    sim.add_argument("--output-dir", "-o", metavar="DIR", default=None,
                     help="output directory (default: $LANEFREE_OUTPUT_DIR or .)")
    sim.add_argument("--sweep", metavar="SEEDS", default=None,
                     help="comma-separated seeds; runs each in parallel into "
                          "seed-<s>/ subdirectories")
    sim.set_defaults(func=cmd_simulate)

    geo = sub.add_parser("geometry",
                         help="print safety geometry for a vehicle/road shape")
    geo.add_argument("--sigma", type=float, default=5.0,
                     help="vehicle length in meters (default 5)")
    geo.add_argument("--phi", type=float, default=0.25,
                     help="orientation limit in radians (default 0.25)")
    geo.add_argument("--p", type=float, default=None,
                     help="metric eccentricity (default: optimal for phi)")
    geo.add_argument("--half-width", type=float, default=None,
                     help="road half-width for the capacity estimate")
    geo.add_argument("--check", action="store_true",
                     help="cross-check the closed form against brute force")
    geo.add_argument("--grid", type=int, default=801,
                     help="orientation grid size for the brute-force check")
    geo.set_defaults(func=cmd_geometry)

    ver = sub.add_parser("verify", help="run a self-check suite")
    ver.add_argument("suite",
                     choices=["gradients", "dissipation", "collision",
                              "barriers", "bounds", "all"])
    _add_config_args(ver)
    ver.set_defaults(func=cmd_verify)

    exp = sub.add_parser("export", help="export trace columns to CSV")
    exp.add_argument("trace", help="path to a trace.jsonl file")
    exp.add_argument("--kind", choices=_EXPORT_KINDS, default="speeds")
    exp.add_argument("--time", type=float, default=None,
                     help="snapshot time (snapshots kind only; default final)")
    exp.add_argument("--output", "-o", metavar="PATH", default=None,
                     help="output CSV path (default <kind>.csv)")
    exp.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
