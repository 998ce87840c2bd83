"""Command-line entry point.

Subcommands: ``gen-sample`` (synthetic micro-record CSV), ``run`` (baseline or
scenario run), ``compare`` (delta report between two run directories),
``sweep`` (calibration grid). Exit codes: 0 ok, 1 parse/config error,
2 audit failure, 3 infeasible IO table, 4 horizon/lineage mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from decarbsim import metrics
from decarbsim.calibration import CalibrationError, parse_sweep_spec, sweep
from decarbsim.config import ConfigError, load_run_config
from decarbsim.economy import AuditFailure
from decarbsim.iotable import InfeasibleIO
from decarbsim.metrics import HorizonMismatch, LineageMismatch
from decarbsim.microdata import MicrodataError, generate_sample_csv
from decarbsim.runner import run_and_write
from decarbsim.scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_AUDIT = 2
EXIT_INFEASIBLE_IO = 3
EXIT_MISMATCH = 4


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decarbsim",
                                     description="Decarbonisation pathway simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-sample", help="write a synthetic micro-record CSV")
    g.add_argument("--out", required=True)
    g.add_argument("--rows", type=int, default=1000)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--sectors", type=int, default=10)

    r = sub.add_parser("run", help="run a baseline or scenario simulation")
    r.add_argument("--config", required=True)
    r.add_argument("--scenario", default=None)
    r.add_argument("--out", default=None, help="output directory (defaults to config)")
    r.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    r.add_argument("--workers", type=int, default=1,
                   help="worker threads for agent evaluation (compiled core)")
    r.add_argument("--backend", choices=["compiled", "python"], default=None)
    r.add_argument("--inject-audit-fault", type=int, default=None, metavar="QUARTER",
                   help="testing hook: corrupt one ledger by 1 cent at QUARTER")

    c = sub.add_parser("compare", help="delta report between two run directories")
    c.add_argument("run_a")
    c.add_argument("run_b")
    c.add_argument("--out", default=None, help="output directory (default: run_b)")

    s = sub.add_parser("sweep", help="calibration grid sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--sweep", required=True)
    s.add_argument("--out", default=None)
    s.add_argument("--workers", type=int, default=1)
    return parser


def cmd_gen_sample(args) -> int:
    generate_sample_csv(args.out, args.rows, args.seed, args.sectors)
    print(f"wrote {args.rows} records to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, seed=args.seed)
        cfg.population.seed = args.seed
    scenario = load_scenario(args.scenario) if args.scenario else None
    out_dir = args.out if args.out else cfg.output_dir
    frames = run_and_write(cfg, out_dir, scenario=scenario,
                           scenario_path=args.scenario, workers=args.workers,
                           inject_fault_quarter=args.inject_audit_fault,
                           backend_name=args.backend)
    print(f"{len(frames)} quarters -> {out_dir}")
    return EXIT_OK


def cmd_compare(args) -> int:
    def load_dir(d):
        with open(os.path.join(d, "manifest.json"), encoding="utf-8") as f:
            manifest = json.load(f)
        frames = metrics.read_frames_csv(os.path.join(d, "indicators.csv"))
        return manifest, frames

    man_a, frames_a = load_dir(args.run_a)
    man_b, frames_b = load_dir(args.run_b)
    if man_a["horizon_quarters"] != man_b["horizon_quarters"]:
        raise HorizonMismatch(
            f"{man_a['horizon_quarters']} vs {man_b['horizon_quarters']} quarters")
    if man_a["seed"] != man_b["seed"]:
        raise LineageMismatch(f"seed {man_a['seed']} vs {man_b['seed']}")
    report = metrics.compare_runs(frames_a, frames_b)
    out_dir = args.out if args.out else args.run_b
    os.makedirs(out_dir, exist_ok=True)
    metrics.write_deltas(os.path.join(out_dir, "deltas.csv"),
                         os.path.join(out_dir, "deltas.json"), report)
    print(f"deltas -> {out_dir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_run_config(args.config)
    with open(args.sweep, encoding="utf-8") as f:
        spec = parse_sweep_spec(json.load(f), default_seed=cfg.seed)
    out_dir = args.out if args.out else cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    cache_dir = os.path.join(out_dir, "cache")
    results = sweep(spec, cfg, cache_dir=cache_dir, workers=args.workers)
    path = os.path.join(out_dir, "sweep_results.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(results, f, indent=1)
        f.write("\n")
    best = results[0]
    print(f"{len(results)} grid points -> {path}")
    print(f"best: loss={best['loss']:.6g} at {best['parameters']}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "gen-sample":
            return cmd_gen_sample(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return EXIT_PARSE
    except (ConfigError, ScenarioError, MicrodataError, CalibrationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except AuditFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_AUDIT
    except InfeasibleIO as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE_IO
    except (HorizonMismatch, LineageMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
