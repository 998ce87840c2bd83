"""Build and execute simulations from a RunConfig; write run outputs.

Outputs per run directory: ``indicators.csv`` / ``indicators.json`` (one row
per quarter), ``rates.csv`` (policy and government borrowing rates),
``balance_sheets.json`` (final-state summary), and ``manifest.json`` with
everything needed to reproduce the run byte-exactly (content hashes, seed,
backend, worker count: no timestamps).
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from decarbsim import __version__, metrics
from decarbsim.config import RunConfig
from decarbsim.diffusion import build_network
from decarbsim.economy import EconomySim
from decarbsim.iotable import load_io_table
from decarbsim.kernels import get_backend
from decarbsim.microdata import build_population, impute_wealth_tail, parse_microdata
from decarbsim.scenario import ScenarioSpec


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(cfg.to_canonical_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def file_hash(path: str) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def build_sim(cfg: RunConfig, workers: int = 1, backend_name: str | None = None) -> EconomySim:
    records = parse_microdata(cfg.microdata_path)
    if cfg.tail_imputation is not None:
        records = impute_wealth_tail(records, cfg.tail_imputation, cfg.seed)
    households, firms = build_population(records, cfg.population)
    io = load_io_table(cfg.io_table_path)

    techs = {t.name: t.build() for t in cfg.technologies}
    durables = [d.kind for d in cfg.durables]
    graph = None
    if cfg.durables:
        regions = np.array([h.region_code for h in households], dtype=np.int64)
        first = cfg.durables[0]
        graph = build_network(regions, first.degree_k, first.rewire_p, cfg.seed)

    return EconomySim(households, firms, io, cfg.policy, cfg.seed,
                      techs=techs, durables=durables, graph=graph,
                      backend=get_backend(backend_name), workers=workers)


def run_and_write(cfg: RunConfig, out_dir: str, scenario: ScenarioSpec | None = None,
                  scenario_path: str | None = None, workers: int = 1,
                  inject_fault_quarter: int | None = None,
                  backend_name: str | None = None) -> list[metrics.IndicatorFrame]:
    os.makedirs(out_dir, exist_ok=True)
    sim = build_sim(cfg, workers=workers, backend_name=backend_name)
    if inject_fault_quarter is not None:
        sim.inject_fault = (inject_fault_quarter, 1)
    frames = sim.run(cfg.horizon_quarters, scenario)

    metrics.write_frames_csv(os.path.join(out_dir, "indicators.csv"), frames)
    metrics.write_frames_json(os.path.join(out_dir, "indicators.json"), frames)

    with open(os.path.join(out_dir, "rates.csv"), "w", encoding="utf-8", newline="\n") as f:
        f.write("t,policy_rate,gov_rate,spread\n")
        for r in sim.rate_history:
            f.write(f"{r['t']},{r['policy_rate']!r},{r['gov_rate']!r},{r['spread']!r}\n")

    summary = {
        "households": {
            "deposits": int(sim.hh_dep.sum()),
            "illiquid_wealth": int(sim.hh_illq.sum()),
            "negative_deposit_flags": int(sim.hh_leverb.sum()),
            "adopters_by_kind": {kind.name: int(sim.hh_adopted[k].sum())
                                 for k, kind in enumerate(sim.durables)},
        },
        "firms": {
            "deposits": int(sim.fm_dep.sum()),
            "green_capital": int(sim.fm_green_cap.sum()),
            "inventory_units": float(sim.fm_inventory.sum()),
        },
        "government": {"deposits": sim.gov_dep,
                       "debt": max(0, -sim.gov_dep)},
        "technologies": {name: {"cumulative": ts.cumulative,
                                "current_cost": ts.current_cost}
                         for name, ts in sim.techs.items()},
        "total_deposits": sim.total_deposits(),
    }
    with open(os.path.join(out_dir, "balance_sheets.json"), "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=1)
        f.write("\n")

    manifest = {
        "version": __version__,
        "config_hash": config_hash(cfg),
        "config": cfg.to_canonical_dict(),
        "scenario_hash": file_hash(scenario_path) if scenario_path else None,
        "scenario_name": scenario.name if scenario else None,
        "seed": cfg.seed,
        "horizon_quarters": cfg.horizon_quarters,
        "workers": workers,
        "backend": sim.kern.NAME,
        "n_households": cfg.population.n_households,
        "n_firms": cfg.population.n_firms,
        "n_sectors": cfg.population.n_sectors,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")
    return frames
