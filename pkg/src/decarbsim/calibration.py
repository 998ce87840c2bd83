"""Deterministic grid-sweep calibration harness.

Free behavioral parameters are swept over a rectangular grid; each grid point
runs the no-action baseline and is scored by weighted squared distance of its
post-burn-in moments from the targets. Results are cached on disk keyed by
(config hash, seed), so re-running a sweep replays from cache bit-exactly.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from decarbsim.config import RunConfig
from decarbsim.metrics import IndicatorFrame


class CalibrationError(Exception):
    pass


class BudgetExceeded(CalibrationError):
    pass


MOMENTS = ("mean_inflation", "mean_unemployment", "mean_gdp_growth")


@dataclass
class CalibrationTarget:
    moment: str
    target: float
    weight: float = 1.0

    def validate(self) -> None:
        if self.moment not in MOMENTS:
            raise CalibrationError(f"unknown moment {self.moment!r}")
        if self.weight < 0:
            raise CalibrationError("target weight must be >= 0")


@dataclass
class SweepParameter:
    name: str  # dotted path into the run config, e.g. "policy.markup_step"
    lower: float
    upper: float
    points: int

    def grid(self) -> np.ndarray:
        if self.points < 2:
            raise CalibrationError(f"{self.name}: grid needs >= 2 points")
        return np.linspace(self.lower, self.upper, self.points)


@dataclass
class SweepSpec:
    parameters: list[SweepParameter]
    targets: list[CalibrationTarget]
    burn_in: int
    horizon: int
    seed: int
    budget: int = 256

    def validate(self) -> None:
        for tgt in self.targets:
            tgt.validate()
        if self.horizon <= self.burn_in:
            raise CalibrationError("horizon must exceed burn_in")


def parse_sweep_spec(doc: dict, default_seed: int) -> SweepSpec:
    spec = SweepSpec(
        parameters=[SweepParameter(name=str(p["name"]), lower=float(p["lower"]),
                                   upper=float(p["upper"]), points=int(p["points"]))
                    for p in doc.get("parameters", [])],
        targets=[CalibrationTarget(moment=str(t["moment"]), target=float(t["target"]),
                                   weight=float(t.get("weight", 1.0)))
                 for t in doc.get("targets", [])],
        burn_in=int(doc.get("burn_in", 8)),
        horizon=int(doc["horizon"]),
        seed=int(doc.get("seed", default_seed)),
        budget=int(doc.get("budget", 256)),
    )
    spec.validate()
    return spec


def _apply_override(cfg: RunConfig, name: str, value: float) -> RunConfig:
    head, _, attr = name.partition(".")
    if head != "policy" or not hasattr(cfg.policy, attr):
        raise CalibrationError(f"unknown sweep parameter {name!r}")
    return replace(cfg, policy=replace(cfg.policy, **{attr: value}))


def compute_moments(frames: list[IndicatorFrame], burn_in: int) -> dict[str, float]:
    kept = frames[burn_in:]
    if not kept:
        raise CalibrationError("no frames after burn-in")
    growth = []
    for prev, cur in zip(frames, frames[1:]):
        growth.append(cur.gdp / prev.gdp - 1.0 if prev.gdp != 0 else 0.0)
    growth_kept = growth[max(burn_in - 1, 0):]
    return {
        "mean_inflation": float(np.mean([f.inflation for f in kept])),
        "mean_unemployment": float(np.mean([f.unemployment for f in kept])),
        "mean_gdp_growth": float(np.mean(growth_kept)) if growth_kept else 0.0,
    }


def loss_for(moments: dict[str, float], targets: list[CalibrationTarget]) -> float:
    return float(sum(t.weight * (moments[t.moment] - t.target) ** 2 for t in targets))


def sweep(spec: SweepSpec, base_cfg: RunConfig, cache_dir: str | None = None,
          workers: int = 1) -> list[dict]:
    """Run every grid point, rank ascending by (loss, grid index)."""
    from decarbsim.runner import build_sim, config_hash

    grids = [p.grid() for p in spec.parameters]
    size = int(np.prod([len(g) for g in grids])) if grids else 1
    if size > spec.budget:
        raise BudgetExceeded(f"grid size {size} exceeds budget {spec.budget}")

    results = []
    combos = itertools.product(*grids) if grids else [()]
    for index, combo in enumerate(combos):
        cfg = replace(base_cfg, seed=spec.seed, horizon_quarters=spec.horizon)
        values = {}
        for p, v in zip(spec.parameters, combo):
            cfg = _apply_override(cfg, p.name, float(v))
            values[p.name] = float(v)

        key = config_hash(cfg)
        cache_path = (os.path.join(cache_dir, key, f"{spec.seed}.json")
                      if cache_dir else None)
        if cache_path and os.path.exists(cache_path):
            with open(cache_path, encoding="utf-8") as f:
                moments = json.load(f)["moments"]
        else:
            sim = build_sim(cfg, workers=workers)
            frames = sim.run(spec.horizon)
            moments = compute_moments(frames, spec.burn_in)
            if cache_path:
                os.makedirs(os.path.dirname(cache_path), exist_ok=True)
                with open(cache_path, "w", encoding="utf-8") as f:
                    json.dump({"moments": moments, "config_hash": key,
                               "seed": spec.seed}, f, indent=1)
                    f.write("\n")

        results.append({
            "grid_index": index,
            "parameters": values,
            "moments": moments,
            "loss": loss_for(moments, spec.targets),
        })
    results.sort(key=lambda r: (r["loss"], r["grid_index"]))
    return results
