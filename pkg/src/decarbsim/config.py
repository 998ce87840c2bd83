"""Run configuration: a single JSON document describing one simulation.

Top-level keys: ``population``, ``io_table``, ``policy``, ``technologies``,
``durables``, ``horizon_quarters``, ``seed``, ``output_dir``. The seed is
required (no ambient entropy anywhere) and referenced paths must exist at
load time.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields

from decarbsim.diffusion import AdoptionParams, DurableKind
from decarbsim.economy import PolicyParams
from decarbsim.microdata import PopulationConfig, TailImputationConfig
from decarbsim.techlearn import AdoptionCurve, TechCurve, TechState, calibrate_exponent


class ConfigError(Exception):
    pass


@dataclass
class TechSpec:
    name: str
    c0: float
    floor: float
    x0: float
    b: float
    adoption: AdoptionCurve | None = None

    def build(self) -> TechState:
        curve = TechCurve(name=self.name, c0=self.c0, floor=self.floor,
                          x0=self.x0, b=self.b)
        curve.validate()
        if self.adoption is not None:
            self.adoption.validate()
        return TechState(curve=curve, adoption=self.adoption, cumulative=self.x0)


@dataclass
class DurableSpec:
    kind: DurableKind
    degree_k: int
    rewire_p: float


@dataclass
class RunConfig:
    population: PopulationConfig
    microdata_path: str
    tail_imputation: TailImputationConfig | None
    io_table_path: str
    policy: PolicyParams
    technologies: list[TechSpec] = field(default_factory=list)
    durables: list[DurableSpec] = field(default_factory=list)
    horizon_quarters: int = 120
    seed: int = 0
    output_dir: str = "out"

    def to_canonical_dict(self) -> dict:
        """Stable dict for hashing and cache keys (excludes output_dir)."""
        d = {
            "population": {
                "n_households": self.population.n_households,
                "n_firms": self.population.n_firms,
                "n_sectors": self.population.n_sectors,
                "seed": self.population.seed,
                "firm_size_mean": self.population.firm_size_mean,
                "firm_size_sigma": self.population.firm_size_sigma,
                "microdata": self.microdata_path,
            },
            "tail_imputation": (
                {"tail_quantile": self.tail_imputation.tail_quantile,
                 "pareto_alpha": self.tail_imputation.pareto_alpha}
                if self.tail_imputation else None),
            "io_table": self.io_table_path,
            "policy": {f.name: getattr(self.policy, f.name)
                       for f in fields(PolicyParams)},
            "technologies": [
                {"name": t.name, "c0": t.c0, "floor": t.floor, "x0": t.x0, "b": t.b,
                 "adoption": ({"k": t.adoption.k, "r": t.adoption.r,
                               "t0_quarter": t.adoption.t0}
                              if t.adoption else None)}
                for t in self.technologies],
            "durables": [
                {"name": d.kind.name, "price0": d.kind.price0,
                 "tech_ref": d.kind.tech_ref,
                 "degree_k": d.degree_k, "rewire_p": d.rewire_p,
                 "params": {
                     "base": d.kind.params.base_utility,
                     "price_coeff": d.kind.params.price_coeff,
                     "income_coeff": d.kind.params.income_coeff,
                     "peer_coeff": d.kind.params.peer_coeff,
                     "subsidy_coeff": d.kind.params.subsidy_coeff},
                 "weight_shift": {"from": d.kind.shift_from, "to": d.kind.shift_to,
                                  "fraction": d.kind.shift_fraction}}
                for d in self.durables],
            "horizon_quarters": self.horizon_quarters,
            "seed": self.seed,
        }
        return d


def _need(doc: dict, key: str, where: str = "config"):
    if key not in doc:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return doc[key]


def load_run_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    base_dir = os.path.dirname(os.path.abspath(path))
    return parse_run_config(doc, base_dir)


def _resolve(base_dir: str, p: str) -> str:
    return p if os.path.isabs(p) else os.path.join(base_dir, p)


def parse_run_config(doc: dict, base_dir: str = ".") -> RunConfig:
    known = {"population", "io_table", "policy", "technologies", "durables",
             "horizon_quarters", "seed", "output_dir"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")

    seed = _need(doc, "seed")
    pop_doc = _need(doc, "population")
    microdata_path = _resolve(base_dir, _need(pop_doc, "microdata", "population"))
    if not os.path.exists(microdata_path):
        raise ConfigError(f"microdata file not found: {microdata_path}")
    population = PopulationConfig(
        n_households=int(_need(pop_doc, "n_households", "population")),
        n_firms=int(_need(pop_doc, "n_firms", "population")),
        n_sectors=int(_need(pop_doc, "n_sectors", "population")),
        seed=int(pop_doc.get("seed", seed)),
        firm_size_mean=float(pop_doc.get("firm_size", {}).get("mean", 2.5)),
        firm_size_sigma=float(pop_doc.get("firm_size", {}).get("sigma", 1.0)),
    )
    population.validate()

    tail = None
    if "tail_imputation" in pop_doc:
        td = pop_doc["tail_imputation"]
        tail = TailImputationConfig(tail_quantile=float(td["tail_quantile"]),
                                    pareto_alpha=float(td["pareto_alpha"]))
        tail.validate()

    io_path = _resolve(base_dir, _need(doc, "io_table"))
    if not os.path.exists(io_path):
        raise ConfigError(f"io table file not found: {io_path}")

    policy_doc = dict(doc.get("policy", {}))
    valid_policy = {f.name for f in fields(PolicyParams)}
    bad = set(policy_doc) - valid_policy
    if bad:
        raise ConfigError(f"unknown policy keys: {sorted(bad)}")
    policy = PolicyParams(**policy_doc)
    policy.validate()

    techs = []
    for td in doc.get("technologies", []):
        b = td.get("b")
        if b is None:
            cal = _need(td, "calibrate", f"technology {td.get('name')}")
            b = calibrate_exponent(float(td["c0"]), float(td["floor"]),
                                   float(td["x0"]), float(cal["x_target"]),
                                   float(cal["cost_target"]))
        adoption = None
        if "adoption" in td:
            ad = td["adoption"]
            adoption = AdoptionCurve(k=float(ad["k"]), r=float(ad["r"]),
                                     t0=float(ad["t0_quarter"]))
        techs.append(TechSpec(name=str(td["name"]), c0=float(td["c0"]),
                              floor=float(td["floor"]), x0=float(td["x0"]),
                              b=float(b), adoption=adoption))

    durables = []
    for dd in doc.get("durables", []):
        pd = dd.get("params", {})
        params = AdoptionParams(
            base_utility=float(pd.get("base", 0.0)),
            price_coeff=float(pd.get("price_coeff", 0.0)),
            income_coeff=float(pd.get("income_coeff", 0.0)),
            peer_coeff=float(pd.get("peer_coeff", 0.0)),
            subsidy_coeff=float(pd.get("subsidy_coeff", 0.0)),
        )
        params.validate()
        ws = dd.get("weight_shift", {})
        kind = DurableKind(
            name=str(dd["name"]), params=params,
            shift_from=int(ws.get("from", 0)), shift_to=int(ws.get("to", 0)),
            shift_fraction=float(ws.get("fraction", 0.0)),
            price0=float(_need(dd, "price0", f"durable {dd.get('name')}")),
            tech_ref=dd.get("tech_ref"),
        )
        if not 0.0 <= kind.shift_fraction <= 1.0:
            raise ConfigError(f"durable {kind.name}: weight_shift fraction outside [0,1]")
        durables.append(DurableSpec(kind=kind,
                                    degree_k=int(dd.get("degree_k", 8)),
                                    rewire_p=float(dd.get("rewire_p", 0.05))))

    cfg = RunConfig(
        population=population,
        microdata_path=microdata_path,
        tail_imputation=tail,
        io_table_path=io_path,
        policy=policy,
        technologies=techs,
        durables=durables,
        horizon_quarters=int(_need(doc, "horizon_quarters")),
        seed=int(seed),
        output_dir=_resolve(base_dir, doc.get("output_dir", "out")),
    )
    tech_names = {t.name for t in cfg.technologies}
    for d in cfg.durables:
        if d.kind.tech_ref is not None and d.kind.tech_ref not in tech_names:
            raise ConfigError(
                f"durable {d.kind.name}: tech_ref {d.kind.tech_ref!r} not configured")
    return cfg
