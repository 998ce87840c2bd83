"""Scenario files: the five policy levers as time-indexed mutations.

A scenario is a JSON document (grammar in SCENARIO.md) describing, per
quarter: forced firm green investment (A), forced household green spending
(B), subsidies with a financing mode (C), technical-coefficient edits (D),
and consumption-weight shifts (E). An empty scenario is the no-action
baseline by construction: every lever application with zero magnitude is a
strict no-op.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class ScenarioError(Exception):
    pass


class ParseError(ScenarioError):
    def __init__(self, detail: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"scenario parse error{where}: {detail}")
        self.line = line


class UnknownLever(ScenarioError):
    def __init__(self, name: str):
        super().__init__(f"unknown scenario key: {name}")
        self.name = name


class NegativePathway(ScenarioError):
    pass


class ScenarioReapplied(ScenarioError):
    pass


@dataclass
class LeverARule:
    sectors: list[int] | None  # None = all sectors
    start_quarter: int
    end_quarter: int
    share: float


@dataclass
class LeverBRule:
    start_quarter: int
    end_quarter: int
    amount: float  # currency per household per quarter
    targeting: str  # all | non_adopters


@dataclass
class LeverCRule:
    start_quarter: int
    end_quarter: int
    total: float  # currency per quarter
    target: str  # firms | households
    allocation: str  # uniform | proportional_to_green_spend
    financing: str  # expansion | reduced_spending


@dataclass
class DurableSubsidyRule:
    """Point-of-sale discount on durable purchases, paid by government (debt)."""

    start_quarter: int
    end_quarter: int
    amount: float  # currency knocked off each purchase


@dataclass
class LeverDEdit:
    sector_from: int
    sector_to: int
    start_quarter: int
    end_quarter: int
    start_value: float
    end_value: float

    def value_at(self, t: int) -> float | None:
        """Interpolated coefficient at quarter t; None before the edit starts."""
        if t < self.start_quarter:
            return None
        if t >= self.end_quarter:
            return self.end_value
        span = self.end_quarter - self.start_quarter
        frac = (t - self.start_quarter) / span
        return self.start_value + (self.end_value - self.start_value) * frac


@dataclass
class LeverEShift:
    category_from: int
    category_to: int
    fraction: float
    trigger_quarter: int | None = None  # exactly one trigger is set
    trigger_durable: str | None = None


@dataclass
class ScenarioSpec:
    name: str
    horizon_quarters: int
    green_sector: int | None = None
    lever_a: list[LeverARule] = field(default_factory=list)
    lever_b: list[LeverBRule] = field(default_factory=list)
    lever_c: list[LeverCRule] = field(default_factory=list)
    durable_subsidies: list[DurableSubsidyRule] = field(default_factory=list)
    lever_d: list[LeverDEdit] = field(default_factory=list)
    lever_e: list[LeverEShift] = field(default_factory=list)

    def lever_a_shares(self, t: int, n_sectors: int) -> list[float]:
        shares = [0.0] * n_sectors
        for rule in self.lever_a:
            if rule.start_quarter <= t <= rule.end_quarter:
                for s in (rule.sectors if rule.sectors is not None else range(n_sectors)):
                    shares[s] += rule.share
        return shares

    def lever_b_at(self, t: int) -> list[LeverBRule]:
        return [r for r in self.lever_b if r.start_quarter <= t <= r.end_quarter]

    def lever_c_at(self, t: int) -> list[LeverCRule]:
        return [r for r in self.lever_c if r.start_quarter <= t <= r.end_quarter]

    def durable_subsidies_at(self, t: int) -> list[DurableSubsidyRule]:
        return [r for r in self.durable_subsidies
                if r.start_quarter <= t <= r.end_quarter]

    def lever_e_quarter_shifts(self, t: int) -> list[LeverEShift]:
        return [s for s in self.lever_e if s.trigger_quarter == t]

    def durable_shifts(self, durable: str) -> list[LeverEShift]:
        return [s for s in self.lever_e if s.trigger_durable == durable]

    def is_null(self) -> bool:
        return not (self.lever_a or self.lever_b or self.lever_c
                    or self.durable_subsidies or self.lever_d or self.lever_e)


NULL_SCENARIO = ScenarioSpec(name="baseline", horizon_quarters=0)

_TOP_KEYS = {"name", "horizon_quarters", "green_sector",
             "lever_a", "lever_b", "lever_c", "lever_d", "lever_e"}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParseError(msg)


def _check_keys(entry: dict, allowed: set[str], lever: str) -> None:
    extra = set(entry) - allowed
    if extra:
        raise UnknownLever(f"{lever}.{sorted(extra)[0]}")


def load_scenario(path: str) -> ScenarioSpec:
    """Parse and validate a scenario JSON file; unknown keys are rejected."""
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno) from e
    return parse_scenario(doc)


def parse_scenario(doc: dict) -> ScenarioSpec:
    _require(isinstance(doc, dict), "top level must be an object")
    for key in doc:
        if key not in _TOP_KEYS:
            raise UnknownLever(key)
    _require("horizon_quarters" in doc, "horizon_quarters is required")
    horizon = int(doc["horizon_quarters"])
    _require(horizon >= 1, "horizon_quarters must be >= 1")
    spec = ScenarioSpec(
        name=str(doc.get("name", "scenario")),
        horizon_quarters=horizon,
        green_sector=int(doc["green_sector"]) if "green_sector" in doc else None,
    )

    for entry in doc.get("lever_a", []):
        _check_keys(entry, {"sectors", "start_quarter", "end_quarter", "share"}, "lever_a")
        share = float(entry["share"])
        if share < 0:
            raise NegativePathway(f"lever_a share {share} < 0")
        sectors = entry.get("sectors")
        if sectors is not None and sectors != "all":
            sectors = [int(s) for s in sectors]
        else:
            sectors = None
        spec.lever_a.append(LeverARule(
            sectors=sectors,
            start_quarter=int(entry["start_quarter"]),
            end_quarter=int(entry["end_quarter"]),
            share=share,
        ))

    for entry in doc.get("lever_b", []):
        _check_keys(entry, {"start_quarter", "end_quarter", "amount", "targeting"}, "lever_b")
        amount = float(entry["amount"])
        if amount < 0:
            raise NegativePathway(f"lever_b amount {amount} < 0")
        targeting = entry.get("targeting", "all")
        _require(targeting in ("all", "non_adopters"), f"lever_b targeting {targeting!r}")
        spec.lever_b.append(LeverBRule(
            start_quarter=int(entry["start_quarter"]),
            end_quarter=int(entry["end_quarter"]),
            amount=amount, targeting=targeting,
        ))

    for entry in doc.get("lever_c", []):
        if "durable_subsidy" in entry:
            _check_keys(entry, {"start_quarter", "end_quarter", "durable_subsidy"},
                        "lever_c")
            amount = float(entry["durable_subsidy"])
            if amount < 0:
                raise NegativePathway(f"durable_subsidy {amount} < 0")
            spec.durable_subsidies.append(DurableSubsidyRule(
                start_quarter=int(entry["start_quarter"]),
                end_quarter=int(entry["end_quarter"]),
                amount=amount,
            ))
            continue
        _check_keys(entry, {"start_quarter", "end_quarter", "total", "target",
                            "allocation", "financing"}, "lever_c")
        total = float(entry["total"])
        if total < 0:
            raise NegativePathway(f"lever_c total {total} < 0")
        target = entry.get("target", "households")
        allocation = entry.get("allocation", "uniform")
        financing = entry.get("financing", "expansion")
        _require(target in ("firms", "households"), f"lever_c target {target!r}")
        _require(allocation in ("uniform", "proportional_to_green_spend"),
                 f"lever_c allocation {allocation!r}")
        _require(financing in ("expansion", "reduced_spending"),
                 f"lever_c financing {financing!r}")
        spec.lever_c.append(LeverCRule(
            start_quarter=int(entry["start_quarter"]),
            end_quarter=int(entry["end_quarter"]),
            total=total, target=target, allocation=allocation, financing=financing,
        ))

    for entry in doc.get("lever_d", []):
        _check_keys(entry, {"sector_from", "sector_to", "start_quarter",
                            "end_quarter", "start_value", "end_value"}, "lever_d")
        start_value = float(entry["start_value"])
        end_value = float(entry["end_value"])
        if start_value < 0 or end_value < 0:
            raise NegativePathway("lever_d coefficient values must be >= 0")
        start_q, end_q = int(entry["start_quarter"]), int(entry["end_quarter"])
        _require(end_q >= start_q, "lever_d end_quarter must be >= start_quarter")
        spec.lever_d.append(LeverDEdit(
            sector_from=int(entry["sector_from"]),
            sector_to=int(entry["sector_to"]),
            start_quarter=start_q, end_quarter=end_q,
            start_value=start_value, end_value=end_value,
        ))

    for entry in doc.get("lever_e", []):
        _check_keys(entry, {"category_from", "category_to", "fraction", "trigger"}, "lever_e")
        fraction = float(entry["fraction"])
        _require(0.0 <= fraction <= 1.0, f"lever_e fraction {fraction} outside [0,1]")
        trigger = entry.get("trigger", {})
        _check_keys(trigger, {"quarter", "durable"}, "lever_e.trigger")
        tq = trigger.get("quarter")
        td = trigger.get("durable")
        _require((tq is None) != (td is None),
                 "lever_e trigger needs exactly one of quarter/durable")
        spec.lever_e.append(LeverEShift(
            category_from=int(entry["category_from"]),
            category_to=int(entry["category_to"]),
            fraction=fraction,
            trigger_quarter=int(tq) if tq is not None else None,
            trigger_durable=str(td) if td is not None else None,
        ))
    return spec
