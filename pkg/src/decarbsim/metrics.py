"""Headline indicators per quarter and baseline-vs-scenario deltas.

GDP is measured by expenditure over the step's flow ledgers, inflation as the
log change of a fixed-base-weight (Laspeyres) consumer price index, inequality
as Gini coefficients plus decile shares of income and wealth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np


class MetricsError(Exception):
    pass


class AllZero(MetricsError):
    pass


class TooFewValues(MetricsError):
    pass


class HorizonMismatch(MetricsError):
    pass


class LineageMismatch(MetricsError):
    pass


@dataclass
class IndicatorFrame:
    t: int
    gdp: float  # currency per quarter, expenditure approach
    unemployment: float
    inflation: float  # quarterly CPI log-change
    gini_income: float
    gini_wealth: float
    decile_income_shares: list[float]
    emissions: float  # tCO2 per quarter
    debt_ratio: float  # government debt / trailing annual GDP
    green_investment_share: float
    gini_wealth_shift: float  # shift applied before the wealth Gini (negatives)


def gini(values: np.ndarray) -> float:
    """Gini coefficient of non-negative values.

    Computed with the sorted-rank identity, which equals the pairwise
    mean-absolute-difference definition sum|xi - xj| / (2 n^2 mean). Inputs
    containing negatives are handled by :func:`gini_shifted`, which reports
    the shift it applied.
    """
    g, shift = gini_shifted(values)
    if shift != 0.0:
        raise ValueError("negative values: use gini_shifted to get the disclosed shift")
    return g


def gini_shifted(values: np.ndarray) -> tuple[float, float]:
    """Gini with the shifted-minimum convention for negatives: (gini, shift)."""
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    if n < 1:
        raise AllZero("gini needs at least one value")
    shift = 0.0
    mn = float(x.min())
    if mn < 0:
        shift = -mn
        x = x + shift
    total = float(x.sum())
    if total == 0.0:
        raise AllZero("gini undefined for all-zero values")
    xs = np.sort(x)
    ranks = np.arange(1, n + 1, dtype=np.float64)
    g = 2.0 * float(np.sum(ranks * xs)) / (n * total) - (n + 1.0) / n
    return g, shift


def decile_shares(values: np.ndarray) -> np.ndarray:
    """Share of the total held by each decile, poorest first.

    Ranks are ascending by (value, position); bin b covers sorted ranks
    [floor(b*n/10), floor((b+1)*n/10)). Tied values contribute equally to
    whichever bin the tie-break lands them in, so the bin sums only need the
    value multiset split at the boundaries: an O(n) partition.
    """
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    if n < 10:
        raise TooFewValues(f"decile shares need >= 10 values, got {n}")
    total = float(x.sum())
    if total == 0.0:
        raise AllZero("decile shares undefined for zero total")
    bounds = [(b * n) // 10 for b in range(1, 10)]
    xs = np.partition(x, bounds)
    edges = [0] + bounds + [n]
    return np.array([float(xs[edges[b]:edges[b + 1]].sum()) / total
                     for b in range(10)])


def compute_indicators(sim) -> tuple[IndicatorFrame, float]:
    """Indicator frame for the quarter the simulation just completed.

    Reads the step's flow ledger and agent arrays; returns the frame plus the
    CPI level (the engine keeps the CPI history). The first call pins the
    CPI base quarter: base prices and base aggregate consumption weights.
    GDP is final consumption + green investment + government purchases, in
    integer cents before conversion to currency.
    """
    ledger = sim._ledger
    consumption = ledger.get("consumption", 0)
    green_inv = (ledger.get("lever_a", 0) + ledger.get("lever_b", 0)
                 + ledger.get("adoption", 0) + ledger.get("durable_subsidy", 0))
    if not ledger:
        raise MetricsError("no step ledger: compute_indicators needs a completed step")
    gdp_cents = consumption + green_inv  # government purchases channel is zero

    sector_prices = sim.cpi_sector_prices()
    if sim.cpi_base_prices is None:
        sim.cpi_base_prices = sector_prices.copy()
        w = sim._consumption_by_sector.astype(np.float64)
        total_w = float(w.sum())
        sim.cpi_base_weights = (w / total_w if total_w > 0
                                else np.full(sim.s, 1.0 / sim.s))
    rel = np.where(sim.cpi_base_prices > 0,
                   sector_prices / np.maximum(sim.cpi_base_prices, 1e-300), 1.0)
    cpi = float((sim.cpi_base_weights * rel).sum())
    cpi_prev = sim.cpi_history[-1] if sim.cpi_history else cpi
    inflation = math.log(cpi / cpi_prev) if cpi > 0 and cpi_prev > 0 else 0.0

    employed = int((sim.hh_employer >= 0).sum())
    unemployment = 1.0 - employed / sim.n

    income = sim.hh_income_cur.astype(np.float64)
    if float(income.sum()) > 0:
        g_income, _ = gini_shifted(income)
        deciles = (decile_shares(income) if sim.n >= 10
                   else np.full(10, 0.1))
    else:
        g_income, deciles = 0.0, np.full(10, 0.1)
    wealth = (sim.hh_dep + sim.hh_illq).astype(np.float64)
    g_wealth, shift = gini_shifted(wealth)

    debt = max(0, -sim.gov_dep)
    window = (sim.nominal_gdp_history + [gdp_cents])[-4:]
    annual_gdp = float(np.mean(window)) * 4.0
    debt_ratio = debt / annual_gdp if annual_gdp > 0 else 0.0

    frame = IndicatorFrame(
        t=sim.t,
        gdp=gdp_cents / 100.0,
        unemployment=unemployment,
        inflation=inflation,
        gini_income=g_income,
        gini_wealth=g_wealth,
        decile_income_shares=[float(d) for d in deciles],
        emissions=sim.emissions_q,
        debt_ratio=debt_ratio,
        green_investment_share=green_inv / gdp_cents if gdp_cents > 0 else 0.0,
        gini_wealth_shift=shift / 100.0,
    )
    return frame, cpi


def frame_to_row(frame: IndicatorFrame) -> list:
    row: list = []
    for f in fields(IndicatorFrame):
        v = getattr(frame, f.name)
        if f.name == "decile_income_shares":
            row.extend(v)
        else:
            row.append(v)
    return row


def csv_header() -> list[str]:
    cols: list[str] = []
    for f in fields(IndicatorFrame):
        if f.name == "decile_income_shares":
            cols.extend(f"decile_share_{d}" for d in range(1, 11))
        else:
            cols.append(f.name)
    return cols


def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


def write_frames_csv(path: str, frames: list[IndicatorFrame]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(csv_header()) + "\n")
        for fr in frames:
            f.write(",".join(_fmt(v) for v in frame_to_row(fr)) + "\n")


def write_frames_json(path: str, frames: list[IndicatorFrame]) -> None:
    payload = []
    for fr in frames:
        d = {f.name: getattr(fr, f.name) for f in fields(IndicatorFrame)}
        d["decile_income_shares"] = list(d["decile_income_shares"])
        payload.append(d)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def read_frames_csv(path: str) -> list[IndicatorFrame]:
    with open(path, encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    header = lines[0].split(",")
    if header != csv_header():
        raise MetricsError(f"{path}: unexpected indicator columns")
    frames = []
    for ln in lines[1:]:
        vals = ln.split(",")
        frames.append(IndicatorFrame(
            t=int(vals[0]),
            gdp=float(vals[1]),
            unemployment=float(vals[2]),
            inflation=float(vals[3]),
            gini_income=float(vals[4]),
            gini_wealth=float(vals[5]),
            decile_income_shares=[float(v) for v in vals[6:16]],
            emissions=float(vals[16]),
            debt_ratio=float(vals[17]),
            green_investment_share=float(vals[18]),
            gini_wealth_shift=float(vals[19]),
        ))
    return frames


SCALAR_INDICATORS = ["gdp", "unemployment", "inflation", "gini_income",
                     "gini_wealth", "emissions", "debt_ratio",
                     "green_investment_share"]


def compare_runs(baseline: list[IndicatorFrame], scenario: list[IndicatorFrame]) -> dict:
    """Per-quarter and period-average deltas (scenario minus baseline).

    GDP is compared both in levels and in quarterly growth rates, since either
    reading of "growth" may be wanted downstream.
    """
    if len(baseline) != len(scenario):
        raise HorizonMismatch(f"baseline has {len(baseline)} quarters, scenario {len(scenario)}")
    per_quarter = []
    for fb, fs in zip(baseline, scenario):
        entry = {"t": fb.t}
        for name in SCALAR_INDICATORS:
            entry[f"d_{name}"] = getattr(fs, name) - getattr(fb, name)
        entry["d_decile_income_shares"] = [
            s - b for b, s in zip(fb.decile_income_shares, fs.decile_income_shares)]
        per_quarter.append(entry)

    def growth(frames: list[IndicatorFrame]) -> list[float]:
        g = [0.0]
        for prev, cur in zip(frames, frames[1:]):
            g.append(cur.gdp / prev.gdp - 1.0 if prev.gdp != 0 else 0.0)
        return g

    gb, gs = growth(baseline), growth(scenario)
    for entry, b, s in zip(per_quarter, gb, gs):
        entry["d_gdp_growth"] = s - b

    averages = {}
    for name in SCALAR_INDICATORS + ["gdp_growth"]:
        vals = [e[f"d_{name}"] for e in per_quarter]
        averages[f"d_{name}"] = float(np.mean(vals))
    return {"per_quarter": per_quarter, "period_average": averages}


def write_deltas(out_csv: str, out_json: str, report: dict) -> None:
    rows = report["per_quarter"]
    cols = (["t"] + [f"d_{n}" for n in SCALAR_INDICATORS] + ["d_gdp_growth"]
            + [f"d_decile_share_{d}" for d in range(1, 11)])
    with open(out_csv, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(cols) + "\n")
        for e in rows:
            vals = ([str(e["t"])] + [repr(float(e[f"d_{n}"])) for n in SCALAR_INDICATORS]
                    + [repr(float(e["d_gdp_growth"]))]
                    + [repr(float(v)) for v in e["d_decile_income_shares"]])
            f.write(",".join(vals) + "\n")
    with open(out_json, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=1)
        f.write("\n")
