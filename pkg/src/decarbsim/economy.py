"""Quarterly stock-flow-consistent core.

All money is integer cents and every flow debits one balance sheet and
credits another, so the per-quarter audit can demand a residual of exactly
zero. Sub-steps run in a fixed order; anything random is a counter-based
hash of (seed, stream, quarter, agent), so agent evaluation can be chunked
across worker threads without changing a single bit of the result.

State is column-oriented: one numpy array per household/firm attribute.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from decarbsim import metrics, rng
from decarbsim.diffusion import DurableKind, SocialGraph, decide_adoptions
from decarbsim.iotable import IOTable, check_productive
from decarbsim.kernels import backend as default_backend
from decarbsim.microdata import Firm, Household
from decarbsim.scenario import NULL_SCENARIO, ScenarioReapplied, ScenarioSpec
from decarbsim.techlearn import TechState, advance_tech, quarterly_deployment

CENTS = 100
EPS_OUTPUT = 1e-12


class SimulationError(Exception):
    pass


class AuditFailure(SimulationError):
    def __init__(self, residual_cents: int, subsystem: str = "total"):
        super().__init__(
            f"stock-flow audit failed: residual {residual_cents} cents ({subsystem})")
        self.residual_cents = residual_cents
        self.subsystem = subsystem


@dataclass
class PolicyParams:
    """Government, central bank, and behavioral constants."""

    tax_rate_income: float = 0.20
    transfer_per_household: float = 1400.0  # currency per quarter
    debt_ceiling_ratio: float = 1.0  # debt / annual GDP where the spread starts
    spread_slope: float = 0.02  # per unit of excess debt ratio, per quarter
    neutral_rate: float = 0.005  # per quarter
    inflation_target: float = 0.005  # per quarter
    taylor_pi: float = 0.5
    taylor_gap: float = 0.3
    wage0: float = 8000.0  # currency per quarter
    wage_indexation: float = 0.6  # pass-through of trailing inflation to wages
    markup0: float = 0.125
    markup_step: float = 0.005
    inventory_target: float = 0.10
    max_layoff_rate: float = 0.25  # staff share a firm may shed per quarter
    propensity_to_consume: float = 0.24
    dividend_payout: float = 0.8
    firm_buffer_quarters: float = 2.0
    amortization_rate: float = 0.05  # green capital cost recognition per quarter
    green_sector: int = 0
    usd_to_currency: float = 0.8  # converts USD/MWh tech costs into model currency

    def validate(self) -> None:
        if not 0.0 <= self.tax_rate_income < 1.0:
            raise ValueError("tax_rate_income must lie in [0,1)")
        if self.spread_slope < 0:
            raise ValueError("spread_slope must be >= 0")
        if not 0.0 < self.propensity_to_consume <= 1.0:
            raise ValueError("propensity_to_consume must lie in (0,1]")


def uniform_split(total: int, n: int) -> np.ndarray:
    """Even integer split of ``total`` over ``n`` entries, low indexes first."""
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    base, rem = divmod(int(total), n)
    out = np.full(n, base, dtype=np.int64)
    out[:rem] += 1
    return out


def _top_k_by_fraction(frac: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest fractions, ties by ascending index."""
    n = len(frac)
    if k >= n:
        return np.arange(n)
    # O(n) threshold via partition, then resolve only the boundary ties
    kth = np.partition(frac, n - k)[n - k]
    sure = np.where(frac > kth)[0]
    boundary = np.where(frac == kth)[0]
    need = k - len(sure)
    return np.concatenate([sure, boundary[:need]])


def allocate_integer(total: int, weights: np.ndarray) -> np.ndarray:
    """Split ``total`` integer cents across entries proportionally to ``weights``.

    Largest-remainder rounding; ties broken by ascending index, so the split
    is deterministic and sums to ``total`` exactly. Zero or degenerate weight
    vectors fall back to a uniform split.
    """
    n = len(weights)
    if total == 0 or n == 0:
        return np.zeros(n, dtype=np.int64)
    w = np.asarray(weights, dtype=np.float64)
    wsum = float(w.sum())
    if wsum <= 0 or not np.isfinite(wsum):
        return uniform_split(total, n)
    exact = (total / wsum) * w
    base = np.floor(exact).astype(np.int64)
    short = int(total - base.sum())
    if short > 0:
        frac = exact - base
        base[_top_k_by_fraction(frac, short)] += 1
    while short < 0:
        frac = exact - base
        order = np.lexsort((np.arange(n), frac))
        take = order[base[order] > 0][:-short]
        base[take] -= 1
        short += len(take)
    return base


class EconomySim:
    """One simulation run: synthetic population, IO structure, policy, clock."""

    def __init__(self, households: list[Household], firms: list[Firm], io: IOTable,
                 policy: PolicyParams, seed: int,
                 techs: dict[str, TechState] | None = None,
                 durables: list[DurableKind] | None = None,
                 graph: SocialGraph | None = None,
                 backend=None, workers: int = 1):
        io.validate()
        policy.validate()
        self.policy = policy
        self.seed = int(seed)
        self.kern = backend if backend is not None else default_backend
        # more workers than cores only adds contention; results are
        # worker-count-invariant either way
        self.workers = max(1, min(int(workers), os.cpu_count() or 1))
        self.io = io.copy()
        self.techs = dict(techs or {})
        self.durables = list(durables or [])
        self.graph = graph
        self.t = 0
        self.inject_fault: tuple[int, int] | None = None  # (quarter, cents), test hook

        n = len(households)
        m = len(firms)
        s = io.n_sectors
        self.n, self.m, self.s = n, m, s

        self.hh_dep = np.array([h.deposits for h in households], dtype=np.int64)
        self.hh_illq = np.array([h.illiquid_wealth for h in households], dtype=np.int64)
        self.hh_region = np.array([h.region_code for h in households], dtype=np.int64)
        self.hh_weights = np.array([h.consumption_weights for h in households],
                                   dtype=np.float64)
        if self.hh_weights.shape[1] != s:
            raise ValueError(
                f"household weights have {self.hh_weights.shape[1]} categories, "
                f"IO table has {s} sectors")
        self.hh_employer = np.full(n, -1, dtype=np.int64)
        self.hh_income_prev = np.array([h.gross_income for h in households], dtype=np.int64)
        self.hh_leverb = np.zeros(n, dtype=np.uint8)
        self.hh_adopted = np.zeros((len(self.durables), n), dtype=np.uint8)

        self.fm_sector = np.array([f.sector for f in firms], dtype=np.int64)
        self.fm_size = np.array([max(f.size, 1) for f in firms], dtype=np.float64)
        self.fm_dep = np.array([f.deposits for f in firms], dtype=np.int64)
        self.fm_green_cap = np.zeros(m, dtype=np.int64)
        self.fm_inventory = np.zeros(m, dtype=np.float64)
        self.fm_price = np.zeros(m, dtype=np.float64)
        self.fm_unit_cost = np.zeros(m, dtype=np.float64)
        self.fm_markup = np.full(m, policy.markup0, dtype=np.float64)
        self.fm_output_last = np.zeros(m, dtype=np.float64)
        self.fm_sales_last = np.zeros(m, dtype=np.float64)
        self.fm_revenue_last = np.zeros(m, dtype=np.int64)
        self.fm_invratio_prev = np.full(m, policy.inventory_target, dtype=np.float64)
        self._sector_idx = [np.where(self.fm_sector == sec)[0] for sec in range(s)]
        for sec in range(s):
            if len(self._sector_idx[sec]) == 0:
                raise SimulationError(f"sector {sec} has no firms")

        self.gov_dep = 0
        self.policy_rate = policy.neutral_rate + policy.inflation_target
        self.gov_spread = 0.0
        self.wage_index = np.full(s, policy.wage0 * CENTS, dtype=np.float64)

        self.frames: list[metrics.IndicatorFrame] = []
        self.rate_history: list[dict] = []
        self.cpi_history: list[float] = []
        self.real_gdp_history: list[float] = []
        self.nominal_gdp_history: list[int] = []
        self.cpi_base_prices: np.ndarray | None = None
        self.cpi_base_weights: np.ndarray | None = None
        self._tech_cost0 = {name: ts.current_cost for name, ts in self.techs.items()}
        self._scenario_applied: set[int] = set()
        self._ledger: dict[str, int] = {}

        self._init_steady_state()

    # ------------------------------------------------------------------
    # initialization
    # ------------------------------------------------------------------

    def _init_steady_state(self) -> None:
        """Initial employment, prices, inventories from a Leontief output guess."""
        p = self.policy
        s = self.s
        a = self.io.coefficients
        labor = self.io.labor_coefficients

        lhs = np.eye(s) - (1.0 + p.markup0) * a.T
        price0 = np.linalg.solve(lhs, (1.0 + p.markup0) * self.wage_index * labor)
        if np.any(price0 <= 0):
            raise SimulationError("initial price solve produced non-positive prices")

        # final-demand guess from household budgets at initial prices
        budget = p.propensity_to_consume * (
            self.hh_dep.astype(np.float64) + self.hh_income_prev.astype(np.float64))
        budget = np.maximum(budget, 0.0)
        spend_by_sector = budget @ self.hh_weights
        final_demand = spend_by_sector / price0
        gross_output = np.maximum(np.linalg.solve(np.eye(s) - a, final_demand), 0.0)

        sector_labor = np.ceil(gross_output * labor).astype(np.int64)
        total_demand = int(sector_labor.sum())
        if total_demand > self.n and total_demand > 0:
            scaled = np.floor(sector_labor * (self.n / total_demand)).astype(np.int64)
            missing = self.n - int(scaled.sum())
            if missing > 0:
                frac = sector_labor * (self.n / total_demand) - scaled
                order = np.lexsort((np.arange(s), -frac))
                scaled[order[:missing]] += 1
            sector_labor = scaled

        firm_demand = np.zeros(self.m, dtype=np.int64)
        for sec in range(s):
            idx = self._sector_idx[sec]
            firm_demand[idx] = allocate_integer(int(sector_labor[sec]), self.fm_size[idx])
        slots = np.repeat(np.arange(self.m), firm_demand)
        k = min(len(slots), self.n)
        self.hh_employer[:k] = slots[:k]

        n_emp = np.bincount(self.hh_employer[self.hh_employer >= 0], minlength=self.m)
        firm_labor = labor[self.fm_sector]
        self.fm_output_last = np.where(firm_labor > 0,
                                       n_emp / np.maximum(firm_labor, 1e-12), 0.0)
        self.fm_sales_last = self.fm_output_last.copy()
        self.fm_inventory = p.inventory_target * self.fm_output_last
        self.fm_unit_cost = price0[self.fm_sector] / (1.0 + p.markup0)
        self.fm_price = price0[self.fm_sector].copy()
        self.fm_revenue_last = np.rint(self.fm_output_last * self.fm_price).astype(np.int64)
        wage_cents = np.rint(self.wage_index).astype(np.int64)
        wage_bill0 = n_emp.astype(np.int64) * wage_cents[self.fm_sector]
        self.fm_dep = self.fm_dep + 2 * wage_bill0

        employed = self.hh_employer >= 0
        wage_per_hh = wage_cents[self.fm_sector[np.maximum(self.hh_employer, 0)]]
        transfer = int(round(p.transfer_per_household * CENTS))
        self.hh_income_prev = np.where(employed, wage_per_hh, 0) + transfer

    # ------------------------------------------------------------------
    # helpers
    # ------------------------------------------------------------------

    def _pool_ask(self) -> np.ndarray:
        """Inventory-weighted average ask price per sector (falls back to output)."""
        ask = np.zeros(self.s)
        for sec in range(self.s):
            idx = self._sector_idx[sec]
            inv = self.fm_inventory[idx]
            tot = float(inv.sum())
            if tot > 0:
                ask[sec] = float((inv * self.fm_price[idx]).sum()) / tot
            else:
                out = self.fm_output_last[idx]
                osum = float(out.sum())
                ask[sec] = (float((out * self.fm_price[idx]).sum()) / osum
                            if osum > 0 else float(self.fm_price[idx].mean()))
        return ask

    def cpi_sector_prices(self) -> np.ndarray:
        """Unweighted average ask per sector, for the price index.

        Deliberately composition-free: if no firm changes its price, the
        index cannot move, no matter how quantities shift between firms.
        """
        return np.array([float(self.fm_price[self._sector_idx[sec]].mean())
                         for sec in range(self.s)])

    def _sector_inventory(self) -> np.ndarray:
        return np.array([float(self.fm_inventory[self._sector_idx[i]].sum())
                         for i in range(self.s)])

    def _credit_market_sales(self, sec: int, money: int, qty: float) -> None:
        """Drain ``qty`` units from sector ``sec`` (ascending firm id) and
        split ``money`` over its sellers in proportion to quantity * ask."""
        if money == 0 and qty <= 0:
            return
        idx = self._sector_idx[sec]
        inv = self.fm_inventory[idx]
        cum = np.cumsum(inv)
        sold = np.minimum(inv, np.maximum(qty - (cum - inv), 0.0))
        self.fm_inventory[idx] = inv - sold
        credits = allocate_integer(money, sold * self.fm_price[idx])
        self.fm_dep[idx] += credits
        self.fm_revenue_cur[idx] += credits
        self.fm_sales_cur[idx] += sold

    def _credit_order_book(self, sec: int, money: int) -> None:
        """Credit made-to-order green purchases to sector firms by capacity."""
        if money == 0:
            return
        idx = self._sector_idx[sec]
        credits = allocate_integer(money, self.fm_output_last[idx])
        self.fm_dep[idx] += credits
        self.fm_revenue_cur[idx] += credits
        self.fm_sales_cur[idx] += credits / np.maximum(self.fm_price[idx], 1e-9)

    def _apply_weight_shift(self, rows: np.ndarray, cat_from: int, cat_to: int,
                            fraction: float) -> None:
        if fraction == 0.0 or len(rows) == 0 or cat_from == cat_to:
            return
        w = self.hh_weights
        moved = w[rows, cat_from] * fraction
        w[rows, cat_from] -= moved
        w[rows, cat_to] += moved
        row_sums = w[rows].sum(axis=1)
        w[rows] /= row_sums[:, None]

    def _durable_price_cents(self, kind: DurableKind) -> int:
        price = kind.price0
        if kind.tech_ref is not None:
            ts = self.techs[kind.tech_ref]
            price = kind.price0 * (ts.current_cost / self._tech_cost0[kind.tech_ref])
        return max(1, int(round(price * CENTS)))

    def total_deposits(self) -> int:
        return int(self.hh_dep.sum()) + int(self.fm_dep.sum()) + self.gov_dep

    def green_sector_for(self, scenario: ScenarioSpec) -> int:
        return (scenario.green_sector if scenario.green_sector is not None
                else self.policy.green_sector)

    def begin_quarter(self) -> None:
        """Reset the per-quarter scratch: ledgers, snapshots, accumulators."""
        self._ledger = {}
        self._dep_total_prev = self.total_deposits()
        self._dep_start_quarter = self.hh_dep.copy()
        self.hh_income_cur = np.zeros(self.n, dtype=np.int64)
        self.fm_revenue_cur = np.zeros(self.m, dtype=np.int64)
        self.fm_sales_cur = np.zeros(self.m, dtype=np.float64)
        self._hh_wage = np.zeros(self.n, dtype=np.int64)
        self._hh_green_spend = np.zeros(self.n, dtype=np.int64)
        self._fm_green_spend = np.zeros(self.m, dtype=np.int64)
        self._wage_bill = np.zeros(self.m, dtype=np.int64)
        self._input_cost = np.zeros(self.m, dtype=np.int64)
        self._consumption_by_sector = np.zeros(self.s, dtype=np.int64)
        self.emissions_q = 0.0

    # ------------------------------------------------------------------
    # sub-steps, in quarter order
    # ------------------------------------------------------------------

    def apply_lever_d(self, edits, t: int) -> None:
        """Interpolated technical-coefficient edits; abort if a column sum hits 1."""
        if not edits:
            return
        a = self.io.coefficients
        for e in edits:
            v = e.value_at(t)
            if v is not None:
                if v < 0:
                    raise ValueError("lever D produced a negative coefficient")
                a[e.sector_from, e.sector_to] = v
        check_productive(a)

    def apply_lever_e_quarter(self, scenario: ScenarioSpec) -> None:
        shifts = scenario.lever_e_quarter_shifts(self.t)
        if not shifts:
            return
        everyone = np.arange(self.n)
        for sh in shifts:
            self._apply_weight_shift(everyone, sh.category_from, sh.category_to,
                                     sh.fraction)

    def labor_market_step(self) -> None:
        """Post labor demand, separate surplus staff, match the unemployed.

        Separations are last-hired-first-fired proxied by descending household
        id; hires pair unemployed households and vacancies in ascending
        (household id, firm id) order. Sector wages index to trailing inflation.
        """
        p = self.policy
        if self.frames:
            self.wage_index *= (1.0 + p.wage_indexation * self.frames[-1].inflation)

        labor = self.io.labor_coefficients[self.fm_sector]
        planned = np.maximum(
            self.fm_sales_last * (1.0 + p.inventory_target) - self.fm_inventory, 0.0)
        demand = np.ceil(planned * labor).astype(np.int64)

        employed = self.hh_employer >= 0
        counts = np.bincount(self.hh_employer[employed], minlength=self.m)
        # adjustment friction: a firm sheds at most max_layoff_rate of staff
        max_shed = np.ceil(counts * p.max_layoff_rate).astype(np.int64)
        keep = np.maximum(demand, counts - max_shed)
        over = counts > keep
        if np.any(over):
            affected = employed & over[np.maximum(self.hh_employer, 0)]
            ids = np.where(affected)[0]
            order = np.lexsort((ids, self.hh_employer[ids]))
            sorted_ids = ids[order]
            sorted_emp = self.hh_employer[sorted_ids]
            group_start = np.searchsorted(sorted_emp, np.arange(self.m), side="left")
            pos_in_group = np.arange(len(sorted_ids)) - group_start[sorted_emp]
            fired = sorted_ids[pos_in_group >= keep[sorted_emp]]
            self.hh_employer[fired] = -1
            employed = self.hh_employer >= 0
            counts = np.bincount(self.hh_employer[employed], minlength=self.m)

        vacancies = np.maximum(demand - counts, 0)
        slots = np.repeat(np.arange(self.m), vacancies)
        unemployed = np.where(~employed)[0]
        k = min(len(slots), len(unemployed))
        if k > 0:
            self.hh_employer[unemployed[:k]] = slots[:k]

    def production_step(self) -> None:
        """Leontief production constrained by labor and by input availability.

        Inputs come from suppliers' start-of-quarter inventories plus their
        own concurrent output, so a sector with empty shelves can still
        restart. The mutually consistent output vector is the greatest fixed
        point of a monotone map, approached from the labor-feasible ceiling by
        a short sector-level iteration. Input shortages ration every buyer of
        that input proportionally; purchases clear at the sector pool ask and
        sellers are drained in ascending firm id.
        """
        labor = self.io.labor_coefficients[self.fm_sector]
        a_cols = self.io.coefficients[:, self.fm_sector]  # (s, m)
        uses_input = a_cols > 0

        employed = self.hh_employer >= 0
        n_emp = np.bincount(self.hh_employer[employed], minlength=self.m)
        q_labor = np.where(labor > 0, n_emp / np.maximum(labor, 1e-12), 0.0)

        inv_sector = self._sector_inventory()
        # Output must satisfy x <= labor ceiling and input demand a@x <= stock
        # + concurrent output. The map x -> ceiling * rationing(x) is not
        # monotone (availability and demand both grow with x), so damp with a
        # running min: the iterate is then decreasing and converges to a
        # feasible point; the drain below is capped by realized stock anyway.
        output = q_labor.copy()
        for _ in range(8):
            sector_out = np.zeros(self.s)
            np.add.at(sector_out, self.fm_sector, output)
            demand = a_cols @ output
            avail = inv_sector + sector_out
            sigma = np.ones(self.s)
            for i in range(self.s):
                if demand[i] > 0:
                    sigma[i] = min(1.0, avail[i] / demand[i])
            firm_sigma = np.where(uses_input, sigma[:, None], 1.0).min(axis=0)
            output = np.minimum(output, q_labor * firm_sigma)

        self.fm_inventory += output
        ask = self._pool_ask()
        purchase_qty = a_cols * output[None, :]  # (s, m)
        payments = np.floor(purchase_qty * ask[:, None]).astype(np.int64)
        input_cost = payments.sum(axis=0)
        self.fm_dep -= input_cost
        for i in range(self.s):
            self._credit_market_sales(i, int(payments[i].sum()),
                                      float(purchase_qty[i].sum()))

        wage_cents = np.rint(self.wage_index).astype(np.int64)
        firm_wage = wage_cents[self.fm_sector]
        wage_bill = n_emp.astype(np.int64) * firm_wage
        self.fm_dep -= wage_bill
        hh_wage = np.where(employed, firm_wage[np.maximum(self.hh_employer, 0)], 0)
        self.hh_dep += hh_wage

        self.fm_output_last = output
        self._hh_wage = hh_wage
        self._wage_bill = wage_bill
        self._input_cost = input_cost
        self._ledger["wages"] = int(wage_bill.sum())
        self._ledger["intermediate"] = int(input_cost.sum())
        self.emissions_q = float(
            (output * self.io.emission_intensity[self.fm_sector]).sum())

    def pricing_step(self) -> None:
        """Unit cost from realized outlays; markup drifts toward the stock target."""
        p = self.policy
        amort = np.rint(self.fm_green_cap * p.amortization_rate).astype(np.int64)
        self.fm_green_cap -= amort
        total_cost = (self._wage_bill + self._input_cost + amort).astype(np.float64)
        produced = self.fm_output_last > EPS_OUTPUT
        self.fm_unit_cost = np.where(
            produced, total_cost / np.maximum(self.fm_output_last, EPS_OUTPUT),
            self.fm_unit_cost)

        mult = self._green_cost_multiplier()
        if mult != 1.0:
            green = self.fm_sector == p.green_sector
            self.fm_unit_cost = np.where(green & produced,
                                         self.fm_unit_cost * mult, self.fm_unit_cost)

        up = self.fm_invratio_prev < p.inventory_target
        down = self.fm_invratio_prev > p.inventory_target
        self.fm_markup = np.where(up, self.fm_markup * (1.0 + p.markup_step),
                                  np.where(down, self.fm_markup * (1.0 - p.markup_step),
                                           self.fm_markup))
        self.fm_price = self.fm_unit_cost * (1.0 + self.fm_markup)

    def _green_cost_multiplier(self) -> float:
        if not self.techs:
            return 1.0
        return float(np.mean([self.techs[n].current_cost / self._tech_cost0[n]
                              for n in sorted(self.techs)]))

    def apply_lever_b(self, amount_cents: int, targeting: str, green_sector: int) -> int:
        """Forced per-household green spending; deposits may go negative (flagged)."""
        if amount_cents == 0:
            return 0
        if targeting == "non_adopters" and self.hh_adopted.shape[0] > 0:
            targeted = ~self.hh_adopted.any(axis=0)
        else:
            targeted = np.ones(self.n, dtype=bool)
        self.hh_dep[targeted] -= amount_cents
        self.hh_leverb |= (targeted & (self.hh_dep < 0)).astype(np.uint8)
        self._hh_green_spend[targeted] += amount_cents
        spent = amount_cents * int(targeted.sum())
        self._credit_order_book(green_sector, spent)
        return spent

    def consumption_step(self, scenario: ScenarioSpec) -> None:
        """Forced green spending (lever B), then discretionary budgets.

        Budgets are propensity * (start-of-quarter deposits + net wage +
        transfer), capped at the current balance so only lever B can push a
        household negative. Sector shortages scale every household's executed
        spend by the same factor; the remainder stays on deposit.
        """
        p = self.policy
        green_sec = self.green_sector_for(scenario)

        lever_b_total = 0
        for rule in scenario.lever_b_at(self.t):
            lever_b_total += self.apply_lever_b(
                int(round(rule.amount * CENTS)), rule.targeting, green_sec)
        self._ledger["lever_b"] = lever_b_total

        transfer = int(round(p.transfer_per_household * CENTS))
        net_wage = self._hh_wage - np.rint(
            self._hh_wage * p.tax_rate_income).astype(np.int64)
        budget = np.rint(p.propensity_to_consume * (
            self._dep_start_quarter + net_wage + transfer).astype(np.float64)
        ).astype(np.int64)
        budget = np.maximum(budget, 0)
        budget = np.minimum(budget, np.maximum(self.hh_dep, 0))

        ask = self._pool_ask()
        spend_by_sector = budget.astype(np.float64) @ self.hh_weights
        demand_qty = np.where(ask > 0, spend_by_sector / np.maximum(ask, 1e-300), 0.0)
        avail = self._sector_inventory()
        scale = np.ones(self.s)
        for i in range(self.s):
            if demand_qty[i] > 0:
                scale[i] = min(1.0, avail[i] / demand_qty[i]) if avail[i] > 0 else 0.0

        pay = np.empty((self.n, self.s), dtype=np.int64)
        debit = np.empty(self.n, dtype=np.int64)
        self.kern.consumption_budget_pay(
            self._dep_start_quarter, self.hh_dep, self._hh_wage, self.hh_weights,
            scale, p.propensity_to_consume, p.tax_rate_income, transfer,
            pay, debit, self.workers)
        credit = pay.sum(axis=0)
        self.hh_dep -= debit
        for i in range(self.s):
            self._credit_market_sales(i, int(credit[i]), float(demand_qty[i] * scale[i]))
        self._consumption_by_sector = credit
        self._ledger["consumption"] = int(debit.sum())

    def apply_lever_a(self, shares: list[float], green_sector: int) -> None:
        """Forced firm green investment: share of last-quarter revenue per sector."""
        share_vec = np.asarray(shares, dtype=np.float64)
        if np.any(share_vec < 0):
            raise ValueError("lever A shares must be >= 0")
        if not np.any(share_vec > 0):
            self._ledger["lever_a"] = 0
            return
        spend = np.rint(self.fm_revenue_last.astype(np.float64)
                        * share_vec[self.fm_sector]).astype(np.int64)
        self.fm_dep -= spend
        self.fm_green_cap += spend
        self._fm_green_spend += spend
        total = int(spend.sum())
        self._credit_order_book(green_sector, total)
        self._ledger["lever_a"] = total

    def fiscal_step(self, scenario: ScenarioSpec) -> None:
        """Wage tax, transfers, lever-C subsidies under the financing mode.

        ``expansion`` lets debt absorb the subsidy; ``reduced_spending`` cuts
        the quarter's transfer pool by the subsidy total (floored at zero,
        remainder to debt).
        """
        p = self.policy
        tax = np.empty(self.n, dtype=np.int64)
        self.kern.wage_tax(self._hh_wage, p.tax_rate_income, self.hh_dep, tax,
                           self.workers)
        tax_total = int(tax.sum())
        self.gov_dep += tax_total
        self._ledger["taxes"] = tax_total

        transfer_pool = int(round(p.transfer_per_household * CENTS)) * self.n
        subsidy_total = 0
        subsidy_cut = 0
        for rule in scenario.lever_c_at(self.t):
            amount = int(round(rule.total * CENTS))
            if amount == 0:
                continue
            if rule.target == "firms":
                if rule.allocation == "proportional_to_green_spend":
                    credits = allocate_integer(amount,
                                               self._fm_green_spend.astype(np.float64))
                else:
                    credits = uniform_split(amount, self.m)
                self.fm_dep += credits
            else:
                if rule.allocation == "proportional_to_green_spend":
                    credits = allocate_integer(amount,
                                               self._hh_green_spend.astype(np.float64))
                else:
                    credits = uniform_split(amount, self.n)
                self.hh_dep += credits
                self.hh_income_cur += credits
            subsidy_total += amount
            if rule.financing == "reduced_spending":
                subsidy_cut += amount
        self.gov_dep -= subsidy_total
        self._ledger["subsidies"] = subsidy_total

        paid_pool = max(0, transfer_pool - subsidy_cut)
        transfers = uniform_split(paid_pool, self.n)
        self.hh_dep += transfers
        self.hh_income_cur += transfers
        self.gov_dep -= paid_pool
        self._ledger["transfers"] = paid_pool

    def pay_dividends(self) -> None:
        """Recycle excess firm cash to households in proportion to their wealth."""
        p = self.policy
        buffer = np.rint(self._wage_bill * p.firm_buffer_quarters).astype(np.int64)
        excess = np.maximum(self.fm_dep - buffer, 0)
        div = np.rint(excess.astype(np.float64) * p.dividend_payout).astype(np.int64)
        pool = int(div.sum())
        self._ledger["dividends"] = pool
        if pool == 0:
            return
        self.fm_dep -= div
        credits = allocate_integer(pool, np.maximum(self.hh_illq, 0).astype(np.float64) + 1.0)
        self.hh_dep += credits
        self.hh_income_cur += credits

    def monetary_step(self) -> None:
        """Taylor rule with a zero lower bound, hinge debt spread, deposit interest.

        Central-bank interest on positive deposits is the money-issuance
        channel; government interest above the hinge flows back to the central
        bank as negative issuance. Both legs are logged for the audit.
        """
        p = self.policy
        if self.frames:
            pi_prev = self.frames[-1].inflation
            debt_ratio_prev = self.frames[-1].debt_ratio
        else:
            pi_prev = p.inflation_target
            debt_ratio_prev = 0.0
        gap = 0.0
        if len(self.real_gdp_history) >= 2:
            window = self.real_gdp_history[-8:]
            mean = float(np.mean(window))
            if mean > 0:
                gap = (self.real_gdp_history[-1] - mean) / mean
        self.policy_rate = max(
            0.0, p.neutral_rate + pi_prev + p.taylor_pi * (pi_prev - p.inflation_target)
            + p.taylor_gap * gap)
        self.gov_spread = p.spread_slope * max(0.0, debt_ratio_prev - p.debt_ceiling_ratio)

        hh_int = np.empty(self.n, dtype=np.int64)
        self.kern.deposit_interest(self.hh_dep, self.policy_rate,
                                   self.hh_income_cur, hh_int, self.workers)
        fm_int = np.where(self.fm_dep > 0,
                          np.rint(self.fm_dep * self.policy_rate), 0.0).astype(np.int64)
        self.fm_dep += fm_int
        issuance = int(hh_int.sum()) + int(fm_int.sum())

        gov_rate = self.policy_rate + self.gov_spread
        if self.gov_dep >= 0:
            gov_int = int(np.rint(self.gov_dep * self.policy_rate))
            self.gov_dep += gov_int
            issuance += gov_int
        else:
            gov_int = int(np.rint(-self.gov_dep * gov_rate))
            self.gov_dep -= gov_int
            issuance -= gov_int
        self._ledger["issuance"] = issuance
        self.rate_history.append({"t": self.t, "policy_rate": self.policy_rate,
                                  "gov_rate": gov_rate, "spread": self.gov_spread})

    def diffusion_step(self, scenario: ScenarioSpec) -> None:
        """Durable adoption over the social graph, with weight rewiring.

        Adopters pay (price - subsidy) to the green sector; any point-of-sale
        subsidy is paid by government on top (debt-financed). Adoption is
        irreversible and the decision reads the start-of-step adopter set.
        """
        self._ledger["adoption"] = 0
        self._ledger["durable_subsidy"] = 0
        if not self.durables or self.graph is None:
            return
        green_sec = self.green_sector_for(scenario)
        subsidy_cents = sum(int(round(r.amount * CENTS))
                            for r in scenario.durable_subsidies_at(self.t))
        for k, kind in enumerate(self.durables):
            price_cents = self._durable_price_cents(kind)
            sub = min(subsidy_cents, price_cents)
            net_cost = price_cents - sub
            income_ccy = np.maximum(self.hh_income_prev, 1).astype(np.float64) / CENTS
            new = decide_adoptions(
                self.graph, self.hh_adopted[k], kind.params, income_ccy,
                price_cents / CENTS, sub / CENTS,
                self.hh_dep, net_cost, self.seed, rng.STREAM_DIFFUSION + k, self.t,
                kernels=self.kern, workers=self.workers)
            adopters = np.where(new == 1)[0]
            if len(adopters) == 0:
                continue
            self.hh_adopted[k, adopters] = 1
            self.hh_dep[adopters] -= net_cost
            self._hh_green_spend[adopters] += net_cost
            self.gov_dep -= sub * len(adopters)
            self._credit_order_book(green_sec, price_cents * len(adopters))
            self._ledger["adoption"] += net_cost * len(adopters)
            self._ledger["durable_subsidy"] += sub * len(adopters)

            self._apply_weight_shift(adopters, kind.shift_from, kind.shift_to,
                                     kind.shift_fraction)
            for shift in scenario.durable_shifts(kind.name):
                self._apply_weight_shift(adopters, shift.category_from,
                                         shift.category_to, shift.fraction)

    def tech_step(self) -> None:
        """Deployment from the quarter's green flows; costs follow the curves."""
        if not self.techs:
            return
        green_money = (self._ledger.get("lever_a", 0) + self._ledger.get("lever_b", 0)
                       + self._ledger.get("adoption", 0)
                       + self._ledger.get("durable_subsidy", 0))
        names = sorted(self.techs)
        split = green_money / len(names) / CENTS  # currency per tech
        for name in names:
            ts = self.techs[name]
            unit_price = ts.current_cost * self.policy.usd_to_currency
            realized = split / unit_price if unit_price > 0 else 0.0
            self.techs[name] = advance_tech(ts, quarterly_deployment(ts, self.t + 1, realized))

    def stock_flow_audit(self) -> dict:
        """Assert exact money conservation for the quarter; return flow totals."""
        if self.inject_fault is not None and self.inject_fault[0] == self.t:
            self.hh_dep[0] += self.inject_fault[1]
        residual = (self.total_deposits() - self._dep_total_prev
                    - self._ledger.get("issuance", 0))
        if residual != 0:
            raise AuditFailure(int(residual))
        report = dict(self._ledger)
        report["residual_cents"] = 0
        return report

    # ------------------------------------------------------------------
    # the quarter
    # ------------------------------------------------------------------

    def step(self, scenario: ScenarioSpec | None = None) -> metrics.IndicatorFrame:
        """Advance one quarter under the scenario (None = no-action baseline)."""
        sc = scenario if scenario is not None else NULL_SCENARIO
        if not sc.is_null():
            if self.t in self._scenario_applied:
                raise ScenarioReapplied(f"scenario already applied for quarter {self.t}")
            self._scenario_applied.add(self.t)

        self.begin_quarter()
        green_sec = self.green_sector_for(sc)
        self.apply_lever_d(sc.lever_d, self.t)
        self.apply_lever_e_quarter(sc)
        self.labor_market_step()
        self.production_step()
        self.pricing_step()
        self.consumption_step(sc)
        self.apply_lever_a(sc.lever_a_shares(self.t, self.s), green_sec)
        self.fiscal_step(sc)
        self.pay_dividends()
        self.monetary_step()
        self.diffusion_step(sc)
        self.tech_step()

        max_dev = float(np.abs(self.hh_weights.sum(axis=1) - 1.0).max())
        if max_dev > 1e-9:
            raise SimulationError(f"consumption weights left the simplex (dev {max_dev:.2e})")
        self.stock_flow_audit()

        self.hh_income_cur += self._hh_wage
        frame, cpi = metrics.compute_indicators(self)
        self.frames.append(frame)
        self.cpi_history.append(cpi)
        self.nominal_gdp_history.append(int(round(frame.gdp * CENTS)))
        self.real_gdp_history.append(frame.gdp / cpi if cpi > 0 else frame.gdp)

        self.fm_invratio_prev = np.where(
            self.fm_output_last > EPS_OUTPUT,
            self.fm_inventory / np.maximum(self.fm_output_last, EPS_OUTPUT),
            self.fm_invratio_prev)
        self.fm_sales_last = self.fm_sales_cur.copy()
        self.fm_revenue_last = self.fm_revenue_cur.copy()
        self.hh_income_prev = self.hh_income_cur.copy()
        self.t += 1
        return frame

    def run(self, horizon: int,
            scenario: ScenarioSpec | None = None) -> list[metrics.IndicatorFrame]:
        for _ in range(horizon):
            self.step(scenario)
        return self.frames
