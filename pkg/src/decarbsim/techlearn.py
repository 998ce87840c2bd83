"""Endogenous technology cost dynamics.

Unit costs follow a floored experience curve driven by cumulative deployment,

    cost(X) = floor + (c0 - floor) * (X / X0) ** (-b),

and deployment targets follow a logistic path in time. Each quarter the
realized deployment is the larger of the logistic schedule increment and the
green purchases converted at the current cost, so scenarios can run ahead of
the schedule but never behind it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class TechError(Exception):
    pass


class NonpositiveCumulative(TechError):
    pass


class TargetOutOfRange(TechError):
    pass


class DegenerateHorizon(TechError):
    pass


@dataclass
class TechCurve:
    name: str
    c0: float  # cost at reference cumulative X0, USD/MWh
    floor: float  # asymptotic cost floor, USD/MWh
    x0: float  # reference cumulative deployment
    b: float  # learning exponent (>= 0)

    def validate(self) -> None:
        if not (self.c0 > self.floor >= 0.0):
            raise ValueError(f"{self.name}: require c0 > floor >= 0")
        if self.x0 <= 0:
            raise ValueError(f"{self.name}: x0 must be > 0")
        if self.b < 0:
            raise ValueError(f"{self.name}: learning exponent must be >= 0")


@dataclass
class AdoptionCurve:
    k: float  # saturation level, deployment units
    r: float  # growth rate per quarter
    t0: float  # midpoint quarter

    def validate(self) -> None:
        if self.k <= 0 or self.r <= 0:
            raise ValueError("adoption curve requires K > 0 and r > 0")


@dataclass
class TechState:
    curve: TechCurve
    adoption: AdoptionCurve | None
    cumulative: float
    current_cost: float = field(init=False)

    def __post_init__(self) -> None:
        self.current_cost = wright_cost(self.curve, self.cumulative)


def wright_cost(curve: TechCurve, x: float) -> float:
    """Floored experience-curve cost at cumulative deployment ``x``."""
    if x <= 0:
        raise NonpositiveCumulative(f"cumulative deployment must be > 0, got {x}")
    return curve.floor + (curve.c0 - curve.floor) * (x / curve.x0) ** (-curve.b)


def calibrate_exponent(c0: float, floor: float, x0: float,
                       x_target: float, cost_target: float) -> float:
    """Learning exponent that hits ``cost_target`` at ``x_target``.

    Closed form: b = ln((c0 - floor) / (cost_target - floor)) / ln(x_target / x0).
    """
    if not (floor < cost_target < c0):
        raise TargetOutOfRange(
            f"cost_target {cost_target} must lie strictly between floor {floor} and c0 {c0}")
    if x_target <= x0:
        raise DegenerateHorizon(f"x_target {x_target} must exceed x0 {x0}")
    return math.log((c0 - floor) / (cost_target - floor)) / math.log(x_target / x0)


def logistic_level(curve: AdoptionCurve, t: float) -> float:
    """Deployment level K / (1 + exp(-r (t - t0))) at quarter ``t``.

    Clamped into the open interval (0, K) where float64 saturates in the
    far tails.
    """
    x = min(max(-curve.r * (t - curve.t0), -700.0), 700.0)
    level = curve.k / (1.0 + math.exp(x))
    return min(max(level, 5e-324), curve.k * (1.0 - 2.0 ** -53))


def advance_tech(state: TechState, new_deployment: float) -> TechState:
    """Accumulate deployment and recompute the cost; pure, order-only-in-total."""
    if new_deployment < 0:
        raise ValueError("new_deployment must be >= 0")
    return TechState(curve=state.curve, adoption=state.adoption,
                     cumulative=state.cumulative + new_deployment)


def quarterly_deployment(state: TechState, t: int, realized_units: float) -> float:
    """Deployment increment for quarter ``t``: max(schedule step, purchases).

    The schedule step is the logistic level gain from t-1 to t (zero without
    an adoption curve); ``realized_units`` is green purchase money already
    converted at the current cost.
    """
    scheduled = 0.0
    if state.adoption is not None:
        scheduled = max(0.0, logistic_level(state.adoption, t)
                        - logistic_level(state.adoption, t - 1))
    return max(scheduled, realized_units)
