"""Pure-numpy reference implementations of the hot per-household kernels.

The compiled core in ``_core.pyx`` mirrors these exactly. Both sides restrict
themselves to IEEE-exact operations (add, mul, div, floor, comparisons) in the
same order, so a run produces bit-identical results on either backend.
"""

from __future__ import annotations

import numpy as np

from decarbsim.rng import _GAMMA, _MIX1, _MIX2

NAME = "python"
SUPPORTS_WORKERS = False


def u01_for_ids(seed: int, stream: int, t: int, n: int, workers: int = 1) -> np.ndarray:
    """Uniform (0,1) draw for agent ids 0..n-1 at counter (seed, stream, t)."""
    from decarbsim.rng import _scalar_prefix

    prefix = np.uint64(_scalar_prefix(seed, stream, t))
    x = np.arange(n, dtype=np.uint64) * np.uint64(_GAMMA)
    x = prefix ^ x
    x = x + np.uint64(_GAMMA)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    x = x ^ (x >> np.uint64(31))
    return ((x >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def peer_counts(indptr: np.ndarray, indices: np.ndarray, flags: np.ndarray,
                workers: int = 1) -> np.ndarray:
    """Per-node count of neighbors with ``flags`` set (CSR adjacency)."""
    if len(indices) == 0:
        return np.zeros(len(indptr) - 1, dtype=np.int32)
    per_edge = flags[indices].astype(np.int64)
    sums = np.add.reduceat(per_edge, indptr[:-1])
    # reduceat misreads empty segments; zero them explicitly
    degree = np.diff(indptr)
    sums[degree == 0] = 0
    return sums.astype(np.int32)


def diffusion_eval(indptr: np.ndarray, indices: np.ndarray, adopted: np.ndarray,
                   z_base: np.ndarray, peer_coeff: float, logit_u: np.ndarray,
                   deposits: np.ndarray, cost_cents: np.ndarray,
                   out_adopt: np.ndarray, workers: int = 1) -> None:
    """Synchronous adoption decision against the start-of-step adopter set.

    Writes 1 into ``out_adopt`` for every current non-adopter whose logistic
    index beats its uniform draw and whose deposits cover the net cost.
    ``z_base`` carries every term of the index except the peer one.
    """
    counts = peer_counts(indptr, indices, adopted, workers)
    degree = np.diff(indptr)
    share = np.zeros(len(z_base))
    nz = degree > 0
    share[nz] = counts[nz].astype(np.float64) / degree[nz].astype(np.float64)
    z = z_base + peer_coeff * share
    decide = (adopted == 0) & (deposits >= cost_cents) & (z > logit_u)
    out_adopt[:] = decide.astype(np.uint8)


def consumption_pay(budget: np.ndarray, weights: np.ndarray, scale: np.ndarray,
                    out_pay: np.ndarray, workers: int = 1) -> None:
    """Integer-cent payment of each household into each sector.

    pay[h, s] = floor((budget[h] * weights[h, s]) * scale[s]) where ``scale``
    is the sector rationing factor in [0, 1]. The floor is the only rounding,
    so row sums can never exceed the budget and the unspent remainder stays
    on deposit.
    """
    spend = budget.astype(np.float64)[:, None] * weights
    out_pay[:] = np.floor(spend * scale[None, :]).astype(np.int64)


def consumption_budget_pay(dep_start: np.ndarray, dep_now: np.ndarray,
                           wage: np.ndarray, weights: np.ndarray,
                           scale: np.ndarray, ptc: float, tax_rate: float,
                           transfer: int, out_pay: np.ndarray,
                           out_debit: np.ndarray, workers: int = 1) -> None:
    """Fused budget rule plus sector payments.

    budget = rint(ptc * (start-of-quarter deposits + net wage + transfer)),
    clamped to [0, max(current deposits, 0)]; then the same floor payment as
    :func:`consumption_pay` and the per-household debit (row sum).
    """
    net_wage = wage - np.rint(wage * tax_rate).astype(np.int64)
    budget = np.rint(ptc * (dep_start + net_wage + transfer).astype(np.float64)
                     ).astype(np.int64)
    budget = np.maximum(budget, 0)
    budget = np.minimum(budget, np.maximum(dep_now, 0))
    spend = budget.astype(np.float64)[:, None] * weights
    out_pay[:] = np.floor(spend * scale[None, :]).astype(np.int64)
    out_debit[:] = out_pay.sum(axis=1)


def wage_tax(wage: np.ndarray, tax_rate: float, deposits: np.ndarray,
             out_tax: np.ndarray, workers: int = 1) -> None:
    """Round-half-even wage tax, debited from deposits in place."""
    out_tax[:] = np.rint(wage * tax_rate).astype(np.int64)
    deposits -= out_tax


def deposit_interest(deposits: np.ndarray, rate: float, income_cur: np.ndarray,
                     out_interest: np.ndarray, workers: int = 1) -> None:
    """Interest on positive balances, credited in place and logged."""
    out_interest[:] = np.where(deposits > 0,
                               np.rint(deposits * rate), 0.0).astype(np.int64)
    deposits += out_interest
    income_cur += out_interest
