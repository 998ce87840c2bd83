"""Social-network adoption of household durables.

Households sit on a small-world graph built over a geographic ring (sorted by
region then id, k nearest neighbors, random rewiring with probability p).
Each quarter every non-adopter makes a logistic discrete-choice decision whose
index combines price burden, income, peer adoption share, and subsidy; draws
are counter-based so the step is order-independent and parallelizable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from decarbsim import rng
from decarbsim.kernels import backend as default_backend


class DiffusionError(Exception):
    pass


class DegreeTooLarge(DiffusionError):
    pass


class EmptyAdopterSet(DiffusionError):
    pass


@dataclass
class SocialGraph:
    """Undirected adjacency in CSR form (indptr int64, indices int32)."""

    indptr: np.ndarray
    indices: np.ndarray
    degree_k: int
    rewire_p: float

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]


@dataclass
class AdoptionParams:
    base_utility: float
    price_coeff: float  # <= 0
    income_coeff: float  # >= 0
    peer_coeff: float  # >= 0
    subsidy_coeff: float  # >= 0

    def validate(self) -> None:
        if self.price_coeff > 0:
            raise ValueError("price_coeff must be <= 0")
        if min(self.income_coeff, self.peer_coeff, self.subsidy_coeff) < 0:
            raise ValueError("income/peer/subsidy coefficients must be >= 0")


@dataclass
class DurableKind:
    name: str
    params: AdoptionParams
    shift_from: int  # consumption category losing weight on adoption
    shift_to: int
    shift_fraction: float
    price0: float  # purchase price in currency at t=0
    tech_ref: str | None = None  # technology whose cost index scales the price


def build_network(region_codes: np.ndarray, degree_k: int, rewire_p: float,
                  seed: int) -> SocialGraph:
    """Small-world graph over the (region_code, id) ring.

    Ring lattice of k nearest neighbors, then each lattice edge is rewired
    with probability p: the higher-ring endpoint is replaced by a uniformly
    drawn node, retried (bounded) while it would create a self-loop or a
    duplicate edge. Deterministic in ``seed``.
    """
    n = len(region_codes)
    if degree_k % 2 != 0:
        raise ValueError("degree_k must be even")
    if not (2 <= degree_k < n):
        raise DegreeTooLarge(f"degree_k={degree_k} needs 2 <= k < n={n}")
    if not 0.0 <= rewire_p <= 1.0:
        raise ValueError("rewire_p must lie in [0,1]")

    ring = np.lexsort((np.arange(n), region_codes))
    half = degree_k // 2

    edges: set[tuple[int, int]] = set()
    ordered: list[tuple[int, int]] = []
    for pos in range(n):
        for j in range(1, half + 1):
            a = int(ring[pos])
            b = int(ring[(pos + j) % n])
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key not in edges:
                edges.add(key)
                ordered.append((a, b))

    rewired: list[tuple[int, int]] = []
    for counter, (a, b) in enumerate(ordered):
        key = (a, b) if a < b else (b, a)
        if rewire_p > 0.0 and rng.u01(seed, rng.STREAM_NETWORK, 0, counter) < rewire_p:
            edges.discard(key)
            new_b = b
            for attempt in range(64):
                cand = int(rng.hash_u64(seed, rng.STREAM_NETWORK_TARGET, attempt, counter) % n)
                ck = (a, cand) if a < cand else (cand, a)
                if cand != a and ck not in edges:
                    new_b = cand
                    break
            else:
                # dense corner case: keep the original edge
                pass
            key = (a, new_b) if a < new_b else (new_b, a)
            edges.add(key)
        rewired.append(key)

    pairs = np.array(rewired, dtype=np.int64)
    src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    return SocialGraph(indptr=indptr, indices=dst.astype(np.int32),
                       degree_k=degree_k, rewire_p=rewire_p)


def adoption_probability(params: AdoptionParams, income: float, price: float,
                         peer_share: float, subsidy: float) -> float:
    """Logistic adoption probability for one household.

    index = base + price_coeff*(price/income) + income_coeff*ln(income)
          + peer_coeff*peer_share + subsidy_coeff*(subsidy/price)
    """
    if income <= 0:
        raise ValueError("income must be > 0")
    if price <= 0:
        raise ValueError("price must be > 0")
    z = (params.base_utility
         + params.price_coeff * (price / income)
         + params.income_coeff * math.log(income)
         + params.peer_coeff * peer_share
         + params.subsidy_coeff * (subsidy / price))
    p = 1.0 / (1.0 + math.exp(-min(max(z, -700.0), 700.0)))
    # keep the open interval even where float64 saturates
    return min(max(p, 5e-324), 1.0 - 2.0 ** -53)


def decide_adoptions(graph: SocialGraph, adopted: np.ndarray, params: AdoptionParams,
                     incomes: np.ndarray, price: float, subsidy: float,
                     deposits: np.ndarray, net_cost_cents: int, seed: int,
                     stream: int, t: int, kernels=None, workers: int = 1) -> np.ndarray:
    """One synchronous adoption round; returns the new-adopter flag array.

    The decision compares the logistic index against the logit of the
    household's counter-based uniform draw (u < p  <=>  logit(u) < z), which
    keeps the kernel free of transcendentals so both backends agree bitwise.
    """
    kern = kernels if kernels is not None else default_backend
    n = graph.n_nodes
    inc = np.maximum(incomes.astype(np.float64), 1.0)
    z_base = (params.base_utility
              + params.price_coeff * (price / inc)
              + params.income_coeff * np.log(inc)
              + params.subsidy_coeff * (subsidy / price))
    u = kern.u01_for_ids(seed, stream, t, n, workers)
    logit_u = np.log(u) - np.log1p(-u)
    out = np.empty(n, dtype=np.uint8)
    cost = np.full(n, net_cost_cents, dtype=np.int64)
    kern.diffusion_eval(graph.indptr, graph.indices, adopted, z_base,
                        params.peer_coeff, logit_u, deposits, cost, out, workers)
    return out


def adopter_edge_counts(graph: SocialGraph, adopted: np.ndarray) -> tuple[int, int]:
    """(adopter-adopter edges, edges with at least one adopter endpoint)."""
    src = np.repeat(np.arange(graph.n_nodes), graph.degrees())
    a_src = adopted[src].astype(bool)
    a_dst = adopted[graph.indices].astype(bool)
    both = int((a_src & a_dst).sum()) // 2
    either = int((a_src | a_dst).sum()) // 2
    return both, either


def hotspot_index(graph: SocialGraph, adopted: np.ndarray) -> float:
    """Clustering of adopters over the graph, 0-centered under random placement.

    observed = adopter-adopter edges / adopter-incident edges. The expected
    value of that share when m adopters are placed uniformly at random is the
    ratio of hypergeometric edge probabilities, P(both ends adopt) / P(at
    least one end adopts); the index is (observed - expected)/(1 - expected).
    With everyone adopted the share is 0/0 and the guard returns 1 by
    convention.
    """
    n = graph.n_nodes
    flags = np.asarray(adopted, dtype=np.uint8)
    m = int(flags.astype(bool).sum())
    if m == 0:
        raise EmptyAdopterSet("hotspot_index needs at least one adopter")
    p_both = (m * (m - 1)) / (n * (n - 1))
    p_either = 1.0 - ((n - m) * (n - m - 1)) / (n * (n - 1))
    expected = p_both / p_either if p_either > 0 else 1.0
    if expected >= 1.0:
        return 1.0
    both, either = adopter_edge_counts(graph, flags)
    if either == 0:
        return 0.0
    observed = both / either
    return (observed - expected) / (1.0 - expected)


def run_diffusion_experiment(n: int, degree_k: int, rewire_p: float,
                             params: AdoptionParams, price: float, income: float,
                             cluster_frac: float, quarters: int, seed: int,
                             subsidy: float = 0.0, workers: int = 1) -> tuple[SocialGraph, np.ndarray]:
    """Standalone adoption run on a synthetic ring population.

    Seeds a contiguous ring cluster of adopters (``cluster_frac`` of nodes),
    gives every household the same income and enough deposits to afford the
    durable, and iterates the synchronous adoption step. Returns the graph
    and the final adopter flags.
    """
    regions = np.zeros(n, dtype=np.int64)
    graph = build_network(regions, degree_k, rewire_p, seed)
    adopted = np.zeros(n, dtype=np.uint8)
    n_seed = int(round(n * cluster_frac))
    if cluster_frac > 0:
        n_seed = max(1, n_seed)
    adopted[:n_seed] = 1
    incomes = np.full(n, income)
    deposits = np.full(n, int(price * 100) + 1, dtype=np.int64)
    net_cost = int(round((price - subsidy) * 100))
    for t in range(quarters):
        new = decide_adoptions(graph, adopted, params, incomes, price, subsidy,
                               deposits, net_cost, seed, rng.STREAM_DIFFUSION, t,
                               workers=workers)
        adopted |= new
    return graph, adopted
