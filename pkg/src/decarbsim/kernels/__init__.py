"""Hot-kernel backend selection.

The compiled Cython core is used when present; otherwise the pure-numpy
fallback. Both produce bit-identical results; the compiled core is faster
and can spread per-household loops across worker threads (it releases the
GIL). Set ``DECARBSIM_BACKEND=python`` or ``compiled`` to force a choice.

Every kernel call accumulates wall time into ``timing`` so benchmarks and
the acceptance suite can measure the agent-evaluation phase in isolation.
"""

from __future__ import annotations

import os
import time

import numpy as np

from decarbsim.kernels import _ref

try:
    from decarbsim.kernels import _core  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:
    _core = None
    HAVE_COMPILED = False

timing = {"seconds": 0.0}


def reset_kernel_time() -> None:
    timing["seconds"] = 0.0


def get_kernel_time() -> float:
    return timing["seconds"]


def _run_chunked(fn, n: int, workers: int, args: tuple) -> None:
    # the compiled kernels parallelize internally with an OpenMP static
    # schedule; below ~4096 agents fork-join overhead outweighs the work
    t0 = time.perf_counter()
    if workers <= 1 or n < 4096:
        fn(*args, 0, n, 1)
    else:
        fn(*args, 0, n, workers)
    timing["seconds"] += time.perf_counter() - t0


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        timing["seconds"] += time.perf_counter() - t0
        return out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


class _PythonBackend:
    """Numpy fallback (vectorized whole-array; ``workers`` is accepted but
    parallel chunking needs the compiled core)."""

    NAME = "python"
    SUPPORTS_WORKERS = False

    u01_for_ids = staticmethod(_timed(_ref.u01_for_ids))
    peer_counts = staticmethod(_timed(_ref.peer_counts))
    diffusion_eval = staticmethod(_timed(_ref.diffusion_eval))
    consumption_pay = staticmethod(_timed(_ref.consumption_pay))
    consumption_budget_pay = staticmethod(_timed(_ref.consumption_budget_pay))
    wage_tax = staticmethod(_timed(_ref.wage_tax))
    deposit_interest = staticmethod(_timed(_ref.deposit_interest))


class _CompiledBackend:
    """Chunk-parallel wrappers over the nogil Cython kernels."""

    NAME = "compiled"
    SUPPORTS_WORKERS = True

    @staticmethod
    def u01_for_ids(seed: int, stream: int, t: int, n: int, workers: int = 1) -> np.ndarray:
        from decarbsim.rng import _scalar_prefix

        out = np.empty(n, dtype=np.float64)
        prefix = _scalar_prefix(seed, stream, t)
        _run_chunked(_core.u01_fill, n, workers, (prefix, out))
        return out

    @staticmethod
    def peer_counts(indptr: np.ndarray, indices: np.ndarray, flags: np.ndarray,
                    workers: int = 1) -> np.ndarray:
        n = len(indptr) - 1
        out = np.empty(n, dtype=np.int32)
        _run_chunked(_core.peer_counts_range, n, workers, (indptr, indices, flags, out))
        return out

    @staticmethod
    def diffusion_eval(indptr: np.ndarray, indices: np.ndarray, adopted: np.ndarray,
                       z_base: np.ndarray, peer_coeff: float, logit_u: np.ndarray,
                       deposits: np.ndarray, cost_cents: np.ndarray,
                       out_adopt: np.ndarray, workers: int = 1) -> None:
        n = len(z_base)
        _run_chunked(
            _core.diffusion_eval_range, n, workers,
            (indptr, indices, adopted, z_base, peer_coeff, logit_u, deposits,
             cost_cents, out_adopt),
        )

    @staticmethod
    def consumption_pay(budget: np.ndarray, weights: np.ndarray, scale: np.ndarray,
                        out_pay: np.ndarray, workers: int = 1) -> None:
        n = len(budget)
        _run_chunked(_core.consumption_pay_range, n, workers,
                     (budget, weights, scale, out_pay))

    @staticmethod
    def consumption_budget_pay(dep_start: np.ndarray, dep_now: np.ndarray,
                               wage: np.ndarray, weights: np.ndarray,
                               scale: np.ndarray, ptc: float, tax_rate: float,
                               transfer: int, out_pay: np.ndarray,
                               out_debit: np.ndarray, workers: int = 1) -> None:
        n = len(dep_start)
        _run_chunked(_core.consumption_budget_pay_range, n, workers,
                     (dep_start, dep_now, wage, weights, scale, ptc, tax_rate,
                      transfer, out_pay, out_debit))

    @staticmethod
    def wage_tax(wage: np.ndarray, tax_rate: float, deposits: np.ndarray,
                 out_tax: np.ndarray, workers: int = 1) -> None:
        _run_chunked(_core.wage_tax_range, len(wage), workers,
                     (wage, tax_rate, deposits, out_tax))

    @staticmethod
    def deposit_interest(deposits: np.ndarray, rate: float, income_cur: np.ndarray,
                         out_interest: np.ndarray, workers: int = 1) -> None:
        _run_chunked(_core.deposit_interest_range, len(deposits), workers,
                     (deposits, rate, income_cur, out_interest))


def get_backend(name: str | None = None):
    """Return the kernel backend by name (default: env or auto)."""
    if name is None:
        name = os.environ.get("DECARBSIM_BACKEND", "auto")
    if name == "python":
        return _PythonBackend
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel core is not built")
        return _CompiledBackend
    return _CompiledBackend if HAVE_COMPILED else _PythonBackend


backend = get_backend()
BACKEND_NAME = backend.NAME
