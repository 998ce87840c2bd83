"""Counter-based random streams.

Every draw in the simulator is a pure hash of ``(seed, stream, t, agent_id)``
via splitmix64, so results do not depend on evaluation order: agents can be
evaluated in parallel, in chunks, or one by one and the run is bit-identical.
There is no ambient RNG state anywhere.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Stream identifiers, one per subsystem that draws randomness.
STREAM_TAIL = 1  # wealth-tail Pareto redraws
STREAM_RESAMPLE = 2  # household resampling
STREAM_FIRM_SIZE = 3  # firm size draws
STREAM_NETWORK = 4  # small-world rewiring
STREAM_NETWORK_TARGET = 5  # rewiring target choice
STREAM_SHARES = 6  # sample-generator expenditure shares
STREAM_DIFFUSION = 16  # + durable kind index

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(x: int) -> int:
    x = (x + _GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def hash_u64(seed: int, stream: int, t: int, agent: int) -> int:
    """Hash a (seed, stream, t, agent) counter to a uniform 64-bit word."""
    x = _mix(seed & MASK64)
    x = _mix(x ^ ((stream * _MIX1) & MASK64))
    x = _mix(x ^ ((t * _MIX2) & MASK64))
    x = _mix(x ^ ((agent * _GAMMA) & MASK64))
    return x


def u01(seed: int, stream: int, t: int, agent: int) -> float:
    """Uniform draw in the open interval (0, 1)."""
    return ((hash_u64(seed, stream, t, agent) >> 12) + 0.5) * 2.0**-52


def u01_array(seed: int, stream: int, t: int, agents: np.ndarray) -> np.ndarray:
    """Vectorized ``u01`` over an array of agent ids (any integer dtype)."""
    x = _mix_np(np.uint64(_scalar_prefix(seed, stream, t)) ^ (agents.astype(np.uint64) * np.uint64(_GAMMA)))
    return ((x >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def _scalar_prefix(seed: int, stream: int, t: int) -> int:
    x = _mix(seed & MASK64)
    x = _mix(x ^ ((stream * _MIX1) & MASK64))
    x = _mix(x ^ ((t * _MIX2) & MASK64))
    return x


def _mix_np(x: np.ndarray) -> np.ndarray:
    x = (x + np.uint64(_GAMMA))
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    return x ^ (x >> np.uint64(31))
