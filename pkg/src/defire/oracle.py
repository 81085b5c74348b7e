"""Brute-force first firing time by explicit time stepping.

Used only to cross-check the closed-form engine: levels are decremented on a
uniform grid with clamping at zero, the repressor field is evaluated at every
step, and the first step where the smallest repressor level drops to ``eta``
is refined by bisection. No branch or merge logic is shared with the engine.
"""

from __future__ import annotations

import numpy as np

from .errors import ConsistencyError
from .profile import Params, StepProfile

__all__ = ["oracle_firing_time"]

_CHUNK = 65536


def _min_repressor(lengths: np.ndarray, levels: np.ndarray, t: np.ndarray, mu: float) -> np.ndarray:
    u = np.maximum(levels[None, :] - t[:, None], 0.0)
    mean = u @ lengths
    return (1.0 - mu) * u.min(axis=1) + mu * mean


def oracle_firing_time(profile: StepProfile, params: Params, dt: float = 1e-6) -> float:
    """First time the minimum repressor level reaches ``eta``.

    The grid search brackets the crossing within one step of size ``dt``;
    bisection then narrows the bracket to ``dt / 100``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    lengths = np.asarray(profile.lengths, dtype=float)
    levels = np.asarray(profile.levels, dtype=float)
    mu, eta = params.mu, params.eta
    horizon = 2.0 / (1.0 - mu)
    n_steps = int(np.ceil(horizon / dt))
    step = 0
    while step <= n_steps:
        idx = np.arange(step, min(step + _CHUNK, n_steps + 1))
        m = _min_repressor(lengths, levels, idx * dt, mu)
        hit = np.flatnonzero(m <= eta)
        if hit.size:
            k = int(idx[hit[0]])
            break
        step += _CHUNK
    else:
        raise ConsistencyError("no firing within the horizon 2/(1 - eps*eta)")
    if k == 0:
        return 0.0
    lo, hi = (k - 1) * dt, k * dt
    while hi - lo > dt / 100.0:
        mid = 0.5 * (lo + hi)
        if _min_repressor(lengths, levels, np.array([mid]), mu)[0] <= eta:
            hi = mid
        else:
            lo = mid
    return hi
