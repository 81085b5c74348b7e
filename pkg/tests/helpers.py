"""Random instance generators shared by the test modules."""

from __future__ import annotations

import numpy as np

from defire import Params, StepProfile, Trace, validate_profile


def random_lengths(rng: np.random.Generator, n: int, min_len: float = 1e-3) -> list[float]:
    while True:
        lengths = rng.dirichlet(np.ones(n))
        if lengths.min() > min_len:
            lengths = list(lengths)
            lengths[-1] = 1.0 - sum(lengths[:-1])
            return lengths


def random_levels(rng: np.random.Generator, n: int, low: float = 0.0,
                  min_gap: float = 1e-6) -> list[float]:
    while True:
        levels = sorted(rng.uniform(low, 1.0, n - 1))
        levels.append(1.0)
        if np.min(np.diff([0.0] + levels)) > min_gap:
            return levels


def random_instance(rng: np.random.Generator, n_max: int = 16, eps_max: float | None = None,
                    eta_range: tuple[float, float] = (0.01, 0.5)
                    ) -> tuple[StepProfile, Params]:
    """Valid (profile, params) pair with 2..n_max clusters."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        eta = float(rng.uniform(*eta_range))
        hi = 1.0 / eta if eps_max is None else min(eps_max, 1.0 / eta)
        eps = float(rng.uniform(0.0, hi)) * 0.999
        if eps <= 0.0:
            continue
        params = Params(eps, eta)
        profile = StepProfile(random_lengths(rng, n), random_levels(rng, n))
        if validate_profile(profile, params).valid:
            return profile, params


def random_trace(rng: np.random.Generator, n_max: int = 12, gaps: bool = True) -> Trace:
    """Trace made of plateaus, optionally separated by identity stretches."""
    n = int(rng.integers(1, n_max + 1))
    edges = np.sort(rng.uniform(0.0, 1.0, 2 * n))
    if not gaps:
        cuts = np.sort(rng.uniform(0.0, 1.0, n - 1))
        return Trace.from_lengths(np.diff(np.concatenate([[0.0], cuts, [1.0]])))
    plateaus = [(float(edges[2 * i]), float(edges[2 * i + 1])) for i in range(n)
                if edges[2 * i + 1] - edges[2 * i] > 1e-9]
    return Trace(tuple(plateaus))
