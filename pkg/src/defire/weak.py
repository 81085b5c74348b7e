"""Weak-coupling analysis: affine equation for first firing times.

Without grouping, the first firing time of every cell solves

    T(x) - eps*eta * int_0^{lower(x)} T(y) dy
        = (1 - eps*eta) u(x) - eta + eps*eta * (lower(x) + int_{lower(x)}^1 u(y) dy)

whose integral operator has sup-norm at most ``eps*eta < 1`` and is inverted
here by fixed-point (Neumann) iteration on the plateau partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .engine import full_cycle, require_valid
from .errors import HypothesisError, NotApplicableError, ProfileError
from .profile import TOL, Params, StepProfile, Trace, l1_distance

__all__ = [
    "FiringProfile",
    "apply_L",
    "solve_T1_neumann",
    "contraction_constant",
    "mu_critical",
    "verify_cycle_contraction",
    "DiscontinuityDemo",
    "discontinuity_limit",
]


@dataclass(frozen=True)
class FiringProfile:
    """First firing time per cluster on a fixed partition."""

    lengths: tuple[float, ...]
    times: tuple[float, ...]
    iterations: int = 0

    def to_dict(self) -> dict:
        return {"lengths": list(self.lengths), "times": list(self.times)}


def apply_L(trace: Trace, v: Sequence[float], params: Params) -> list[float]:
    """``eps*eta`` times the integral of ``v`` over ``(0, lower(x)]``, per plateau."""
    lengths = trace.lengths
    if len(v) != len(lengths):
        raise ProfileError("values do not match the trace partition")
    mu = params.mu
    out, acc = [], 0.0
    for l, vi in zip(lengths, v):
        out.append(mu * acc)
        acc += l * vi
    return out


def _rhs(profile: StepProfile, params: Params) -> list[float]:
    mu, eta = params.mu, params.eta
    lengths, levels = profile.lengths, profile.levels
    out, left, tail = [], 0.0, profile.mean()
    for l, u in zip(lengths, levels):
        out.append((1.0 - mu) * u - eta + mu * (left + tail))
        left += l
        tail -= l * u
    return out


def solve_T1_neumann(profile: StepProfile, params: Params, tol: float = 1e-13,
                     max_iter: int = 10_000) -> FiringProfile:
    """First firing times by Neumann iteration ``T <- rhs + L T`` from ``T = rhs``.

    Raises :class:`NotApplicableError` when the solution has some ``T > u``,
    i.e. when a cluster would reach zero before firing.
    """
    require_valid(profile, params)
    trace = profile.trace()
    rhs = _rhs(profile, params)
    t = list(rhs)
    it = 0
    while True:
        lt = apply_L(trace, t, params)
        new = [r + x for r, x in zip(rhs, lt)]
        it += 1
        change = max(abs(a - b) for a, b in zip(new, t))
        t = new
        if change <= tol:
            break
        if it >= max_iter:
            raise NotApplicableError("Neumann iteration did not converge")
    if any(ti > u + TOL for ti, u in zip(t, profile.levels)):
        raise NotApplicableError("outside applicability regime: some firing time exceeds its level")
    return FiringProfile(profile.lengths, tuple(t), it)


def contraction_constant(mu: float) -> float:
    """Per-cycle L1 contraction factor guaranteed for ``mu = eps*eta``."""
    if not (0.0 <= mu < 1.0):
        raise ValueError("mu must lie in [0, 1)")
    return 1.0 - mu + mu * (math.expm1(mu) - mu) + mu * mu / (1.0 - mu)


def mu_critical(tol: float = 1e-12) -> float:
    """Root of ``exp(mu) + mu^2/(1 - mu) = 2`` in [0.4, 0.5], by bisection."""
    f = lambda m: math.exp(m) + m * m / (1.0 - m) - 2.0
    lo, hi = 0.4, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _check_no_grouping(res, name: str) -> None:
    if any(b != "plus" for b in res.branches) or res.merges:
        raise HypothesisError(f"{name}: some cluster reaches zero before firing (T1 > u)")
    if res.coincidences or len(res.firing_times) != res.n_clusters_start:
        raise HypothesisError(f"{name}: a cluster fires twice before the top cluster fires")


def verify_cycle_contraction(u: StepProfile, v: StepProfile, params: Params) -> float:
    """Ratio of L1 distances after and before one full cycle for two profiles.

    Both profiles must share their lower trace and fire without grouping;
    ``eps*eta`` must lie below :func:`mu_critical`. The ratio is checked
    against :func:`contraction_constant`.
    """
    if u.lengths != v.lengths:
        raise HypothesisError("profiles have different lower traces")
    mu = params.mu
    if mu >= mu_critical():
        raise HypothesisError("eps*eta must be below the critical value")
    before = l1_distance(u, v)
    if before == 0.0:
        return 0.0
    ru, rv = full_cycle(u, params), full_cycle(v, params)
    _check_no_grouping(ru, "u")
    _check_no_grouping(rv, "v")
    ratio = l1_distance(ru.post_profile, rv.post_profile) / before
    if ratio > contraction_constant(mu) + 1e-9:
        raise HypothesisError(f"contraction ratio {ratio} exceeds {contraction_constant(mu)}")
    return ratio


@dataclass(frozen=True)
class DiscontinuityDemo:
    """First firing times of a depressed plateau against the predicted limits.

    ``cells`` are representative cells of the three regions: the depressed
    lower half of the plateau, the intact upper half, and the top cluster.
    """

    cells: tuple[float, float, float]
    times: tuple[float, float, float]
    base_times: tuple[float, float]
    limits: tuple[float, float]

    def to_dict(self) -> dict:
        return {"cells": list(self.cells), "times": list(self.times),
                "base_times": list(self.base_times), "limits": list(self.limits)}


def discontinuity_limit(x1: float, base_level: float, params: Params,
                        n: float = math.inf) -> DiscontinuityDemo:
    """First firing times when the lower half of a left plateau is lowered by 1/n.

    ``n = math.inf`` returns the unperturbed firing times.
    """
    if params.epsilon > 1.0:
        raise NotApplicableError("the demonstration assumes eps <= 1")
    if not (0.0 < x1 < 1.0 and 0.0 < base_level < 1.0):
        raise ProfileError("need 0 < x1 < 1 and 0 < base_level < 1")
    base = StepProfile((x1, 1.0 - x1), (base_level, 1.0))
    require_valid(base, params)
    t_base = full_cycle(base, params).firing_times
    t_inf = t_base[0]
    gap = params.mu * 0.5 * x1 * (t_inf - base_level + 1.0)
    limits = (t_inf, t_inf + gap)
    cells = (0.25 * x1, 0.75 * x1, 0.5 * (1.0 + x1))
    if math.isinf(n):
        times = (t_inf, t_inf, t_base[1])
    else:
        pert = StepProfile((0.5 * x1, 0.5 * x1, 1.0 - x1),
                           (base_level - 1.0 / n, base_level, 1.0))
        require_valid(pert, params)
        res = full_cycle(pert, params)
        if res.merges or any(b != "plus" for b in res.branches):
            raise NotApplicableError("perturbed profile groups before firing")
        times = tuple(res.firing_times)
    return DiscontinuityDemo(cells, times, (t_inf, t_base[1]), limits)
