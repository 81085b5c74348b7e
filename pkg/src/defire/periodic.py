"""Periodic profiles with period equal to the top cluster's first firing time.

For a given lower trace there is at most one such profile. Two regimes exist:
when ``eps * int(trace) < 1`` every cluster fires before reaching zero
(``no_damp``, period below 1); otherwise clusters sit at zero for a while
before firing (``damp``, period at least 1) and the orbit exists only below
a critical coupling computed by :func:`existence_bound`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .engine import full_cycle, require_valid
from .errors import ConsistencyError, NotApplicableError, ProfileError
from .profile import TOL, Params, StepProfile, Trace, l1_distance, trace_integral, validate_profile

__all__ = [
    "PeriodicOrbit",
    "ScanRow",
    "ScanResult",
    "existence_bound",
    "existence_status",
    "construct_periodic",
    "verify_fixed_point",
    "scan_epsilon",
]


@dataclass(frozen=True)
class PeriodicOrbit:
    profile: StepProfile
    period: float
    branch: str
    existence_margin: float

    def to_dict(self) -> dict:
        return {**self.profile.to_dict(), "period": self.period, "branch": self.branch,
                "existence_margin": self.existence_margin}


def _top_lower(trace: Trace) -> float:
    return trace.lower()(1.0)


def existence_bound(trace: Trace) -> tuple[float, bool]:
    """Critical coupling above which the periodic orbit of ``trace`` ceases to exist.

    Returns ``(bound, strict)``; the orbit exists iff ``eps < bound`` when
    ``strict`` (the infimum in the criterion is attained, which is always the
    case for a finite family of plateaus) and iff ``eps <= bound`` otherwise.
    ``bound`` is ``math.inf`` when the infimum equals one.

    The infimum runs over the order-preservation ratios of every plateau
    below the top one and over the positivity ratio
    ``(1 - lower(1)) / (1 - upper(0+0))`` of the lowest cluster.
    """
    top = _top_lower(trace)
    if top <= 0.0:
        raise NotApplicableError("trace is a single full plateau (synchronous population)")
    upper = trace.upper()
    ratios = []
    pos = 0.0
    for a, b in trace.plateaus:
        if a >= top:
            break
        if a > pos + TOL:
            ratios.append(0.0)  # identity stretch: upper == lower there
        nxt = upper.right_limit(b)
        ratios.append((b - a) / (1.0 - nxt + b))
        pos = b
    if pos < top - TOL:
        ratios.append(0.0)
    # positivity of the lowest post-firing level; not implied by the ratios above
    ratios.append((1.0 - top) / (1.0 - upper.right_limit(0.0)))
    inf_ratio = min(ratios)
    if inf_ratio >= 1.0 - TOL:
        return math.inf, True
    return 1.0 / (trace_integral(trace.lower()) * (1.0 - inf_ratio)), True


def existence_status(trace: Trace, epsilon: float) -> str:
    """``"exists"``, ``"ghost"`` (coupling exactly at the bound) or ``"none"``."""
    bound, strict = existence_bound(trace)
    if math.isinf(bound):
        return "exists"
    if abs(epsilon - bound) <= TOL * max(1.0, bound):
        return "ghost"
    if epsilon < bound or (not strict and epsilon <= bound):
        return "exists"
    return "none"


def construct_periodic(trace: Trace, params: Params) -> PeriodicOrbit | None:
    """Unique periodic profile with lower trace ``trace``, or None if it does not exist."""
    params.require()
    if not trace.covers_unit:
        raise NotApplicableError("periodic profiles are built for finite step traces only")
    bound, _ = existence_bound(trace)
    eps, eta, mu = params.epsilon, params.eta, params.mu
    integral = trace_integral(trace.lower())
    plateaus = trace.plateaus
    top = plateaus[-1][0]
    if eps * integral < 1.0:
        period = (1.0 - eta) / (1.0 - mu * integral)
        levels = [1.0 - period * (top - a) for a, _ in plateaus]
        branch = "no_damp"
    else:
        if existence_status(trace, eps) != "exists":
            return None
        period = (2.0 * integral - 1.0 / eps) / integral
        levels = [(1.0 - b) * (1.0 - period) + 1.0 - top + a for a, b in plateaus]
        branch = "damp"
    levels[-1] = 1.0
    profile = StepProfile(trace.lengths, levels)
    report = validate_profile(profile, params)
    if not report.valid:
        raise ConsistencyError("constructed periodic profile is invalid: "
                               + "; ".join(report.problems))
    return PeriodicOrbit(profile, period, branch, bound - eps)


def verify_fixed_point(orbit: PeriodicOrbit, params: Params) -> float:
    """L1 defect of one engine cycle from the orbit plus the period mismatch."""
    res = full_cycle(orbit.profile, params)
    return l1_distance(res.post_profile, orbit.profile) + abs(res.return_time - orbit.period)


@dataclass(frozen=True)
class ScanRow:
    epsilon: float
    exists: bool
    branch: str | None
    period: float | None
    bound: float
    strict: bool
    ghost: bool

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "exists": self.exists, "branch": self.branch,
                "period": self.period, "bound": self.bound, "strict": self.strict,
                "ghost": self.ghost}


@dataclass(frozen=True)
class ScanResult:
    rows: list[ScanRow]
    transition: tuple[float, float] | None

    @property
    def ghost_candidates(self) -> list[float]:
        return [r.epsilon for r in self.rows if r.ghost]


def _scan_point(trace: Trace, eta: float, eps: float, bound: float, strict: bool) -> ScanRow:
    params = Params(eps, eta)
    status = existence_status(trace, eps)
    orbit = construct_periodic(trace, params) if status == "exists" else None
    return ScanRow(eps, orbit is not None, orbit.branch if orbit else None,
                   orbit.period if orbit else None, bound, strict, status == "ghost")


def scan_epsilon(trace: Trace, eta: float, grid: Sequence[float], workers: int = 1) -> ScanResult:
    """Existence and orbit data along a grid of couplings.

    ``transition`` is the first adjacent pair (in sorted grid order) where the
    orbit stops existing.
    """
    if len(grid) == 0:
        raise ValueError("empty epsilon grid")
    for eps in grid:
        probs = Params(eps, eta).problems()
        if probs:
            raise ProfileError(f"grid value {eps}: " + "; ".join(probs))
    bound, strict = existence_bound(trace)
    args = [(trace, eta, float(e), bound, strict) for e in grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _scan_point(*a), args))
    else:
        rows = [_scan_point(*a) for a in args]
    transition = None
    ordered = sorted(rows, key=lambda r: r.epsilon)
    for lo, hi in zip(ordered, ordered[1:]):
        if lo.exists and not hi.exists:
            transition = (lo.epsilon, hi.epsilon)
            break
    return ScanResult(rows, transition)
