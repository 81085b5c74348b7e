"""Exact event-driven evolution of step profiles.

Between firings every cluster level decays at unit speed until it reaches 0,
and a cluster fires (resets to 1) when its repressor level

    M_n(t) = (1 - eps*eta) * u_n(t) + eps*eta * sum_m l_m u_m(t)

drops to ``eta``. For step profiles the first firing time has a closed form
with two branches: the lowest cluster either fires while still positive
(``plus``) or after reaching 0, together with every other cluster that hit 0
in the meantime (``minus``). Merging is decided algebraically through the
function ``S(x) = int_x^1 (u(y) - u(x)) dy``, never by numeric root finding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConsistencyError, NonTerminationError, ProfileError
from .profile import TOL, Params, StepProfile, l1_distance, validate_profile

__all__ = [
    "FiringOutcome",
    "CycleResult",
    "SimulationResult",
    "repressor_level",
    "s_value",
    "plateau_extent",
    "first_firing",
    "full_cycle",
    "simulate",
    "evaluate_solution",
    "require_valid",
]

log = logging.getLogger(__name__)

MAX_FIRINGS = 10**6
MAX_CYCLES = 10**4


@dataclass(frozen=True)
class FiringOutcome:
    """One firing event seen from the current profile snapshot.

    ``firing_time`` is elapsed time since the snapshot, ``merge_extent`` the
    number of leading clusters that fire together and ``group_length`` their
    total length (the size of the zero plateau in the ``minus`` branch).
    """

    firing_time: float
    merge_extent: int
    branch: str
    post_profile: StepProfile
    group_length: float


@dataclass
class CycleResult:
    """One full cycle: every cluster present at the start fires once.

    ``firing_times`` are measured from the start of the cycle, so the last
    entry equals ``return_time``. ``merges`` holds ``(firing index, labels)``
    for every firing in which more than one cluster fired together; labels
    are the original cluster indices of the simulation start.
    """

    cycle_index: int
    return_time: float
    firing_times: list[float]
    post_profile: StepProfile
    merges: list[tuple[int, tuple[int, ...]]]
    branches: list[str]
    extents: list[int]
    group_lengths: list[float]
    n_clusters_start: int
    post_labels: list[tuple[int, ...]]
    events: list[dict] = field(default_factory=list)
    coincidences: list[dict] = field(default_factory=list)
    snapshots: list[tuple[tuple[float, ...], tuple[float, ...]]] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return self.post_profile.n_clusters


@dataclass
class SimulationResult:
    cycles: list[CycleResult]
    distances: list[float]
    merge_events: list[tuple[int, int, tuple[int, ...]]]
    converged: bool
    converged_at: int | None
    events: list[dict]

    @property
    def final_profile(self) -> StepProfile:
        return self.cycles[-1].post_profile


def require_valid(profile: StepProfile, params: Params) -> None:
    report = validate_profile(profile, params)
    if not report.valid:
        raise ProfileError("invalid profile: " + "; ".join(report.problems))


def _check_index(profile: StepProfile, cluster: int) -> None:
    if not (0 <= cluster < profile.n_clusters):
        raise IndexError(f"cluster {cluster} out of range for {profile.n_clusters} clusters")


def repressor_level(profile: StepProfile, cluster: int, params: Params) -> float:
    """Repressor level of ``cluster`` (0-based) in the snapshot ``profile``."""
    _check_index(profile, cluster)
    mu = params.mu
    return (1.0 - mu) * profile.levels[cluster] + mu * profile.mean()


def s_value(profile: StepProfile, cluster: int) -> float:
    """``S`` at the right edge of ``cluster``: sum over higher clusters of l_n (u_n - u_c)."""
    _check_index(profile, cluster)
    uc = profile.levels[cluster]
    return math.fsum(l * (u - uc) for l, u in
                     zip(profile.lengths[cluster + 1:], profile.levels[cluster + 1:]))


def _extent(lengths: Sequence[float], levels: Sequence[float], eps: float) -> int:
    """Leading clusters with eps*S > 1 at their right edge (0 means plus branch)."""
    n = len(levels)
    tail_len = 1.0
    tail_lu = math.fsum(l * u for l, u in zip(lengths, levels))
    k = 0
    while k < n:
        tail_len -= lengths[k]
        tail_lu -= lengths[k] * levels[k]
        if eps * (tail_lu - levels[k] * tail_len) > 1.0:
            k += 1
        else:
            break
    return k


def plateau_extent(profile: StepProfile, params: Params) -> tuple[int, str]:
    """Size (in clusters) of the first firing plateau and its branch."""
    k = _extent(profile.lengths, profile.levels, params.epsilon)
    if k == 0:
        return 1, "plus"
    return k, "minus"


def _fire(lengths: list[float], levels: list[float], eps: float, eta: float):
    """Core firing step on plain lists.

    Returns ``(T, k, branch, group_length, new_lengths, new_levels)`` with the
    post-firing profile already rotated (fired group last, at level 1).
    """
    n = len(levels)
    mu = eps * eta
    k = _extent(lengths, levels, eps)
    if k == 0:
        mean = math.fsum(l * u for l, u in zip(lengths, levels))
        t = (1.0 - mu) * levels[0] + mu * mean - eta
        k, branch = 1, "plus"
    else:
        group = math.fsum(lengths[:k])
        tail = math.fsum(l * u for l, u in zip(lengths[k:], levels[k:]))
        t = (tail - 1.0 / eps) / (1.0 - group)
        # clusters reaching 0 exactly at the firing instant join the group
        while k < n and levels[k] <= t + TOL:
            k += 1
        branch = "minus"
    if k >= n:
        raise ConsistencyError("full synchrony reached in a single firing")
    group_length = math.fsum(lengths[:k])
    new_lengths = lengths[k:] + [group_length]
    new_levels = [u - t for u in levels[k:]] + [1.0]
    return t, k, branch, group_length, new_lengths, new_levels


def first_firing(profile: StepProfile, params: Params) -> FiringOutcome:
    """Time, merge extent and post-firing profile of the next firing."""
    require_valid(profile, params)
    if profile.n_clusters == 1:
        # degenerate synchronous population: M(t) = 1 - t
        t = 1.0 - params.eta
        return FiringOutcome(t, 1, "plus", profile, 1.0)
    t, k, branch, glen, nl, nu = _fire(list(profile.lengths), list(profile.levels),
                                       params.epsilon, params.eta)
    return FiringOutcome(t, k, branch, StepProfile(nl, nu), glen)


def _run_cycle(lengths, levels, labels, params, cycle_index, max_firings, keep_snapshots):
    """Fire until every cluster present at the start has fired once."""
    eps, eta = params.epsilon, params.eta
    n0 = len(levels)
    # per-cluster sets of cycle-start indices
    members = [frozenset([i]) for i in range(n0)]
    start_labels = list(labels)
    fired: set[int] = set()
    elapsed = 0.0
    res = CycleResult(cycle_index, 0.0, [], None, [], [], [], [], n0, [])  # type: ignore[arg-type]
    firing = 0
    while len(fired) < n0:
        if firing >= max_firings:
            raise NonTerminationError(f"cycle {cycle_index} exceeded {max_firings} firings")
        if keep_snapshots:
            res.snapshots.append((tuple(lengths), tuple(levels)))
        if len(levels) == 1:
            t, k, branch, glen = 1.0 - eta, 1, "plus", 1.0
            new_lengths, new_levels = lengths, [1.0]
        else:
            t, k, branch, glen, new_lengths, new_levels = _fire(lengths, levels, eps, eta)
        elapsed += t
        group = frozenset().union(*members[:k])
        again = group & fired
        group_labels = tuple(sorted(set().union(*(start_labels[i] for i in group))))
        if again:
            # the top cluster's first firing coincides with a re-firing of
            # already-fired clusters; the attribution is ambiguous
            note = {
                "firing": firing,
                "refired": sorted(start_labels[i][0] for i in again),
                "as_this_cycle": "shared firing closes the current cycle",
                "as_next_cycle": "re-fired clusters start the next cycle at this instant",
            }
            res.coincidences.append(note)
            log.warning("cycle %d: simultaneous top and re-firing at firing %d",
                        cycle_index, firing)
        fired |= group
        res.firing_times.append(elapsed)
        res.branches.append(branch)
        res.extents.append(k)
        res.group_lengths.append(glen)
        if k > 1:
            res.merges.append((firing, group_labels))
        members = members[k:] + [group]
        res.events.append({"t": elapsed, "fired_clusters": list(group_labels),
                           "post_levels": list(new_levels)})
        lengths, levels = new_lengths, new_levels
        firing += 1
    res.return_time = elapsed
    res.post_profile = StepProfile(lengths, levels)
    res.post_labels = [tuple(sorted(set().union(*(start_labels[i] for i in m)))) for m in members]
    return res


def full_cycle(profile: StepProfile, params: Params, *, cycle_index: int = 0,
               max_firings: int = MAX_FIRINGS, labels: Sequence[tuple[int, ...]] | None = None,
               keep_snapshots: bool = False) -> CycleResult:
    """Run one full firing cycle; ``return_time`` is the time of the top cluster's firing."""
    require_valid(profile, params)
    if labels is None:
        labels = [(i,) for i in range(profile.n_clusters)]
    return _run_cycle(list(profile.lengths), list(profile.levels), list(labels), params,
                      cycle_index, max_firings, keep_snapshots)


def simulate(profile: StepProfile, params: Params, n_cycles: int, tol: float = 1e-12, *,
             max_firings: int = MAX_FIRINGS, max_cycles: int = MAX_CYCLES,
             keep_snapshots: bool = False) -> SimulationResult:
    """Iterate full cycles and track the L1 change between successive cycle profiles.

    Non-convergence is reported through ``converged``, never raised.
    """
    require_valid(profile, params)
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    if n_cycles > max_cycles:
        raise NonTerminationError(f"n_cycles={n_cycles} exceeds the cap of {max_cycles}")
    labels = [(i,) for i in range(profile.n_clusters)]
    current = profile
    cycles, distances, merges, events = [], [], [], []
    converged_at = None
    t0 = 0.0
    for c in range(n_cycles):
        res = _run_cycle(list(current.lengths), list(current.levels), labels, params,
                         c, max_firings, keep_snapshots)
        d = l1_distance(res.post_profile, current)
        distances.append(d)
        if converged_at is None and d <= tol:
            converged_at = c
        merges.extend((c, i, lab) for i, lab in res.merges)
        for ev in res.events:
            events.append({**ev, "t": t0 + ev["t"]})
        t0 += res.return_time
        cycles.append(res)
        current, labels = res.post_profile, res.post_labels
    return SimulationResult(cycles, distances, merges, distances[-1] <= tol, converged_at, events)


def evaluate_solution(profile: StepProfile, params: Params, cluster: int, t: float,
                      schedule: Sequence[float], horizon: float | None = None) -> float:
    """Level of ``cluster`` at time ``t`` from its firing schedule.

    ``schedule`` lists the cluster's firing times in increasing order. By
    default the schedule is trusted up to the minimum possible spacing
    ``(1 - eps*eta)(1 - eta)`` after its last entry (or, with no entry,
    up to the earliest possible first firing ``Mu - eta``).
    """
    _check_index(profile, cluster)
    if t < 0:
        raise ValueError("t must be non-negative")
    if horizon is None:
        if schedule:
            horizon = schedule[-1] + (1.0 - params.mu) * (1.0 - params.eta)
        else:
            horizon = repressor_level(profile, cluster, params) - params.eta
    if t > horizon + TOL:
        raise ValueError(f"t={t} lies beyond the simulated horizon {horizon}")
    last = None
    for tn in schedule:
        if t > tn:
            last = tn
        else:
            break
    if last is None:
        return max(profile.levels[cluster] - t, 0.0)
    return max(1.0 - t + last, 0.0)
