"""Step profiles, lower/upper traces and the trace algebra.

A population on the cell interval (0, 1] is stored as a finite step function:
cluster ``n`` occupies a sub-interval of length ``lengths[n]`` (ordered by cell
label) and every cell in it carries the expression level ``levels[n]``.
Cells are never enumerated; all integrals reduce to finite sums.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ProfileError

__all__ = [
    "TOL",
    "Params",
    "StepProfile",
    "Trace",
    "ValidationReport",
    "validate_profile",
    "compute_traces",
    "trace_integral",
    "l1_distance",
    "rotate_profile",
]

#: Tolerance used for every equality-type invariant check.
TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Coupling ``epsilon`` and firing threshold ``eta``.

    Construction never fails; use :meth:`problems` or :meth:`require` to
    check the admissible region ``0 < eta < 1`` and ``0 < epsilon < 1/eta``.
    """

    epsilon: float
    eta: float

    @property
    def mu(self) -> float:
        """Diffusion weight ``epsilon * eta`` of the mean field."""
        return self.epsilon * self.eta

    def problems(self) -> list[str]:
        out = []
        if not (0.0 < self.eta < 1.0):
            out.append("eta out of range")
        if not (self.epsilon > 0.0 and self.epsilon * self.eta < 1.0):
            out.append("epsilon out of range")
        return out

    def require(self) -> "Params":
        probs = self.problems()
        if probs:
            raise ProfileError("; ".join(probs))
        return self

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "eta": self.eta}


@dataclass(frozen=True)
class StepProfile:
    """Piecewise-constant, left-continuous population profile.

    Parameters
    ----------
    lengths : sequence of float
        Positive cluster sizes, summing to one.
    levels : sequence of float
        Expression level of each cluster. A well-formed profile is strictly
        increasing with last level 1, but intermediate objects (e.g. before
        rotation) may violate this, so ordering is checked by
        :func:`validate_profile` rather than here.
    """

    lengths: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.lengths)
        levels = tuple(float(v) for v in self.levels)
        if not lengths:
            raise ProfileError("profile needs at least one cluster")
        if len(lengths) != len(levels):
            raise ProfileError("lengths and levels differ in count")
        if any(not (v > 0.0) or not math.isfinite(v) for v in lengths):
            # zero-length (singleton-cell) clusters are excluded on purpose
            raise ProfileError("cluster lengths must be positive")
        if any(not math.isfinite(v) for v in levels):
            raise ProfileError("levels must be finite")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_dict(cls, data: dict) -> "StepProfile":
        try:
            return cls(data["lengths"], data["levels"])
        except (KeyError, TypeError) as exc:
            raise ProfileError(f"bad profile object: {exc}") from exc

    @classmethod
    def equal_clusters(cls, levels: Sequence[float]) -> "StepProfile":
        """Profile with ``len(levels)`` clusters of identical size."""
        n = len(levels)
        return cls([1.0 / n] * n, levels)

    def to_dict(self) -> dict:
        return {"lengths": list(self.lengths), "levels": list(self.levels)}

    @property
    def n_clusters(self) -> int:
        return len(self.lengths)

    @property
    def boundaries(self) -> np.ndarray:
        """Right endpoints ``x_1 < ... < x_N`` of the clusters."""
        return np.cumsum(self.lengths)

    def mean(self) -> float:
        """Population mean ``sum_n l_n u_n`` (the integral of the profile)."""
        return math.fsum(l * u for l, u in zip(self.lengths, self.levels))

    def trace(self) -> "Trace":
        """Lower trace of the profile (every cluster is one plateau)."""
        return Trace.from_lengths(self.lengths)

    def __call__(self, x: float) -> float:
        """Evaluate the left-continuous step function at cell ``x``."""
        edges = self.boundaries
        i = int(np.searchsorted(edges, x, side="left"))
        return self.levels[min(i, self.n_clusters - 1)]


@dataclass(frozen=True)
class Trace:
    """Lower or upper trace, encoded by its plateaus.

    ``plateaus`` is a sorted family of disjoint semi-open intervals
    ``(a_i, b_i]`` inside ``(0, 1]``. On a plateau the lower trace equals
    ``a_i`` and the upper trace ``b_i``; off the plateaus both are the
    identity. An empty family is the trace of a strictly increasing profile.
    """

    plateaus: tuple[tuple[float, float], ...]
    kind: str = "lower"
    _rights: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pl = tuple((float(a), float(b)) for a, b in self.plateaus)
        if self.kind not in ("lower", "upper"):
            raise ProfileError(f"unknown trace kind {self.kind!r}")
        prev = 0.0
        for a, b in pl:
            if not (prev - TOL <= a < b <= 1.0 + TOL):
                raise ProfileError("plateaus must be sorted, disjoint and inside (0, 1]")
            prev = b
        object.__setattr__(self, "plateaus", pl)
        object.__setattr__(self, "_rights", tuple(b for _, b in pl))

    @classmethod
    def from_lengths(cls, lengths: Iterable[float], kind: str = "lower") -> "Trace":
        edges = np.concatenate([[0.0], np.cumsum(list(lengths))])
        edges[-1] = 1.0
        return cls(tuple(zip(edges[:-1], edges[1:])), kind)

    @classmethod
    def from_dict(cls, data: dict) -> "Trace":
        try:
            return cls(tuple(tuple(p) for p in data["plateaus"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProfileError(f"bad trace object: {exc}") from exc

    def to_dict(self) -> dict:
        return {"plateaus": [list(p) for p in self.plateaus]}

    def lower(self) -> "Trace":
        return Trace(self.plateaus, "lower")

    def upper(self) -> "Trace":
        return Trace(self.plateaus, "upper")

    @property
    def covers_unit(self) -> bool:
        """True when the plateaus tile (0, 1], i.e. a finite step trace."""
        if not self.plateaus:
            return False
        pos = 0.0
        for a, b in self.plateaus:
            if abs(a - pos) > TOL:
                return False
            pos = b
        return abs(pos - 1.0) <= TOL

    @property
    def lengths(self) -> tuple[float, ...]:
        if not self.covers_unit:
            raise ProfileError("trace is not a finite step trace")
        return tuple(b - a for a, b in self.plateaus)

    def _find(self, x: float) -> int:
        """Index of the plateau with ``a < x <= b``, or -1."""
        i = bisect.bisect_left(self._rights, x)
        if i < len(self.plateaus) and self.plateaus[i][0] < x:
            return i
        return -1

    def __call__(self, x: float) -> float:
        i = self._find(x)
        if i < 0:
            return x
        a, b = self.plateaus[i]
        return a if self.kind == "lower" else b

    def right_limit(self, x: float) -> float:
        """Value of the trace at ``x + 0``."""
        i = bisect.bisect_right(self._rights, x)
        if i < len(self.plateaus) and self.plateaus[i][0] <= x < self.plateaus[i][1]:
            a, b = self.plateaus[i]
            return a if self.kind == "lower" else b
        return x


@dataclass
class ValidationReport:
    problems: list[str]

    @property
    def valid(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.valid


def validate_profile(profile: StepProfile, params: Params) -> ValidationReport:
    """Check the standing assumptions on an initial profile.

    Returns a report listing every violated assumption instead of raising.
    """
    problems = list(params.problems())
    lengths, levels = profile.lengths, profile.levels
    if abs(math.fsum(lengths) - 1.0) > TOL:
        problems.append("lengths not normalized")
    if any(not (0.0 < u <= 1.0) for u in levels):
        problems.append("levels outside (0, 1]")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        problems.append("levels not strictly increasing")
    if abs(levels[-1] - 1.0) > TOL:
        problems.append("last level must equal 1")
    if "eta out of range" not in problems:
        mu = params.mu
        mean = profile.mean()
        if any((1.0 - mu) * u + mu * mean <= params.eta for u in levels):
            problems.append("Mu(0+0) <= eta")
    return ValidationReport(problems)


def compute_traces(profile: StepProfile) -> tuple[Trace, Trace]:
    """Lower and upper trace of a step profile."""
    tr = profile.trace()
    return tr.lower(), tr.upper()


def trace_integral(trace: Trace) -> float:
    """Exact integral of the trace function over (0, 1]."""
    total = 0.0
    pos = 0.0
    for a, b in trace.plateaus:
        # off-plateau points carry the identity
        total += 0.5 * (a * a - pos * pos)
        total += (a if trace.kind == "lower" else b) * (b - a)
        pos = b
    total += 0.5 * (1.0 - pos * pos)
    return total


def l1_distance(p: StepProfile, q: StepProfile) -> float:
    """L1 distance between two step profiles, refining partitions if needed."""
    if p.lengths == q.lengths:
        return math.fsum(l * abs(a - b) for l, a, b in zip(p.lengths, p.levels, q.levels))
    cp, cq = p.boundaries, q.boundaries
    if abs(cp[-1] - cq[-1]) > TOL:
        raise ProfileError("profiles cover different total lengths; cannot refine")
    edges = np.union1d(cp[:-1], cq[:-1])
    edges = np.concatenate([[0.0], edges, [max(cp[-1], cq[-1])]])
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    ip = np.minimum(np.searchsorted(cp, mids), p.n_clusters - 1)
    iq = np.minimum(np.searchsorted(cq, mids), q.n_clusters - 1)
    diff = np.abs(np.asarray(p.levels)[ip] - np.asarray(q.levels)[iq])
    return math.fsum(widths * diff)


def rotate_profile(profile: StepProfile, k: int) -> StepProfile:
    """Cyclically relabel clusters so that cluster ``k`` comes first.

    The result must again be strictly increasing with last level 1.
    """
    n = profile.n_clusters
    if not (0 <= k < n):
        raise ProfileError(f"rotation {k} out of range for {n} clusters")
    out = StepProfile(profile.lengths[k:] + profile.lengths[:k],
                      profile.levels[k:] + profile.levels[:k])
    lv = out.levels
    if any(b <= a for a, b in zip(lv, lv[1:])) or abs(lv[-1] - 1.0) > TOL:
        raise ProfileError("rotation does not yield a non-decreasing profile ending at 1")
    return out
