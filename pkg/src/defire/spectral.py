"""Companion matrices of the firing-map derivatives and joint spectral radius bounds.

In difference coordinates the derivative of each affine branch of the firing
map is a companion matrix whose last row is ``-a`` for a coefficient vector
``a``. For positive coefficients the spectral radius of any product of ``k``
such matrices is bounded by ``(max_k a_k / a_{k+1})**k`` with ``a_{K+1} = 1``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .engine import CycleResult
from .errors import ConsistencyError, HypothesisError
from .profile import Params, StepProfile, l1_distance

__all__ = [
    "CompanionSpec",
    "ContractionEstimate",
    "Lcg64",
    "branch_coeffs",
    "companion_matrix",
    "spectral_radius",
    "gelfand_radius",
    "jsr_ratio_bound",
    "matrix_family",
    "sample_product_radius",
    "empirical_contraction",
]

BRANCHES = ("plus", "minus")


@dataclass(frozen=True)
class CompanionSpec:
    coeffs: tuple[float, ...]
    source: str
    rotation: int

    def ratios(self) -> list[float]:
        a = list(self.coeffs) + [1.0]
        return [a[k] / a[k + 1] for k in range(len(self.coeffs))]


@dataclass
class ContractionEstimate:
    ratio_bound: float
    flagged: bool
    samples: list[tuple[int, float]] = field(default_factory=list)
    empirical_rho: float | None = None

    @property
    def max_sample(self) -> float:
        return max(v for _, v in self.samples)

    def to_dict(self) -> dict:
        return {"ratio_bound": self.ratio_bound, "flagged": self.flagged,
                "samples": [{"k": k, "value": v} for k, v in self.samples],
                "empirical_rho": self.empirical_rho}


class Lcg64:
    """64-bit linear congruential generator; draws use the high 32 bits.

    Kept instead of numpy's generators so that words are reproducible
    bit-for-bit by other implementations.
    """

    MULT = 6364136223846793005
    INC = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u32(self) -> int:
        self.state = (self.MULT * self.state + self.INC) & self.MASK
        return self.state >> 32

    def randbelow(self, n: int) -> int:
        return (self.next_u32() * n) >> 32


def _rotate(lengths: Sequence[float], j: int) -> list[float]:
    lengths = list(lengths)
    return lengths[j:] + lengths[:j]


def branch_coeffs(lengths: Sequence[float], params: Params, rotation: int = 0
                  ) -> tuple[CompanionSpec, CompanionSpec]:
    """Coefficient vectors of both firing-map branches for the rotated lengths."""
    n = len(lengths)
    if n < 2:
        raise ValueError("need at least two clusters")
    if not (0 <= rotation < n):
        raise ValueError(f"rotation {rotation} out of range")
    ell = _rotate(lengths, rotation)
    mu = params.mu
    plus = tuple(1.0 - mu * math.fsum(ell[m] for m in range(i + 1, n)) for i in range(n - 1))
    head = 1.0 - ell[0]
    minus = tuple(math.fsum(ell[1:i + 2]) / head for i in range(n - 1))
    return CompanionSpec(plus, "plus", rotation), CompanionSpec(minus, "minus", rotation)


def companion_matrix(spec: CompanionSpec | Sequence[float]) -> np.ndarray:
    """Companion matrix with unit superdiagonal and last row ``-a``."""
    a = np.asarray(spec.coeffs if isinstance(spec, CompanionSpec) else spec, dtype=float)
    if a.size == 0:
        raise ValueError("empty coefficient vector")
    k = a.size
    m = np.eye(k, k, 1)
    m[-1, :] = -a
    return m


def spectral_radius(m: np.ndarray) -> float:
    """Largest eigenvalue modulus."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def gelfand_radius(m: np.ndarray, max_power: int = 256) -> float:
    """Gelfand-formula estimate ``||m^p||^(1/p)`` with repeated squaring.

    Successive estimates for p = 1, 2, 4, ... are extrapolated assuming an
    error proportional to 1/p. Accuracy is limited by the oscillating norm
    transient of complex eigenvalue pairs, roughly ``log(cond)/max_power``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    p, power = 1, m.copy()
    log_scale = 0.0
    estimates = []
    while True:
        nrm = np.linalg.norm(power, 2)
        if nrm == 0.0:
            return 0.0
        estimates.append(math.exp((math.log(nrm) + log_scale) / p))
        if p >= max_power:
            break
        # renormalise to keep powers finite
        log_scale += math.log(nrm)
        power = power / nrm
        log_scale *= 2
        power = power @ power
        p *= 2
    if len(estimates) < 2:
        return estimates[-1]
    return max(2 * estimates[-1] - estimates[-2], 0.0)


def matrix_family(lengths: Sequence[float], params: Params,
                  branches: Iterable[str] = BRANCHES,
                  rotations: Iterable[int] | None = None) -> list[CompanionSpec]:
    """Coefficient specs ``a(R^j l, s)`` over the chosen rotations and branches."""
    n = len(lengths)
    rotations = range(n) if rotations is None else list(rotations)
    branches = tuple(branches)
    if not set(branches) <= set(BRANCHES) or not branches:
        raise ValueError(f"branches must be a non-empty subset of {BRANCHES}")
    out = []
    for j in rotations:
        plus, minus = branch_coeffs(lengths, params, j)
        out.extend(s for s in (plus, minus) if s.source in branches)
    return out


def jsr_ratio_bound(lengths: Sequence[float], params: Params,
                    branches: Iterable[str] = BRANCHES,
                    rotations: Iterable[int] | None = None) -> tuple[float, bool]:
    """Largest consecutive-coefficient ratio over the family; flagged if >= 1."""
    family = matrix_family(lengths, params, branches, rotations)
    bound = max(max(s.ratios()) for s in family)
    return bound, bound >= 1.0


def sample_product_radius(lengths: Sequence[float], params: Params, k: int, trials: int,
                          seed: int = 0, branches: Iterable[str] = BRANCHES,
                          rotations: Iterable[int] | None = None,
                          workers: int = 1) -> ContractionEstimate:
    """Spectral radius of random length-``k`` words, normalised by the 1/k power.

    Trial ``i`` draws its word from an :class:`Lcg64` seeded with ``seed + i``.
    Every value is checked against the ratio bound.
    """
    if k < 1 or trials < 1:
        raise ValueError("k and trials must be >= 1")
    family = matrix_family(lengths, params, branches, rotations)
    mats = [companion_matrix(s) for s in family]
    bound = max(max(s.ratios()) for s in family)
    est = ContractionEstimate(bound, bound >= 1.0)

    def one(trial: int) -> float:
        rng = Lcg64(seed + trial)
        prod = np.eye(mats[0].shape[0])
        for _ in range(k):
            prod = mats[rng.randbelow(len(mats))] @ prod
        return spectral_radius(prod) ** (1.0 / k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, range(trials)))
    else:
        values = [one(t) for t in range(trials)]
    for value in values:
        if value > bound + 1e-9:
            raise ConsistencyError(f"word spectral radius {value} exceeds ratio bound {bound}")
        est.samples.append((k, value))
    return est


def empirical_contraction(results: Sequence[CycleResult], reference: StepProfile,
                          floor: float = 1e-14) -> float:
    """Per-firing contraction rate of the distance to ``reference``.

    Fits ``log ||u_k - reference||_1`` against the cycle index over the tail
    half of the series and returns ``exp(slope / N)``, N being the number of
    firings per cycle, so the value is comparable with the per-map ratio bound.
    """
    if len(results) < 5:
        raise HypothesisError("need at least 5 cycles")
    n_fire = results[-1].post_profile.n_clusters
    if n_fire < 2 or reference.n_clusters < 2:
        raise HypothesisError("contraction is undefined for a single cluster")
    dist = [l1_distance(r.post_profile, reference) for r in results]
    cut = next((i for i, d in enumerate(dist) if d < floor), len(dist))
    dist = dist[:cut]
    if len(dist) < 3:
        raise HypothesisError("distance series converged below float precision")
    start = len(dist) // 2
    if len(dist) - start < 3:
        start = len(dist) - 3
    k = np.arange(start, len(dist), dtype=float)
    slope = np.polyfit(k, np.log(dist[start:]), 1)[0]
    return math.exp(slope / n_fire)
