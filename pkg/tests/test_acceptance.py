"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (shown even under output
capture) and then asserts. Run alone with::

    pytest tests/test_acceptance.py -v
"""

import math
import time

import numpy as np
import pytest

from defire import (
    ConsistencyError,
    HypothesisError,
    Params,
    StepProfile,
    Trace,
    construct_periodic,
    contraction_constant,
    discontinuity_limit,
    empirical_contraction,
    existence_bound,
    first_firing,
    full_cycle,
    jsr_ratio_bound,
    l1_distance,
    mu_critical,
    oracle_firing_time,
    sample_product_radius,
    simulate,
    solve_T1_neumann,
    trace_integral,
    validate_profile,
    verify_cycle_contraction,
    verify_fixed_point,
)

from helpers import random_instance, random_lengths, random_levels, random_trace


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail}")
        assert ok, detail
    return emit


def _cycle_min_repressor(res, mu, n_inner=100):
    """Minimum repressor level over one cycle, at firing instants and interior points."""
    snaps = res.snapshots
    n0 = max(len(lv) for _, lv in snaps)
    lengths = np.zeros((len(snaps), n0))
    levels = np.full((len(snaps), n0), 10.0)  # padding never attains the minimum
    for j, (ln, lv) in enumerate(snaps):
        lengths[j, :len(ln)] = ln
        levels[j, :len(lv)] = lv
    times = np.diff(np.concatenate([[0.0], res.firing_times]))
    ts = times[:, None] * np.linspace(0.0, 1.0, n_inner + 2)[None, :]
    u = np.maximum(levels[:, None, :] - ts[:, :, None], 0.0)
    mean = np.einsum("fsn,fn->fs", u, lengths)
    m = (1.0 - mu) * u + mu * mean[:, :, None]
    return float(m.min())


def test_01_repressor_floor(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = math.inf
    for _ in range(1000):
        prof, params = random_instance(rng)
        sim = simulate(prof, params, 50, keep_snapshots=True)
        for res in sim.cycles:
            worst = min(worst, _cycle_min_repressor(res, params.mu) - params.eta)
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-9 and elapsed < 30
    report(1, "repressor floor", ok, f"min(M - eta) = {worst:.3e}, {elapsed:.1f} s")


def test_02_oracle_equivalence(report):
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        prof, params = random_instance(rng)
        worst = max(worst, abs(first_firing(prof, params).firing_time
                               - oracle_firing_time(prof, params, 1e-6)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 5e-6 and elapsed < 60
    report(2, "oracle equivalence", ok, f"max |engine - oracle| = {worst:.3e}, {elapsed:.1f} s")


def _near_orbit(rng, orbit, size=1e-3):
    lv = np.array(orbit.profile.levels)
    gaps = np.diff(np.concatenate([[0.0], lv]))
    amp = min(size, 0.3 * gaps.min())
    bumped = lv[:-1] + amp * rng.uniform(-1, 1, lv.size - 1)
    return StepProfile(orbit.profile.lengths, list(bumped) + [1.0])


def test_03_period_formula(report):
    rng = np.random.default_rng(303)
    t0 = time.perf_counter()
    worst_nd = worst_d = worst_eta = 0.0
    done_nd = done_d = 0
    while done_nd < 20 or done_d < 20:
        n = int(rng.integers(2, 9))
        tr = Trace.from_lengths(random_lengths(rng, n, 0.02))
        integral = trace_integral(tr)
        if done_nd < 20:
            eta = float(rng.uniform(0.3, 0.45))
            eps = min(float(rng.uniform(0.5, 0.95)) / integral, 0.95 / eta)
            params = Params(eps, eta)
            orbit = construct_periodic(tr, params)
            sim = simulate(_near_orbit(rng, orbit), params, 100)
            formula = (1 - eta) / (1 - eps * eta * integral)
            worst_nd = max(worst_nd, abs(sim.cycles[-1].return_time - formula))
            done_nd += 1
        bound, _ = existence_bound(tr)
        lo, hi = 1 / integral, min(bound, 1 / 0.3)
        if done_d < 20 and hi > lo * 1.02:
            eps = lo + (hi - lo) * float(rng.uniform(0.05, 0.95))
            formula = (2 * integral - 1 / eps) / integral
            measured = []
            for eta in (0.1, 0.25):
                params = Params(eps, eta)
                orbit = construct_periodic(tr, params)
                sim = simulate(_near_orbit(rng, orbit), params, 100)
                measured.append(sim.cycles[-1].return_time)
                worst_d = max(worst_d, abs(measured[-1] - formula))
            worst_eta = max(worst_eta, abs(measured[0] - measured[1]))
            done_d += 1
    elapsed = time.perf_counter() - t0
    ok = max(worst_nd, worst_d, worst_eta) <= 1e-8 and elapsed < 30
    report(3, "period formulas", ok,
           f"no_damp err {worst_nd:.2e}, damp err {worst_d:.2e}, "
           f"eta spread {worst_eta:.2e}, {elapsed:.1f} s")


def test_04_fixed_point_residual(report):
    rng = np.random.default_rng(404)
    worst = 0.0
    counts = {"no_damp": 0, "damp": 0}
    missing = 0
    while min(counts.values()) < 100 and missing < 20:
        tr = Trace.from_lengths(random_lengths(rng, int(rng.integers(2, 13)), 1e-2))
        integral = trace_integral(tr)
        bound, _ = existence_bound(tr)
        eta = float(rng.uniform(0.01, 0.2))
        for branch in ("no_damp", "damp"):
            if branch == "no_damp":
                eps = min(float(rng.uniform(0.05, 0.95)) / integral, 0.99 / eta)
            else:
                hi = min(bound, 1 / eta)
                if hi <= 1 / integral:
                    continue
                eps = 1 / integral + (hi - 1 / integral) * float(rng.uniform(0.02, 0.98))
            params = Params(eps, eta)
            orbit = construct_periodic(tr, params)
            if orbit is None or orbit.branch != branch:
                missing += 1
                continue
            worst = max(worst, verify_fixed_point(orbit, params))
            counts[branch] += 1
    report(4, "fixed-point residual", worst <= 1e-10 and missing == 0,
           f"{missing} orbits missing; max residual {worst:.2e} over {counts['no_damp']} no_damp + {counts['damp']} damp")


def test_05_transition_at_two(report):
    t0 = time.perf_counter()
    details, ok = [], True
    singletons = {k: Trace.from_lengths([1.0 / k] * k) for k in (8, 16, 32, 64, 128, 256)}
    b64, strict = existence_bound(singletons[64])
    ok &= abs(b64 - 2 * 64 / 62) <= 1e-12 and strict
    details.append(f"K=64 bound {b64:.12f}")
    bounds = [existence_bound(tr)[0] for tr in singletons.values()]
    analytic = [2 * k / (k - 2) for k in singletons]
    ok &= all(abs(b - a) <= 1e-12 * a for b, a in zip(bounds, analytic))
    ok &= all(b < a for a, b in zip(bounds, bounds[1:])) and bounds[-1] > 2.0
    start = StepProfile.equal_clusters([(i + 1) / 64 for i in range(64)])
    above = simulate(start, Params(2.2, 0.05), 200)
    ok &= len(above.merge_events) >= 1
    details.append(f"eps=2.2 merges {len(above.merge_events)}")
    params = Params(1.8, 0.05)
    orbit = construct_periodic(singletons[64], params)
    below = simulate(start, params, 2000, tol=1e-14)
    dist = l1_distance(below.final_profile, orbit.profile)
    ok &= dist <= 1e-8 and not below.merge_events
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    details.append(f"eps=1.8 distance {dist:.2e}, merges {len(below.merge_events)}, {elapsed:.1f} s")
    report(5, "transition at eps = 2", ok, "; ".join(details))


def test_06_no_grouping_regime(report):
    rng = np.random.default_rng(606)
    bad = 0
    for _ in range(500):
        prof, params = random_instance(rng, eps_max=1.0)
        for res in simulate(prof, params, 5, keep_snapshots=True).cycles:
            for (_, levels), t, k, b, t_prev in zip(res.snapshots, res.firing_times, res.extents,
                                                    res.branches, [0.0] + res.firing_times):
                if b != "plus" or k != 1 or t - t_prev > levels[0] + 1e-12:
                    bad += 1
    worst = -math.inf
    for _ in range(500):
        while True:
            prof, params = random_instance(rng)
            if params.epsilon > 1:
                break
        sim = simulate(prof, params, 20)
        for res in sim.cycles:
            zero = [g for g, b in zip(res.group_lengths, res.branches) if b == "minus"]
            worst = max(worst, max(zero, default=0.0) - (1 - 1 / params.epsilon))
    ok = bad == 0 and worst <= 1e-12
    report(6, "no-grouping regime", ok,
           f"{bad} non-plus firings for eps <= 1; max zero plateau excess {worst:.2e}")


def test_07_contraction(report):
    rng = np.random.default_rng(707)
    params = Params(0.5, 0.1)
    prof = StepProfile((0.5, 0.5), (0.5, 1.0))
    orbit = construct_periodic(prof.trace(), params)
    rho2 = empirical_contraction(simulate(prof, params, 300, 0.0).cycles, orbit.profile)
    ok = abs(rho2 - 0.975) <= 1e-6
    worst_rho, n_rho = 0.0, 0
    while n_rho < 30:
        prof, params = random_instance(rng, n_max=8, eps_max=1.0, eta_range=(0.01, 0.2))
        orbit = construct_periodic(prof.trace(), params)
        sim = simulate(prof, params, 150, 0.0)
        if sim.merge_events:
            continue
        try:
            rho = empirical_contraction(sim.cycles, orbit.profile)
        except HypothesisError:
            continue
        worst_rho = max(worst_rho, rho)
        n_rho += 1
    ok &= worst_rho < 1
    mc = mu_critical()
    worst_ratio, n_pairs = -math.inf, 0
    while n_pairs < 200:
        u, params = random_instance(rng, eps_max=1.0, eta_range=(0.05, 0.45))
        if params.mu >= mc:
            continue
        v = StepProfile(u.lengths, random_levels(rng, u.n_clusters, low=0.3))
        if not validate_profile(v, params).valid:
            continue
        try:
            ratio = verify_cycle_contraction(u, v, params)
        except HypothesisError as exc:
            if "exceeds" in str(exc):
                worst_ratio = math.inf
                break
            continue
        except ConsistencyError:
            continue
        worst_ratio = max(worst_ratio, ratio - contraction_constant(params.mu))
        n_pairs += 1
    ok &= worst_ratio <= 1e-9
    report(7, "contraction", ok,
           f"two-cluster rho {rho2:.10f}; max rho over {n_rho} runs {worst_rho:.4f}; "
           f"max ratio - constant over {n_pairs} pairs {worst_ratio:.3e}")


def test_08_mu_critical(report):
    mc = mu_critical()
    resid = abs(math.exp(mc) + mc * mc / (1 - mc) - 2)
    ok = 0.46 < mc < 0.47 and resid <= 1e-11
    report(8, "critical mu", ok, f"mu_c = {mc:.13f}, residual {resid:.1e}")


def test_09_discontinuity(report):
    demo = discontinuity_limit(0.4, 0.5, Params(0.5, 0.1), 1e6)
    err_low = abs(demo.times[0] - 0.415)
    err_high = abs(demo.times[1] - 0.42415)
    ok = err_high <= 1e-5 and err_low <= 1e-9
    report(9, "discontinuity limits", ok,
           f"(x1/2, x1] error {err_high:.2e} (tol 1e-5); (0, x1/2] error {err_low:.2e} (tol 1e-9)")


def test_10_trace_algebra(report):
    rng = np.random.default_rng(1010)
    worst_norm, broken = 0.0, 0
    for i in range(1000):
        tr = random_trace(rng, gaps=bool(i % 2))
        lo, up = tr.lower(), tr.upper()
        worst_norm = max(worst_norm, abs(trace_integral(lo) + trace_integral(up) - 1))
        top = lo(1.0)
        for x in list(rng.uniform(0, 1, 20)) + [b for _, b in tr.plateaus]:
            if not lo(x) <= x <= up(x) or up(up(x)) != up(x):
                broken += 1
            if x < top and lo.right_limit(up(x)) != up(x):
                broken += 1
    ok = worst_norm <= 1e-12 and broken == 0
    report(10, "trace algebra", ok, f"max |normalisation - 1| {worst_norm:.1e}, {broken} violations")


def test_11_word_sampling(report):
    rng = np.random.default_rng(1111)
    words, violations, plus_max = 0, 0, 0.0
    for d in range(100):
        ell = random_lengths(rng, int(rng.integers(2, 9)))
        params = Params(float(rng.uniform(0.01, 0.99)), 1 - 1e-9)
        plus_max = max(plus_max, jsr_ratio_bound(ell, params, ["plus"])[0])
        for branches in (("plus", "minus"), ("plus",)):
            k = int(rng.integers(1, 17))
            try:
                est = sample_product_radius(ell, params, k, 50, seed=1000 * d, branches=branches)
            except ConsistencyError:
                violations += 1
                continue
            words += len(est.samples)
    ok = violations == 0 and words == 10_000 and plus_max < 1
    report(11, "word sampling", ok,
           f"{words} words, {violations} bound violations, max plus-only bound {plus_max:.6f}")


def test_12_weak_coupling_solver(report):
    rng = np.random.default_rng(1212)
    worst, over = 0.0, 0
    tol = 1e-13
    for _ in range(200):
        prof, params = random_instance(rng, eps_max=1.0)
        fp = solve_T1_neumann(prof, params, tol=tol)
        res = full_cycle(prof, params)
        worst = max(worst, max(abs(a - b) for a, b in zip(fp.times, res.firing_times)))
        if fp.iterations > math.log(tol) / math.log(params.mu) + 2:
            over += 1
    ok = worst <= 1e-10 and over == 0
    report(12, "weak-coupling solver", ok,
           f"max |Neumann - engine| {worst:.2e}, {over} runs above the iteration bound")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
