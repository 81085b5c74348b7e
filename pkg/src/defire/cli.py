"""Command-line front end: ``defire <command> --config run.json [--out DIR]``.

Every run is described by a JSON config::

    {
      "params":  {"epsilon": 0.5, "eta": 0.1},
      "profile": {"lengths": [0.5, 0.5], "levels": [0.5, 1.0]},
      "options": {"n_cycles": 50}
    }

``trace`` ({"plateaus": [[a, b], ...]}) or bare ``lengths`` may replace the
profile for commands that only need the partition. Exit status is 0 on
success, 1 on domain errors and 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .engine import first_firing, simulate
from .errors import ConfigError, DefireError, HypothesisError, ProfileError
from .oracle import oracle_firing_time
from .periodic import construct_periodic, existence_bound, existence_status, scan_epsilon
from .profile import Params, StepProfile, Trace, l1_distance, validate_profile
from .serialize import CYCLE_HEADER, cycles_table, write_csv, write_json
from .spectral import empirical_contraction, sample_product_radius
from .weak import contraction_constant, discontinuity_limit, mu_critical, solve_T1_neumann

__all__ = ["main", "load_config", "run", "worker_count", "COMMANDS"]

log = logging.getLogger("defire")

TOP_KEYS = {"command", "params", "profile", "trace", "lengths", "options"}


def worker_count() -> int:
    """Worker cap from ``DEFIRE_THREADS``, else the available parallelism."""
    raw = os.environ.get("DEFIRE_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"DEFIRE_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError("DEFIRE_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def load_config(path: str | os.PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(cfg) - TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def _number(obj: dict, key: str, default: Any = None, kind: type = float) -> Any:
    if key not in obj:
        if default is None:
            raise ConfigError(f"missing required field {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"field {key!r} must be a number")
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"field {key!r} must be an integer")
        return int(v)
    return float(v)


def _params(cfg: dict) -> Params:
    raw = cfg.get("params")
    if not isinstance(raw, dict):
        raise ConfigError("missing 'params' object")
    params = Params(_number(raw, "epsilon"), _number(raw, "eta"))
    probs = params.problems()
    if probs:
        raise ConfigError("; ".join(probs))
    return params


def _profile(cfg: dict, params: Params) -> StepProfile:
    raw = cfg.get("profile")
    if not isinstance(raw, dict):
        raise ConfigError("missing 'profile' object")
    try:
        profile = StepProfile.from_dict(raw)
    except ProfileError as exc:
        raise ConfigError(str(exc)) from None
    report = validate_profile(profile, params)
    if not report.valid:
        raise ConfigError("invalid profile: " + "; ".join(report.problems))
    return profile


def _trace(cfg: dict) -> Trace:
    try:
        if isinstance(cfg.get("trace"), dict):
            return Trace.from_dict(cfg["trace"])
        if "lengths" in cfg:
            return Trace.from_lengths(cfg["lengths"])
        if isinstance(cfg.get("profile"), dict):
            return StepProfile.from_dict(cfg["profile"]).trace()
    except (ProfileError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError("need a 'trace', 'lengths' or 'profile' entry")


def _lengths(cfg: dict) -> list[float]:
    lengths = list(_trace(cfg).lengths)
    if len(lengths) < 2:
        raise ConfigError("need at least two clusters")
    return lengths


class Run:
    """Parsed config plus output directory shared by the command handlers."""

    def __init__(self, cfg: dict, out: Path):
        self.cfg = cfg
        self.out = out
        opts = cfg.get("options", {})
        if not isinstance(opts, dict):
            raise ConfigError("'options' must be an object")
        self.opts = opts
        figures = opts.get("figures", True)
        if not isinstance(figures, bool):
            raise ConfigError("option 'figures' must be true or false")
        self.figures = figures
        self.written: list[Path] = []

    def opt(self, key: str, default: Any, kind: type = float) -> Any:
        return _number(self.opts, key, default, kind)

    def json(self, name: str, obj: Any) -> None:
        self.written.append(write_json(self.out / name, obj))

    def csv(self, name: str, header, rows) -> None:
        self.written.append(write_csv(self.out / name, header, rows))

    def figure(self, name: str, draw: Callable[[Path], Any]) -> None:
        if self.figures:
            path = self.out / name
            draw(path)
            self.written.append(path)


def cmd_simulate(run: Run) -> int:
    from .plotting import plot_simulation

    params = _params(run.cfg)
    profile = _profile(run.cfg, params)
    n_cycles = run.opt("n_cycles", 100, int)
    tol = run.opt("tol", 1e-12)
    sim = simulate(profile, params, n_cycles, tol)
    reference = None
    if profile.n_clusters > 1:
        try:
            orbit = construct_periodic(profile.trace(), params)
        except DefireError:
            orbit = None
        reference = orbit.profile if orbit else None
    run.csv("cycles.csv", CYCLE_HEADER, cycles_table(sim))
    run.json("events.json", sim.events)
    final = sim.final_profile
    summary = {
        "params": params.to_dict(),
        "n_cycles": n_cycles,
        "converged": sim.converged,
        "converged_at": sim.converged_at,
        "n_merges": len(sim.merge_events),
        "merges": [{"cycle": c, "firing": i, "labels": list(lab)} for c, i, lab in sim.merge_events],
        "final_profile": final.to_dict(),
        "final_return_time": sim.cycles[-1].return_time,
        "distance_to_orbit": None,
    }
    if reference is not None and reference.lengths == final.lengths:
        summary["distance_to_orbit"] = l1_distance(final, reference)
    run.json("summary.json", summary)
    run.figure("simulate.png", lambda p: plot_simulation(sim, p, reference))
    return 0


def cmd_periodic(run: Run) -> int:
    from .plotting import plot_orbit

    params = _params(run.cfg)
    trace = _trace(run.cfg)
    bound, strict = existence_bound(trace)
    orbit = construct_periodic(trace, params)
    report = {
        "params": params.to_dict(),
        "trace": trace.to_dict(),
        "bound": bound,
        "strict": strict,
        "status": existence_status(trace, params.epsilon),
        "exists": orbit is not None,
        "orbit": orbit.to_dict() if orbit else None,
    }
    run.json("orbit.json", report)
    if orbit is not None:
        run.figure("orbit.png", lambda p: plot_orbit(orbit, p))
    return 0


def cmd_scan(run: Run) -> int:
    from .plotting import plot_scan

    raw = run.cfg.get("params")
    if not isinstance(raw, dict):
        raise ConfigError("missing 'params' object")
    eta = _number(raw, "eta")
    grid = run.opts.get("grid")
    if not isinstance(grid, list) or not grid:
        raise ConfigError("option 'grid' must be a non-empty list of couplings")
    if any(isinstance(e, bool) or not isinstance(e, (int, float)) for e in grid):
        raise ConfigError("option 'grid' must contain numbers only")
    for e in grid:
        probs = Params(float(e), eta).problems()
        if probs:
            raise ConfigError(f"grid value {e}: " + "; ".join(probs))
    trace = _trace(run.cfg)
    scan = scan_epsilon(trace, eta, [float(e) for e in grid], workers=worker_count())
    header = ("epsilon", "exists", "branch", "period", "bound", "strict")
    run.csv("scan.csv", header, [(r.epsilon, r.exists, r.branch, r.period, r.bound, r.strict)
                                 for r in scan.rows])
    run.json("scan.json", {
        "eta": eta,
        "rows": [r.to_dict() for r in scan.rows],
        "transition": list(scan.transition) if scan.transition else None,
        "ghost_candidates": scan.ghost_candidates,
    })
    run.figure("scan.png", lambda p: plot_scan(scan, p))
    return 0


def cmd_spectral(run: Run) -> int:
    from .plotting import plot_spectral

    params = _params(run.cfg)
    lengths = _lengths(run.cfg)
    k = run.opt("k", 16, int)
    trials = run.opt("trials", 1000, int)
    seed = run.opt("seed", 0, int)
    branches = run.opts.get("branches", ["plus", "minus"])
    rotations = run.opts.get("rotations")
    try:
        est = sample_product_radius(lengths, params, k, trials, seed, branches, rotations,
                                    workers=worker_count())
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DefireError):
            raise
        raise ConfigError(str(exc)) from None
    if isinstance(run.cfg.get("profile"), dict):
        profile = _profile(run.cfg, params)
        orbit = construct_periodic(profile.trace(), params)
        if orbit is not None:
            sim = simulate(profile, params, run.opt("n_cycles", 200, int), 0.0)
            try:
                est.empirical_rho = empirical_contraction(sim.cycles, orbit.profile)
            except HypothesisError as exc:
                log.warning("empirical contraction unavailable: %s", exc)
    run.json("spectral.json", {"params": params.to_dict(), "lengths": lengths, **est.to_dict()})
    run.figure("spectral.png", lambda p: plot_spectral(est, p))
    return 0


def cmd_weakcoupling(run: Run) -> int:
    params = _params(run.cfg)
    profile = _profile(run.cfg, params)
    fp = solve_T1_neumann(profile, params, tol=run.opt("tol", 1e-13))
    mu = params.mu
    run.json("firing_profile.json", {
        **fp.to_dict(),
        "iterations": fp.iterations,
        "mu": mu,
        "contraction_constant": contraction_constant(mu),
        "mu_critical": mu_critical(),
    })
    return 0


def cmd_oracle_check(run: Run) -> int:
    params = _params(run.cfg)
    profile = _profile(run.cfg, params)
    dt = run.opt("dt", 1e-6)
    if not dt > 0:
        raise ConfigError("option 'dt' must be positive")
    engine_t = first_firing(profile, params).firing_time
    oracle_t = oracle_firing_time(profile, params, dt)
    diff = abs(engine_t - oracle_t)
    ok = diff <= 5 * dt
    run.json("oracle.json", {"engine": engine_t, "oracle": oracle_t, "difference": diff,
                             "tolerance": 5 * dt, "agree": ok})
    if not ok:
        log.error("engine and oracle disagree by %s", diff)
    return 0 if ok else 1


def cmd_demo_discontinuity(run: Run) -> int:
    from .plotting import plot_discontinuity

    params = _params(run.cfg)
    x1 = run.opt("x1", 0.4)
    base = run.opt("base_level", 0.5)
    n = run.opt("n", 1e6)
    try:
        demo = discontinuity_limit(x1, base, params, n)
    except ProfileError as exc:
        raise ConfigError(str(exc)) from None
    errors = [abs(demo.times[0] - demo.limits[0]), abs(demo.times[1] - demo.limits[1])]
    run.json("discontinuity.json", {"x1": x1, "base_level": base, "n": n, **demo.to_dict(),
                                    "errors": errors})
    run.figure("discontinuity.png", lambda p: plot_discontinuity(demo, x1, p))
    return 0


COMMANDS: dict[str, Callable[[Run], int]] = {
    "simulate": cmd_simulate,
    "periodic": cmd_periodic,
    "scan": cmd_scan,
    "spectral": cmd_spectral,
    "weakcoupling": cmd_weakcoupling,
    "oracle-check": cmd_oracle_check,
    "demo-discontinuity": cmd_demo_discontinuity,
}


def run(command: str, cfg: dict, out: str | os.PathLike = ".") -> int:
    """Execute one command; raises :class:`ConfigError` or :class:`DefireError`."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if cfg.get("command", command) != command:
        raise ConfigError(f"config is for command {cfg['command']!r}, not {command!r}")
    r = Run(cfg, Path(out))
    status = COMMANDS[command](r)
    for path in r.written:
        log.info("wrote %s", path)
    return status


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="defire",
                                description="Globally coupled degrade-and-fire oscillators.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run description")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("defire: %(levelname)s: %(message)s"))
        log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return run(args.command, load_config(args.config), args.out)
    except ConfigError as exc:
        print(f"defire: config error: {exc}", file=sys.stderr)
        return 2
    except DefireError as exc:
        print(f"defire: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"defire: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
