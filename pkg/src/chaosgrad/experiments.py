"""Experiment records, CSV/JSON persistence and the canned suites.

The CSV schema is the contract consumed by the plotting component:
``experiment,system,gamma1,gamma2,N,A,W,seed,param,SC,UC,deriv,rho_phi,
fd_deriv,fd_se,wall_ms``. One row per (repeat, configuration, parameter);
floats are written with ``repr`` so they round-trip exactly. A JSON sidecar
stamped with the schema version carries the full configuration.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NumericsError
from .orbit import RunConfig, dump_states, generate_orbit
from .response import ResponseResult, compute_response, finite_difference_derivative
from .systems import get_system

SCHEMA_VERSION = 1

CSV_COLUMNS = ["experiment", "system", "gamma1", "gamma2", "N", "A", "W", "seed",
               "param", "SC", "UC", "deriv", "rho_phi", "fd_deriv", "fd_se", "wall_ms"]

SUITE_NAMES = ("converge-A", "converge-W", "sweep-gamma", "contour", "noise",
               "lorenz", "logistic-demo")


@dataclass
class ExperimentRecord:
    experiment: str
    system: str
    gamma1: float
    gamma2: float | None
    N: int
    A: int
    W: int
    seed: int
    param: str
    SC: float | None
    UC: float | None
    deriv: float | None
    rho_phi: float | None
    fd_deriv: float | None = None
    fd_se: float | None = None
    wall_ms: float = 0.0


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_records(path, records):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            row = asdict(rec)
            writer.writerow([_fmt(row[col]) for col in CSV_COLUMNS])


def read_records(path) -> list[ExperimentRecord]:
    def _num(text, cast=float):
        return None if text == "" else cast(text)

    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        for row in reader:
            vals = dict(zip(CSV_COLUMNS, row))
            out.append(ExperimentRecord(
                experiment=vals["experiment"], system=vals["system"],
                gamma1=float(vals["gamma1"]), gamma2=_num(vals["gamma2"]),
                N=int(vals["N"]), A=int(vals["A"]), W=int(vals["W"]),
                seed=int(vals["seed"]), param=vals["param"],
                SC=_num(vals["SC"]), UC=_num(vals["UC"]),
                deriv=_num(vals["deriv"]), rho_phi=_num(vals["rho_phi"]),
                fd_deriv=_num(vals["fd_deriv"]), fd_se=_num(vals["fd_se"]),
                wall_ms=float(vals["wall_ms"])))
    return out


def write_sidecar(path, config: dict, extra: dict | None = None):
    """JSON provenance sidecar next to a CSV output."""
    payload = {"schema_version": SCHEMA_VERSION, "config": config}
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)


def _records_from_result(experiment: str, config: RunConfig, res: ResponseResult,
                         wall_ms: float, combined: bool,
                         fd_values=None, fd_se=None) -> list[ExperimentRecord]:
    gamma = res.gamma
    g1 = float(gamma[0])
    g2 = float(gamma[1]) if gamma.size > 1 else None
    base = dict(experiment=experiment, system=config.system, gamma1=g1, gamma2=g2,
                N=config.steps_per_segment, A=config.segments, W=config.window,
                seed=config.seed, rho_phi=res.rho_phi, wall_ms=wall_ms)
    out = []
    if combined:
        out.append(ExperimentRecord(
            param="gamma", SC=float(res.sc.sum()), UC=float(res.uc.sum()),
            deriv=float(res.derivative.sum()),
            fd_deriv=None if fd_values is None else float(np.sum(fd_values)),
            fd_se=None if fd_se is None else float(np.linalg.norm(fd_se)),
            **base))
    else:
        for j in range(gamma.size):
            name = "gamma" if gamma.size == 1 else f"gamma{j + 1}"
            out.append(ExperimentRecord(
                param=name, SC=float(res.sc[j]), UC=float(res.uc[j]),
                deriv=float(res.derivative[j]),
                fd_deriv=None if fd_values is None else float(fd_values[j]),
                fd_se=None if fd_se is None else float(fd_se[j]),
                **base))
    return out


def run_single(config: RunConfig, experiment: str = "single", fd_check: bool = False,
               fd_delta: float = 0.01, fd_segments: int = 10_000,
               fd_repeats: int = 4, combined: bool = False) -> list[ExperimentRecord]:
    """Procedure end to end for one configuration, optionally FD-validated."""
    t0 = time.perf_counter()
    res = compute_response(config)
    wall_ms = (time.perf_counter() - t0) * 1e3
    fd_values = fd_se = None
    if fd_check:
        system = get_system(config.system, **config.system_kwargs)
        gamma = config.resolve_gamma(system)
        noise_mode = "fixed" if config.fixed_noise else "fresh"
        fd = finite_difference_derivative(
            config.system, gamma, fd_delta, fd_segments,
            steps_per_segment=config.steps_per_segment, repeats=fd_repeats,
            seed=config.seed + 90_001, noise_mode=noise_mode,
            system_kwargs=config.system_kwargs)
        fd_values, fd_se = fd.values, fd.se
    return _records_from_result(experiment, config, res, wall_ms, combined,
                                fd_values, fd_se)


def _seed_for(base: int, cfg_idx: int, rep: int) -> int:
    return base + 100_000 * cfg_idx + rep


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _repeat_runs(experiment, make_config, cfg_idx, repeats, base_seed, combined=True):
    records = []
    for rep in range(repeats):
        config = make_config(_seed_for(base_seed, cfg_idx, rep))
        records.extend(run_single(config, experiment=experiment, combined=combined))
    return records


def suite_converge_a(seed=0, repeats=30, grid=(50, 100, 200, 400, 800), gamma=0.1,
                     window=10, solver="projection", **_):
    """Repeated runs over a grid of orbit lengths, at fixed window."""
    records = []
    for idx, segments in enumerate(grid):
        records.extend(_repeat_runs(
            "converge-A",
            lambda s, a=segments: RunConfig(system="solenoid21", gamma=[gamma, gamma],
                                            segments=a, window=window, solver=solver,
                                            seed=s),
            idx, repeats, seed))
    return records


def suite_converge_w(seed=0, repeats=30, grid=(2, 4, 6, 8, 10, 12), gamma=0.1,
                     segments=200, solver="projection", **_):
    records = []
    for idx, window in enumerate(grid):
        records.extend(_repeat_runs(
            "converge-W",
            lambda s, w=window: RunConfig(system="solenoid21", gamma=[gamma, gamma],
                                          segments=segments, window=w, solver=solver,
                                          seed=s),
            idx, repeats, seed))
    return records


def suite_sweep_gamma(system="solenoid21", seed=0, repeats=1, gammas=None,
                      segments=200, frequencies=None, fd=False, fd_segments=10_000,
                      solver="projection", **_):
    """Objective average and derivative over a parameter grid.

    For the interval maps the sweep repeats per forcing frequency; the exact
    value gamma = 0 is excluded there because binary doubling arithmetic
    collapses those orbits onto the fixed point.
    """
    records = []
    if system == "solenoid21":
        if gammas is None:
            gammas = np.linspace(0.05, 0.15, 11)
        for idx, g in enumerate(gammas):
            for rep in range(repeats):
                cfg = RunConfig(system=system, gamma=[g, g], segments=segments,
                                solver=solver, seed=_seed_for(seed, idx, rep))
                records.extend(run_single(cfg, experiment="sweep-gamma", combined=True,
                                          fd_check=fd, fd_segments=fd_segments))
        return records

    if gammas is None:
        gammas = (0.05, 0.1, 0.15, 0.2)
    if frequencies is None:
        frequencies = (1, 8) if system == "lorenz" else (1, 7, 8)
    cfg_idx = 0
    for freq in frequencies:
        for g in gammas:
            for rep in range(repeats):
                cfg = RunConfig(system=system, gamma=[g], segments=segments,
                                solver=solver, seed=_seed_for(seed, cfg_idx, rep),
                                system_kwargs={"frequency": float(freq)})
                records.extend(run_single(
                    cfg, experiment=f"sweep-gamma[T={freq:g}]",
                    fd_check=fd, fd_segments=fd_segments))
            cfg_idx += 1
    return records


def suite_contour(seed=0, repeats=30, values=(0.07, 0.10, 0.13), segments=200,
                  rho_segments=1000, fd=False, fd_segments=10_000,
                  solver="projection", **_):
    """Gradients on a (gamma1, gamma2) grid plus objective averages.

    Gradient rows come from repeated short runs; the objective level rows
    ('rho' parameter) come from longer orbits, matching how the contour
    figure is assembled.
    """
    records = []
    cfg_idx = 0
    for g1 in values:
        for g2 in values:
            fd_values = fd_se = None
            if fd:
                fdr = finite_difference_derivative(
                    "solenoid21", [g1, g2], 0.01, fd_segments, repeats=4,
                    seed=_seed_for(seed, cfg_idx, 90_001))
                fd_values, fd_se = fdr.values, fdr.se
            for rep in range(repeats):
                cfg = RunConfig(system="solenoid21", gamma=[g1, g2], segments=segments,
                                solver=solver, seed=_seed_for(seed, cfg_idx, rep))
                t0 = time.perf_counter()
                res = compute_response(cfg)
                wall = (time.perf_counter() - t0) * 1e3
                records.extend(_records_from_result(
                    "contour", cfg, res, wall, combined=False,
                    fd_values=fd_values, fd_se=fd_se))
            for rep in range(repeats):
                cfg = RunConfig(system="solenoid21", gamma=[g1, g2],
                                segments=rho_segments,
                                seed=_seed_for(seed, cfg_idx, 50_000 + rep))
                system = get_system(cfg.system)
                rng = np.random.default_rng(cfg.seed)
                t0 = time.perf_counter()
                orb = generate_orbit(system, cfg, rng)
                lo = cfg.window + cfg.buffer_segments * cfg.steps_per_segment + 1
                hi = cfg.window + (cfg.segments - cfg.buffer_segments) * cfg.steps_per_segment + 1
                rho = float(orb.phi[lo:hi].mean())
                wall = (time.perf_counter() - t0) * 1e3
                records.append(ExperimentRecord(
                    experiment="contour", system=cfg.system, gamma1=g1, gamma2=g2,
                    N=cfg.steps_per_segment, A=cfg.segments, W=cfg.window,
                    seed=cfg.seed, param="rho", SC=None, UC=None, deriv=None,
                    rho_phi=rho, wall_ms=wall))
            cfg_idx += 1
    return records


def suite_noise(seed=0, repeats=10, gammas=None, segments=1000, fd=False,
                fd_segments=10_000, solver="projection", dump_prefix=None, **_):
    """Noisy 3-D runs over a gamma grid, with optional measure dumps."""
    if gammas is None:
        gammas = np.linspace(0.05, 0.15, 6)
    records = []
    for idx, g in enumerate(gammas):
        fd_values = fd_se = None
        if fd:
            fdr = finite_difference_derivative(
                "solenoid3-noisy", [g, g], 0.01, fd_segments, repeats=4,
                seed=_seed_for(seed, idx, 90_001), directions=[[1.0, 1.0]])
            fd_values, fd_se = fdr.values, fdr.se
        for rep in range(repeats):
            cfg = RunConfig(system="solenoid3-noisy", gamma=[g, g], segments=segments,
                            solver=solver, seed=_seed_for(seed, idx, rep))
            t0 = time.perf_counter()
            res = compute_response(cfg)
            wall = (time.perf_counter() - t0) * 1e3
            records.extend(_records_from_result(
                "noise", cfg, res, wall, combined=True,
                fd_values=fd_values, fd_se=fd_se))
    if dump_prefix is not None:
        for name in ("solenoid3", "solenoid3-noisy"):
            cfg = RunConfig(system=name, gamma=[0.1, 0.1], segments=200, seed=seed)
            orb = generate_orbit(get_system(name), cfg, np.random.default_rng(seed))
            dump_states(orb, f"{dump_prefix}_{name}_states.csv")
    return records


def suite_lorenz(seed=0, repeats=10, gammas=(0.05, 0.1, 0.15, 0.2),
                 frequencies=(1, 8), segments=1000, fd=False, fd_segments=20_000,
                 solver="projection", dump_prefix=None, **_):
    records = suite_sweep_gamma(system="lorenz", seed=seed, repeats=repeats,
                                gammas=gammas, frequencies=frequencies,
                                segments=segments, fd=fd, fd_segments=fd_segments,
                                solver=solver)
    records = [ExperimentRecord(**{**asdict(r), "experiment":
                                   r.experiment.replace("sweep-gamma", "lorenz")})
               for r in records]
    if dump_prefix is not None:
        cfg = RunConfig(system="lorenz", gamma=[0.1], segments=1000, seed=seed,
                        system_kwargs={"frequency": 1.0})
        orb = generate_orbit(get_system("lorenz", frequency=1.0), cfg,
                             np.random.default_rng(seed))
        dump_states(orb, f"{dump_prefix}_lorenz_states.csv")
    return records


def suite_logistic_demo(seed=0, repeats=7, grid=(25, 50, 100, 200, 400, 800),
                        solver="projection", **_):
    """Documented-failure demo: the shadowing covector grows with orbit length.

    Returns (records, diagnostics); diagnostics carry the per-length max
    covector norms and the non-convergence flag. Individual runs that abort
    numerically count as divergence evidence rather than crashing the suite.
    """
    records = []
    norms = {}
    for idx, segments in enumerate(grid):
        vals = []
        for rep in range(repeats):
            cfg = RunConfig(system="logistic", gamma=[0.0], segments=segments,
                            solver=solver, seed=_seed_for(seed, idx, rep))
            t0 = time.perf_counter()
            try:
                res = compute_response(cfg)
            except NumericsError:
                vals.append(float("inf"))
                continue
            wall = (time.perf_counter() - t0) * 1e3
            shadow_max = res.shadow_max if np.isfinite(res.shadow_max) else float("inf")
            vals.append(float(shadow_max))
            records.extend(_records_from_result("logistic-demo", cfg, res, wall,
                                                combined=False))
        norms[int(segments)] = vals
    medians = [float(np.median(norms[int(a)])) for a in grid]
    growing = all(b >= a for a, b in zip(medians, medians[1:])) \
        and medians[-1] > 10.0 * medians[0]
    diagnostics = {
        "segments_grid": [int(a) for a in grid],
        "max_shadow_norm": norms,
        "median_max_shadow_norm": medians,
        "non_convergent": bool(growing),
    }
    return records, diagnostics


def run_suite(name: str, **overrides):
    """Dispatch a named suite; returns (records, extras-dict)."""
    if name == "converge-A":
        return suite_converge_a(**overrides), {}
    if name == "converge-W":
        return suite_converge_w(**overrides), {}
    if name == "sweep-gamma":
        return suite_sweep_gamma(**overrides), {}
    if name == "contour":
        return suite_contour(**overrides), {}
    if name == "noise":
        return suite_noise(**overrides), {}
    if name == "lorenz":
        return suite_lorenz(**overrides), {}
    if name == "logistic-demo":
        records, diagnostics = suite_logistic_demo(**overrides)
        return records, {"diagnostics": diagnostics}
    raise ValueError(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
