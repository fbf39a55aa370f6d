"""Assembly of the linear response from the sweep outputs.

Derivative = shadowing contribution minus unstable contribution, both sampled
as plain averages over the orbit steps outside the buffer segments. The
windowed objective anomaly weights the per-step unstable divergence; the
finite-difference oracle provides the independent validation slope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjoint import run_adjoint
from .orbit import Orbit, RunConfig, generate_orbit
from .shadowing import (ShadowingSolution, interface_residual,
                        reconstruct_shadowing, solve_least_squares,
                        solve_projection)
from .systems import MapSystem, get_system
from .tangent import run_tangent


@dataclass
class ResponseResult:
    """Per-parameter response pieces plus run diagnostics."""

    gamma: np.ndarray
    sc: np.ndarray                   # shadowing contribution, per parameter
    uc: np.ndarray                   # windowed unstable contribution, per parameter
    derivative: np.ndarray           # sc - uc
    rho_phi: float                   # orbit average of the objective
    duality_max: float               # max ||dual^T basis - I||_inf over all steps
    continuity_max: float            # interface residual of the objective shadow
    src_continuity_max: float        # same for the source shadow
    shadow_max: float                # max step norm of the objective shadow
    shadow_seg_max: np.ndarray       # per-segment max step norm (growth diagnostics)
    seed: int | None = None
    config: RunConfig | None = None
    psi: np.ndarray | None = None          # per included step, when collected
    divergence: np.ndarray | None = None   # per included step and parameter
    forcing_dot: np.ndarray | None = None  # per included step and parameter


def included_range(config: RunConfig) -> tuple[int, int]:
    """Segment range [lo, hi) entering every average."""
    return config.buffer_segments, config.segments - config.buffer_segments


def shadowing_contribution(system: MapSystem, gamma, orbit: Orbit,
                           obj_shadow: np.ndarray, seg_lo: int, seg_hi: int,
                           return_steps: bool = False):
    """Average over included steps of the shadow covector against the
    parameter forcing; step 0 of each segment is never used."""
    n, w = orbit.seg_len, orbit.window
    prev = orbit.states[w + seg_lo * n: w + seg_hi * n]
    cov = obj_shadow[seg_lo:seg_hi, 1:].reshape(-1, orbit.states.shape[1])
    vals = system.forcing_inner(gamma, prev, cov)
    if return_steps:
        return vals.mean(axis=0), vals
    return vals.mean(axis=0)


def unstable_divergence(system: MapSystem, gamma, orbit: Orbit,
                        src_shadow: np.ndarray, dual: np.ndarray,
                        basis: np.ndarray, seg_lo: int, seg_hi: int) -> np.ndarray:
    """Per-step unstable divergence of the forcing, shape (steps, n_params).

    Source-shadow term plus the mixed second derivative contracted with the
    (dual, basis) pairs; the tangent data enters one step behind the dual.
    """
    n, w = orbit.seg_len, orbit.window
    m = orbit.states.shape[1]
    steps = (seg_hi - seg_lo) * n
    prev = orbit.states[w + seg_lo * n: w + seg_hi * n]
    cov = src_shadow[seg_lo:seg_hi, 1:].reshape(steps, m)
    u = dual.shape[3]
    duals = dual[seg_lo:seg_hi, 1:].reshape(steps, m, u)
    vecs = basis[seg_lo:seg_hi, :n].reshape(steps, m, u)
    return system.forcing_inner(gamma, prev, cov) \
        + system.mixed_sum_series(gamma, prev, duals, vecs)


def anomaly_window_sum(phi_values: np.ndarray, window: int,
                       mean_value: float) -> np.ndarray:
    """Centered sliding sums of the objective anomaly.

    ``out[i]`` is the sum of ``phi_values - mean_value`` over the window of
    half-width ``window`` centered at index ``i + window``; callers must
    supply at least ``window`` extra values on both sides of the points they
    care about.
    """
    if phi_values.shape[0] < 2 * window + 1:
        raise ValueError("phi series shorter than the window it should cover")
    anomaly = phi_values - mean_value
    if window == 0:
        return anomaly.copy()
    return np.lib.stride_tricks.sliding_window_view(
        anomaly, 2 * window + 1).sum(axis=1)


def unstable_contribution(psi_steps: np.ndarray,
                          divergence_steps: np.ndarray) -> np.ndarray:
    """Average of the windowed anomaly times the per-step divergence."""
    if psi_steps.shape[0] != divergence_steps.shape[0]:
        raise ValueError("psi and divergence must be aligned on the same steps")
    return (psi_steps[:, None] * divergence_steps).mean(axis=0)


def linear_response(sc: np.ndarray, uc: np.ndarray) -> np.ndarray:
    return sc - uc


def solve_shadowing(tangent, adjoint, solver: str) -> ShadowingSolution:
    """Pick the coefficient solver and reconstruct both shadowing covectors.

    Zero unstable directions bypass the solvers entirely (empty coefficients,
    the particular solutions already are the shadows).
    """
    u = adjoint.dual.shape[3]
    a = adjoint.dual.shape[0]
    if u == 0:
        obj_coeff = np.zeros((a, 0))
        src_coeff = np.zeros((a, 0))
    elif solver == "projection":
        obj_coeff = solve_projection(adjoint.obj_shift, tangent.r)
        src_coeff = solve_projection(adjoint.src_shift, tangent.r)
    elif solver == "lsq":
        obj_coeff = solve_least_squares(adjoint.gram_moment, adjoint.obj_moment,
                                        adjoint.obj_shift, tangent.r)
        src_coeff = solve_least_squares(adjoint.gram_moment, adjoint.src_moment,
                                        adjoint.src_shift, tangent.r)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return ShadowingSolution(
        obj_coeff=obj_coeff, src_coeff=src_coeff,
        obj_shadow=reconstruct_shadowing(adjoint.obj_part, adjoint.dual, obj_coeff),
        src_shadow=reconstruct_shadowing(adjoint.src_part, adjoint.dual, src_coeff))


def compute_response(config: RunConfig, rng=None, collect_steps: bool = False,
                     system: MapSystem | None = None) -> ResponseResult:
    """Run the full procedure end to end for one orbit.

    Deterministic given ``config.seed`` (fresh generator per call unless an
    rng is supplied).
    """
    if system is None:
        system = get_system(config.system, **config.system_kwargs)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    gamma = config.resolve_gamma(system)

    orbit = generate_orbit(system, config, rng)
    tangent = run_tangent(orbit, system, gamma, rng=rng)
    adjoint = run_adjoint(orbit, tangent, system, gamma,
                          moment_stride=config.moment_stride)
    solution = solve_shadowing(tangent, adjoint, config.solver)
    obj_shadow, src_shadow = solution.obj_shadow, solution.src_shadow

    seg_lo, seg_hi = included_range(config)
    n, w = config.steps_per_segment, config.window

    sc, forcing_steps = shadowing_contribution(
        system, gamma, orbit, obj_shadow, seg_lo, seg_hi, return_steps=True)

    rho_phi = float(orbit.phi[w + seg_lo * n + 1: w + seg_hi * n + 1].mean())
    psi_all = anomaly_window_sum(orbit.phi, w, rho_phi)
    psi_steps = psi_all[seg_lo * n + 1: seg_hi * n + 1]

    divergence = unstable_divergence(system, gamma, orbit, src_shadow,
                                     adjoint.dual, tangent.basis, seg_lo, seg_hi)
    uc = unstable_contribution(psi_steps, divergence)
    deriv = linear_response(sc, uc)

    step_norms = np.linalg.norm(obj_shadow, axis=2)
    return ResponseResult(
        gamma=gamma, sc=sc, uc=uc, derivative=deriv, rho_phi=rho_phi,
        duality_max=adjoint.duality_max,
        continuity_max=interface_residual(obj_shadow),
        src_continuity_max=interface_residual(src_shadow),
        shadow_max=float(step_norms.max()),
        shadow_seg_max=step_norms.max(axis=1),
        seed=config.seed, config=config,
        psi=psi_steps if collect_steps else None,
        divergence=divergence if collect_steps else None,
        forcing_dot=forcing_steps if collect_steps else None)


# ---------------------------------------------------------------------------
# finite-difference validation oracle
# ---------------------------------------------------------------------------

@dataclass
class FdResult:
    """Central-difference slopes with their standard errors."""

    values: np.ndarray     # (n_directions,)
    se: np.ndarray         # (n_directions,)
    samples: np.ndarray    # (repeats, n_directions)

    def combined_se(self, other_se) -> np.ndarray:
        return np.sqrt(self.se ** 2 + np.asarray(other_se) ** 2)


def segment_block_bootstrap_se(step_values: np.ndarray, seg_len: int,
                               n_boot: int = 200, seed: int = 0) -> float:
    """Standard error of the mean of a step series, resampling whole
    segments to respect serial correlation."""
    usable = (step_values.shape[0] // seg_len) * seg_len
    blocks = step_values[:usable].reshape(-1, seg_len).mean(axis=1)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, blocks.shape[0], size=(n_boot, blocks.shape[0]))
    return float(blocks[idx].mean(axis=1).std(ddof=1))


def finite_difference_derivative(system_name: str, gamma, delta: float,
                                 segments: int, steps_per_segment: int = 20,
                                 directions=None, repeats: int = 4,
                                 seed: int = 0, noise_mode: str = "fresh",
                                 spin_up: int = 1000,
                                 system_kwargs: dict | None = None) -> FdResult:
    """Central differences of the orbit-averaged objective.

    One repeat evaluates the average at gamma +/- delta * direction from a
    shared initial state; for noisy systems ``noise_mode`` picks fresh draws
    per evaluation or one realization fixed across the pair. The standard
    error comes from the spread over repeats (two or more), else from a
    segment-block bootstrap of the paired difference.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if noise_mode not in ("fresh", "fixed"):
        raise ValueError("noise_mode must be 'fresh' or 'fixed'")
    system = get_system(system_name, **(system_kwargs or {}))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    if directions is None:
        directions = np.eye(system.n_params)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    steps = segments * steps_per_segment

    samples = np.empty((repeats, directions.shape[0]))
    boot_se = np.empty_like(samples)
    for rep in range(repeats):
        rng = np.random.default_rng([seed, rep])
        x0 = system.initial_state(rng)
        noise_shared = None
        if system.has_noise and noise_mode == "fixed":
            noise_shared = rng.uniform(-system.noise_amp, system.noise_amp,
                                       (spin_up + steps, system.noise_dim))
        for di, direction in enumerate(directions):
            means = []
            seg_means = []
            for sign in (1.0, -1.0):
                noise = noise_shared
                if system.has_noise and noise_mode == "fresh":
                    noise = rng.uniform(-system.noise_amp, system.noise_amp,
                                        (spin_up + steps, system.noise_dim))
                states = system.orbit_states(x0, gamma + sign * delta * direction,
                                             spin_up + steps, noise)
                phi = system.objective_values(states[spin_up + 1:])
                means.append(phi.mean())
                seg_means.append(phi.reshape(-1, steps_per_segment).mean(axis=1))
            samples[rep, di] = (means[0] - means[1]) / (2.0 * delta)
            if repeats < 2:
                diff = (seg_means[0] - seg_means[1]) / (2.0 * delta)
                boot = np.random.default_rng([seed, rep, di])
                idx = boot.integers(0, diff.shape[0], size=(200, diff.shape[0]))
                boot_se[rep, di] = diff[idx].mean(axis=1).std(ddof=1)

    values = samples.mean(axis=0)
    if repeats >= 2:
        se = samples.std(axis=0, ddof=1) / np.sqrt(repeats)
    else:
        se = boot_se[0]
    return FdResult(values=values, se=se, samples=samples)
