"""Orbit generation: spin-up, segmentation and noise logging.

An orbit of ``A`` segments of ``N`` steps holds ``A*N + 1`` distinct states
plus ``W`` buffer states on each side so every averaged step has a full
objective window. The interface state between consecutive segments is stored
once and viewed twice. Indexing convention: segment ``a`` runs from total
step ``a*N`` to ``a*N + N``; step ``(a, n)`` is total step ``a*N + n``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NumericsError
from .systems import MapSystem

_SOLVERS = ("projection", "lsq")


@dataclass
class RunConfig:
    """Everything a single response computation needs."""

    system: str = "solenoid21"
    gamma: np.ndarray | None = None
    steps_per_segment: int = 20
    segments: int = 200
    window: int = 10
    spin_up: int = 1000
    buffer_segments: int = 2
    seed: int = 0
    solver: str = "projection"
    moment_stride: int = 1
    noise_amp: float | None = None
    fixed_noise: bool = False
    system_kwargs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma is not None:
            self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if self.steps_per_segment < 2:
            raise ValueError("steps_per_segment must be >= 2")
        if self.segments < 2:
            raise ValueError("segments must be >= 2")
        if self.window < 0 or self.spin_up < 0 or self.buffer_segments < 0:
            raise ValueError("window, spin_up and buffer_segments must be >= 0")
        if self.segments - 2 * self.buffer_segments < 1:
            raise ValueError("buffer_segments leave no segments to average over")
        if not 1 <= self.moment_stride <= self.steps_per_segment:
            raise ValueError("moment_stride must be in 1..steps_per_segment")
        if self.solver not in _SOLVERS:
            raise ValueError(f"solver must be one of {_SOLVERS}")

    def resolve_gamma(self, system: MapSystem) -> np.ndarray:
        gamma = system.default_gamma if self.gamma is None else self.gamma
        gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
        if gamma.size == 1 and system.n_params > 1:
            gamma = np.full(system.n_params, gamma[0])
        if gamma.size != system.n_params:
            raise ValueError(
                f"{self.system} takes {system.n_params} parameter(s), got {gamma.size}")
        return gamma


@dataclass
class Orbit:
    """Segmented trajectory with buffers, objective values and noise log."""

    system: str
    gamma: np.ndarray
    seg_len: int                 # N
    n_seg: int                   # A
    window: int                  # W
    states: np.ndarray           # (W + A*N + 1 + W, dim)
    phi: np.ndarray              # objective at every stored state
    noise: np.ndarray | None     # (W + A*N + W, noise_dim); noise[k] made states[k+1]
    backend: str
    seed: int | None = None

    @property
    def main_start(self) -> int:
        return self.window

    @property
    def total_steps(self) -> int:
        return self.n_seg * self.seg_len

    def x(self, seg: int, n: int) -> np.ndarray:
        return self.states[self.window + seg * self.seg_len + n]

    def segment_states(self, seg: int) -> np.ndarray:
        lo = self.window + seg * self.seg_len
        return self.states[lo:lo + self.seg_len + 1]

    def main_states(self) -> np.ndarray:
        return self.states[self.window:self.window + self.total_steps + 1]

    def replay(self, system: MapSystem, k: int) -> np.ndarray:
        """Re-apply the k-th stored step with its logged noise."""
        noise = None if self.noise is None else self.noise[k]
        return system.replay_step(self.states[k], self.gamma, noise, backend=self.backend)


def _check_finite(states: np.ndarray, context: str):
    if np.isfinite(states).all():
        return
    bad = int(np.argmin(np.isfinite(states).all(axis=-1)))
    raise NumericsError(f"non-finite state during {context}", step=bad)


def spin_up(system: MapSystem, x0, steps: int, gamma, rng=None, noise=None):
    """Run the map ``steps`` times and return the final state.

    Draws noise from ``rng`` for noisy systems unless an explicit realization
    is supplied.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps == 0:
        return np.asarray(x0, dtype=float).copy()
    if system.has_noise and noise is None:
        if rng is None:
            raise ValueError("noisy system needs an rng or a noise array")
        noise = rng.uniform(-system.noise_amp, system.noise_amp, (steps, system.noise_dim))
    states = system.orbit_states(np.asarray(x0, dtype=float), gamma, steps, noise)
    _check_finite(states, "spin-up")
    return states[-1]


def generate_orbit(system: MapSystem, config: RunConfig, rng,
                   noise_override: np.ndarray | None = None) -> Orbit:
    """Spin up, evolve A*N + 2W steps and log states, objective and noise.

    ``noise_override`` replaces the freshly drawn noise realization (length
    ``spin_up + 2*window + A*N``); this is the fixed-noise mode used when
    comparing runs across parameter values.
    """
    n, a, w = config.steps_per_segment, config.segments, config.window
    gamma = config.resolve_gamma(system)
    x0 = system.initial_state(rng)
    total = config.spin_up + w + a * n + w

    noise_full = None
    if system.has_noise:
        amp = system.noise_amp if config.noise_amp is None else config.noise_amp
        if noise_override is not None:
            if noise_override.shape != (total, system.noise_dim):
                raise ValueError(f"noise override must have shape {(total, system.noise_dim)}")
            noise_full = noise_override
        else:
            noise_full = rng.uniform(-amp, amp, (total, system.noise_dim))

    states_full = system.orbit_states(x0, gamma, total, noise_full)
    _check_finite(states_full, "orbit generation")

    states = states_full[config.spin_up:].copy()
    noise = None if noise_full is None else noise_full[config.spin_up:].copy()
    phi = system.objective_values(states)
    return Orbit(system=system.name, gamma=gamma, seg_len=n, n_seg=a, window=w,
                 states=states, phi=phi, noise=noise,
                 backend=kernels.backend_name(), seed=config.seed)


def draw_noise(system: MapSystem, config: RunConfig, rng) -> np.ndarray | None:
    """Pre-draw a full noise realization matching :func:`generate_orbit`."""
    if not system.has_noise:
        return None
    amp = system.noise_amp if config.noise_amp is None else config.noise_amp
    total = config.spin_up + 2 * config.window + config.segments * config.steps_per_segment
    return rng.uniform(-amp, amp, (total, system.noise_dim))


def dump_states(orbit: Orbit, path):
    """Debug dump of the stored states to CSV (one row per stored step)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        dim = orbit.states.shape[1]
        writer.writerow(["step"] + [f"x{i + 1}" for i in range(dim)])
        for k, row in enumerate(orbit.states):
            writer.writerow([k - orbit.window] + [repr(float(v)) for v in row])
