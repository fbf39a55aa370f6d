import numpy as np
import pytest

from chaosgrad.systems import get_system, system_names

ALL_SYSTEMS = system_names()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_phase(system, rng):
    """A generic point in the system's phase space."""
    x = system.initial_state(rng)
    if system.name in ("lorenz", "tent", "logistic"):
        # keep a safe margin from the branch point and the wrap so that
        # finite differences stay on one smooth branch
        while min(abs(x[0] - 0.5), x[0], 1.0 - x[0]) < 1e-3:
            x = system.initial_state(rng)
    return x


def random_gamma(system, rng):
    lo, hi = system.gamma_range
    return rng.uniform(lo / 2, hi / 2, system.n_params)


def make(name, **kwargs):
    return get_system(name, **kwargs)


def wrap_delta(system, diff):
    """Difference of phase points respecting torus topology."""
    diff = diff.copy()
    if system.name.startswith("solenoid"):
        diff[1:] = (diff[1:] + np.pi) % (2 * np.pi) - np.pi
    elif system.name in ("lorenz", "tent"):
        diff = (diff + 0.5) % 1.0 - 0.5
    return diff
