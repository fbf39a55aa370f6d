"""Compiled and pure kernel backends must agree step by step."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from chaosgrad import kernels
from chaosgrad.kernels import pure
from chaosgrad.orbit import RunConfig
from chaosgrad.response import compute_response
from chaosgrad.systems import get_system

needs_ext = pytest.mark.skipif(not kernels.compiled_available(),
                               reason="compiled kernels not built")


@needs_ext
def test_solenoid_single_steps_agree(rng):
    ext = kernels.get("compiled")
    system = get_system("solenoid21")
    x = system.initial_state(rng)
    for _ in range(50):
        a = pure.solenoid_step(x, 0.1, 0.1)
        b = ext.solenoid_step(x, 0.1, 0.1)
        assert_allclose(a, b, rtol=0, atol=1e-13)
        x = a


@needs_ext
def test_solenoid_orbit_agrees_over_short_horizon(rng):
    # chaos doubles roundoff each step, so compare only a couple of segments
    ext = kernels.get("compiled")
    system = get_system("solenoid3-noisy")
    x = system.initial_state(rng)
    noise = rng.uniform(-5, 5, (40, 3))
    a = pure.solenoid_orbit(x, 0.1, 0.1, 40, noise)
    b = ext.solenoid_orbit(x, 0.1, 0.1, 40, noise)
    assert_allclose(a, b, rtol=0, atol=3e-9)


@needs_ext
def test_solenoid_segment_sweeps_agree(rng):
    ext = kernels.get("compiled")
    system = get_system("solenoid21")
    x = system.initial_state(rng)
    states = pure.solenoid_orbit(x, 0.1, 0.1, 20)
    basis0 = rng.standard_normal((21, 20))
    tp = pure.solenoid_tangent_segment(states, 0.1, basis0)
    tc = ext.solenoid_tangent_segment(states, 0.1, basis0)
    assert_allclose(tc, tp, rtol=1e-11, atol=1e-11 * np.abs(tp).max())

    dual_end = rng.standard_normal((21, 20))
    obj_end = rng.standard_normal(21)
    src_end = rng.standard_normal(21)
    dphi = system.objective_gradients(states[:-1])
    outs_p = pure.solenoid_adjoint_segment(states, 0.1, tp, dual_end, obj_end, src_end, dphi)
    outs_c = ext.solenoid_adjoint_segment(states, 0.1, tp, dual_end, obj_end, src_end, dphi)
    for arr_p, arr_c in zip(outs_p, outs_c):
        assert_allclose(arr_c, arr_p, rtol=1e-11, atol=1e-11 * np.abs(arr_p).max())


@needs_ext
def test_interval_and_logistic_kernels_agree(rng):
    ext = kernels.get("compiled")
    for _ in range(50):
        x = rng.uniform(0.01, 0.99)
        assert pure.interval_step(x, 3.0, 8.0, 0.1) == pytest.approx(
            ext.interval_step(x, 3.0, 8.0, 0.1), abs=1e-15)
        assert pure.logistic_step(x, 3.8) == ext.logistic_step(x, 3.8)

    fprime = rng.uniform(1.5, 2.5, 20) * np.where(rng.random(20) < 0.5, -1, 1)
    fpp = rng.standard_normal(20)
    basis = rng.standard_normal(21)
    dphi = rng.standard_normal(20)
    a = pure.scalar_adjoint_segment(fprime, fpp, basis, dphi, 0.3, 0.1, -0.2)
    b = ext.scalar_adjoint_segment(fprime, fpp, basis, dphi, 0.3, 0.1, -0.2)
    for arr_a, arr_b in zip(a, b):
        assert_allclose(arr_b, arr_a, rtol=1e-12)
    assert_allclose(ext.scalar_tangent_segment(fprime, 1.0),
                    pure.scalar_tangent_segment(fprime, 1.0), rtol=1e-12)


@needs_ext
def test_backends_give_statistically_identical_responses():
    # full pipeline on a short run: backends agree far below statistical error
    cfg = RunConfig(system="solenoid3", gamma=[0.1, 0.1], segments=20,
                    steps_per_segment=8, window=3, spin_up=50, seed=9)
    res_fast = compute_response(cfg)
    with kernels.use_pure():
        res_pure = compute_response(cfg)
    assert_allclose(res_fast.derivative, res_pure.derivative, rtol=1e-6, atol=1e-6)
    assert_allclose(res_fast.rho_phi, res_pure.rho_phi, rtol=1e-8)


def test_use_pure_toggles_backend():
    before = kernels.backend_name()
    with kernels.use_pure():
        assert kernels.backend_name() == "pure"
    assert kernels.backend_name() == before
