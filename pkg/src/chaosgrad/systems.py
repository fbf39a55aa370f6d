"""Built-in chaotic maps with closed-form first and second derivatives.

Every system implements the :class:`MapSystem` contract: the map itself, its
Jacobian acting on vectors and covectors, the second-derivative contractions
needed by the divergence source, the per-parameter forcing, and the scalar
objective whose long-time average is differentiated. All derivatives are
hand-differentiated (no AD) so the 3-tensor contractions cost O(u * dim) per
step by exploiting each map's sparsity.

Phase points are plain float arrays of length ``dim``; torus coordinates are
kept reduced to their fundamental domain ([0, 2*pi) for the solenoid family,
[0, 1) for the interval maps). Parameters arrive as a length ``n_params``
array ``gamma``.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .kernels import pure

TWO_PI = 2.0 * np.pi


class MapSystem:
    """Contract every dynamical system must satisfy.

    Subclasses fill in the per-point oracles; the batched and per-segment
    methods below have generic fallbacks that loop over the oracles, and the
    built-in systems override them with vectorized or compiled paths.
    """

    name: str = ""
    dim: int = 0
    unstable_dim: int = 0
    n_params: int = 1
    has_noise: bool = False
    noise_dim: int = 0
    noise_amp: float = 0.0
    default_gamma: np.ndarray
    # documented safe parameter range (applies to each component)
    gamma_range: tuple[float, float] = (-1.0, 1.0)

    # -- per-point oracles -------------------------------------------------

    def step(self, x, gamma, noise=None):
        raise NotImplementedError

    def jacobian_apply(self, x, gamma, vecs):
        """Apply df/dx at x to the columns of ``vecs`` (dim x k)."""
        raise NotImplementedError

    def jacobian_adjoint_apply(self, x, gamma, covecs):
        """Apply (df/dx)^T at x to the columns of ``covecs`` (dim x k)."""
        raise NotImplementedError

    def hessian_covector_contract(self, x, gamma, eta, v):
        """Covector with j-th entry sum_{l,k} eta_l d2f^l/dx^k dx^j v^k."""
        raise NotImplementedError

    def parameter_forcing(self, x, gamma):
        """df/dgamma at x, one column per parameter (dim x n_params)."""
        raise NotImplementedError

    def mixed_hessian_contract(self, x, gamma, eta, v):
        """Vector with j-th entry sum_{l,k} eta_l d2f^l/dgamma_j dx^k v^k."""
        raise NotImplementedError

    def objective(self, x):
        raise NotImplementedError

    def objective_gradient(self, x):
        raise NotImplementedError

    def initial_state(self, rng):
        raise NotImplementedError

    # -- batched helpers (generic fallbacks) --------------------------------

    def objective_values(self, states):
        return np.array([self.objective(x) for x in states])

    def objective_gradients(self, states):
        return np.array([self.objective_gradient(x) for x in states])

    def hessian_pair_sum(self, x, gamma, duals, vecs):
        """Sum of hessian_covector_contract over (dual, vec) column pairs."""
        out = np.zeros(self.dim)
        for i in range(duals.shape[1]):
            out += self.hessian_covector_contract(x, gamma, duals[:, i], vecs[:, i])
        return out

    def mixed_pair_sum(self, x, gamma, duals, vecs):
        """Sum of mixed_hessian_contract over (dual, vec) column pairs."""
        out = np.zeros(self.n_params)
        for i in range(duals.shape[1]):
            out += self.mixed_hessian_contract(x, gamma, duals[:, i], vecs[:, i])
        return out

    def forcing_inner(self, gamma, states_prev, covecs):
        """Per-step covector . parameter_forcing products, shape (S, n_params)."""
        out = np.empty((states_prev.shape[0], self.n_params))
        for k in range(states_prev.shape[0]):
            out[k] = covecs[k] @ self.parameter_forcing(states_prev[k], gamma)
        return out

    def mixed_sum_series(self, gamma, states_prev, duals, vecs):
        """Per-step mixed_pair_sum over a whole step series, shape (S, n_params)."""
        out = np.empty((states_prev.shape[0], self.n_params))
        for k in range(states_prev.shape[0]):
            out[k] = self.mixed_pair_sum(states_prev[k], gamma, duals[k], vecs[k])
        return out

    # -- whole-orbit / per-segment paths ------------------------------------

    def orbit_states(self, x0, gamma, steps, noise=None):
        out = np.empty((steps + 1, self.dim))
        out[0] = x0
        for k in range(steps):
            out[k + 1] = self.step(out[k], gamma, None if noise is None else noise[k])
        return out

    def replay_step(self, x, gamma, noise=None, backend="pure"):
        """Re-apply one step using the same backend that generated an orbit."""
        return self.step(x, gamma, noise)

    def tangent_segment(self, states, gamma, basis0):
        n = states.shape[0] - 1
        out = np.empty((n + 1,) + basis0.shape)
        out[0] = basis0
        for k in range(n):
            out[k + 1] = self.jacobian_apply(states[k], gamma, out[k])
        return out

    def adjoint_segment(self, states, gamma, basis, dual_end, obj_end, src_end, dphi):
        """Backward sweep over one segment; see kernels.pure for the layout."""
        n = states.shape[0] - 1
        m, u = dual_end.shape
        dual = np.empty((n + 1, m, u))
        source = np.zeros((n, m))
        obj = np.empty((n + 1, m))
        src = np.empty((n + 1, m))
        dual[n] = dual_end
        obj[n] = obj_end
        src[n] = src_end
        for k in range(n, 0, -1):
            x = states[k - 1]
            if u:
                source[k - 1] = self.hessian_pair_sum(x, gamma, dual[k], basis[k - 1])
            stack = np.column_stack([dual[k], obj[k], src[k]])
            pulled = self.jacobian_adjoint_apply(x, gamma, stack)
            dual[k - 1] = pulled[:, :u]
            obj[k - 1] = pulled[:, u] + dphi[k - 1]
            src[k - 1] = pulled[:, u + 1] + source[k - 1]
        return dual, source, obj, src

class Solenoid(MapSystem):
    """Contracting real line driving an expanding torus, any dimension >= 3.

    Coordinate 0 is the unwrapped real factor; coordinates 1..dim-1 live on
    the circle [0, 2*pi). Parameter 0 shifts the line coordinate, parameter 1
    scales the coupling into the torus coordinates. The noisy variant adds an
    independent uniform draw to every coordinate equation at every step.
    """

    n_params = 2
    gamma_range = (-0.3, 0.3)

    def __init__(self, dim=21, noisy=False, noise_amp=5.0, objective_weight=None):
        if dim < 3:
            raise ValueError("solenoid needs dim >= 3")
        self.dim = dim
        self.unstable_dim = dim - 1
        self.has_noise = noisy
        self.noise_dim = dim if noisy else 0
        self.noise_amp = noise_amp if noisy else 0.0
        if objective_weight is None:
            objective_weight = 0.005 if dim > 3 else 1.0
        self.objective_weight = objective_weight
        self.default_gamma = np.array([0.1, 0.1])

    def initial_state(self, rng):
        x = np.empty(self.dim)
        x[0] = rng.uniform(0.0, 1.0)
        x[1:] = rng.uniform(0.0, TWO_PI, self.dim - 1)
        return x

    def step(self, x, gamma, noise=None):
        return pure.solenoid_step(x, gamma[0], gamma[1], noise)

    def replay_step(self, x, gamma, noise=None, backend="pure"):
        return kernels.get(backend).solenoid_step(x, gamma[0], gamma[1], noise)

    def orbit_states(self, x0, gamma, steps, noise=None):
        return kernels.impl().solenoid_orbit(
            np.ascontiguousarray(x0), gamma[0], gamma[1], steps,
            None if noise is None else np.ascontiguousarray(noise))

    def jacobian_apply(self, x, gamma, vecs):
        g2 = gamma[1]
        torus = x[1:]
        s2 = np.sin(2.0 * torus)
        s5 = np.sin(5.0 * torus)
        diag = 2.0 + (2.0 * g2 * (1.0 + x[0])) * np.cos(2.0 * torus)
        out = np.empty_like(vecs)
        out[0] = 0.05 * vecs[0] - 0.5 * (s5 @ vecs[1:])
        out[1:] = (g2 * s2)[:, None] * vecs[0][None, :] + diag[:, None] * vecs[1:]
        return out

    def jacobian_adjoint_apply(self, x, gamma, covecs):
        g2 = gamma[1]
        torus = x[1:]
        s2 = np.sin(2.0 * torus)
        s5 = np.sin(5.0 * torus)
        diag = 2.0 + (2.0 * g2 * (1.0 + x[0])) * np.cos(2.0 * torus)
        out = np.empty_like(covecs)
        out[0] = 0.05 * covecs[0] + g2 * (s2 @ covecs[1:])
        out[1:] = -0.5 * s5[:, None] * covecs[0][None, :] + diag[:, None] * covecs[1:]
        return out

    def hessian_covector_contract(self, x, gamma, eta, v):
        g2 = gamma[1]
        torus = x[1:]
        s2 = np.sin(2.0 * torus)
        c2 = np.cos(2.0 * torus)
        c5 = np.cos(5.0 * torus)
        opx = 1.0 + x[0]
        out = np.empty(self.dim)
        out[0] = (2.0 * g2) * np.sum(c2 * eta[1:] * v[1:])
        out[1:] = (-2.5 * c5) * eta[0] * v[1:] \
            + (2.0 * g2) * c2 * eta[1:] * v[0] \
            - (4.0 * g2 * opx) * s2 * eta[1:] * v[1:]
        return out

    def hessian_pair_sum(self, x, gamma, duals, vecs):
        g2 = gamma[1]
        torus = x[1:]
        s2 = np.sin(2.0 * torus)
        c2 = np.cos(2.0 * torus)
        c5 = np.cos(5.0 * torus)
        opx = 1.0 + x[0]
        pair = np.einsum("jc,jc->j", duals[1:], vecs[1:])
        head = duals[0] @ vecs[1:].T
        tail = duals[1:] @ vecs[0]
        out = np.empty(self.dim)
        out[0] = (2.0 * g2) * (c2 @ pair)
        out[1:] = -2.5 * c5 * head + (2.0 * g2) * c2 * tail - (4.0 * g2 * opx) * s2 * pair
        return out

    def parameter_forcing(self, x, gamma):
        out = np.zeros((self.dim, 2))
        out[0, 0] = 1.0
        out[1:, 1] = (1.0 + x[0]) * np.sin(2.0 * x[1:])
        return out

    def mixed_hessian_contract(self, x, gamma, eta, v):
        torus = x[1:]
        s2 = np.sin(2.0 * torus)
        c2 = np.cos(2.0 * torus)
        term = s2 * eta[1:] * v[0] + 2.0 * (1.0 + x[0]) * c2 * eta[1:] * v[1:]
        return np.array([0.0, np.sum(term)])

    def mixed_pair_sum(self, x, gamma, duals, vecs):
        torus = x[1:]
        s2 = np.sin(2.0 * torus)
        c2 = np.cos(2.0 * torus)
        pair = np.einsum("jc,jc->j", duals[1:], vecs[1:])
        tail = duals[1:] @ vecs[0]
        return np.array([0.0, np.sum(s2 * tail + 2.0 * (1.0 + x[0]) * c2 * pair)])

    def forcing_inner(self, gamma, states_prev, covecs):
        out = np.empty((states_prev.shape[0], 2))
        out[:, 0] = covecs[:, 0]
        out[:, 1] = np.einsum(
            "sj,sj->s",
            (1.0 + states_prev[:, 0:1]) * np.sin(2.0 * states_prev[:, 1:]),
            covecs[:, 1:])
        return out

    def mixed_sum_series(self, gamma, states_prev, duals, vecs):
        torus = states_prev[:, 1:]
        s2 = np.sin(2.0 * torus)
        c2 = np.cos(2.0 * torus)
        pair = np.einsum("sjc,sjc->sj", duals[:, 1:, :], vecs[:, 1:, :])
        tail = np.einsum("sjc,sc->sj", duals[:, 1:, :], vecs[:, 0, :])
        out = np.zeros((states_prev.shape[0], 2))
        out[:, 1] = np.sum(s2 * tail + 2.0 * (1.0 + states_prev[:, 0:1]) * c2 * pair, axis=1)
        return out

    def tangent_segment(self, states, gamma, basis0):
        return kernels.impl().solenoid_tangent_segment(
            np.ascontiguousarray(states), gamma[1], np.ascontiguousarray(basis0))

    def adjoint_segment(self, states, gamma, basis, dual_end, obj_end, src_end, dphi):
        return kernels.impl().solenoid_adjoint_segment(
            np.ascontiguousarray(states), gamma[1], np.ascontiguousarray(basis),
            np.ascontiguousarray(dual_end), np.ascontiguousarray(obj_end),
            np.ascontiguousarray(src_end), np.ascontiguousarray(dphi))

    def objective(self, x):
        return x[0] ** 3 + self.objective_weight * np.sum((x[1:] - np.pi) ** 2)

    def objective_values(self, states):
        return states[:, 0] ** 3 + self.objective_weight * np.sum(
            (states[:, 1:] - np.pi) ** 2, axis=1)

    def objective_gradient(self, x):
        out = np.empty(self.dim)
        out[0] = 3.0 * x[0] ** 2
        out[1:] = (2.0 * self.objective_weight) * (x[1:] - np.pi)
        return out

    def objective_gradients(self, states):
        out = np.empty_like(states)
        out[:, 0] = 3.0 * states[:, 0] ** 2
        out[:, 1:] = (2.0 * self.objective_weight) * (states[:, 1:] - np.pi)
        return out


class IntervalMap(MapSystem):
    """Piecewise-quadratic expanding circle map on [0, 1).

    ``curvature`` bends the two branches (0 gives the tent map), ``frequency``
    sets the oscillation count of the sinusoidal forcing whose amplitude is
    the differentiation parameter. The derivative at the branch point uses the
    left-branch formula; the point has measure zero on the attractor.
    """

    dim = 1
    unstable_dim = 1
    n_params = 1
    gamma_range = (-0.4, 0.4)

    def __init__(self, curvature=0.0, frequency=1.0):
        self.curvature = curvature
        self.frequency = frequency
        self.default_gamma = np.array([0.0])

    def initial_state(self, rng):
        return np.array([rng.uniform(0.05, 0.95)])

    def _branch(self, x):
        return 1.0 if x <= 0.5 else -1.0

    def step(self, x, gamma, noise=None):
        return np.array([pure.interval_step(float(x[0]), self.curvature,
                                            self.frequency, gamma[0])])

    def replay_step(self, x, gamma, noise=None, backend="pure"):
        return np.array([kernels.get(backend).interval_step(
            float(x[0]), self.curvature, self.frequency, gamma[0])])

    def orbit_states(self, x0, gamma, steps, noise=None):
        return kernels.impl().interval_orbit(
            float(x0[0]), self.curvature, self.frequency, gamma[0], steps)

    def _fprime(self, x, g):
        tpf = TWO_PI * self.frequency
        if x <= 0.5:
            return 2.0 * self.curvature * x + 2.0 + g * math.cos(tpf * x)
        return 2.0 * self.curvature * (x - 1.0) - 2.0 - g * math.cos(tpf * x)

    def _fpp(self, x, g):
        tpf = TWO_PI * self.frequency
        s = self._branch(x)
        return 2.0 * self.curvature - s * g * tpf * math.sin(tpf * x)

    def _slope_series(self, xs, g):
        tpf = TWO_PI * self.frequency
        sign = np.where(xs <= 0.5, 1.0, -1.0)
        shift = np.where(xs <= 0.5, 0.0, 1.0)
        fprime = 2.0 * self.curvature * (xs - shift) + sign * (2.0 + g * np.cos(tpf * xs))
        fpp = 2.0 * self.curvature - sign * g * tpf * np.sin(tpf * xs)
        return fprime, fpp

    def jacobian_apply(self, x, gamma, vecs):
        return self._fprime(float(x[0]), gamma[0]) * vecs

    def jacobian_adjoint_apply(self, x, gamma, covecs):
        return self._fprime(float(x[0]), gamma[0]) * covecs

    def hessian_covector_contract(self, x, gamma, eta, v):
        return np.array([eta[0] * self._fpp(float(x[0]), gamma[0]) * v[0]])

    def parameter_forcing(self, x, gamma):
        tpf = TWO_PI * self.frequency
        s = self._branch(float(x[0]))
        return np.array([[s * math.sin(tpf * float(x[0])) / tpf]])

    def mixed_hessian_contract(self, x, gamma, eta, v):
        tpf = TWO_PI * self.frequency
        s = self._branch(float(x[0]))
        return np.array([eta[0] * s * math.cos(tpf * float(x[0])) * v[0]])

    def forcing_inner(self, gamma, states_prev, covecs):
        tpf = TWO_PI * self.frequency
        xs = states_prev[:, 0]
        sign = np.where(xs <= 0.5, 1.0, -1.0)
        return (covecs[:, 0] * sign * np.sin(tpf * xs) / tpf)[:, None]

    def mixed_sum_series(self, gamma, states_prev, duals, vecs):
        tpf = TWO_PI * self.frequency
        xs = states_prev[:, 0]
        sign = np.where(xs <= 0.5, 1.0, -1.0)
        pair = duals[:, 0, 0] * vecs[:, 0, 0]
        return (sign * np.cos(tpf * xs) * pair)[:, None]

    def tangent_segment(self, states, gamma, basis0):
        fprime, _ = self._slope_series(states[:-1, 0], gamma[0])
        out = kernels.impl().scalar_tangent_segment(fprime, float(basis0[0, 0]))
        return out[:, None, None]

    def adjoint_segment(self, states, gamma, basis, dual_end, obj_end, src_end, dphi):
        fprime, fpp = self._slope_series(states[:-1, 0], gamma[0])
        dual, source, obj, src = kernels.impl().scalar_adjoint_segment(
            fprime, fpp, np.ascontiguousarray(basis[:, 0, 0]),
            np.ascontiguousarray(dphi[:, 0]),
            float(dual_end[0, 0]), float(obj_end[0]), float(src_end[0]))
        return dual[:, None, None], source[:, None], obj[:, None], src[:, None]

    def objective(self, x):
        return float(x[0])

    def objective_values(self, states):
        return states[:, 0].copy()

    def objective_gradient(self, x):
        return np.ones(1)

    def objective_gradients(self, states):
        return np.ones((states.shape[0], 1))


class Logistic(IntervalMap):
    """Quadratic map r x (1 - x) with r = 3.8 + gamma.

    A documented-failure system: it lacks uniform expansion, so the bounded
    shadowing covector does not exist and the algorithm's recursion blows up.
    Kept as a diagnostic target, not a supported production system.
    """

    gamma_range = (-0.2, 0.2)

    def __init__(self):
        self.default_gamma = np.array([0.0])

    def initial_state(self, rng):
        return np.array([rng.uniform(0.3, 0.7)])

    def _rate(self, g):
        return 3.8 + g

    def step(self, x, gamma, noise=None):
        return np.array([pure.logistic_step(float(x[0]), self._rate(gamma[0]))])

    def replay_step(self, x, gamma, noise=None, backend="pure"):
        return np.array([kernels.get(backend).logistic_step(
            float(x[0]), self._rate(gamma[0]))])

    def orbit_states(self, x0, gamma, steps, noise=None):
        return kernels.impl().logistic_orbit(float(x0[0]), self._rate(gamma[0]), steps)

    def _slope_series(self, xs, g):
        r = self._rate(g)
        return r * (1.0 - 2.0 * xs), np.full_like(xs, -2.0 * r)

    def jacobian_apply(self, x, gamma, vecs):
        return self._rate(gamma[0]) * (1.0 - 2.0 * float(x[0])) * vecs

    jacobian_adjoint_apply = jacobian_apply

    def hessian_covector_contract(self, x, gamma, eta, v):
        return np.array([eta[0] * (-2.0 * self._rate(gamma[0])) * v[0]])

    def parameter_forcing(self, x, gamma):
        return np.array([[float(x[0]) * (1.0 - float(x[0]))]])

    def mixed_hessian_contract(self, x, gamma, eta, v):
        return np.array([eta[0] * (1.0 - 2.0 * float(x[0])) * v[0]])

    def forcing_inner(self, gamma, states_prev, covecs):
        xs = states_prev[:, 0]
        return (covecs[:, 0] * xs * (1.0 - xs))[:, None]

    def mixed_sum_series(self, gamma, states_prev, duals, vecs):
        xs = states_prev[:, 0]
        pair = duals[:, 0, 0] * vecs[:, 0, 0]
        return ((1.0 - 2.0 * xs) * pair)[:, None]


class StableLinear(MapSystem):
    """Contracting affine test map f(x) = 0.5 x + gamma.

    No unstable directions, so only the shadowing path is exercised; the
    long-time average is 2 * gamma, giving the closed-form response 2.
    """

    dim = 1
    unstable_dim = 0
    n_params = 1
    gamma_range = (-10.0, 10.0)

    def __init__(self):
        self.default_gamma = np.array([0.0])

    def initial_state(self, rng):
        return np.array([rng.uniform(-1.0, 1.0)])

    def step(self, x, gamma, noise=None):
        return 0.5 * x + gamma[0]

    def jacobian_apply(self, x, gamma, vecs):
        return 0.5 * vecs

    jacobian_adjoint_apply = jacobian_apply

    def hessian_covector_contract(self, x, gamma, eta, v):
        return np.zeros(1)

    def parameter_forcing(self, x, gamma):
        return np.ones((1, 1))

    def mixed_hessian_contract(self, x, gamma, eta, v):
        return np.zeros(1)

    def forcing_inner(self, gamma, states_prev, covecs):
        return covecs[:, 0:1].copy()

    def mixed_sum_series(self, gamma, states_prev, duals, vecs):
        return np.zeros((states_prev.shape[0], 1))

    def objective(self, x):
        return float(x[0])

    def objective_values(self, states):
        return states[:, 0].copy()

    def objective_gradient(self, x):
        return np.ones(1)

    def objective_gradients(self, states):
        return np.ones((states.shape[0], 1))


_FACTORIES = {
    "solenoid21": lambda **kw: Solenoid(dim=21, **kw),
    "solenoid3": lambda **kw: Solenoid(dim=3, **kw),
    "solenoid3-noisy": lambda **kw: Solenoid(dim=3, noisy=True, **kw),
    "lorenz": lambda **kw: IntervalMap(curvature=kw.pop("curvature", 3.0), **kw),
    "tent": lambda **kw: IntervalMap(curvature=kw.pop("curvature", 0.0), **kw),
    "logistic": lambda **kw: Logistic(**kw),
    "stable-linear": lambda **kw: StableLinear(**kw),
}


def system_names():
    return sorted(_FACTORIES)


def get_system(name, **kwargs) -> MapSystem:
    """Build a registered system by identifier.

    Extra keyword arguments go to the system constructor (e.g.
    ``frequency=7`` for the tent map, ``noise_amp=0.0`` for the noisy
    solenoid).
    """
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; choose from {system_names()}") from None
    system = factory(**kwargs)
    system.name = name
    return system
