"""Pure-Python (numpy) implementations of the hot sweep kernels.

This module is the reference backend: ``chaosgrad.kernels._ext`` mirrors it
function for function in Cython, and ``chaosgrad.kernels`` selects one of the
two at import time. Keep the arithmetic here in one obvious order per step so
the compiled mirror can reproduce it closely.

Conventions shared by both backends:

* ``states`` arrays have shape ``(steps + 1, dim)``; ``states[k + 1]`` is the
  image of ``states[k]``.
* segment sweeps take the whole per-segment state block and return per-step
  arrays; interface renormalizations are *not* done here.
* covectors are represented as plain arrays (inner product with column
  vectors).
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# solenoid family: contracting line coupled to an expanding torus
# ---------------------------------------------------------------------------

def solenoid_step(x, g1, g2, noise=None):
    """One step of the solenoid map; coordinates 1.. live on [0, 2*pi)."""
    torus = x[1:]
    out = np.empty_like(x)
    out[0] = 0.05 * x[0] + g1 + 0.1 * np.sum(np.cos(5.0 * torus))
    out[1:] = 2.0 * torus + (g2 * (1.0 + x[0])) * np.sin(2.0 * torus)
    if noise is not None:
        out += noise
    out[1:] = np.mod(out[1:], TWO_PI)
    return out


def solenoid_orbit(x0, g1, g2, steps, noise=None):
    out = np.empty((steps + 1, x0.shape[0]))
    out[0] = x0
    for k in range(steps):
        out[k + 1] = solenoid_step(out[k], g1, g2, None if noise is None else noise[k])
    return out


def solenoid_tangent_segment(states, g2, basis0):
    """Push a dim x u tangent matrix through one segment.

    Returns the per-step basis array of shape (n + 1, dim, u) with entry 0
    equal to ``basis0``.
    """
    n = states.shape[0] - 1
    out = np.empty((n + 1,) + basis0.shape)
    out[0] = basis0
    for k in range(n):
        x = states[k]
        torus = x[1:]
        s2 = np.sin(2.0 * torus)
        s5 = np.sin(5.0 * torus)
        diag = 2.0 + (2.0 * g2 * (1.0 + x[0])) * np.cos(2.0 * torus)
        prev = out[k]
        out[k + 1, 0] = 0.05 * prev[0] - 0.5 * (s5 @ prev[1:])
        out[k + 1, 1:] = (g2 * s2)[:, None] * prev[0][None, :] + diag[:, None] * prev[1:]
    return out


def solenoid_adjoint_segment(states, g2, basis, dual_end, obj_end, src_end, dphi):
    """Backward in-segment sweep of the adjoint quantities.

    Pulls back the dual basis, accumulates the divergence source from the
    map's second derivative contracted with (dual, basis) pairs, and
    integrates the two particular adjoint solutions (objective-driven and
    source-driven). ``dphi[k]`` is the objective gradient at ``states[k]``,
    k = 0..n-1. Returns ``(dual, source, obj, src)`` with the source defined
    on steps 0..n-1 only.
    """
    n = states.shape[0] - 1
    m, u = dual_end.shape
    dual = np.empty((n + 1, m, u))
    source = np.empty((n, m))
    obj = np.empty((n + 1, m))
    src = np.empty((n + 1, m))
    dual[n] = dual_end
    obj[n] = obj_end
    src[n] = src_end
    for k in range(n, 0, -1):
        x = states[k - 1]
        torus = x[1:]
        s2 = np.sin(2.0 * torus)
        c2 = np.cos(2.0 * torus)
        s5 = np.sin(5.0 * torus)
        c5 = np.cos(5.0 * torus)
        opx = 1.0 + x[0]
        diag = 2.0 + (2.0 * g2 * opx) * c2

        dn = dual[k]
        bp = basis[k - 1]
        pair = np.einsum("jc,jc->j", dn[1:], bp[1:])   # dual_j . basis_j
        head = dn[0] @ bp[1:].T                        # dual_0 . basis_j
        tail = dn[1:] @ bp[0]                          # dual_j . basis_0
        w = np.empty(m)
        w[0] = (2.0 * g2) * (c2 @ pair)
        w[1:] = -2.5 * c5 * head + (2.0 * g2) * c2 * tail - (4.0 * g2 * opx) * s2 * pair
        source[k - 1] = w

        dual[k - 1, 0] = 0.05 * dn[0] + g2 * (s2 @ dn[1:])
        dual[k - 1, 1:] = -0.5 * s5[:, None] * dn[0][None, :] + diag[:, None] * dn[1:]
        obj[k - 1, 0] = 0.05 * obj[k, 0] + g2 * (s2 @ obj[k, 1:]) + dphi[k - 1, 0]
        obj[k - 1, 1:] = -0.5 * s5 * obj[k, 0] + diag * obj[k, 1:] + dphi[k - 1, 1:]
        src[k - 1, 0] = 0.05 * src[k, 0] + g2 * (s2 @ src[k, 1:]) + w[0]
        src[k - 1, 1:] = -0.5 * s5 * src[k, 0] + diag * src[k, 1:] + w[1:]
    return dual, source, obj, src


# ---------------------------------------------------------------------------
# one-dimensional interval maps
# ---------------------------------------------------------------------------

def interval_step(x, curvature, frequency, g):
    """Piecewise-quadratic circle map on [0, 1); left branch at x == 0.5."""
    tpf = TWO_PI * frequency
    if x <= 0.5:
        val = curvature * x * x + 2.0 * x + g * math.sin(tpf * x) / tpf
    else:
        xm = x - 1.0
        val = curvature * xm * xm + 2.0 - 2.0 * x - g * math.sin(tpf * x) / tpf
    return val % 1.0


def interval_orbit(x0, curvature, frequency, g, steps):
    out = np.empty((steps + 1, 1))
    x = float(x0)
    out[0, 0] = x
    for k in range(steps):
        x = interval_step(x, curvature, frequency, g)
        out[k + 1, 0] = x
    return out


def logistic_step(x, rate):
    return rate * x * (1.0 - x)


def logistic_orbit(x0, rate, steps):
    out = np.empty((steps + 1, 1))
    x = float(x0)
    out[0, 0] = x
    for k in range(steps):
        x = rate * x * (1.0 - x)
        out[k + 1, 0] = x
    return out


def scalar_tangent_segment(fprime, e0):
    """Scalar tangent recursion given precomputed slopes fprime[k] = f'(x_k)."""
    n = fprime.shape[0]
    out = np.empty(n + 1)
    e = float(e0)
    out[0] = e
    for k in range(n):
        e = fprime[k] * e
        out[k + 1] = e
    return out


def scalar_adjoint_segment(fprime, fpp, basis, dphi, dual_end, obj_end, src_end):
    """Scalar version of the backward adjoint sweep (1-D maps).

    ``fpp[k] = f''(x_k)``; ``basis`` holds the per-step tangent solution.
    """
    n = fprime.shape[0]
    dual = np.empty(n + 1)
    source = np.empty(n)
    obj = np.empty(n + 1)
    src = np.empty(n + 1)
    d, o, s = float(dual_end), float(obj_end), float(src_end)
    dual[n], obj[n], src[n] = d, o, s
    for k in range(n, 0, -1):
        fp = fprime[k - 1]
        w = d * fpp[k - 1] * basis[k - 1]
        source[k - 1] = w
        d = fp * d
        o = fp * o + dphi[k - 1]
        s = fp * s + w
        dual[k - 1] = d
        obj[k - 1] = o
        src[k - 1] = s
    return dual, source, obj, src
