# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mirrors of the sweep kernels in ``chaosgrad.kernels.pure``.

Same function names, argument orders and return shapes as the pure module;
see there for the semantics. These loops are where virtually all of the run
time goes, so they stay free of Python objects inside the step loops.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fmod, sin

cnp.import_array()

cdef double TWO_PI = 6.283185307179586


cdef inline double _wrap_tau(double v) nogil:
    cdef double y = fmod(v, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    return y


cdef inline double _wrap_unit(double v) nogil:
    cdef double y = fmod(v, 1.0)
    if y < 0.0:
        y += 1.0
    return y


# ---------------------------------------------------------------------------
# solenoid family
# ---------------------------------------------------------------------------

def solenoid_step(x, double g1, double g2, noise=None):
    return solenoid_orbit(np.ascontiguousarray(x, dtype=np.float64), g1, g2, 1,
                          None if noise is None else noise.reshape(1, -1))[1]


def solenoid_orbit(double[::1] x0, double g1, double g2, Py_ssize_t steps, noise=None):
    cdef Py_ssize_t m = x0.shape[0]
    out_arr = np.empty((steps + 1, m))
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] nz
    cdef bint has_noise = noise is not None
    if has_noise:
        nz = np.ascontiguousarray(noise, dtype=np.float64)
    cdef Py_ssize_t k, j
    cdef double acc, x0v, coef, val
    for j in range(m):
        out[0, j] = x0[j]
    for k in range(steps):
        acc = 0.0
        for j in range(1, m):
            acc += cos(5.0 * out[k, j])
        x0v = out[k, 0]
        val = 0.05 * x0v + g1 + 0.1 * acc
        if has_noise:
            val += nz[k, 0]
        out[k + 1, 0] = val
        coef = g2 * (1.0 + x0v)
        for j in range(1, m):
            val = 2.0 * out[k, j] + coef * sin(2.0 * out[k, j])
            if has_noise:
                val += nz[k, j]
            out[k + 1, j] = _wrap_tau(val)
    return out_arr


def solenoid_tangent_segment(double[:, ::1] states, double g2, double[:, ::1] basis0):
    cdef Py_ssize_t n = states.shape[0] - 1
    cdef Py_ssize_t m = states.shape[1]
    cdef Py_ssize_t u = basis0.shape[1]
    out_arr = np.empty((n + 1, m, u))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t k, j, c
    cdef double x0v, coef, s5, s2, diag
    for j in range(m):
        for c in range(u):
            out[0, j, c] = basis0[j, c]
    for k in range(n):
        x0v = states[k, 0]
        coef = 2.0 * g2 * (1.0 + x0v)
        for c in range(u):
            out[k + 1, 0, c] = 0.05 * out[k, 0, c]
        for j in range(1, m):
            s5 = sin(5.0 * states[k, j])
            s2 = sin(2.0 * states[k, j])
            diag = 2.0 + coef * cos(2.0 * states[k, j])
            for c in range(u):
                out[k + 1, 0, c] += -0.5 * s5 * out[k, j, c]
                out[k + 1, j, c] = (g2 * s2) * out[k, 0, c] + diag * out[k, j, c]
    return out_arr


def solenoid_adjoint_segment(double[:, ::1] states, double g2, double[:, :, ::1] basis,
                             double[:, ::1] dual_end, double[::1] obj_end,
                             double[::1] src_end, double[:, ::1] dphi):
    cdef Py_ssize_t n = states.shape[0] - 1
    cdef Py_ssize_t m = states.shape[1]
    cdef Py_ssize_t u = dual_end.shape[1]
    dual_arr = np.empty((n + 1, m, u))
    source_arr = np.empty((n, m))
    obj_arr = np.empty((n + 1, m))
    src_arr = np.empty((n + 1, m))
    cdef double[:, :, ::1] dual = dual_arr
    cdef double[:, ::1] source = source_arr
    cdef double[:, ::1] obj = obj_arr
    cdef double[:, ::1] src = src_arr
    cdef Py_ssize_t k, j, c
    cdef double x0v, opx, s2, c2, s5, c5, diag, w0, wj
    cdef double pair, head, tail, acc_d, acc_o, acc_s
    for j in range(m):
        for c in range(u):
            dual[n, j, c] = dual_end[j, c]
        obj[n, j] = obj_end[j]
        src[n, j] = src_end[j]
    for k in range(n, 0, -1):
        x0v = states[k - 1, 0]
        opx = 1.0 + x0v
        w0 = 0.0
        # per-column accumulators for row 0 of the pulled-back quantities
        for c in range(u):
            dual[k - 1, 0, c] = 0.05 * dual[k, 0, c]
        acc_o = 0.05 * obj[k, 0]
        acc_s = 0.05 * src[k, 0]
        for j in range(1, m):
            s2 = sin(2.0 * states[k - 1, j])
            c2 = cos(2.0 * states[k - 1, j])
            s5 = sin(5.0 * states[k - 1, j])
            c5 = cos(5.0 * states[k - 1, j])
            diag = 2.0 + (2.0 * g2 * opx) * c2
            pair = 0.0
            head = 0.0
            tail = 0.0
            for c in range(u):
                pair += dual[k, j, c] * basis[k - 1, j, c]
                head += dual[k, 0, c] * basis[k - 1, j, c]
                tail += dual[k, j, c] * basis[k - 1, 0, c]
            w0 += (2.0 * g2) * c2 * pair
            wj = -2.5 * c5 * head + (2.0 * g2) * c2 * tail - (4.0 * g2 * opx) * s2 * pair
            source[k - 1, j] = wj
            for c in range(u):
                dual[k - 1, 0, c] += g2 * s2 * dual[k, j, c]
                dual[k - 1, j, c] = -0.5 * s5 * dual[k, 0, c] + diag * dual[k, j, c]
            acc_o += g2 * s2 * obj[k, j]
            acc_s += g2 * s2 * src[k, j]
            obj[k - 1, j] = -0.5 * s5 * obj[k, 0] + diag * obj[k, j] + dphi[k - 1, j]
            src[k - 1, j] = -0.5 * s5 * src[k, 0] + diag * src[k, j] + wj
        source[k - 1, 0] = w0
        obj[k - 1, 0] = acc_o + dphi[k - 1, 0]
        src[k - 1, 0] = acc_s + w0
    return dual_arr, source_arr, obj_arr, src_arr


# ---------------------------------------------------------------------------
# one-dimensional interval maps
# ---------------------------------------------------------------------------

def interval_step(double x, double curvature, double frequency, double g):
    cdef double tpf = TWO_PI * frequency
    cdef double val, xm
    if x <= 0.5:
        val = curvature * x * x + 2.0 * x + g * sin(tpf * x) / tpf
    else:
        xm = x - 1.0
        val = curvature * xm * xm + 2.0 - 2.0 * x - g * sin(tpf * x) / tpf
    return _wrap_unit(val)


def interval_orbit(double x0, double curvature, double frequency, double g, Py_ssize_t steps):
    out_arr = np.empty((steps + 1, 1))
    cdef double[:, ::1] out = out_arr
    cdef double tpf = TWO_PI * frequency
    cdef double x = x0, val, xm
    cdef Py_ssize_t k
    out[0, 0] = x
    for k in range(steps):
        if x <= 0.5:
            val = curvature * x * x + 2.0 * x + g * sin(tpf * x) / tpf
        else:
            xm = x - 1.0
            val = curvature * xm * xm + 2.0 - 2.0 * x - g * sin(tpf * x) / tpf
        x = _wrap_unit(val)
        out[k + 1, 0] = x
    return out_arr


def logistic_step(double x, double rate):
    return rate * x * (1.0 - x)


def logistic_orbit(double x0, double rate, Py_ssize_t steps):
    out_arr = np.empty((steps + 1, 1))
    cdef double[:, ::1] out = out_arr
    cdef double x = x0
    cdef Py_ssize_t k
    out[0, 0] = x
    for k in range(steps):
        x = rate * x * (1.0 - x)
        out[k + 1, 0] = x
    return out_arr


def scalar_tangent_segment(double[::1] fprime, double e0):
    cdef Py_ssize_t n = fprime.shape[0]
    out_arr = np.empty(n + 1)
    cdef double[::1] out = out_arr
    cdef double e = e0
    cdef Py_ssize_t k
    out[0] = e
    for k in range(n):
        e = fprime[k] * e
        out[k + 1] = e
    return out_arr


def scalar_adjoint_segment(double[::1] fprime, double[::1] fpp, double[::1] basis,
                           double[::1] dphi, double dual_end, double obj_end, double src_end):
    cdef Py_ssize_t n = fprime.shape[0]
    dual_arr = np.empty(n + 1)
    source_arr = np.empty(n)
    obj_arr = np.empty(n + 1)
    src_arr = np.empty(n + 1)
    cdef double[::1] dual = dual_arr
    cdef double[::1] source = source_arr
    cdef double[::1] obj = obj_arr
    cdef double[::1] src = src_arr
    cdef double d = dual_end, o = obj_end, s = src_end, fp, w
    cdef Py_ssize_t k
    dual[n] = d
    obj[n] = o
    src[n] = s
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
    return dual_arr, source_arr, obj_arr, src_arr
