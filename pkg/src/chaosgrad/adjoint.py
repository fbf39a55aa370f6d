"""Backward adjoint sweep: dual basis, divergence source, particular solutions.

The dual basis is pulled back with a duality-preserving renormalization at
segment interfaces, so that dual^T basis stays the identity at every step;
that removes all determinant factors from the divergence formulas. The two
particular (inhomogeneous) solutions are driven by the objective gradient and
by the divergence source respectively, and have their span component removed
at each interface so they stay bounded while the affine space they represent
stays continuous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import NumericsError
from .orbit import Orbit
from .systems import MapSystem
from .tangent import TangentData

_COND_LIMIT = 1e12
_DUALITY_LIMIT = 1e-6


@dataclass
class AdjointData:
    """Per-step adjoint quantities and per-segment least-squares moments."""

    dual: np.ndarray          # (A, N+1, dim, u) adjoint basis, dual to the tangent basis
    source: np.ndarray        # (A, N, dim) divergence source covector (n = 0..N-1)
    obj_part: np.ndarray      # (A, N+1, dim) particular solution, objective gradient source
    src_part: np.ndarray      # (A, N+1, dim) particular solution, divergence source
    obj_shift: np.ndarray     # (A, u) span coefficients removed from obj_part at (a, 0)
    src_shift: np.ndarray     # (A, u) same for src_part
    gram_moment: np.ndarray   # (A, u, u) sampled sum of dual^T dual over each segment
    obj_moment: np.ndarray    # (A, u) sampled sum of dual^T obj_part
    src_moment: np.ndarray    # (A, u) sampled sum of dual^T src_part
    duality_max: float        # max over steps of ||dual^T basis - I||_inf


def terminal_dual(q_end: np.ndarray, r_end: np.ndarray) -> np.ndarray:
    """Terminal dual basis q r^{-T}, exactly dual to the factored basis q r."""
    if q_end.shape[1] == 0:
        return np.empty_like(q_end)
    if np.linalg.cond(r_end) > _COND_LIMIT:
        raise NumericsError("ill-conditioned terminal QR factor")
    return solve_triangular(r_end, q_end.T, lower=False).T


def divergence_source(system: MapSystem, gamma, x_prev, dual_next, basis_prev):
    """Second derivative of the map contracted with the (dual, basis) pairs.

    Under the duality condition this is the unstable divergence of the
    pushforward with no determinant normalization, the source term of the
    second shadowing solve.
    """
    return system.hessian_pair_sum(x_prev, gamma, dual_next, basis_prev)


def _duality_deviation(dual_seg, basis_seg):
    prod = np.einsum("nmu,nmv->nuv", dual_seg, basis_seg)
    prod -= np.eye(prod.shape[1])[None]
    return float(np.abs(prod).sum(axis=2).max()) if prod.size else 0.0


def run_adjoint(orbit: Orbit, tangent: TangentData, system: MapSystem, gamma,
                moment_stride: int = 1) -> AdjointData:
    """Backward pass over all segments (procedure after the tangent sweep).

    Interface rules: the dual basis is renormalized through the inverse
    transpose of its cross product with the incoming tangent basis (the
    roundoff-safe form), and the particular solutions have their dual-span
    component removed, recorded in the shift vectors.
    """
    m, u = system.dim, system.unstable_dim
    a, n = orbit.n_seg, orbit.seg_len

    dual = np.empty((a, n + 1, m, u))
    source = np.empty((a, n, m))
    obj_part = np.empty((a, n + 1, m))
    src_part = np.empty((a, n + 1, m))
    obj_shift = np.zeros((a, u))
    src_shift = np.zeros((a, u))
    gram_moment = np.zeros((a, u, u))
    obj_moment = np.zeros((a, u))
    src_moment = np.zeros((a, u))

    grads = system.objective_gradients(orbit.main_states())
    sampled = np.arange(moment_stride, n + 1, moment_stride)

    dual_end = terminal_dual(tangent.q[a - 1], tangent.r[a - 1]) if u else np.empty((m, 0))
    obj_end = np.zeros(m)
    src_end = np.zeros(m)
    duality_max = 0.0

    for seg in range(a - 1, -1, -1):
        dphi = grads[seg * n:(seg + 1) * n]
        dual_seg, source_seg, obj_seg, src_seg = system.adjoint_segment(
            orbit.segment_states(seg), gamma, tangent.basis[seg],
            dual_end, obj_end, src_end, dphi)
        dual[seg] = dual_seg
        source[seg] = source_seg
        obj_part[seg] = obj_seg
        src_part[seg] = src_seg

        if u:
            dev = _duality_deviation(dual_seg, tangent.basis[seg])
            duality_max = max(duality_max, dev)
            if dev > _DUALITY_LIMIT:
                raise NumericsError(
                    f"duality drift {dev:.2e} across segment (segments too long?)",
                    segment=seg)

            gram_moment[seg] = np.einsum("nmu,nmv->uv", dual_seg[sampled], dual_seg[sampled])
            obj_moment[seg] = np.einsum("nmu,nm->u", dual_seg[sampled], obj_seg[sampled])
            src_moment[seg] = np.einsum("nmu,nm->u", dual_seg[sampled], src_seg[sampled])

            head = dual_seg[0]
            gram0 = head.T @ head
            if np.linalg.cond(gram0) > _COND_LIMIT:
                raise NumericsError("singular dual Gram matrix", segment=seg)
            factor = cho_factor(gram0)
            obj_shift[seg] = cho_solve(factor, head.T @ obj_seg[0])
            src_shift[seg] = cho_solve(factor, head.T @ src_seg[0])

            if seg > 0:
                cross = head.T @ tangent.basis[seg - 1, n]
                dual_end = np.linalg.solve(cross, head.T).T
                obj_end = obj_seg[0] - head @ obj_shift[seg]
                src_end = src_seg[0] - head @ src_shift[seg]
        elif seg > 0:
            obj_end = obj_seg[0]
            src_end = src_seg[0]

    return AdjointData(dual=dual, source=source, obj_part=obj_part, src_part=src_part,
                       obj_shift=obj_shift, src_shift=src_shift,
                       gram_moment=gram_moment, obj_moment=obj_moment,
                       src_moment=src_moment, duality_max=duality_max)
