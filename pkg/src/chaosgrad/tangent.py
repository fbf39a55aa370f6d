"""Forward tangent sweep with QR renormalization at segment interfaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .orbit import Orbit
from .systems import MapSystem

_RANK_TOL = 1e-13


@dataclass
class TangentData:
    """Per-step unstable basis and per-interface QR factors.

    ``basis[a, n]`` is the dim x u tangent matrix at step (a, n); within a
    segment consecutive entries are related by the Jacobian, and
    ``basis[a, N] = q[a] @ r[a]`` with ``basis[a + 1, 0] = q[a]``. The
    factors at the end of segment ``a`` belong to interface ``a + 1``.
    """

    basis: np.ndarray   # (A, N+1, dim, u)
    q: np.ndarray       # (A, dim, u)
    r: np.ndarray       # (A, u, u)


def qr_interface(mat: np.ndarray, segment: int | None = None):
    """Reduced QR with the positive-diagonal sign convention.

    Aborts on rank deficiency: a vanishing diagonal signals a non-generic
    initialization or more requested directions than expanding ones.
    """
    if not np.isfinite(mat).all():
        raise NumericsError("tangent basis overflowed before the interface "
                            "(segments too long?)", segment=segment)
    q, r = np.linalg.qr(mat)
    sign = np.sign(np.diag(r)).copy()
    sign[sign == 0.0] = 1.0
    q = q * sign
    r = sign[:, None] * r
    scale = np.linalg.norm(mat)
    if np.any(np.abs(np.diag(r)) <= _RANK_TOL * scale):
        raise NumericsError("rank-deficient tangent basis at interface", segment=segment)
    return q, r


def run_tangent(orbit: Orbit, system: MapSystem, gamma, rng=None,
                init: np.ndarray | str = "random") -> TangentData:
    """Propagate u tangent solutions along the orbit, QR at each interface.

    ``init`` is the dim x u start matrix, drawn from ``rng`` by default;
    ``init="axes"`` uses the first u coordinate directions (deterministic
    fallback for tests).
    """
    m, u = system.dim, system.unstable_dim
    a, n = orbit.n_seg, orbit.seg_len
    basis = np.empty((a, n + 1, m, u))
    q_all = np.empty((a, m, u))
    r_all = np.empty((a, u, u))
    if u == 0:
        return TangentData(basis=basis, q=q_all, r=r_all)

    if isinstance(init, str):
        if init == "random":
            if rng is None:
                raise ValueError("random tangent initialization needs an rng")
            cur = rng.standard_normal((m, u))
        elif init == "axes":
            cur = np.eye(m, u)
        else:
            raise ValueError(f"unknown tangent init {init!r}")
    else:
        cur = np.asarray(init, dtype=float)
        if cur.shape != (m, u):
            raise ValueError(f"tangent init must have shape {(m, u)}")

    for seg in range(a):
        seg_basis = system.tangent_segment(orbit.segment_states(seg), gamma, cur)
        basis[seg] = seg_basis
        q, r = qr_interface(seg_basis[n], segment=seg)
        q_all[seg] = q
        r_all[seg] = r
        cur = q
    return TangentData(basis=basis, q=q_all, r=r_all)
