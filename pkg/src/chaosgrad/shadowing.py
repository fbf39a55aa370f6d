"""Segment coefficients turning the particular adjoint solutions into the
bounded, continuous shadowing covectors.

Two variants: the default projection recursion (orthogonality at the orbit
start, then pushed through the interfaces) and a least-squares formulation
whose KKT system is solved through its block-tridiagonal Schur complement
with forward/backward chasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import NumericsError

_COND_LIMIT = 1e12


@dataclass
class ShadowingSolution:
    """Per-segment coefficients and the reconstructed shadowing covectors."""

    obj_coeff: np.ndarray    # (A, u)
    src_coeff: np.ndarray    # (A, u)
    obj_shadow: np.ndarray   # (A, N+1, dim)
    src_shadow: np.ndarray   # (A, N+1, dim)


def _check_r_conditioning(r_factors):
    for idx, r in enumerate(r_factors):
        if np.linalg.cond(r) > _COND_LIMIT:
            raise NumericsError("ill-conditioned interface QR factor", segment=idx)


def solve_projection(shifts: np.ndarray, r_factors: np.ndarray) -> np.ndarray:
    """Coefficient recursion: a_0 = -b_0, a_k = R_k^{-T} a_{k-1} - b_k.

    ``r_factors[k - 1]`` is the factor at the interface entering segment k.
    Equivalent to requiring orthogonality at the orbit start plus continuity
    of the reconstructed covector at every interface.
    """
    a, u = shifts.shape
    if u == 0:
        return np.zeros((a, 0))
    _check_r_conditioning(r_factors[:a - 1])
    out = np.empty_like(shifts)
    out[0] = -shifts[0]
    for k in range(1, a):
        out[k] = solve_triangular(r_factors[k - 1], out[k - 1], lower=False,
                                  trans="T") - shifts[k]
    return out


@dataclass
class KktSystem:
    """Least-squares data: quadratic blocks, interface factors, right sides.

    Minimizes sum_k (1/2 a_k^T C_k a_k + d_k^T a_k) subject to the interface
    continuity a_{k-1} = R_k^T (a_k + b_k). Solved via the Schur complement
    of the saddle-point system, a symmetric positive-definite block
    tridiagonal system in the multipliers.
    """

    gram: np.ndarray      # (A, u, u) C blocks
    moment: np.ndarray    # (A, u) d right-hand sides
    shifts: np.ndarray    # (A, u) b vectors (entry 0 unused by the constraints)
    r_factors: np.ndarray  # (A, u, u); r_factors[k-1] belongs to interface k

    def __post_init__(self):
        if self.gram.shape[0] < 2:
            raise ValueError("least-squares variant needs at least 2 segments")

    def _factors(self):
        out = []
        for idx, block in enumerate(self.gram):
            try:
                out.append(cho_factor(block))
            except np.linalg.LinAlgError:
                raise NumericsError("covariance block not positive definite",
                                    segment=idx) from None
        return out

    def schur_blocks(self):
        """Diagonal blocks E_k, off-diagonal blocks D_k and right side y."""
        a, u = self.moment.shape
        eye = np.eye(u)
        factors = self._factors()
        inv = [cho_solve(f, eye) for f in factors]
        cid = [cho_solve(f, d) for f, d in zip(factors, self.moment)]
        diag = np.empty((a - 1, u, u))
        off = np.empty((a - 1, u, u))
        rhs = np.empty((a - 1, u))
        for k in range(1, a):
            r = self.r_factors[k - 1]
            off[k - 1] = cho_solve(factors[k], r)                 # D_k = C_k^{-1} R_k
            diag[k - 1] = inv[k - 1] + r.T @ off[k - 1]           # E_k
            rhs[k - 1] = off[k - 1].T @ self.moment[k] - cid[k - 1] - r.T @ self.shifts[k]
        return diag, off, rhs

    def solve(self):
        """Chasing solve of the Schur system, then coefficient recovery.

        Returns (coefficients, multipliers); multipliers[k - 1] belongs to
        interface k.
        """
        a, u = self.moment.shape
        factors = self._factors()
        diag, off, rhs = self.schur_blocks()

        # forward chasing eliminates the sub-diagonal blocks in place
        for k in range(1, a - 1):
            # W = D E^{-1} via a solve against the symmetric pivot block
            w = np.linalg.solve(diag[k - 1], off[k - 1].T).T
            diag[k] = diag[k] - w @ off[k - 1].T
            rhs[k] = rhs[k] + w @ rhs[k - 1]

        lam = np.empty((a - 1, u))
        lam[a - 2] = np.linalg.solve(diag[a - 2], rhs[a - 2])
        for k in range(a - 3, -1, -1):
            lam[k] = np.linalg.solve(diag[k], off[k].T @ lam[k + 1] + rhs[k])

        coeff = np.empty((a, u))
        coeff[0] = cho_solve(factors[0], -self.moment[0] - lam[0])
        for k in range(1, a - 1):
            coeff[k] = cho_solve(
                factors[k],
                -self.moment[k] - lam[k] + self.r_factors[k - 1] @ lam[k - 1])
        coeff[a - 1] = cho_solve(
            factors[a - 1],
            -self.moment[a - 1] + self.r_factors[a - 2] @ lam[a - 2])
        return coeff, lam


def solve_least_squares(gram, moment, shifts, r_factors):
    """Segment coefficients minimizing the summed shadowing norm."""
    if moment.shape[1] == 0:
        return np.zeros_like(moment)
    coeff, _ = KktSystem(gram=gram, moment=moment, shifts=shifts,
                         r_factors=r_factors).solve()
    return coeff


def reconstruct_shadowing(particular: np.ndarray, dual: np.ndarray,
                          coeff: np.ndarray) -> np.ndarray:
    """Per-step covectors: particular solution plus dual basis times the
    segment coefficient."""
    if coeff.shape[1] == 0:
        return particular.copy()
    return particular + np.einsum("anmu,au->anm", dual, coeff)


def interface_residual(shadow: np.ndarray) -> float:
    """Largest relative mismatch of the covector across segment interfaces."""
    if shadow.shape[0] < 2:
        return 0.0
    gap = shadow[:-1, -1] - shadow[1:, 0]
    scale = np.linalg.norm(shadow, axis=2).max()
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(gap, axis=1).max() / scale)
