"""Gramian (Lyapunov) backend for the H2 and frequency-limited H2 norms.

Reference path used to cross-check the modal formula. Every call
recomputes what it needs; nothing is cached between calls.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .complexfn import principal_log
from .errors import (DegenerateSpectrumError, NonzeroFeedthroughError,
                     RealificationError, SingularPencilError,
                     SingularShiftError, SolverError, UnstableModelError)
from .model import GAP_TOL, classify_poles, spectral_radius
from .spectral import GRAMIAN, NormResult

__all__ = ['GramianPair', 'lyap_solve', 'lyap_residual', 's_omega',
           'gramians', 'freq_limited_gramians', 'h2_gramian', 'h2w_gramian']

PENCIL_TOL = 1e-10
RESID_TOL = 1e-10
H2_TRACE_TOL = 1e-10
H2W_TRACE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class GramianPair:
    P: np.ndarray
    Q: np.ndarray
    residual_P: float
    residual_Q: float


def _schur_eigenvalues(T):
    """Eigenvalues from the 1x1 / 2x2 diagonal blocks of a real Schur form."""
    n = T.shape[0]
    lam = []
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            lam.extend(np.linalg.eigvals(T[i:i + 2, i:i + 2]))
            i += 2
        else:
            lam.append(T[i, i])
            i += 1
    return np.array(lam, dtype=complex)


def lyap_residual(A, X, RHS):
    return float(np.linalg.norm(A @ X + X @ A.conj().T + RHS))


def lyap_solve(A, RHS, check=True):
    """Solve ``A X + X A^T + RHS = 0`` (Bartels-Stewart).

    ``A`` is reduced to real Schur form ``A = Z T Z^T``; the transformed
    equation ``T Y + Y T^T = -Z^T RHS Z`` is solved by the LAPACK
    quasi-triangular Sylvester kernel (``trsyl``) and mapped back.

    Parameters
    ----------
    A : (n, n) real array
    RHS : (n, n) array
        Symmetric for a symmetric solution.
    check : bool
        Verify the residual bound ``||A X + X A^T + RHS||_F <=
        1e-10 (||A||_F ||X||_F + ||RHS||_F)``.

    Raises
    ------
    SingularPencilError
        If ``l_i + l_k`` is numerically zero for some pair of eigenvalues.
    SolverError
        If the residual check fails.
    """
    A = np.asarray(A, dtype=float)
    RHS = np.asarray(RHS)
    T, Z = scipy.linalg.schur(A, output='real', check_finite=False)
    lam = _schur_eigenvalues(T)
    sep = np.min(np.abs(lam[:, None] + lam[None, :]))
    if sep <= PENCIL_TOL * max(1.0, spectral_radius(lam)):
        raise SingularPencilError(
            f"Lyapunov operator singular: min |l_i + l_k| = {sep:.3e}")
    F = Z.T @ RHS @ Z
    if np.iscomplexobj(F):
        trsyl, = lapack.get_lapack_funcs(('trsyl',), (T.astype(complex),))
        Tc = T.astype(complex)
        Y, scale, info = trsyl(Tc, Tc, -F, tranb='C')
    else:
        trsyl, = lapack.get_lapack_funcs(('trsyl',), (T,))
        Y, scale, info = trsyl(T, T, -F, tranb='T')
    if info < 0:
        raise SolverError(f"trsyl argument error (info={info})")
    X = Z @ (Y * scale) @ Z.T
    if np.isrealobj(X) and np.array_equal(RHS, RHS.T):
        X = 0.5 * (X + X.T)
    if check:
        r = lyap_residual(A, X, RHS)
        bound = RESID_TOL * (np.linalg.norm(A) * np.linalg.norm(X)
                             + np.linalg.norm(RHS))
        if r > bound:
            raise SolverError(f"Lyapunov residual {r:.3e} > {bound:.3e}")
    return X


def s_omega(A, omega):
    """``(1/2pi) int_{-w}^{w} (j nu I - A)^{-1} d nu`` as a matrix function.

    Evaluated as ``(j/2pi) logm((A + jwI)(A - jwI)^{-1})`` through the
    eigendecomposition of ``A`` with principal scalar logarithms; valid for
    diagonalisable ``A`` with no eigenvalue at ``+-jw``.
    Returns a complex array (its imaginary part vanishes for real ``A``).
    """
    return _s_omega(A, omega)[0]


def _s_omega(A, omega):
    A = np.asarray(A, dtype=float)
    omega = float(omega)
    lam, V = scipy.linalg.eig(A, check_finite=False)
    if omega == 0.0:
        return np.zeros(A.shape, dtype=complex), lam
    rho = max(1.0, spectral_radius(lam))
    d = np.abs(lam[:, None] - lam[None, :])
    d[np.diag_indices_from(d)] = np.inf
    if len(lam) > 1 and d.min() < GAP_TOL * rho:
        raise DegenerateSpectrumError("matrix logarithm needs simple poles")
    up, dn = lam + 1j * omega, lam - 1j * omega
    if np.min(np.abs(np.concatenate([up, dn]))) <= 1e-12 * rho:
        raise SingularShiftError(f"A has an eigenvalue at +-j{omega}")
    f = 1j / (2 * np.pi) * principal_log(up / dn)
    return np.linalg.solve(V.T, (V * f).T).T, lam


def _hermitian_real(W):
    """Real symmetric part of a Hermitian matrix; asserts a small imag part."""
    W = 0.5 * (W + W.conj().T)
    scale = max(np.linalg.norm(W), np.finfo(float).tiny)
    im = np.linalg.norm(W.imag)
    if im > 1e-10 * scale:
        raise RealificationError(
            f"weighting matrix imaginary part {im:.3e} (norm {scale:.3e})")
    return W.real


def _require_stable_proper(model):
    if not model.strictly_proper:
        raise NonzeroFeedthroughError("H2 norm needs D = 0")


def _check_stable(lam):
    cls = classify_poles(lam)
    if cls.antistable or cls.imaginary:
        raise UnstableModelError("Gramian backend requires a stable model")


def gramians(model):
    """Infinite-horizon reachability/observability Gramians."""
    BB = model.B @ model.B.T
    CC = model.C.T @ model.C
    P = lyap_solve(model.A, BB)
    Q = lyap_solve(model.A.T, CC)
    return GramianPair(P, Q, lyap_residual(model.A, P, BB),
                       lyap_residual(model.A.T, Q, CC))


def freq_limited_gramians(model, omega):
    """Frequency-limited Gramians over ``[-omega, omega]``.

    Solves ``A P + P A^T + W_c = 0`` and ``A^T Q + Q A + W_o = 0`` with
    ``W_c = S BB^T + BB^T S^*`` and ``W_o = S^* C^T C + C^T C S``.
    """
    S, lam = _s_omega(model.A, omega)
    _check_stable(lam)
    BB = model.B @ model.B.T
    CC = model.C.T @ model.C
    Wc = _hermitian_real(S @ BB + BB @ S.conj().T)
    Wo = _hermitian_real(S.conj().T @ CC + CC @ S)
    P = lyap_solve(model.A, Wc)
    Q = lyap_solve(model.A.T, Wo)
    return GramianPair(P, Q, lyap_residual(model.A, P, Wc),
                       lyap_residual(model.A.T, Q, Wo))


def _trace_pair(model, G, tol):
    tq = float(np.trace(model.B.T @ G.Q @ model.B))
    tp = float(np.trace(model.C @ G.P @ model.C.T))
    scale = max(abs(tq), abs(tp))
    if abs(tq - tp) > tol * scale:
        raise SolverError(f"dual trace forms disagree: {tq!r} vs {tp!r}")
    val = 0.5 * (tq + tp)
    return max(val, 0.0), abs(tq - tp)


def h2_gramian(model):
    """H2 norm as ``tr(B^T Q B) = tr(C P C^T)`` (mean of both)."""
    t0 = time.perf_counter()
    _require_stable_proper(model)
    _check_stable(scipy.linalg.eigvals(model.A, check_finite=False))
    val, _ = _trace_pair(model, gramians(model), H2_TRACE_TOL)
    return NormResult(val, 0.0, GRAMIAN, time.perf_counter() - t0)


def h2w_gramian(model, omega):
    """Frequency-limited H2 norm over ``[0, omega]`` from the
    frequency-limited Gramians."""
    t0 = time.perf_counter()
    _require_stable_proper(model)
    omega = float(omega)
    if not (omega >= 0.0 and math.isfinite(omega)):
        raise ValueError(f"omega must be finite and >= 0, got {omega}")
    val, _ = _trace_pair(model, freq_limited_gramians(model, omega),
                         H2W_TRACE_TOL)
    return NormResult(val, 0.0, GRAMIAN, time.perf_counter() - t0)
