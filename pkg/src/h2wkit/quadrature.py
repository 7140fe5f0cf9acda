"""Direct quadrature of the band-limited H2 integral.

Ground truth for the other two backends: only transfer-function
evaluations are used, never residues or Gramians.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import BandViolationError, NonConvergenceError, SingularShiftError
from .model import FrequencyBand, default_imag_tol, eval_transfer
from .spectral import QUADRATURE, NormResult

__all__ = ['QuadratureReport', 'integrand', 'integrand_batch',
           'integrate_band', 'h2w_quadrature']

# 15-point Kronrod nodes on [0, 1] (symmetric) with embedded 7-point Gauss.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168969963240178215380,
    0.279705391489276667901467771424,
    0.381830050505118944950369775489,
    0.417959183673469387755102040816,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WK15 = np.concatenate([_WK[:-1], _WK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[13, 11, 9]] = _WG[:3]
_WG15[7] = _WG[3]

LIGHT_DAMPING = 0.1
MAX_EVALS = 2_000_000


@dataclass(frozen=True)
class QuadratureReport:
    value: float
    error: float
    evaluations: int
    panels: int


def integrand(model, nu):
    """``||H(j nu)||_F^2``."""
    H = eval_transfer(model, 1j * nu)
    return float(np.sum(H.real ** 2 + H.imag ** 2))


def integrand_batch(model, nus):
    """Vectorised :func:`integrand` over an array of frequencies."""
    nus = np.asarray(nus, dtype=float)
    n = model.n
    M = 1j * nus[:, None, None] * np.eye(n) - model.A
    try:
        X = np.linalg.solve(M, np.broadcast_to(model.B, (len(nus),) + model.B.shape))
    except np.linalg.LinAlgError as exc:
        raise SingularShiftError("pole on the integration path") from exc
    H = model.C @ X + model.D
    return np.sum(H.real ** 2 + H.imag ** 2, axis=(1, 2))


def _panel(model, a, b):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    f = integrand_batch(model, c + h * _NODES)
    k = h * float(_WK15 @ f)
    g = h * float(_WG15 @ f)
    return k, abs(k - g)


def _breakpoints(lam, lo, hi):
    pts = {lo, hi}
    for z in lam:
        r = abs(z)
        if r > 0 and abs(z.real) / r < LIGHT_DAMPING and lo < abs(z.imag) < hi:
            pts.add(abs(z.imag))
    return sorted(pts)


def integrate_band(model, band, tol=1e-9, max_evals=MAX_EVALS):
    """Adaptive Gauss-Kronrod (7/15) integration over a band.

    Integrates ``(1/pi) int_{lo}^{hi} ||H(j nu)||_F^2 d nu``, which equals the
    two-sided integral ``(1/2pi) int`` over ``[-hi,-lo] U [lo,hi]`` because
    the integrand is even for real models. Panels are bisected worst-first
    until the summed error estimate is at most ``tol * max(1, value)``.
    Lightly damped poles inside the band force a panel edge at their
    resonance frequency.

    Raises
    ------
    BandViolationError
        A pole lies on ``j[-hi, hi]``.
    NonConvergenceError
        The error estimate stalls above the target.
    """
    if not isinstance(band, FrequencyBand):
        band = FrequencyBand.upto(band)
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = band.omega_lo, band.omega_hi
    lam = np.linalg.eigvals(model.A)
    itol = default_imag_tol(lam)
    on_axis = [complex(z) for z in lam if abs(z.real) <= itol and abs(z.imag) <= hi]
    if on_axis:
        raise BandViolationError(
            f"pole(s) on the imaginary axis inside the band: {on_axis}",
            on_axis)

    scale = 1.0 / np.pi
    heap = []
    evals = 0
    pts = _breakpoints(lam, lo, hi)
    for a, b in zip(pts[:-1], pts[1:]):
        k, e = _panel(model, a, b)
        evals += 15
        heapq.heappush(heap, (-e, a, b, k))
    while True:
        total = scale * math.fsum(p[3] for p in heap)
        err = scale * math.fsum(-p[0] for p in heap)
        if err <= tol * max(1.0, abs(total)):
            return QuadratureReport(total, err, evals, len(heap))
        if evals >= max_evals:
            raise NonConvergenceError(
                f"quadrature stalled: error {err:.3e} after {evals} "
                "evaluations")
        e, a, b, _ = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if not a < m < b:
            raise NonConvergenceError(
                f"quadrature stalled at nu = {m}: panel cannot be split")
        for lo_, hi_ in ((a, m), (m, b)):
            k, e2 = _panel(model, lo_, hi_)
            heapq.heappush(heap, (-e2, lo_, hi_, k))
        evals += 30


def h2w_quadrature(model, band, tol=1e-9):
    """Band-limited H2 norm by adaptive quadrature of its definition."""
    t0 = time.perf_counter()
    rep = integrate_band(model, band, tol)
    lam = np.linalg.eigvals(model.A)
    physical = bool(np.all(lam.real < 0))
    return NormResult(max(rep.value, 0.0), 0.0, QUADRATURE,
                      time.perf_counter() - t0, physical, rep.error)
