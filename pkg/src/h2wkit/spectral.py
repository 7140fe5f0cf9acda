"""H2 and frequency-limited H2 norms from poles and residues.

With simple poles ``l_i`` and residues ``phi_i`` the band-limited norm
over ``[0, w]`` is::

    ||H||^2_w = sum_{i,k} a_ik + (w/pi) tr(D D^T)
                - (2/pi) sum_i tr(phi_i D^T) atan(w / l_i)

    a_ik = (2/pi) tr(phi_i phi_k^T) / (l_i + l_k) * atan(w / l_i)   l_i + l_k != 0
    a_ik = -(1/pi) w tr(phi_i phi_k^T) / (w^2 + l_i^2)            otherwise

valid as long as ``w`` stays below every purely imaginary pole. ``atan`` is
the principal arctangent in its two-logarithm form
(:func:`h2wkit.complexfn.atan_principal` with ``V1``).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .complexfn import V1, atan_principal
from .errors import (BandViolationError, NonzeroFeedthroughError,
                     RealificationError, UnstableModelError)
from .model import (FrequencyBand, classify_poles, eval_transfer,
                    spectral_radius, validate_band)

__all__ = ['NormResult', 'LimitResult', 'h2_spectral', 'h2w_spectral',
           'h2w_spectral_corollary', 'h2w_band', 'h2w_limit',
           'modal_weights', 'SpectralEvaluator']

SPECTRAL, GRAMIAN, QUADRATURE = 'spectral', 'gramian', 'quadrature'

PAIR_TOL = 1e-10
REAL_TOL = 1e-10


@dataclass(frozen=True)
class NormResult:
    """Squared norm and diagnostics from one backend.

    ``physical`` is False for models with unstable poles: the integral is
    still well defined but is not the limit of an H2 norm.
    """
    value_sq: float
    imag_residual: float
    backend: str
    elapsed: float = 0.0
    physical: bool = True
    error_estimate: float = 0.0

    @property
    def value(self):
        return math.sqrt(self.value_sq)


@dataclass(frozen=True)
class LimitResult:
    regime: str
    value_sq: float

    @property
    def finite(self):
        return math.isfinite(self.value_sq)

    @property
    def value(self):
        return math.sqrt(self.value_sq)


def _csum(terms):
    """Compensated sum of a complex array."""
    terms = np.ravel(terms)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _realify(total, backend, elapsed, physical=True, tol=REAL_TOL):
    resid = abs(total.imag)
    if resid > tol * max(1.0, abs(total.real)):
        raise RealificationError(
            f"imaginary residue {resid:.3e} exceeds tolerance "
            f"(value {total.real:.6e})")
    return NormResult(max(total.real, 0.0), resid, backend, elapsed, physical)


def _flat(spec):
    return spec.residues.reshape(spec.n, -1)


def _require_strictly_proper(D):
    if D is not None and np.any(D):
        raise NonzeroFeedthroughError(
            "H2 norm is infinite for a model with nonzero D")


def h2_spectral(spec, model):
    """H2 norm as ``Re tr sum_i phi_i H(-l_i)^T``.

    Raises
    ------
    NonzeroFeedthroughError, UnstableModelError
    """
    t0 = time.perf_counter()
    _require_strictly_proper(model.D)
    cls = classify_poles(spec.eigenvalues)
    if cls.antistable or cls.imaginary:
        raise UnstableModelError("H2 norm requires all poles stable")
    terms = [np.sum(phi * eval_transfer(model, -lam))
             for lam, phi in zip(spec.eigenvalues, spec.residues)]
    return _realify(_csum(np.array(terms)), SPECTRAL,
                    time.perf_counter() - t0)


def _pair_mask(lam, pair_tol):
    thr = pair_tol * max(1.0, spectral_radius(lam))
    return np.abs(lam[:, None] + lam[None, :]) <= thr


def _modal_terms(lam, G, mask, Dflat, DD, omega):
    """All complex terms of the band-limited sum at one frequency."""
    if omega == 0.0:
        return np.zeros(1, dtype=complex)
    at = atan_principal(omega / lam, V1)
    with np.errstate(divide='ignore', invalid='ignore'):
        main = (2.0 / np.pi) * G / (lam[:, None] + lam[None, :]) * at[:, None]
    if mask.any():
        deg = -(1.0 / np.pi) * omega * G / (omega ** 2 + lam[:, None] ** 2)
        main = np.where(mask, deg, main)
    parts = [main.ravel()]
    if Dflat is not None:
        parts.append(np.array([omega / np.pi * DD]))
        parts.append(-(2.0 / np.pi) * Dflat * at)
    return np.concatenate(parts)


class SpectralEvaluator:
    """Band-limited norm of one modal decomposition at many frequencies.

    Computes the ``tr(phi_i phi_k^T)`` Gram matrix once; each frequency
    then costs ``O(n^2)``.
    """

    def __init__(self, spec, D=None, pair_tol=PAIR_TOL, imag_tol=None):
        self.spec = spec
        lam = np.asarray(spec.eigenvalues)
        Phi = _flat(spec)
        self._lam = lam
        self._G = Phi @ Phi.T
        self._mask = _pair_mask(lam, pair_tol)
        if D is not None and np.any(D):
            D = np.asarray(D, dtype=float)
            self._Dflat = Phi @ D.ravel()
            self._DD = float(np.sum(D * D))
        else:
            self._Dflat, self._DD = None, 0.0
        self.classification = classify_poles(lam, imag_tol)
        self._imag_tol = imag_tol

    @property
    def physical(self):
        return self.classification.regime == 'stable'

    def value(self, omega):
        t0 = time.perf_counter()
        omega = float(omega)
        if not omega >= 0.0 or not math.isfinite(omega):
            raise ValueError(f"omega must be finite and >= 0, got {omega}")
        report = validate_band(self.classification, self._lam, omega)
        if not report:
            raise BandViolationError(
                f"omega = {omega} is not below the smallest imaginary pole "
                f"magnitude {report.bound}", report.offending)
        total = _csum(_modal_terms(self._lam, self._G, self._mask,
                                     self._Dflat, self._DD, omega))
        return _realify(total, SPECTRAL, time.perf_counter() - t0,
                        self.physical)

    def band(self, band):
        return h2w_band(self, band)


def h2w_spectral(spec, D, omega, pair_tol=PAIR_TOL, imag_tol=None):
    """Frequency-limited H2 norm over ``[0, omega]`` from poles/residues.

    Parameters
    ----------
    spec : SpectralData
    D : array_like or None
        Feedthrough matrix; ``None`` means zero.
    omega : float
        Upper frequency bound (rad/s), below every purely imaginary pole.
    pair_tol : float
        ``|l_i + l_k| <= pair_tol * max(1, rho)`` selects the second branch.

    Raises
    ------
    BandViolationError
        When ``omega`` reaches a purely imaginary pole.
    """
    return SpectralEvaluator(spec, D, pair_tol, imag_tol).value(omega)


def modal_weights(spec, omega):
    """Per-mode weights ``-(2/pi) atan(omega / l_i)``."""
    if omega == 0:
        return np.zeros(spec.n, dtype=complex)
    return -(2.0 / np.pi) * atan_principal(omega / spec.eigenvalues, V1)


def h2w_spectral_corollary(spec, omega, model):
    """Stable strictly proper shortcut:
    ``Re tr sum_i phi_i H(-l_i)^T * (-(2/pi) atan(omega / l_i))``.

    ``H(-l_i)`` is evaluated from the state-space matrices, not from the
    residues, so this path shares nothing with :func:`h2w_spectral` beyond
    the modal decomposition.
    """
    t0 = time.perf_counter()
    _require_strictly_proper(model.D)
    cls = classify_poles(spec.eigenvalues)
    if cls.antistable or cls.imaginary:
        raise UnstableModelError("corollary form requires all poles stable")
    w = modal_weights(spec, float(omega))
    terms = np.array([np.sum(phi * eval_transfer(model, -lam))
                      for lam, phi in zip(spec.eigenvalues, spec.residues)])
    return _realify(_csum(terms * w), SPECTRAL, time.perf_counter() - t0)


def h2w_band(spec_or_evaluator, band, D=None):
    """Norm over ``[omega_lo, omega_hi]`` as a difference of two bounds.

    A negative difference within realification tolerance is clamped to 0.
    """
    t0 = time.perf_counter()
    ev = spec_or_evaluator
    if not isinstance(ev, SpectralEvaluator):
        ev = SpectralEvaluator(ev, D)
    if not isinstance(band, FrequencyBand):
        band = FrequencyBand(*band)
    hi = ev.value(band.omega_hi)
    lo = ev.value(band.omega_lo)
    diff = hi.value_sq - lo.value_sq
    resid = hi.imag_residual + lo.imag_residual
    if diff < 0.0:
        if -diff > REAL_TOL * max(1.0, hi.value_sq):
            raise RealificationError(f"negative band norm {diff:.3e}")
        diff = 0.0
    return NormResult(diff, resid, SPECTRAL, time.perf_counter() - t0,
                      hi.physical)


def h2w_limit(spec, classification=None, pair_tol=PAIR_TOL):
    """Limit of the band-limited norm as ``omega -> inf`` (D = 0 assumed).

    Returns
    -------
    LimitResult
        ``regime`` is ``'stable'`` (limit is the H2 norm), ``'unstable'``
        (finite, stable minus antistable modal sums) or ``'imaginary'``
        (``value_sq = inf``).
    """
    lam = np.asarray(spec.eigenvalues)
    if classification is None:
        classification = classify_poles(lam)
    regime = classification.regime
    if regime == 'imaginary':
        return LimitResult(regime, math.inf)
    Phi = _flat(spec)
    G = Phi @ Phi.T
    mask = _pair_mask(lam, pair_tol)
    # Pairs with l_i + l_k = 0 carry a w/(w^2 + l^2) factor and vanish.
    with np.errstate(divide='ignore', invalid='ignore'):
        T = np.where(mask, 0.0, G / -(lam[:, None] + lam[None, :]))
    sign = np.zeros(len(lam))
    sign[list(classification.stable)] = 1.0
    sign[list(classification.antistable)] = -1.0
    total = _csum(T * sign[:, None])
    if abs(total.imag) > REAL_TOL * max(1.0, abs(total.real)):
        raise RealificationError(
            f"imaginary residue {abs(total.imag):.3e} in limit")
    return LimitResult(regime, max(total.real, 0.0))
