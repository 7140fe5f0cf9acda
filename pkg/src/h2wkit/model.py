"""State-space models, transfer evaluation and modal (pole/residue) data."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrumError, SingularShiftError

__all__ = ['StateSpaceModel', 'SpectralData', 'FrequencyBand',
           'PoleClassification', 'BandReport', 'eval_transfer',
           'spectral_decompose', 'classify_poles', 'validate_band',
           'default_imag_tol', 'spectral_radius']

GAP_TOL = 1e-8
COND_TOL = 1e-12
IMAG_TOL = 1e-9


def _frozen(M):
    M = np.array(M, dtype=float, copy=True, ndmin=2)
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Continuous-time LTI model ``x' = Ax + Bu, y = Cx + Du``.

    Matrices are copied to read-only float arrays on construction.
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray | None = None
    name: str = ''

    def __post_init__(self):
        A, B, C = _frozen(self.A), _frozen(self.B), _frozen(self.C)
        n = A.shape[0]
        if A.shape != (n, n) or n < 1:
            raise ValueError(f"A must be square with n >= 1, got {A.shape}")
        if B.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got {B.shape}")
        if C.shape[1] != n:
            raise ValueError(f"C must have {n} columns, got {C.shape}")
        if self.D is None:
            D = _frozen(np.zeros((C.shape[0], B.shape[1])))
        else:
            D = _frozen(self.D)
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError(f"D must be {C.shape[0]}x{B.shape[1]}, "
                             f"got {D.shape}")
        for label, M in zip('ABCD', (A, B, C, D)):
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{label} has non-finite entries")
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'C', C)
        object.__setattr__(self, 'D', D)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def nu(self):
        return self.B.shape[1]

    @property
    def ny(self):
        return self.C.shape[0]

    @property
    def strictly_proper(self):
        return not np.any(self.D)

    def __eq__(self, other):
        if not isinstance(other, StateSpaceModel):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in 'ABCD')

    __hash__ = None

    def __repr__(self):
        return (f"StateSpaceModel(name={self.name!r}, n={self.n}, "
                f"nu={self.nu}, ny={self.ny})")


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Poles and residues of a transfer function with simple poles.

    ``residues[i]`` is the ``ny x nu`` coefficient of ``1/(s - eigenvalues[i])``.
    """
    eigenvalues: np.ndarray
    residues: np.ndarray
    min_pairwise_gap: float
    eigvec_condition: float

    @property
    def n(self):
        return len(self.eigenvalues)

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(self.eigenvalues)))

    def transfer(self, s, D=None):
        """Rebuild ``H(s) = sum_i residues[i] / (s - l_i) + D``."""
        H = np.tensordot(1.0 / (s - self.eigenvalues), self.residues, axes=1)
        return H if D is None else H + D


@dataclass(frozen=True)
class FrequencyBand:
    """Frequency interval ``[omega_lo, omega_hi]`` in rad/s."""
    omega_lo: float
    omega_hi: float

    def __post_init__(self):
        lo, hi = float(self.omega_lo), float(self.omega_hi)
        if not (0.0 <= lo < hi < np.inf):
            raise ValueError(f"invalid band [{lo}, {hi}]: "
                             "need 0 <= lo < hi < inf")
        object.__setattr__(self, 'omega_lo', lo)
        object.__setattr__(self, 'omega_hi', hi)

    @classmethod
    def upto(cls, omega):
        return cls(0.0, omega)


@dataclass(frozen=True)
class PoleClassification:
    stable: tuple
    antistable: tuple
    imaginary: tuple
    tol: float

    @property
    def regime(self):
        """``'stable'``, ``'unstable'`` or ``'imaginary'`` (limit taxonomy)."""
        if self.imaginary:
            return 'imaginary'
        if self.antistable:
            return 'unstable'
        return 'stable'


@dataclass(frozen=True)
class BandReport:
    ok: bool
    bound: float
    offending: tuple = field(default=())

    def __bool__(self):
        return self.ok


def spectral_radius(eigenvalues):
    return float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0


def default_imag_tol(eigenvalues):
    return IMAG_TOL * max(1.0, spectral_radius(eigenvalues))


def eval_transfer(model, s):
    """Evaluate ``H(s) = C (sI - A)^{-1} B + D`` by an LU solve.

    Raises
    ------
    SingularShiftError
        If ``sI - A`` is numerically singular.
    """
    n = model.n
    M = s * np.eye(n) - model.A
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularShiftError(f"sI - A singular at s = {s}") from exc
    diag = np.abs(np.diag(lu))
    if diag.min() <= n * np.finfo(float).eps * max(diag.max(), 1.0):
        raise SingularShiftError(f"sI - A singular at s = {s}")
    X = scipy.linalg.lu_solve((lu, piv), model.B.astype(M.dtype),
                              check_finite=False)
    return model.C @ X + model.D


def _min_gap(lam):
    if len(lam) < 2:
        return np.inf
    d = np.abs(lam[:, None] - lam[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def spectral_decompose(model, gap_tol=GAP_TOL, cond_tol=COND_TOL):
    """Eigenvalues and residues of ``H(s)`` from right/left eigenvectors.

    ``phi_i = C x_i y_i^* B / (y_i^* x_i)``, with ``x_i``, ``y_i`` the right
    and left eigenvectors of ``A`` from one QR-algorithm run, so the
    eigenvector matrix is never inverted.

    Parameters
    ----------
    model : StateSpaceModel
    gap_tol : float
        Poles closer than ``gap_tol * max(1, rho(A))`` are declared repeated.
    cond_tol : float
        An eigenpair with ``|y^* x| < cond_tol * |x| |y|`` is declared
        near-defective.

    Returns
    -------
    SpectralData

    Raises
    ------
    DegenerateSpectrumError
    """
    lam, Y, X = scipy.linalg.eig(model.A, left=True, right=True,
                                 check_finite=False)
    rho = spectral_radius(lam)
    gap = _min_gap(lam)
    if gap < gap_tol * max(1.0, rho):
        raise DegenerateSpectrumError(
            f"repeated poles: minimum eigenvalue gap {gap:.3e}")
    yx = np.einsum('ij,ij->j', Y.conj(), X)
    nx = np.linalg.norm(X, axis=0)
    ny = np.linalg.norm(Y, axis=0)
    if np.any(np.abs(yx) < cond_tol * nx * ny):
        raise DegenerateSpectrumError("near-defective eigenvector pair")
    cond = float(np.max(nx * ny / np.abs(yx)))
    CX = model.C @ X
    YB = Y.conj().T @ model.B
    residues = CX.T[:, :, None] * (YB / yx[:, None])[:, None, :]
    residues.setflags(write=False)
    lam.setflags(write=False)
    return SpectralData(lam, residues, gap, cond)


def classify_poles(eigenvalues, tol=None):
    """Split pole indices by the sign of their real part.

    ``|Re l| <= tol`` counts as purely imaginary. Indices are 0-based.
    """
    lam = np.asarray(eigenvalues, dtype=complex)
    if tol is None:
        tol = default_imag_tol(lam)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    re = lam.real
    idx = np.arange(len(lam))
    return PoleClassification(
        stable=tuple(int(i) for i in idx[re < -tol]),
        antistable=tuple(int(i) for i in idx[re > tol]),
        imaginary=tuple(int(i) for i in idx[np.abs(re) <= tol]),
        tol=float(tol))


def validate_band(classification, eigenvalues, band):
    """Check that the band stays below every purely imaginary pole.

    Returns a :class:`BandReport`; falsy when ``band.omega_hi`` reaches
    ``min |l|`` over the imaginary poles. ``offending`` lists those poles.
    """
    lam = np.asarray(eigenvalues, dtype=complex)
    hi = band.omega_hi if isinstance(band, FrequencyBand) else float(band)
    im = [lam[i] for i in classification.imaginary]
    if not im:
        return BandReport(True, np.inf)
    bound = float(min(abs(z) for z in im))
    if hi < bound:
        return BandReport(True, bound)
    bad = tuple(complex(z) for z in im if abs(z) <= hi)
    return BandReport(False, bound, bad)
