"""Principal-branch complex elementary functions.

Branch conventions
------------------
``principal_arg`` takes values in ``(-pi, pi]``; the negative real axis
maps to ``+pi`` regardless of the sign of a zero imaginary part. All other
functions inherit their cuts from it.

Two arctangent formulations are provided::

    V1:  atan(z) = (log(1 + jz) - log(1 - jz)) / 2j
    V2:  atan(z) = log((1 + jz) / (1 - jz)) / 2j

They coincide except on the ray ``Re z = 0, Im z < -1``, where
``V2 = V1 + pi``. The norm engine uses V1.

All functions accept Python scalars or numpy arrays and broadcast.
"""
import numpy as np

__all__ = ['V1', 'V2', 'principal_arg', 'principal_log', 'atan_principal',
           'acot_principal']

V1 = 'V1'
V2 = 'V2'


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _unwrap(out, z):
    if np.ndim(out) == 0 and np.ndim(z) == 0:
        return out.item() if hasattr(out, 'item') else out
    return out


def principal_arg(z):
    """Principal argument in ``(-pi, pi]``.

    Raises
    ------
    ValueError
        If any ``z`` is zero.
    """
    zc = _as_complex(z)
    if np.any(zc == 0):
        raise ValueError("principal_arg is undefined at z = 0")
    # -0.0 + 0.0 == +0.0: keeps the negative real axis on +pi.
    out = np.arctan2(zc.imag + 0.0, zc.real)
    return _unwrap(out, z)


def principal_log(z):
    """``ln|z| + j arg(z)`` with the principal argument."""
    zc = _as_complex(z)
    if np.any(zc == 0):
        raise ValueError("principal_log is undefined at z = 0")
    out = np.log(np.abs(zc)) + 1j * np.arctan2(zc.imag + 0.0, zc.real)
    return _unwrap(out, z)


def _check_variant(variant):
    if variant not in (V1, V2):
        raise ValueError(f"unknown arctangent variant {variant!r}")


def atan_principal(z, variant=V1):
    """Principal complex arctangent, formulation ``V1`` or ``V2``.

    Raises
    ------
    ValueError
        At the logarithmic singularities ``z = +j`` and ``z = -j``.
    """
    _check_variant(variant)
    zc = _as_complex(z)
    jz = 1j * zc
    # Build 1 +/- jz componentwise so signed zeros in jz never leak into
    # the imaginary part of a real-axis argument.
    up = (1.0 + jz.real) + 1j * (jz.imag + 0.0)
    dn = (1.0 - jz.real) + 1j * (0.0 - jz.imag + 0.0)
    if np.any(up == 0) or np.any(dn == 0):
        raise ValueError("atan is singular at z = +j and z = -j")
    if variant == V1:
        out = (principal_log(up) - principal_log(dn)) / 2j
    else:
        out = principal_log(up / dn) / 2j
    return _unwrap(np.asarray(out), z)


def acot_principal(z, variant=V1):
    """Principal arccotangent ``atan(1/z)``.

    Defined for ``z`` outside ``{0, +j, -j}``. With ``V1`` the limit as
    ``z -> 0`` is ``+pi/2`` from ``Re z >= 0`` and ``-pi/2`` from
    ``Re z < 0``.
    """
    _check_variant(variant)
    zc = _as_complex(z)
    if np.any(zc == 0):
        raise ValueError("acot is undefined at z = 0")
    return atan_principal(_unwrap(1.0 / zc, z), variant)
