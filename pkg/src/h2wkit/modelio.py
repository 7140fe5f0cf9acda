"""Model files and seeded random model generation.

File format (UTF-8, LF)::

    h2wkit-model v1
    # comments start with '#'
    name lag1
    dims 1 1 1
    matrix A
    -1
    matrix B
    1
    matrix C
    1
    matrix D
    0

Each ``matrix`` block holds its rows, whitespace-separated, row-major.
Numbers are written with 17 significant digits so that a save/load round
trip is exact.
"""
from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ModelParseError
from .model import StateSpaceModel

__all__ = ['ModelFile', 'load_model', 'loads_model', 'save_model',
           'dumps_model', 'random_model', 'parse_spectrum_spec',
           'SpectrumSpec', 'FORMAT_MAGIC']

FORMAT_MAGIC = 'h2wkit-model'
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class ModelFile:
    format_version: int
    name: str
    n: int
    nu: int
    ny: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def to_model(self):
        return StateSpaceModel(self.A, self.B, self.C, self.D, name=self.name)


def _parse(text):
    lines = text.split('\n')
    it = ((i + 1, ln.split('#', 1)[0].strip()) for i, ln in enumerate(lines))
    it = [(no, ln) for no, ln in it if ln]
    if not it:
        raise ModelParseError("empty document", line=1)
    no, head = it[0]
    m = re.fullmatch(rf'{FORMAT_MAGIC}\s+v(\d+)', head)
    if m is None:
        raise ModelParseError(f"expected '{FORMAT_MAGIC} v1' header",
                              line=no, field='header')
    version = int(m.group(1))
    if version != FORMAT_VERSION:
        raise ModelParseError(f"unsupported format version {version}",
                              line=no, field='header')

    name, dims = '', None
    blocks = {}
    current = None
    for no, ln in it[1:]:
        key, _, rest = ln.partition(' ')
        rest = rest.strip()
        if key == 'name':
            name = rest
            current = None
        elif key == 'dims':
            try:
                dims = tuple(int(x) for x in rest.split())
            except ValueError:
                raise ModelParseError(f"bad dims {rest!r}", no, 'dims')
            if len(dims) != 3 or min(dims) < 1:
                raise ModelParseError("dims needs three positive integers",
                                      no, 'dims')
            current = None
        elif key == 'matrix':
            if rest not in ('A', 'B', 'C', 'D'):
                raise ModelParseError(f"unknown matrix {rest!r}", no, 'matrix')
            if rest in blocks:
                raise ModelParseError(f"duplicate matrix {rest}", no, rest)
            current = rest
            blocks[current] = []
        elif current is not None:
            try:
                row = [float(x) for x in ln.split()]
            except ValueError:
                raise ModelParseError(f"non-numeric entry in {ln!r}",
                                      no, current)
            blocks[current].append((no, row))
        else:
            raise ModelParseError(f"unexpected line {ln!r}", no)

    if dims is None:
        raise ModelParseError("missing dims line", field='dims')
    n, nu, ny = dims
    shapes = {'A': (n, n), 'B': (n, nu), 'C': (ny, n), 'D': (ny, nu)}
    mats = {}
    for key, (r, c) in shapes.items():
        rows = blocks.get(key)
        if rows is None:
            if key == 'D':
                mats[key] = np.zeros((r, c))
                continue
            raise ModelParseError(f"missing matrix {key}", field=key)
        if len(rows) != r:
            line = rows[-1][0] if rows else None
            raise DimensionMismatchError(
                f"matrix {key} has {len(rows)} rows, expected {r}", line, key)
        for no, row in rows:
            if len(row) != c:
                raise DimensionMismatchError(
                    f"matrix {key} row has {len(row)} entries, expected {c}",
                    no, key)
        mats[key] = np.array([row for _, row in rows], dtype=float)
    for key, M in mats.items():
        if not np.all(np.isfinite(M)):
            raise ModelParseError("non-finite entry", field=key)
    return ModelFile(version, name, n, nu, ny,
                     mats['A'], mats['B'], mats['C'], mats['D'])


def loads_model(text):
    """Parse a model document from a string."""
    if isinstance(text, bytes):
        text = text.decode('utf-8')
    return _parse(text).to_model()


def load_model(source):
    """Load a model from a path or a (binary or text) file object."""
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, 'rb') as fh:
                data = fh.read()
        except OSError as exc:
            raise ModelParseError(f"cannot read {source}: {exc}") from exc
    else:
        data = source.read()
    try:
        return loads_model(data)
    except UnicodeDecodeError as exc:
        raise ModelParseError(f"not UTF-8: {exc}") from exc


def _fmt(x):
    return format(float(x), '.17g')


def dumps_model(model, name=None):
    name = model.name if name is None else name
    out = io.StringIO()
    out.write(f'{FORMAT_MAGIC} v{FORMAT_VERSION}\n')
    if name:
        out.write(f'name {name}\n')
    out.write(f'dims {model.n} {model.nu} {model.ny}\n')
    for key in 'ABCD':
        out.write(f'matrix {key}\n')
        for row in getattr(model, key):
            out.write(' '.join(_fmt(x) for x in row) + '\n')
    return out.getvalue()


def save_model(model, dest, name=None):
    """Write a model to a path or a text file object."""
    text = dumps_model(model, name)
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, 'w', encoding='utf-8', newline='\n') as fh:
            fh.write(text)
    else:
        dest.write(text)


# -- random models -----------------------------------------------------------

@dataclass(frozen=True)
class SpectrumSpec:
    """Pole distribution of :func:`random_model`.

    ``kind`` is one of ``stable``, ``antistable``, ``mixed`` (``param`` is
    the probability that a pole or pair is unstable) and ``lightly_damped``
    (``param`` is the maximum damping ratio).
    """
    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in ('stable', 'antistable', 'mixed', 'lightly_damped'):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.kind == 'mixed':
            p = 0.5 if self.param is None else self.param
            if not 0.0 <= p <= 1.0:
                raise ValueError("mixed probability must be in [0, 1]")
            object.__setattr__(self, 'param', float(p))
        if self.kind == 'lightly_damped':
            z = 0.05 if self.param is None else self.param
            if not 0.0 < z < 1.0:
                raise ValueError("damping ratio must be in (0, 1)")
            object.__setattr__(self, 'param', float(z))


def parse_spectrum_spec(text):
    """``'stable'``, ``'mixed:0.3'``, ``'lightly_damped:0.05'`` and so on."""
    if isinstance(text, SpectrumSpec):
        return text
    kind, _, param = str(text).partition(':')
    return SpectrumSpec(kind.strip(), float(param) if param else None)


RE_RANGE = (0.05, 10.0)
IM_RANGE = (0.1, 10.0)
MAG_RANGE = (0.1, 100.0)
MIN_GAP = 1e-3


def _stable_poles(rng, n):
    """Mix of real poles and conjugate pairs (upper members only)."""
    poles = []
    while sum(1 if p.imag == 0 else 2 for p in poles) < n:
        left = n - sum(1 if p.imag == 0 else 2 for p in poles)
        re = -rng.uniform(*RE_RANGE)
        if left >= 2 and rng.random() < 0.5:
            poles.append(complex(re, rng.uniform(*IM_RANGE)))
        else:
            poles.append(complex(re, 0.0))
    return poles


def _damped_poles(rng, n, zeta_max, resonances):
    npairs = n // 2
    if resonances is None:
        lo, hi = np.log10(MAG_RANGE)
        mags = 10.0 ** rng.uniform(lo, hi, npairs)
    else:
        mags = np.asarray(resonances, dtype=float)
        if len(mags) != npairs:
            raise ValueError(f"need {npairs} resonances, got {len(mags)}")
    zeta = rng.uniform(0.1 * zeta_max, zeta_max, npairs)
    poles = [complex(-z * w, w * np.sqrt(1 - z * z)) for z, w in zip(zeta, mags)]
    if n % 2:
        poles.append(complex(-rng.uniform(*RE_RANGE), 0.0))
    return poles


def _expand(poles):
    out = []
    for p in poles:
        out.append(p)
        if p.imag != 0:
            out.append(p.conjugate())
    return np.array(out)


def _block_diagonal(poles):
    n = sum(1 if p.imag == 0 else 2 for p in poles)
    J = np.zeros((n, n))
    i = 0
    for p in poles:
        if p.imag == 0:
            J[i, i] = p.real
            i += 1
        else:
            J[i:i + 2, i:i + 2] = [[p.real, p.imag], [-p.imag, p.real]]
            i += 2
    return J


def _gap(lam):
    if len(lam) < 2:
        return np.inf
    d = np.abs(lam[:, None] - lam[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return d.min()


def random_model(n, nu=1, ny=1, spectrum_spec='stable', seed=None,
                 feedthrough=False, resonances=None, max_tries=1000):
    """Seeded random state-space model with a prescribed pole distribution.

    Poles are drawn first (stable: ``Re`` in ``[-10, -0.05]``, pair
    imaginary parts in ``[0.1, 10]``; lightly damped: conjugate pairs with
    damping ratio ``<= zeta_max`` and ``|l|`` log-uniform in ``[0.1, 100]``),
    resampled until every pairwise gap is at least ``1e-3``, assembled into a
    real block-diagonal matrix and conjugated by a random orthogonal matrix.
    ``B``, ``C`` (and ``D`` if ``feedthrough``) are standard normal.

    ``resonances`` fixes the pair magnitudes of a lightly damped spectrum.
    """
    if n < 1 or nu < 1 or ny < 1:
        raise ValueError("dimensions must be positive")
    spec = parse_spectrum_spec(spectrum_spec)
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        if spec.kind == 'lightly_damped':
            poles = _damped_poles(rng, n, spec.param, resonances)
        else:
            poles = _stable_poles(rng, n)
            if spec.kind == 'antistable':
                poles = [-p.conjugate() for p in poles]
            elif spec.kind == 'mixed':
                flip = rng.random(len(poles)) < spec.param
                poles = [-p.conjugate() if f else p for p, f in zip(poles, flip)]
        lam = _expand(poles)
        ok = _gap(lam) >= MIN_GAP
        if spec.kind == 'mixed':
            # keep l_i + l_k away from zero across the stable/antistable split
            ok = ok and np.min(np.abs(lam[:, None] + lam[None, :])) >= MIN_GAP
        if ok:
            break
    else:
        raise ValueError("could not draw a spectrum with simple poles")
    J = _block_diagonal(poles)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    A = Q @ J @ Q.T
    B = rng.standard_normal((n, nu))
    C = rng.standard_normal((ny, n))
    D = rng.standard_normal((ny, nu)) if feedthrough else np.zeros((ny, nu))
    name = f'random-{spec.kind}-n{n}-seed{seed}'
    return StateSpaceModel(A, B, C, D, name=name)
