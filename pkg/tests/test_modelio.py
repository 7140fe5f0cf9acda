import io

import numpy as np
import pytest

from h2wkit import (DimensionMismatchError, ModelParseError, StateSpaceModel,
                    classify_poles, load_model, random_model, save_model)
from h2wkit.modelio import dumps_model, loads_model, parse_spectrum_spec

MINIMAL = """h2wkit-model v1
# first-order lag
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
"""


def test_load_minimal():
    m = load_model(io.BytesIO(MINIMAL.encode()))
    assert m == StateSpaceModel([[-1]], [[1]], [[1]], [[0]])
    assert m.name == 'lag1'


def test_load_from_path(tmp_path):
    p = tmp_path / 'lag1.ssm'
    p.write_text(MINIMAL)
    assert load_model(p).n == 1
    assert load_model(str(p)).n == 1


def test_d_block_optional():
    text = MINIMAL.split('matrix D')[0]
    assert loads_model(text).strictly_proper


def test_wrong_row_count():
    bad = MINIMAL.replace('dims 1 1 1', 'dims 2 1 1').replace(
        'matrix A\n-1', 'matrix A\n-1 0\n0 -2')
    with pytest.raises(DimensionMismatchError) as info:
        loads_model(bad)
    assert info.value.field == 'B'


def test_wrong_row_length():
    with pytest.raises(DimensionMismatchError) as info:
        loads_model(MINIMAL.replace('matrix C\n1', 'matrix C\n1 2'))
    assert info.value.line == 10


@pytest.mark.parametrize('mutate, field', [
    (lambda s: s.replace('h2wkit-model v1', 'something else'), 'header'),
    (lambda s: s.replace('v1', 'v2'), 'header'),
    (lambda s: s.replace('dims 1 1 1', 'dims 1 x 1'), 'dims'),
    (lambda s: s.replace('matrix B\n1', 'matrix B\nfoo'), 'B'),
    (lambda s: s.replace('matrix C', 'matrix E'), 'matrix'),
])
def test_parse_errors(mutate, field):
    with pytest.raises(ModelParseError) as info:
        loads_model(mutate(MINIMAL))
    assert info.value.field == field
    assert info.value.exit_code == 2


def test_missing_dims():
    with pytest.raises(ModelParseError):
        loads_model('h2wkit-model v1\nmatrix A\n-1\n')
    with pytest.raises(ModelParseError):
        loads_model('')


@pytest.mark.parametrize('seed', range(100))
def test_roundtrip_exact(seed):
    m = random_model(1 + seed % 12, 1 + seed % 3, 1 + seed % 2, 'mixed:0.3',
                     seed=seed, feedthrough=bool(seed % 2))
    back = loads_model(dumps_model(m))
    for k in 'ABCD':
        np.testing.assert_array_equal(getattr(back, k), getattr(m, k))
    assert back == m


def test_save_to_path(tmp_path):
    m = random_model(5, 2, 2, seed=9)
    save_model(m, tmp_path / 'm.ssm')
    assert load_model(tmp_path / 'm.ssm') == m
    raw = (tmp_path / 'm.ssm').read_bytes()
    assert b'\r' not in raw and raw.startswith(b'h2wkit-model v1\n')


def test_random_deterministic():
    assert random_model(4, 1, 1, 'stable', seed=42) == random_model(4, 1, 1, 'stable', seed=42)
    assert random_model(4, 1, 1, 'stable', seed=42) != random_model(4, 1, 1, 'stable', seed=43)


@pytest.mark.parametrize('seed', range(10))
def test_random_stable(seed):
    lam = np.linalg.eigvals(random_model(6, 2, 2, 'stable', seed=seed).A)
    c = classify_poles(lam)
    assert len(c.stable) == 6
    assert np.all(lam.real <= -0.05 + 1e-9) and np.all(lam.real >= -10 - 1e-9)


@pytest.mark.parametrize('seed', range(10))
def test_random_lightly_damped(seed):
    lam = np.linalg.eigvals(random_model(8, 1, 1, 'lightly_damped:0.05', seed=seed).A)
    assert np.all(np.abs(lam.imag) > 0)
    assert np.all(np.abs(lam.real) / np.abs(lam) <= 0.05 + 1e-9)
    assert np.all((np.abs(lam) >= 0.1 - 1e-9) & (np.abs(lam) <= 100 + 1e-7))


def test_random_antistable_and_mixed():
    lam = np.linalg.eigvals(random_model(7, seed=1, spectrum_spec='antistable').A)
    assert np.all(lam.real > 0)
    lam = np.linalg.eigvals(random_model(30, seed=1, spectrum_spec='mixed:0.5').A)
    assert np.any(lam.real > 0) and np.any(lam.real < 0)


def test_generator_gap():
    worst = np.inf
    for seed in range(1000):
        n = 2 + seed % 19
        lam = np.linalg.eigvals(random_model(n, seed=seed, spectrum_spec=
                                             ['stable', 'mixed:0.5', 'lightly_damped:0.05'][seed % 3]).A)
        d = np.abs(lam[:, None] - lam[None, :])
        d[np.diag_indices_from(d)] = np.inf
        worst = min(worst, d.min())
    assert worst >= 1e-3 * (1 - 1e-6)


def test_invalid_spec():
    for bad in ('unstable', 'mixed:1.5', 'lightly_damped:0', 'lightly_damped:2'):
        with pytest.raises(ValueError):
            parse_spectrum_spec(bad)
    with pytest.raises(ValueError):
        random_model(0)
