import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from h2wkit import (DegenerateSpectrumError, FrequencyBand, SingularShiftError,
                    StateSpaceModel, classify_poles, eval_transfer,
                    random_model, spectral_decompose, validate_band)


def _canonical(spec):
    order = np.lexsort((spec.eigenvalues.imag, spec.eigenvalues.real))
    return spec.eigenvalues[order], spec.residues[order]


def test_model_validation():
    with pytest.raises(ValueError):
        StateSpaceModel([[1, 2]], [[1]], [[1]])
    with pytest.raises(ValueError):
        StateSpaceModel([[-1]], [[1], [2]], [[1]])
    with pytest.raises(ValueError):
        StateSpaceModel([[-1]], [[1]], [[1]], [[1, 2]])
    with pytest.raises(ValueError):
        StateSpaceModel([[np.nan]], [[1]], [[1]])


def test_model_is_immutable(lag1):
    with pytest.raises(ValueError):
        lag1.A[0, 0] = 3.0
    assert (lag1.n, lag1.nu, lag1.ny) == (1, 1, 1)


def test_eval_transfer(lag1, gain2):
    assert eval_transfer(lag1, 0) == pytest.approx(np.array([[1.0]]))
    assert eval_transfer(lag1, 1j)[0, 0] == pytest.approx(0.5 - 0.5j)
    for s in (0, 1j, 3 - 2j):
        assert eval_transfer(gain2, s)[0, 0] == pytest.approx(2.0)


def test_eval_transfer_at_pole(lag1):
    with pytest.raises(SingularShiftError):
        eval_transfer(lag1, -1.0)


def test_decompose_diagonal(two_pole):
    lam, phi = _canonical(spectral_decompose(two_pole))
    np.testing.assert_allclose(lam, [-2, -1], atol=1e-15)
    np.testing.assert_allclose(phi.ravel(), [1, 1], atol=1e-15)


def test_decompose_scalar():
    spec = spectral_decompose(StateSpaceModel([[-1]], [[2]], [[3]]))
    assert spec.eigenvalues[0] == pytest.approx(-1)
    assert spec.residues[0, 0, 0] == pytest.approx(6)


def _residues_by_inverse(A, B, C):
    """Independent route: phi_i = C v_i (V^{-1} B)_i."""
    lam, V = np.linalg.eig(A)
    W = np.linalg.inv(V)
    phi = np.array([np.outer(C @ V[:, i], W[i] @ B) for i in range(len(lam))])
    return lam, phi


def test_decompose_similarity_invariant(two_pole):
    th = 0.7
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    A = R @ two_pole.A @ R.T
    B = R @ two_pole.B
    C = two_pole.C @ R.T
    rotated = spectral_decompose(StateSpaceModel(A, B, C))
    lam_r, phi_r = _canonical(rotated)
    lam0, phi0 = _canonical(spectral_decompose(two_pole))
    np.testing.assert_allclose(lam_r, lam0, atol=1e-14)
    np.testing.assert_allclose(phi_r, phi0, atol=1e-14)
    lam_o, phi_o = _residues_by_inverse(A, B, C)
    order = np.argsort(lam_o.real)
    np.testing.assert_allclose(phi_r, phi_o[order], atol=1e-14)


def test_decompose_rejects_repeated_poles():
    with pytest.raises(DegenerateSpectrumError):
        spectral_decompose(StateSpaceModel(np.diag([-1.0, -1.0]), np.ones((2, 1)),
                                           np.ones((1, 2))))
    jordan = [[-1.0, 1.0], [0.0, -1.0]]
    with pytest.raises(DegenerateSpectrumError):
        spectral_decompose(StateSpaceModel(jordan, np.ones((2, 1)), np.ones((1, 2))))


def test_classify_poles():
    c = classify_poles([-1, -2], 1e-9)
    assert c.stable == (0, 1) and not c.antistable and not c.imaginary
    c = classify_poles([1j, -1j], 1e-9)
    assert c.imaginary == (0, 1)
    c = classify_poles([-1, 1], 1e-9)
    assert c.stable == (0,) and c.antistable == (1,)
    with pytest.raises(ValueError):
        classify_poles([-1], -1.0)


def test_validate_band():
    lam = [1j, -1j]
    cls = classify_poles(lam, 1e-9)
    assert validate_band(cls, lam, FrequencyBand(0, 0.5))
    rep = validate_band(cls, lam, FrequencyBand(0, 1.5))
    assert not rep
    assert set(rep.offending) == {1j, -1j}
    lam = [-1, -2]
    assert validate_band(classify_poles(lam, 1e-9), lam, FrequencyBand(0, 1e9))


def test_frequency_band_validation():
    with pytest.raises(ValueError):
        FrequencyBand(2, 1)
    with pytest.raises(ValueError):
        FrequencyBand(-1, 1)
    with pytest.raises(ValueError):
        FrequencyBand(0, np.inf)


@pytest.mark.parametrize('seed', range(20))
def test_residue_reconstruction(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 11))
    m = random_model(n, int(rng.integers(1, 4)), int(rng.integers(1, 4)),
                     'stable', seed=seed, feedthrough=True)
    spec = spectral_decompose(m)
    for _ in range(5):
        s = complex(rng.normal(scale=3), rng.normal(scale=3))
        H = eval_transfer(m, s)
        err = np.linalg.norm(spec.transfer(s, m.D) - H)
        assert err <= 1e-8 * np.linalg.norm(H)


def _phi(C, B, X, Y):
    return np.array([np.outer(C @ X[:, i], Y[:, i].conj() @ B)
                     / (Y[:, i].conj() @ X[:, i]) for i in range(X.shape[1])])


@pytest.mark.parametrize('seed', range(5))
def test_residue_scaling_invariance(seed):
    m = random_model(6, 2, 2, 'stable', seed=seed)
    _, Y, X = scipy.linalg.eig(m.A, left=True, right=True)
    alpha = np.exp(1j * np.arange(1, 7)) * np.arange(1, 7)
    ref = _phi(m.C, m.B, X, Y)
    np.testing.assert_allclose(_phi(m.C, m.B, X * alpha, Y), ref,
                               rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(spectral_decompose(m).residues, ref,
                               rtol=1e-13, atol=1e-13)


@settings(max_examples=25, derandomize=True, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10_000),
       st.sampled_from(['stable', 'mixed:0.5', 'lightly_damped:0.05']))
def test_conjugate_closure(n, seed, kind):
    spec = spectral_decompose(random_model(n, 2, 2, kind, seed=seed))
    lam, phi = spec.eigenvalues, spec.residues
    used = set()
    for i in range(n):
        d = np.abs(lam - lam[i].conjugate())
        d[list(used)] = np.inf
        k = int(np.argmin(d))
        used.add(k)
        assert d[k] <= 1e-10 * max(1, abs(lam[i]))
        assert np.linalg.norm(phi[k] - phi[i].conj()) <= 1e-10 * max(1, np.linalg.norm(phi[i]))


@settings(max_examples=200, derandomize=True)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False), max_size=20),
       st.floats(0, 1))
def test_classify_partition(lam, tol):
    c = classify_poles(lam, tol)
    idx = sorted(c.stable + c.antistable + c.imaginary)
    assert idx == list(range(len(lam)))
