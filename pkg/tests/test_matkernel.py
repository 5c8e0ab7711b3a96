import numpy as np
import pytest
from hypothesis import given

from conftest import random_unitary, seeds
from qwalk.errors import EigenConvergenceError, NotHermitian, ValidationError
from qwalk.matkernel import (
    adjoint,
    as_matrix,
    channel_matrix,
    conjugation_matrix,
    eigenvalues_4x4,
    hermitian_eigenvalues,
    is_hermitian,
    is_normal,
    singular_values,
    unvec,
    vec,
)


def _rand(rng, d=2):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


@given(seeds)
def test_conjugation_matches_vec(seed):
    rng = np.random.default_rng(seed)
    b, x = _rand(rng), _rand(rng)
    np.testing.assert_allclose(conjugation_matrix(b) @ vec(x), vec(b @ x @ adjoint(b)), atol=1e-12)


def test_vec_is_row_major():
    x = np.array([[1, 2], [3, 4]])
    assert vec(x).tolist() == [1, 2, 3, 4]
    np.testing.assert_array_equal(unvec(vec(x)), x)


def test_unvec_rejects_non_square_length():
    with pytest.raises(ValidationError):
        unvec(np.ones(3))


def test_channel_matrix_sums_kraus():
    rng = np.random.default_rng(1)
    a, b = _rand(rng), _rand(rng)
    np.testing.assert_allclose(channel_matrix([a, b]), conjugation_matrix(a) + conjugation_matrix(b))
    with pytest.raises(ValidationError):
        channel_matrix([])
    with pytest.raises(ValidationError):
        channel_matrix([a, np.eye(3)])


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ValidationError):
        as_matrix(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        as_matrix([[np.nan, 0], [0, 1]])


@given(seeds)
def test_hermitian_eigenvalues_closed_form(seed):
    rng = np.random.default_rng(seed)
    z = _rand(rng)
    h = z + adjoint(z)
    hi, lo = hermitian_eigenvalues(h)
    ref = np.linalg.eigvalsh(h)
    assert hi == pytest.approx(ref[1], abs=1e-12)
    assert lo == pytest.approx(ref[0], abs=1e-12)


def test_hermitian_eigenvalues_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        hermitian_eigenvalues(np.eye(3))


@given(seeds)
def test_singular_values(seed):
    rng = np.random.default_rng(seed)
    a = _rand(rng)
    ref = np.linalg.svd(a, compute_uv=False)
    np.testing.assert_allclose(singular_values(a), ref, atol=1e-10)


def test_normal_and_hermitian_predicates():
    u = random_unitary(np.random.default_rng(3))
    assert is_normal(u)
    assert not is_hermitian(np.array([[0, 1], [0, 0]]))
    assert not is_normal(np.array([[0, 1], [0, 0]]))
    assert is_hermitian(np.diag([1.0, -2.0]))


@given(seeds)
def test_eigenvalues_4x4(seed):
    rng = np.random.default_rng(seed)
    m = _rand(rng, 4)
    lam = eigenvalues_4x4(m)
    assert lam.shape == (4,)
    assert np.sum(lam) == pytest.approx(np.trace(m), abs=1e-10)


def test_eigenvalues_4x4_rejects_bad_shape_and_nonfinite():
    with pytest.raises(ValidationError):
        eigenvalues_4x4(np.eye(2))
    bad = np.eye(4, dtype=complex)
    bad[0, 0] = np.inf
    with pytest.raises((ValidationError, EigenConvergenceError)):
        eigenvalues_4x4(bad)
