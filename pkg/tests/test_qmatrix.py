from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from strongtherm.errors import NotPositiveDefiniteError, RangeError, ShapeError
from strongtherm.qmatrix import (as_density, as_hermitian, devectorize, expect, herm_eig,
                                 matrix_exp_herm, matrix_log_pd, partial_trace, tensor,
                                 vectorize)

from conftest import random_density, random_hermitian

SZ = np.diag([1.0, -1.0])


def taylor_exp(m, terms=30):
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


class TestHermitian:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="not Hermitian"):
            as_hermitian(np.array([[0, 1], [0, 0]]))

    def test_symmetrizes_within_tolerance(self):
        m = np.array([[1.0, 1 + 1e-14], [1.0, 2.0]])
        h = as_hermitian(m)
        assert_array_equal(h, h.conj().T)

    def test_rejects_nonsquare_and_nonfinite(self):
        with pytest.raises(ShapeError):
            as_hermitian(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            as_hermitian(np.array([[np.nan, 0], [0, 1]]))

    def test_density_validation(self):
        as_density(np.diag([0.25, 0.75]))
        with pytest.raises(ValueError, match="trace"):
            as_density(np.diag([0.5, 0.6]))
        with pytest.raises(ValueError, match="negative"):
            as_density(np.diag([1.5, -0.5]))


class TestHermEig:
    def test_diagonal(self):
        w, u = herm_eig(np.diag([2.0, -1.0]))
        assert_allclose(w, [-1.0, 2.0])
        assert_allclose(np.abs(u), [[0, 1], [1, 0]])

    def test_sigma_z(self):
        assert_allclose(herm_eig(SZ)[0], [-1.0, 1.0])

    def test_reconstruction(self, rng):
        m = random_hermitian(rng, 4)
        w, u = herm_eig(m)
        assert np.all(np.diff(w) >= 0)
        assert_allclose(u @ np.diag(w) @ u.conj().T, m, atol=1e-10 * np.abs(m).max())


class TestExpLog:
    def test_exp_zero_is_identity(self):
        assert_allclose(matrix_exp_herm(np.zeros((3, 3)), 7.0), np.eye(3))

    def test_exp_diagonal(self):
        assert_allclose(matrix_exp_herm(np.diag([1.0, 2.0]), -1.0), np.diag([math.exp(-1), math.exp(-2)]))

    def test_exp_matches_taylor(self, rng):
        m = random_hermitian(rng, 4)
        assert_allclose(matrix_exp_herm(m, -0.3), taylor_exp(-0.3 * m), atol=1e-10)

    def test_exp_overflow(self):
        with pytest.raises(RangeError):
            matrix_exp_herm(np.diag([1.0, 800.0]))

    def test_log_identity_and_diagonal(self):
        assert_allclose(matrix_log_pd(np.eye(2)), np.zeros((2, 2)), atol=0)
        assert_allclose(matrix_log_pd(np.diag([math.exp(-1), math.exp(-2)])), np.diag([-1.0, -2.0]), atol=1e-14)

    def test_log_round_trip(self, rng):
        m = random_density(rng, 4) + 0.1 * np.eye(4)
        assert_allclose(matrix_exp_herm(matrix_log_pd(m)), m, atol=1e-10)

    def test_log_not_positive_definite_carries_eigenvalue(self):
        with pytest.raises(NotPositiveDefiniteError) as info:
            matrix_log_pd(np.diag([1.0, -0.5]))
        assert info.value.eigenvalue == pytest.approx(-0.5)

    def test_log_threshold_configurable(self):
        m = np.diag([1.0, 1e-200])
        matrix_log_pd(m)
        with pytest.raises(NotPositiveDefiniteError):
            matrix_log_pd(m, eps_pd=1e-100)


class TestTensorPartialTrace:
    def test_tensor_trivial(self):
        assert_allclose(tensor(np.eye(2), np.eye(2)), np.eye(4))
        assert_allclose(tensor(SZ, np.eye(2)), np.diag([1, 1, -1, -1]))

    def test_mixed_product(self, rng):
        a, b, c, d = (random_hermitian(rng, 2) + 1j * random_hermitian(rng, 2) for _ in range(4))
        assert_allclose(tensor(a, b) @ tensor(c, d), tensor(a @ c, b @ d), atol=1e-12)

    def test_partial_traces(self, rng):
        a = random_hermitian(rng, 2)
        rho = random_density(rng, 3)
        assert_allclose(partial_trace(tensor(a, rho), (2, 3), "S"), a, atol=1e-12)
        rho2 = random_density(rng, 2)
        b = random_hermitian(rng, 3)
        assert_allclose(partial_trace(tensor(rho2, b), (2, 3), "R"), b, atol=1e-12)

    def test_bell_state(self):
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        rho = np.outer(psi, psi)
        for keep in ("S", "R"):
            assert_allclose(partial_trace(rho, (2, 2), keep), np.eye(2) / 2)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            partial_trace(np.eye(4), (2, 3))

    def test_stacks(self, rng):
        stack = np.stack([tensor(random_density(rng, 2), random_density(rng, 2)) for _ in range(3)])
        assert partial_trace(stack, (2, 2)).shape == (3, 2, 2)


class TestVectorize:
    def test_column_stacking(self):
        assert_array_equal(vectorize(np.array([[1, 2], [3, 4]])), [1, 3, 2, 4])

    def test_round_trip(self, rng):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert_array_equal(devectorize(vectorize(m)), m)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            devectorize(np.zeros(5))

    def test_sandwich_identity(self, rng):
        for _ in range(5):
            a, x, b = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
            assert_allclose(vectorize(a @ x @ b), np.kron(b.T, a) @ vectorize(x), atol=1e-12)

    def test_expect_is_real_trace(self):
        assert expect(SZ, np.diag([0.25, 0.75])) == pytest.approx(-0.5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=4), st.floats(-2, 2))
def test_exp_log_inverse_property(eigs, scale):
    m = np.diag(eigs).astype(complex)
    e = matrix_exp_herm(m, scale)
    assert_allclose(matrix_log_pd(e), scale * m, atol=1e-10)
