from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from strongtherm.dynmaps import (choi, choi_min_eigenvalue, depolarizing_map, divisibility_scan,
                                 from_choi, intermediate_map, is_cptp, transpose_map)
from strongtherm.errors import InversionError
from strongtherm.gkls import GKLSGenerator, LiouvillianExp, SuperOperator, build_liouvillian
from strongtherm.spinboson import ModelConfig, ReducedDynamics, reduced_map

SZ = np.diag([1.0, -1.0]).astype(complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)


def qubit_semigroup(beta=1.0, omega=1.0, gamma=0.05):
    """Thermal amplitude damping of one qubit: a genuine Davies semigroup."""
    n = 1 / np.expm1(beta * omega)
    gen = GKLSGenerator(0.5 * omega * SZ, ((SM, gamma * (n + 1)), (SM.conj().T, gamma * n)))
    return LiouvillianExp(build_liouvillian(gen))


def kraus_choi(kraus):
    d = kraus[0].shape[1]
    out = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] = 1
            out += np.kron(e, sum(k @ e @ k.conj().T for k in kraus))
    return out


class TestChoi:
    def test_identity_is_unnormalized_bell(self):
        phi = np.eye(2).reshape(-1)
        assert_allclose(choi(np.eye(4)), np.outer(phi, phi))

    def test_depolarizing(self):
        assert_allclose(choi(depolarizing_map(2)), np.eye(4) / 2)

    def test_round_trip(self, rng):
        m = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        assert_allclose(from_choi(choi(m)), m, atol=1e-11)

    def test_against_kraus_definition(self, rng):
        k = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2)]
        s = SuperOperator(sum(np.kron(a.conj(), a) for a in k))
        assert_allclose(choi(s), kraus_choi(k), atol=1e-12)

    def test_stack(self):
        stack = np.stack([np.eye(4), transpose_map(2).matrix])
        assert_allclose(choi_min_eigenvalue(stack), [0.0, -1.0], atol=1e-14)


class TestCPTP:
    def test_identity(self):
        v = is_cptp(np.eye(4))
        assert v.cptp and v.tp_residual == 0.0

    def test_transpose_not_cp(self):
        v = is_cptp(transpose_map(2))
        assert not v.cp and v.tp
        assert v.min_choi_eigenvalue == pytest.approx(-1.0)

    def test_model_maps(self):
        cfg = ModelConfig()
        for t in (0.0, 1.0, 37.0, 5000.0):
            assert is_cptp(reduced_map(cfg, t), tol=1e-7).cptp


class TestIntermediate:
    def test_same_map(self):
        s = qubit_semigroup()(3.0)
        assert_allclose(intermediate_map(s, s).matrix, np.eye(4), atol=1e-12)

    def test_semigroup(self):
        e = qubit_semigroup()
        assert_allclose(intermediate_map(e(5.0), e(2.0)).matrix, e(3.0), atol=1e-9)

    def test_model_composition(self):
        cfg = ModelConfig()
        t, s = 2000.0, 1000.0
        lt, ls = reduced_map(cfg, t), reduced_map(cfg, s)
        mid = intermediate_map(lt, ls)
        assert_allclose((mid @ ls).matrix, lt.matrix, atol=1e-9)

    def test_singular(self):
        with pytest.raises(InversionError):
            intermediate_map(np.eye(4), depolarizing_map(2))


class TestScan:
    def test_semigroup_all_divisible(self):
        times = np.linspace(0, 100, 51)
        scan = divisibility_scan(times, qubit_semigroup().sandwich(times))
        assert all(v.cp_divisible for v in scan)

    def test_identical_maps(self):
        m = qubit_semigroup()(1.0)
        (v,) = divisibility_scan([1.0, 2.0], [m, m])
        assert v.cp_divisible and v.min_choi_eigenvalue > -1e-12

    def test_model_not_divisible(self):
        times = np.linspace(0, 20, 201)
        maps = ReducedDynamics(ModelConfig()).maps(times)
        scan = divisibility_scan(times, maps)
        assert any(v.cp_divisible is False and v.min_choi_eigenvalue < -1e-9 for v in scan)

    def test_inversion_failure_reported(self):
        scan = divisibility_scan([0, 1, 2], [np.eye(4), depolarizing_map(2), depolarizing_map(2)])
        assert scan[0].cp_divisible is True
        assert scan[1].cp_divisible is None and "singular" in scan[1].error


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.0, 50))
def test_thermal_semigroup_maps_are_cptp(beta, t):
    assert is_cptp(qubit_semigroup(beta)(t)).cptp
