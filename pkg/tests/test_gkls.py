from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from strongtherm.errors import NumericalFailure, ShapeError
from strongtherm.gkls import (GKLSGenerator, LiouvillianExp, SuperOperator, adjoint,
                              build_liouvillian, ode_oracle, piecewise_propagators, propagate,
                              propagate_many, propagator, tp_residual)
from strongtherm.qmatrix import devectorize, vectorize
from strongtherm.spinboson import (ModelConfig, davies_generator, full_hamiltonian, gibbs_state,
                                   spin_gibbs)

from conftest import random_density, random_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e| with |e> = (1, 0)


def hand_built_amplitude_damping(omega, gamma):
    """Liouvillian of d rho/dt = -i[w sz/2, rho] + g D[sm] rho, written out entry by entry.

    vec index i + 2 j <-> rho[i, j]; order (ee, ge, eg, gg).
    """
    L = np.zeros((4, 4), dtype=complex)
    L[0, 0] = -gamma                       # d ee = -g ee
    L[3, 0] = gamma                        # d gg = +g ee
    L[1, 1] = 1j * omega - gamma / 2       # d ge = (i w - g/2) ge
    L[2, 2] = -1j * omega - gamma / 2      # d eg = (-i w - g/2) eg
    return L


class TestGenerator:
    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            GKLSGenerator(SZ, ((SM, -1.0),))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            GKLSGenerator(SZ, ((np.eye(3), 1.0),))

    def test_superoperator_tp_flag_checked(self):
        with pytest.raises(NumericalFailure):
            SuperOperator(2 * np.eye(4), trace_preserving=True)
        with pytest.raises(ShapeError):
            SuperOperator(np.eye(5))


class TestLiouvillian:
    def test_commutator_on_sigma_x(self):
        lmat = build_liouvillian(GKLSGenerator(SZ / 2))
        assert_allclose(lmat.apply(SX), SY, atol=1e-15)

    def test_trace_preservation_structural(self, rng):
        gen = GKLSGenerator(random_hermitian(rng, 3),
                            tuple((rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)), r)
                                  for r in (0.3, 1.2)))
        vi = vectorize(np.eye(3))
        assert np.max(np.abs(vi.conj() @ build_liouvillian(gen).matrix)) < 1e-12

    def test_amplitude_damping_against_hand_built(self):
        lmat = build_liouvillian(GKLSGenerator(0.5 * 1.3 * SZ, ((SM, 1.0),))).matrix
        ref = hand_built_amplitude_damping(1.3, 1.0)
        assert_allclose(lmat, ref, atol=1e-15)
        ev = np.sort_complex(np.linalg.eigvals(lmat))
        assert_allclose(ev, np.sort_complex([0, -1, -0.5 + 1.3j, -0.5 - 1.3j]), atol=1e-12)

    def test_matches_rhs(self, rng):
        gen = GKLSGenerator(random_hermitian(rng, 2), ((SM, 0.7), (SM.T, 0.2)))
        rho = random_density(rng, 2)
        assert_allclose(build_liouvillian(gen).apply(rho), gen.rhs(rho), atol=1e-14)


class TestPropagation:
    @pytest.fixture
    def davies(self):
        cfg = ModelConfig(beta=1.0)
        return cfg, davies_generator(cfg), build_liouvillian(davies_generator(cfg))

    def test_t0_returns_input(self, davies, rng):
        rho = random_density(rng, 4)
        assert np.array_equal(propagate(davies[2], rho, 0.0), rho)
        assert np.array_equal(propagator(davies[2], 0.0).matrix, np.eye(16))

    def test_unitary_stationary(self):
        lmat = build_liouvillian(GKLSGenerator(SZ))
        rho = np.diag([0.3, 0.7])
        assert_allclose(propagate(lmat, rho, 17.0), rho, atol=1e-13)

    def test_long_time_gibbs(self, davies, rng):
        cfg, _, lmat = davies
        target = gibbs_state(full_hamiltonian(cfg), cfg.beta)
        assert_allclose(propagate(lmat, random_density(rng, 4), 1e6), target, atol=1e-6)

    def test_nullspace_is_gibbs(self, davies):
        cfg, _, lmat = davies
        w, v = np.linalg.eig(lmat.matrix)
        rho = devectorize(v[:, np.argmin(np.abs(w))])
        rho = rho / np.trace(rho)
        assert_allclose(rho, gibbs_state(full_hamiltonian(cfg), cfg.beta), atol=1e-9)

    def test_semigroup(self, davies):
        lmat = davies[2]
        assert_allclose(propagator(lmat, 5.0).matrix,
                        (propagator(lmat, 3.0) @ propagator(lmat, 2.0)).matrix, atol=1e-9)

    def test_columns_match_propagate(self, davies):
        lmat = davies[2]
        s = propagator(lmat, 7.5)
        for k in range(16):
            e = devectorize(np.eye(16)[k])
            assert_allclose(vectorize(s.apply(e)), s.matrix[:, k], atol=1e-14)
        rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
        assert_allclose(propagate(lmat, rho, 7.5), s.apply(rho), atol=1e-14)

    def test_exp_matches_scipy(self, davies):
        import scipy.linalg
        lmat = davies[2].matrix
        assert_allclose(LiouvillianExp(lmat)(40.0), scipy.linalg.expm(40.0 * lmat), atol=1e-11)

    def test_near_degenerate_rates_fall_back(self):
        # at large beta two decay rates nearly coincide and the eigen route drifts
        import scipy.linalg
        lmat = build_liouvillian(davies_generator(ModelConfig(beta=200.0))).matrix
        exp = LiouvillianExp(lmat)
        assert not exp.eigen_route_ok([1e6])
        grid = np.linspace(0.0, 1e4, 11)
        out = exp.sandwich(grid)
        assert tp_residual(out) < 1e-10
        assert_allclose(out[7], scipy.linalg.expm(grid[7] * lmat), atol=1e-10)
        assert_allclose(exp.sandwich(grid[3:])[0], out[3], atol=1e-12)

    def test_propagate_many(self, davies, rng):
        rho = random_density(rng, 4)
        times = [0.0, 1.0, 10.0]
        out = propagate_many(davies[2], rho, times)
        for t, r in zip(times, out):
            assert_allclose(r, propagate(davies[2], rho, t), atol=1e-12)

    def test_piecewise_constant_equals_single(self, davies):
        lmat = davies[2].matrix
        out = piecewise_propagators([lmat] * 4, [0.5] * 4)
        assert_allclose(out[-1], LiouvillianExp(lmat)(2.0), atol=1e-12)
        assert np.array_equal(out[0], np.eye(16))


class TestAdjoint:
    def test_identity(self):
        assert np.array_equal(adjoint(SuperOperator.identity(2)).matrix, np.eye(4))

    def test_defining_identity(self, rng):
        s = propagator(build_liouvillian(davies_generator(ModelConfig())), 3.0)
        sd = adjoint(s)
        for _ in range(5):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            assert abs(np.trace(s.apply(a) @ b) - np.trace(a @ sd.apply(b))) < 1e-11
        assert_allclose(sd.apply(np.eye(4)), np.eye(4), atol=1e-10)
        assert tp_residual(s.matrix) < 1e-10


class TestOracle:
    def test_t0(self, rng):
        rho = random_density(rng, 2)
        assert np.array_equal(ode_oracle(GKLSGenerator(SZ), rho, 0.0, 0.1), rho)

    def test_unitary_preserves_purity(self):
        psi = np.array([1, 1]) / np.sqrt(2)
        rho = ode_oracle(GKLSGenerator(SZ), np.outer(psi, psi), 10.0, 0.01)
        assert abs(np.trace(rho @ rho).real - 1) < 1e-8

    def test_step_too_large(self):
        with pytest.raises(NumericalFailure):
            ode_oracle(GKLSGenerator(100 * SZ), np.eye(2) / 2, 1.0, 0.1)

    def test_agrees_with_exponential(self, rng):
        gen = davies_generator(ModelConfig(beta=0.5))
        rho = np.stack([random_density(rng, 4) for _ in range(3)])
        ref = ode_oracle(gen, rho, 50.0, 1e-2)
        lmat = build_liouvillian(gen)
        for r0, r in zip(rho, ref):
            assert_allclose(propagate(lmat, r0, 50.0), r, atol=1e-8)

    def test_long_horizon_product_start(self):
        cfg = ModelConfig(beta=1.0)
        gen = davies_generator(cfg)
        lmat = build_liouvillian(gen)
        rho0 = np.kron(np.diag([0.0, 1.0]), spin_gibbs(cfg))
        rho = rho0.astype(complex)
        for t in range(250, 1001, 250):
            rho = ode_oracle(gen, rho, 250.0, 1e-2)
            assert_allclose(propagate(lmat, rho0, float(t)), rho, atol=1e-8)

    def test_step_is_tabulated_exactly(self, rng):
        # one oracle step equals four explicit RK4 stages
        gen = davies_generator(ModelConfig(beta=2.0))
        rho = random_density(rng, 4)
        f = gen.rhs
        h = 0.01
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        assert_allclose(ode_oracle(gen, rho, h, h), rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4),
                        atol=1e-15)
