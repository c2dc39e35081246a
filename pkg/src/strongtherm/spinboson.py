"""Qubit coupled to a damped reservoir spin.

The system qubit (frequency ``omega0``) exchanges excitations with a
reservoir spin (frequency ``omega1``) through a flip-flop coupling of
strength ``kappa``. The spin is in turn weakly damped by a bosonic
continuum that is never represented explicitly: it enters only through the
decay rates at the two Bohr frequencies ``omega0 +- kappa`` of the Davies
generator acting on the four-dimensional system+spin space.

Basis conventions: ``|e> = (1, 0)``, ``|g> = (0, 1)``, ``sigma_z = diag(1, -1)``
and the product basis is ordered ``|ee>, |eg>, |ge>, |gg>`` (system first).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .dynmaps import choi_min_eigenvalue
from .errors import MapConstructionError, UnsupportedConfigurationError
from .gkls import GKLSGenerator, LiouvillianExp, SuperOperator, build_liouvillian
from .qmatrix import (as_hermitian, dagger, devectorize, herm_eig, matrix_log_pd,
                      partial_trace, tensor, vectorize)

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
I2 = np.eye(2, dtype=complex)
DIMS = (2, 2)

# analytic eigenoperators of the resonant S+spin Hamiltonian, product basis
A_PLUS_COORDS = 0.5 * np.array([[0, 0, 0, 0],
                                [1, 0, 0, 0],
                                [-1, 0, 0, 0],
                                [0, 1, 1, 0]], dtype=complex)
A_MINUS_COORDS = 0.5 * np.array([[0, 0, 0, 0],
                                 [1, 0, 0, 0],
                                 [1, 0, 0, 0],
                                 [0, -1, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class ModelConfig:
    """Parameters of the qubit / reservoir-spin model.

    ``kappa`` and the two rates are the values at ``c = 1``; the model
    actually uses ``kappa / c`` and ``gamma / c`` (see :attr:`coupling` and
    :attr:`rates`), so increasing ``c`` moves towards weak coupling.
    """

    omega0: float = 1.0
    omega1: float | None = None
    kappa: float = 0.9
    gamma_plus: float = 1e-3
    gamma_minus: float = 1e-3
    beta: float = 1.0
    c: float = 1.0
    resonant: bool = True

    def __post_init__(self):
        if self.omega1 is None:
            object.__setattr__(self, "omega1", self.omega0)
        if not (self.omega0 > 0 and self.omega1 > 0):
            raise ValueError("frequencies must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.c >= 1:
            raise ValueError("c must be >= 1")
        if min(self.gamma_plus, self.gamma_minus) < 0:
            raise ValueError("decay rates must be nonnegative")
        if not 0 <= self.coupling <= self.omega0:
            raise ValueError("need 0 <= kappa/c <= omega0")
        if self.omega0 - self.coupling <= 0 and self.coupling > 0:
            raise ValueError("omega0 - kappa/c must be positive")
        if self.resonant and not np.isclose(self.omega0, self.omega1, rtol=0, atol=1e-14):
            raise ValueError("resonance omega0 == omega1 is required; pass resonant=False to relax it")
        if not self.resonant and not np.isclose(self.omega0, self.omega1):
            warnings.warn("off-resonant model: eigenoperators are computed numerically",
                          stacklevel=3)

    @property
    def coupling(self) -> float:
        """Effective system-spin coupling ``kappa / c``."""
        return self.kappa / self.c

    @property
    def rates(self) -> tuple[float, float]:
        """Effective decay rates at ``omega0 + kappa`` and ``omega0 - kappa``."""
        return self.gamma_plus / self.c, self.gamma_minus / self.c

    def rate(self, omega: float) -> float:
        """Decay rate ``gamma(omega)`` of the bosonic continuum.

        Flat when both rates agree; otherwise linear between the two
        resonant Bohr frequencies and constant beyond them.
        """
        gp, gm = self.rates
        if gp == gm or self.coupling == 0:
            return gp
        lo, hi = self.omega0 - self.coupling, self.omega0 + self.coupling
        return float(np.interp(omega, [lo, hi], [gm, gp]))

    def with_beta(self, beta: float) -> "ModelConfig":
        return replace(self, beta=float(beta))


@dataclass(frozen=True)
class ModelOperators:
    h_system: np.ndarray    # 2x2
    h_spin: np.ndarray      # 2x2
    v_coupling: np.ndarray  # 4x4
    h_full: np.ndarray      # 4x4
    a_plus: np.ndarray      # A(omega0 + kappa), 4x4
    a_minus: np.ndarray     # A(omega0 - kappa), 4x4

    @property
    def h_system_full(self) -> np.ndarray:
        return tensor(self.h_system, I2)


def system_hamiltonian(omega0: float) -> np.ndarray:
    return 0.5 * omega0 * SIGMA_Z


def coupling_operator(kappa: float) -> np.ndarray:
    return kappa * (tensor(SIGMA_PLUS, SIGMA_MINUS) + tensor(SIGMA_MINUS, SIGMA_PLUS))


def spin_bath_operator() -> np.ndarray:
    """Spin operator ``I (x) sigma_x`` through which the continuum acts."""
    return tensor(I2, SIGMA_X)


def full_hamiltonian(cfg: ModelConfig, h_system=None) -> np.ndarray:
    hs = system_hamiltonian(cfg.omega0) if h_system is None else as_hermitian(h_system)
    return as_hermitian(tensor(hs, I2) + tensor(I2, 0.5 * cfg.omega1 * SIGMA_Z)
                        + coupling_operator(cfg.coupling))


def eigenoperators(cfg: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    """Analytic eigenoperators ``A(omega0 + kappa)`` and ``A(omega0 - kappa)``.

    Exact rationals in the product basis ``|ee>, |eg>, |ge>, |gg>``; they
    satisfy ``[H, A(w)] = -w A(w)`` for ``H = H_S + H_spin + V`` on resonance.
    """
    if not np.isclose(cfg.omega0, cfg.omega1, rtol=0, atol=1e-14):
        raise UnsupportedConfigurationError(
            "analytic eigenoperators require omega0 == omega1; use spectral_eigenoperators")
    return A_PLUS_COORDS.copy(), A_MINUS_COORDS.copy()


def energy_basis(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching eigenvector columns."""
    w, u = herm_eig(h)
    return w[::-1], u[:, ::-1]


def spectral_eigenoperators(h, x, tol: float = 1e-9) -> dict[float, np.ndarray]:
    """Decompose ``x = sum_w A(w)`` with ``[h, A(w)] = -w A(w)``.

    Built from spectral projectors, ``A(w) = sum_{e - e' = w} P_e' x P_e``;
    only strictly positive Bohr frequencies are returned (``A(-w) = A(w)^+``).
    Eigenvalues closer than ``tol`` are treated as degenerate.
    """
    w, u = herm_eig(h)
    levels, projectors = [], []
    for k, lam in enumerate(w):
        if levels and abs(lam - levels[-1][-1]) <= tol:
            levels[-1].append(lam)
            projectors[-1] += np.outer(u[:, k], u[:, k].conj())
        else:
            levels.append([lam])
            projectors.append(np.outer(u[:, k], u[:, k].conj()))
    energies = [float(np.mean(l)) for l in levels]
    x = np.asarray(x, dtype=complex)
    ops: dict[float, np.ndarray] = {}
    for i, (ei, pi) in enumerate(zip(energies, projectors)):
        for j, (ej, pj) in enumerate(zip(energies, projectors)):
            omega = ei - ej
            if omega <= tol:
                continue
            a = pj @ x @ pi
            if np.max(np.abs(a)) < 1e-14:
                continue
            key = next((k for k in ops if abs(k - omega) <= tol), omega)
            ops[key] = ops.get(key, 0) + a
    return dict(sorted(ops.items()))


def build_model(cfg: ModelConfig) -> ModelOperators:
    hs = system_hamiltonian(cfg.omega0)
    hspin = 0.5 * cfg.omega1 * SIGMA_Z
    v = coupling_operator(cfg.coupling)
    hfull = full_hamiltonian(cfg)
    if np.isclose(cfg.omega0, cfg.omega1, rtol=0, atol=1e-14):
        ap, am = eigenoperators(cfg)
    else:
        ops = spectral_eigenoperators(hfull, spin_bath_operator())
        k = cfg.coupling
        ap = _closest(ops, cfg.omega0 + k)
        am = _closest(ops, cfg.omega0 - k)
    return ModelOperators(hs, hspin, v, hfull, ap, am)


def _closest(ops, omega):
    key = min(ops, key=lambda w: abs(w - omega))
    return ops[key]


def bose_occupation(omega: float, beta: float) -> float:
    """``1 / (exp(beta*omega) - 1)``; underflows to zero at large ``beta*omega``."""
    x = beta * omega
    if x > 700:
        return 0.0
    return float(1.0 / np.expm1(x))


def _davies_jumps(pairs, cfg: ModelConfig):
    jumps = []
    for omega, a, g in pairs:
        n = bose_occupation(omega, cfg.beta)
        jumps.append((a, g * (n + 1.0)))
        jumps.append((dagger(a), g * n))
    return tuple(jumps)


def davies_generator(cfg: ModelConfig, h_system=None) -> GKLSGenerator:
    """Davies generator on the system+spin space (Lamb shift omitted).

    The coherent part uses the full Hamiltonian ``H_S + H_spin + V``, whose
    eigenoperators define the dissipators; its Gibbs state is the fixed
    point. With ``h_system`` given (driven protocols) the eigenoperators are
    recomputed numerically from the spectral projectors of the modified
    Hamiltonian and rates follow :meth:`ModelConfig.rate`.
    """
    hfull = full_hamiltonian(cfg, h_system)
    default_hs = h_system is None or np.array_equal(
        as_hermitian(h_system), system_hamiltonian(cfg.omega0))
    if default_hs and np.isclose(cfg.omega0, cfg.omega1, rtol=0, atol=1e-14) \
            and cfg.coupling > 0:
        ap, am = eigenoperators(cfg)
        gp, gm = cfg.rates
        k = cfg.coupling
        pairs = [(cfg.omega0 + k, ap, gp), (cfg.omega0 - k, am, gm)]
    else:
        ops = spectral_eigenoperators(hfull, spin_bath_operator())
        pairs = [(w, a, cfg.rate(w)) for w, a in ops.items()]
    return GKLSGenerator(hfull, _davies_jumps(pairs, cfg))


def log_partition(h, beta: float) -> float:
    """``log Tr exp(-beta h)`` evaluated without overflow."""
    w = np.linalg.eigvalsh(as_hermitian(h))
    return float(logsumexp(-beta * w))


def gibbs_state(h, beta: float) -> np.ndarray:
    """``exp(-beta h) / Tr exp(-beta h)`` with the ground energy shifted out."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    w, u = herm_eig(h)
    p = np.exp(-beta * (w - w[0]))
    p /= p.sum()
    return as_hermitian((u * p) @ dagger(u))


def spin_gibbs(cfg: ModelConfig) -> np.ndarray:
    return gibbs_state(0.5 * cfg.omega1 * SIGMA_Z, cfg.beta)


def reduced_equilibrium(cfg: ModelConfig) -> np.ndarray:
    """``Tr_spin`` of the joint Gibbs state of ``H_S + H_spin + V``."""
    return partial_trace(gibbs_state(full_hamiltonian(cfg), cfg.beta), DIMS, "S")


def log_partitions(cfg: ModelConfig) -> dict[str, float]:
    """Logs of ``Z_S``, ``Z_spin`` and ``Z_{S-spin}`` (full Hamiltonian)."""
    return {"S": log_partition(system_hamiltonian(cfg.omega0), cfg.beta),
            "spin": log_partition(0.5 * cfg.omega1 * SIGMA_Z, cfg.beta),
            "S-spin": log_partition(full_hamiltonian(cfg), cfg.beta)}


def mean_force_hamiltonian(cfg: ModelConfig) -> np.ndarray:
    """Hamiltonian of mean force of the system for the finite S+spin pair.

    ``H* = -log[(Z_{S-spin}/Z_spin) Tr_spin(rho_{S-spin,beta})] / beta``, so
    that the reduced equilibrium state is ``exp(-beta H*) / Z*`` with
    ``Z* = Z_{S-spin} / Z_spin``.
    """
    lz = log_partitions(cfg)
    rho = reduced_equilibrium(cfg)
    return as_hermitian(-(matrix_log_pd(rho) + (lz["S-spin"] - lz["spin"]) * np.eye(2)) / cfg.beta)


def equilibrium_h_circledast(cfg: ModelConfig) -> np.ndarray:
    """``H* + log[Z_{S-spin} / (Z_S Z_spin)] / beta``: the long-time limit of the
    nonequilibrium operator, with ``Tr exp(-beta .)`` equal to ``Z_S``."""
    lz = log_partitions(cfg)
    shift = (lz["S-spin"] - lz["S"] - lz["spin"]) / cfg.beta
    return mean_force_hamiltonian(cfg) + shift * np.eye(2)


def embed_matrix(rho_spin) -> np.ndarray:
    """Superoperator (16 x 4) of ``X -> X (x) rho_spin`` on column-stacked operators."""
    out = np.zeros((16, 4), dtype=complex)
    for k in range(4):
        e = devectorize(np.eye(4)[k], 2)
        out[:, k] = vectorize(tensor(e, rho_spin))
    return out


def trace_spin_matrix() -> np.ndarray:
    """Superoperator (4 x 16) of ``Y -> Tr_spin Y``."""
    out = np.zeros((4, 16), dtype=complex)
    for k in range(16):
        e = devectorize(np.eye(16)[k], 4)
        out[:, k] = vectorize(partial_trace(e, DIMS, "S"))
    return out


_TRACE_SPIN = trace_spin_matrix()


class ReducedDynamics:
    """Reduced dynamical maps of the system qubit for one configuration.

    The Davies Liouvillian is diagonalized once; :meth:`maps` then returns
    ``Lambda_t`` for any number of time points. ``Lambda_t`` sends ``X`` to
    ``Tr_spin exp(tL)(X (x) rho_spin)``; the initial spin state may be
    overridden (``rho_spin``) for correlated preparations.
    """

    def __init__(self, cfg: ModelConfig, rho_spin=None):
        self.cfg = cfg
        self.generator = davies_generator(cfg)
        self.liouvillian = build_liouvillian(self.generator)
        self.exp = LiouvillianExp(self.liouvillian)
        self.rho_spin = spin_gibbs(cfg) if rho_spin is None else np.asarray(rho_spin, dtype=complex)
        self._embed = embed_matrix(self.rho_spin)

    def maps(self, times, check: bool = True, tol: float = 1e-7) -> np.ndarray:
        """Stack of 4x4 superoperator matrices ``Lambda_t``."""
        out = self.exp.sandwich(times, _TRACE_SPIN, self._embed)
        if check:
            lo = choi_min_eigenvalue(out)
            if lo.min() < -tol:
                k = int(np.argmin(lo))
                raise MapConstructionError(
                    f"reduced map not CP at t={np.atleast_1d(times)[k]:.6g}: "
                    f"min Choi eigenvalue {lo[k]:.3e}")
        return out

    def joint_maps(self, times) -> np.ndarray:
        return self.exp.sandwich(times)


def reduced_map(cfg: ModelConfig, t: float) -> SuperOperator:
    """``Lambda_t`` for a single time as a trace-preserving superoperator."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return SuperOperator(ReducedDynamics(cfg).maps([t])[0], True)
