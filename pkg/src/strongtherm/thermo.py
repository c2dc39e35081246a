"""Nonequilibrium thermodynamics of a strongly coupled open system.

The central object is the operator

    H_circledast(t, beta) = -log(Lambda_t[exp(-beta H_S)]) / beta,

built from the reduced dynamical map ``Lambda_t`` alone. Internal energy,
free energy and entropy follow as

    E_U = Tr{rho [Hc + beta dHc]},  F = Tr{rho [Hc + log(rho)/beta]},
    S = Tr{rho [-log(rho) + beta^2 dHc]},

with ``dHc`` the derivative with respect to ``beta``. For driven systems the
exponent acquires ``-beta * int_0^t Lambda_s^*[dH_S/ds] ds``. Heat is fixed
by the first law and the entropy production is ``S(t) - S(0) - beta Q(t)``.

The ``beta`` derivative is a total derivative: each shifted ``beta`` reruns
the full pipeline, so the map's own temperature dependence (rates, initial
reservoir state) is included.

Traces are returned column-wise as :class:`ThermoTrace` (one array per
quantity); :meth:`ThermoTrace.points` yields per-time records.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, NamedTuple

import numpy as np
import scipy.linalg
from scipy.integrate import cumulative_trapezoid

from .dynmaps import choi_min_eigenvalue
from .errors import (DegenerateBranchError, MapConstructionError,
                     NotPositiveDefiniteError, ShapeError)
from .gkls import LiouvillianExp, build_liouvillian, tp_residual
from .qmatrix import (EPS_PD, as_density, as_hermitian, dagger, devectorize, expect,
                      partial_trace, tensor, vectorize)
from .spinboson import (DIMS, I2, ModelConfig, ReducedDynamics, _TRACE_SPIN,
                        davies_generator, embed_matrix, equilibrium_h_circledast,
                        full_hamiltonian, gibbs_state, mean_force_hamiltonian,
                        spin_gibbs, system_hamiltonian)

H_REL = 1e-4
ENTROPY_CLAMP = 1e-15


# ---------------------------------------------------------------------------
# entropies
# ---------------------------------------------------------------------------

def von_neumann_entropy(rho) -> np.ndarray:
    """``-Tr rho log rho`` with eigenvalues clamped at 1e-15 (``0 log 0 = 0``)."""
    lam = np.linalg.eigvalsh(as_hermitian(rho))
    lam = np.where(lam > ENTROPY_CLAMP, lam, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, -lam * np.log(np.where(lam > 0, lam, 1.0)), 0.0)
    return terms.sum(axis=-1)


def relative_entropy(rho1, rho2) -> float:
    """``Tr rho1 (log rho1 - log rho2)``; infinite if the support condition fails."""
    w2, u2 = np.linalg.eigh(as_hermitian(rho2))
    # weight of rho1 on each eigenvector of rho2
    overlap = np.real(np.einsum("ji,jk,ki->i", u2.conj(), rho1, u2))
    if np.any((w2 <= ENTROPY_CLAMP) & (overlap > ENTROPY_CLAMP)):
        return np.inf
    logw2 = np.log(np.where(w2 > ENTROPY_CLAMP, w2, 1.0))
    return float(-von_neumann_entropy(rho1) - np.sum(overlap * logw2))


# ---------------------------------------------------------------------------
# the operator H_circledast
# ---------------------------------------------------------------------------

def apply_maps(maps, x) -> np.ndarray:
    """Apply a stack of superoperator matrices to one operator or a matching stack."""
    maps = np.asarray(maps)
    x = np.asarray(x, dtype=complex)
    d = x.shape[-1]
    v = vectorize(x)
    if v.ndim == 1:
        out = maps @ v
    else:
        out = np.einsum("...ij,...j->...i", maps, v)
    return devectorize(out, d)


def adjoint_maps(maps) -> np.ndarray:
    return dagger(np.asarray(maps))


def _circledast(maps, exponent, beta, times=None) -> np.ndarray:
    """``-log(Lambda[exp(-beta X)]) / beta`` for stacks of maps and exponents ``X``.

    The smallest eigenvalue of ``X`` is shifted out before exponentiating and
    added back afterwards; linearity of the map makes this exact.
    """
    x = as_hermitian(exponent)
    w, u = np.linalg.eigh(x)
    shift = w[..., :1]
    gibbs = (u * np.exp(-beta * (w - shift))[..., None, :]) @ dagger(u)
    y = apply_maps(maps, gibbs)
    y = 0.5 * (y + dagger(y))
    wy, uy = np.linalg.eigh(y)
    lo = wy[..., 0]
    if np.any(lo <= EPS_PD):
        k = int(np.argmin(np.atleast_1d(lo)))
        t = None if times is None else float(np.atleast_1d(times)[k])
        raise NotPositiveDefiniteError(float(np.atleast_1d(lo)[k]), t)
    logy = (uy * np.log(wy)[..., None, :]) @ dagger(uy)
    d = x.shape[-1]
    return as_hermitian(-logy / beta + shift[..., None] * np.eye(d))


def h_circledast_static(map_t, h_s, beta: float) -> np.ndarray:
    """``-log(Lambda_t[exp(-beta H_S)]) / beta`` for one map or a stack of maps."""
    m = getattr(map_t, "matrix", map_t)
    return _circledast(np.asarray(m), np.asarray(h_s), beta)


def beta_derivative(f: Callable[[float], np.ndarray], beta: float,
                    h_rel: float = H_REL, richardson: bool = False) -> np.ndarray:
    """Central difference of ``f`` at ``beta`` with step ``h_rel * max(beta, 1)``.

    With ``richardson=True`` the step-halved difference is combined with the
    full-step one, cancelling the O(h^2) term.
    """
    h = h_rel * max(beta, 1.0)

    def central(step):
        return (np.asarray(f(beta + step)) - np.asarray(f(beta - step))) / (2 * step)

    d1 = central(h)
    if not richardson:
        return d1
    return (4 * central(h / 2) - d1) / 3


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

class ThermoPoint(NamedTuple):
    t: float
    e_u: float
    f: float
    s: float
    q: float
    w: float
    sigma: float
    sigma_rate: float
    e_u_weak: float
    s_vn: float


@dataclass
class ThermoTrace:
    """Thermodynamic quantities on a time grid (``k_B = 1``)."""

    t: np.ndarray
    beta: float
    e_u: np.ndarray
    f: np.ndarray
    s: np.ndarray
    q: np.ndarray
    w: np.ndarray
    sigma: np.ndarray
    sigma_rate: np.ndarray
    e_u_weak: np.ndarray
    s_vn: np.ndarray
    states: np.ndarray = field(repr=False)
    h_star: np.ndarray = field(repr=False)
    dh_star: np.ndarray = field(repr=False)
    maps: np.ndarray | None = field(default=None, repr=False)

    def points(self) -> Iterator[ThermoPoint]:
        for k in range(len(self.t)):
            yield ThermoPoint(*(float(getattr(self, n)[k]) for n in ThermoPoint._fields))

    def __len__(self):
        return len(self.t)

    def column(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name))

    def check(self, sigma_tol: float = 1e-6) -> None:
        """Raise ``ValueError`` unless the trace satisfies the second law."""
        if not np.all(np.isfinite(self.sigma)):
            raise ValueError("non-finite entropy production")
        if self.sigma.min() < -sigma_tol:
            k = int(np.argmin(self.sigma))
            raise ValueError(f"second law violated at t={self.t[k]:.6g}: sigma={self.sigma[k]:.3e}")


def _as_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1:
        raise ShapeError("time grid must be a nonempty 1-d array")
    if np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be nonnegative and strictly increasing")
    return grid


def _rate(y, t):
    if len(t) < 2:
        return np.zeros_like(y)
    return np.gradient(y, t)


def _cumtrapz(y, t):
    return cumulative_trapezoid(y, t, axis=0, initial=0.0)


@dataclass
class _Family:
    """Map family and reference data needed to rebuild ``H_circledast`` at any beta."""

    grid: np.ndarray
    maps_at: Callable[[float], np.ndarray]
    h_ref_at: Callable[[float], np.ndarray]
    h_s: np.ndarray                     # H_S(t) on the grid, (N, d, d)
    hdot: np.ndarray | None = None      # dH_S/dt on the grid, (N, d, d)

    def __post_init__(self):
        self.maps_at = lru_cache(maxsize=16)(self.maps_at)
        self.h_ref_at = lru_cache(maxsize=16)(self.h_ref_at)

    def integral(self, maps) -> np.ndarray | None:
        """``int_0^t Lambda_s^*[dH_S/ds] ds`` by the trapezoid rule on the grid."""
        if self.hdot is None:
            return None
        return _cumtrapz(apply_maps(adjoint_maps(maps), self.hdot), self.grid)

    def h_circledast(self, beta: float, upto: np.ndarray | None = None) -> np.ndarray:
        maps = self.maps_at(beta)
        x = np.broadcast_to(self.h_ref_at(beta), maps.shape[:-2] + self.h_ref_at(beta).shape)
        integ = self.integral(maps)
        if integ is not None:
            x = x + (integ if upto is None else integ[upto])
        return _circledast(maps, x, beta, self.grid)


def _run(family: _Family, beta: float, rho0, richardson: bool, h_rel: float = H_REL) -> ThermoTrace:
    grid = family.grid
    rho0 = np.asarray(rho0, dtype=complex)
    maps = family.maps_at(beta)
    hstar = family.h_circledast(beta)
    dh = beta_derivative(family.h_circledast, beta, h_rel, richardson)
    h_ref = family.h_ref_at(beta)
    dh_ref = beta_derivative(family.h_ref_at, beta, h_rel, richardson)

    rho = apply_maps(maps, rho0)
    rho = 0.5 * (rho + dagger(rho))
    s_vn = von_neumann_entropy(rho)
    e_u = expect(hstar + beta * dh, rho)
    f = expect(hstar, rho) - s_vn / beta
    s = s_vn + beta ** 2 * expect(dh, rho)
    if family.hdot is None:
        w = np.zeros_like(grid)
    else:
        w = _cumtrapz(expect(family.hdot, rho), grid)
    # t = 0 anchors from the reference operator
    e0 = expect(h_ref + beta * dh_ref, rho0)
    s0 = von_neumann_entropy(rho0) + beta ** 2 * expect(dh_ref, rho0)
    q = e_u - e0 - w
    sigma = s - s0 - beta * q
    return ThermoTrace(
        t=grid, beta=beta, e_u=e_u, f=f, s=s, q=q, w=w, sigma=sigma,
        sigma_rate=_rate(sigma, grid), e_u_weak=expect(family.h_s, rho), s_vn=s_vn,
        states=rho, h_star=hstar, dh_star=dh, maps=maps)


def static_family(cfg: ModelConfig, grid) -> _Family:
    grid = _as_grid(grid)
    hs = system_hamiltonian(cfg.omega0)
    return _Family(
        grid=grid,
        maps_at=lambda b: ReducedDynamics(cfg.with_beta(b)).maps(grid),
        h_ref_at=lambda b: hs,
        h_s=np.broadcast_to(hs, (len(grid), 2, 2)))


def thermo_static(cfg: ModelConfig, rho_s0, grid, richardson: bool = True) -> ThermoTrace:
    """Thermodynamic trace for a time-independent system Hamiltonian.

    ``Q(t) = E_U(t) - Tr[H_S rho_S(0)]``, ``W = 0`` and
    ``sigma = S(t) - S(0) - beta Q(t)``.
    """
    rho_s0 = as_density(rho_s0)
    return _run(static_family(cfg, grid), cfg.beta, rho_s0, richardson)


def thermo_from_maps(maps_at: Callable[[float], np.ndarray], h_s, beta: float, rho_s0, grid,
                     richardson: bool = True) -> ThermoTrace:
    """Static pipeline for any map family.

    Parameters
    ----------
    maps_at : callable
        ``maps_at(beta)`` returns the stack of superoperator matrices
        ``Lambda_t`` on ``grid`` for that inverse temperature.
    h_s : array_like
        Time-independent system Hamiltonian.
    """
    grid = _as_grid(grid)
    h_s = as_hermitian(h_s)
    d = h_s.shape[-1]
    fam = _Family(grid=grid, maps_at=lambda b: np.asarray(maps_at(b)), h_ref_at=lambda b: h_s,
                  h_s=np.broadcast_to(h_s, (len(grid), d, d)))
    return _run(fam, beta, as_density(rho_s0), richardson)


# ---------------------------------------------------------------------------
# driven system Hamiltonians
# ---------------------------------------------------------------------------

@dataclass
class DrivenProtocol:
    """Time-dependent system Hamiltonian ``H_S(t)`` with its derivative."""

    h_of_t: Callable[[float], np.ndarray]
    hdot_of_t: Callable[[float], np.ndarray]
    grid: np.ndarray

    def __post_init__(self):
        self.grid = _as_grid(self.grid)
        if self.grid[0] != 0.0:
            raise ValueError("protocol grid must start at t = 0")
        self.check_consistency()

    def _sampled(self, name: str, fn) -> np.ndarray:
        # sampled once per protocol, returned read-only
        cache = self.__dict__.setdefault("_samples", {})
        if name not in cache:
            arr = np.stack([as_hermitian(fn(t)) for t in self.grid])
            arr.flags.writeable = False
            cache[name] = arr
        return cache[name]

    def hamiltonians(self) -> np.ndarray:
        return self._sampled("h", self.h_of_t)

    def derivatives(self) -> np.ndarray:
        return self._sampled("hdot", self.hdot_of_t)

    def check_consistency(self, tol: float = 1e-6) -> None:
        for t in self.grid:
            h = 1e-5 * max(1.0, abs(t))
            lo = max(t - h, 0.0)
            fd = (np.asarray(self.h_of_t(t + h)) - np.asarray(self.h_of_t(lo))) / (t + h - lo)
            err = np.max(np.abs(fd - np.asarray(self.hdot_of_t(t))))
            if err > tol * max(1.0, np.max(np.abs(self.hdot_of_t(t)))):
                raise ValueError(f"hdot_of_t inconsistent with h_of_t at t={t:.6g} (err {err:.2e})")


def constant_protocol(h_s, grid) -> DrivenProtocol:
    h_s = as_hermitian(h_s)
    zero = np.zeros_like(h_s)
    return DrivenProtocol(lambda t: h_s, lambda t: zero, grid)


def ramp_protocol(omega_start: float, omega_end: float, duration: float, grid) -> DrivenProtocol:
    """``H_S(t) = omega(t) sigma_z / 2`` with a smooth sin^2 ramp over ``duration``."""
    sz = system_hamiltonian(1.0)
    delta = omega_end - omega_start

    def omega(t):
        x = min(max(t / duration, 0.0), 1.0)
        return omega_start + delta * np.sin(0.5 * np.pi * x) ** 2

    def omega_dot(t):
        if t < 0 or t > duration:
            return 0.0
        return delta * 0.5 * np.pi / duration * np.sin(np.pi * t / duration)

    return DrivenProtocol(lambda t: omega(t) * sz, lambda t: omega_dot(t) * sz, grid)


def _segments(cfg: ModelConfig, protocol: DrivenProtocol):
    """Group consecutive steps sharing one midpoint Hamiltonian.

    Yields ``(first_step, last_step, liouvillian_matrix)``.
    """
    grid = protocol.grid
    cache: dict[bytes, np.ndarray] = {}
    start, key_prev = 0, None
    for k, (a, b) in enumerate(zip(grid[:-1], grid[1:])):
        h = as_hermitian(protocol.h_of_t(0.5 * (a + b)))
        key = h.tobytes()
        if key not in cache:
            cache[key] = build_liouvillian(davies_generator(cfg, h_system=h)).matrix
        if key_prev is not None and key != key_prev:
            yield start, k - 1, cache[key_prev]
            start = k
        key_prev = key
    if key_prev is not None:
        yield start, len(grid) - 2, cache[key_prev]


def driven_maps(cfg: ModelConfig, protocol: DrivenProtocol, joint_inputs=None) -> np.ndarray:
    """Reduced maps for a driven system from piecewise-constant Davies Liouvillians.

    The Liouvillian on each grid step is evaluated at the step midpoint;
    runs of steps with the same Hamiltonian are exponentiated exactly from
    one cached decomposition. ``joint_inputs`` (16 x 4) sends a system
    operator to the initial joint operator, by default
    ``X -> X (x) rho_spin,beta``.
    """
    embed = embed_matrix(spin_gibbs(cfg)) if joint_inputs is None else joint_inputs
    grid = protocol.grid
    joint = np.empty((len(grid), 16, 16), dtype=complex)
    joint[0] = np.eye(16)
    for first, last, lmat in _segments(cfg, protocol):
        if last == first:
            joint[last + 1] = scipy.linalg.expm((grid[last + 1] - grid[first]) * lmat) @ joint[first]
        else:
            steps = LiouvillianExp(lmat).sandwich(grid[first + 1:last + 2] - grid[first])
            joint[first + 1:last + 2] = steps @ joint[first]
    return _TRACE_SPIN @ joint @ embed


def driven_family(cfg: ModelConfig, protocol: DrivenProtocol) -> _Family:
    h = protocol.hamiltonians()
    return _Family(
        grid=protocol.grid,
        maps_at=lambda b: driven_maps(cfg.with_beta(b), protocol),
        h_ref_at=lambda b: h[0],
        h_s=h, hdot=protocol.derivatives())


def _integral(protocol, adjoints, upto):
    hdot = protocol.derivatives()
    vals = apply_maps(np.asarray(adjoints), hdot)
    return _cumtrapz(vals, protocol.grid)[upto]


def h_circledast_driven(protocol: DrivenProtocol, maps, adjoints, beta: float, t_index: int) -> np.ndarray:
    """``-log(Lambda_t[exp(-beta H_S(0) - beta I(t))]) / beta`` at grid index ``t_index``.

    ``I(t) = int_0^t Lambda_s^*[dH_S/ds] ds`` uses the trapezoid rule on the
    protocol grid; ``maps`` and ``adjoints`` are stacks aligned with it.
    """
    return omega_aux(protocol, maps, adjoints, beta, t_index, t_index)


def omega_aux(protocol: DrivenProtocol, maps, adjoints, beta: float, t_index: int, r_index: int) -> np.ndarray:
    """``-log(Lambda_t[exp(-beta H_S(0) - beta I(r))]) / beta``."""
    n = len(protocol.grid)
    if not (0 <= t_index < n and 0 <= r_index < n):
        raise IndexError("grid index out of range")
    x = as_hermitian(protocol.h_of_t(protocol.grid[0])) + _integral(protocol, adjoints, r_index)
    return _circledast(np.asarray(maps)[t_index], x, beta, protocol.grid[t_index])


def thermo_driven(cfg: ModelConfig, protocol: DrivenProtocol, rho_s0, grid=None,
                  richardson: bool = True) -> ThermoTrace:
    """Thermodynamic trace for a driven system Hamiltonian.

    ``W(t) = int_0^t Tr[rho_S(s) dH_S/ds] ds`` and
    ``Q(t) = E_U(t) - <H_S(0)> - W(t)`` (both trapezoid on the protocol grid).
    """
    if grid is not None and not np.array_equal(_as_grid(grid), protocol.grid):
        raise ValueError("grid must equal the protocol grid")
    rho_s0 = as_density(rho_s0)
    return _run(driven_family(cfg, protocol), cfg.beta, rho_s0, richardson)


# ---------------------------------------------------------------------------
# correlated initial states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasuredState:
    rho_s0: np.ndarray
    conditional_states: tuple
    weights: np.ndarray
    projectors: tuple
    branches: tuple      # normalized joint states after each outcome


def _check_projectors(projectors, d=2, rank_one=True):
    projectors = [as_hermitian(p) for p in projectors]
    if not projectors:
        raise ValueError("at least one projector is required")
    total = sum(projectors)
    if np.max(np.abs(total - np.eye(d))) > 1e-10:
        raise ValueError("projectors do not sum to the identity")
    for i, p in enumerate(projectors):
        if p.shape != (d, d):
            raise ShapeError(f"projector shape {p.shape} != {(d, d)}")
        if np.max(np.abs(p @ p - p)) > 1e-10:
            raise ValueError("operators must be idempotent")
        if rank_one and abs(np.trace(p).real - 1.0) > 1e-10:
            raise ValueError("projectors must have rank one")
        for q in projectors[i + 1:]:
            if np.max(np.abs(p @ q)) > 1e-10:
                raise ValueError("projectors must be mutually orthogonal")
    return projectors


def _measure(cfg: ModelConfig, projectors) -> MeasuredState:
    joint = gibbs_state(full_hamiltonian(cfg), cfg.beta)
    weights, conds, branches = [], [], []
    for p in projectors:
        big = tensor(p, I2)
        sub = big @ joint @ big
        pk = float(np.real(np.trace(sub)))
        if pk < 1e-14:
            raise DegenerateBranchError(f"outcome probability {pk:.3e} below 1e-14")
        weights.append(pk)
        branches.append(sub / pk)
        conds.append(partial_trace(sub, DIMS, "R") / pk)
    rho0 = sum(pk * partial_trace(b, DIMS, "S") for pk, b in zip(weights, branches))
    return MeasuredState(as_hermitian(rho0), tuple(conds), np.array(weights),
                         tuple(projectors), tuple(branches))


def measured_initial_state(cfg: ModelConfig, projectors) -> MeasuredState:
    """Joint Gibbs state after a nonselective rank-one projective measurement.

    ``p_k = Tr[(P_k x I) rho_SR]``, ``rho_R|k = Tr_S[(P_k x I) rho_SR] / p_k``
    and ``rho_S(0) = sum_k p_k P_k``.
    """
    return _measure(cfg, _check_projectors(projectors))


def correlated_map_inputs(state: MeasuredState) -> np.ndarray:
    """Superoperator (16 x 4) ``X -> sum_k Tr[P_k X] branch_k``.

    Composed with the joint evolution and the partial trace this gives the
    CPTP map reproducing the reduced dynamics of the correlated state.
    """
    out = np.zeros((16, 4), dtype=complex)
    for p, b in zip(state.projectors, state.branches):
        out += np.outer(vectorize(b), vectorize(p).conj())
    return out


def correlated_maps(cfg: ModelConfig, state: MeasuredState, grid, tol: float = 1e-6) -> np.ndarray:
    """``tilde Lambda_t`` on the grid for a measurement-prepared state."""
    dyn = ReducedDynamics(cfg)
    maps = dyn.exp.sandwich(_as_grid(grid), _TRACE_SPIN, correlated_map_inputs(state))
    _check_cptp_stack(maps, tol)
    return maps


def _check_cptp_stack(maps, tol):
    lo = choi_min_eigenvalue(maps)
    if np.min(lo) < -tol or tp_residual(maps) > tol:
        raise MapConstructionError(
            f"correlated map is not CPTP: min Choi eigenvalue {np.min(lo):.3e}, "
            f"TP residual {tp_residual(maps):.3e}")


def measured_family(cfg: ModelConfig, projectors, grid, rank_one=True) -> tuple[_Family, MeasuredState]:
    grid = _as_grid(grid)
    projectors = _check_projectors(projectors, rank_one=rank_one)
    hs = system_hamiltonian(cfg.omega0)

    def maps_at(b):
        c = cfg.with_beta(b)
        return correlated_maps(c, _measure(c, projectors), grid)

    fam = _Family(grid=grid, maps_at=maps_at,
                  h_ref_at=lambda b: equilibrium_h_circledast(cfg.with_beta(b)),
                  h_s=np.broadcast_to(hs, (len(grid), 2, 2)))
    return fam, _measure(cfg, projectors)


def thermo_measured(cfg: ModelConfig, projectors, grid, richardson: bool = True) -> ThermoTrace:
    """Thermodynamic trace after a projective measurement on the joint Gibbs state.

    ``H_circledast(eq, beta)`` replaces ``H_S`` as the reference operator and
    ``tilde Lambda_t`` replaces ``Lambda_t``; the anchors ``E_U(0)`` and ``S(0)``
    are evaluated with ``H_circledast(eq, beta)`` and ``rho_S(0) = sum p_k P_k``.
    """
    fam, state = measured_family(cfg, projectors, grid)
    return _run(fam, cfg.beta, state.rho_s0, richardson)


def thermo_equilibrium(cfg: ModelConfig, grid, richardson: bool = True) -> ThermoTrace:
    """Joint Gibbs start without measurement or driving (stationary reference)."""
    fam, state = measured_family(cfg, [np.eye(2)], grid, rank_one=False)
    return _run(fam, cfg.beta, state.rho_s0, richardson)


def thermo_driven_from_equilibrium(cfg: ModelConfig, protocol: DrivenProtocol,
                                   richardson: bool = True) -> ThermoTrace:
    """Driving switched on at ``t = 0`` from the joint Gibbs state.

    Uses the trivial measurement ``{I}``: the joint Gibbs state itself is the
    only branch, ``H_circledast(eq, beta)`` is the reference operator and the
    maps come from piecewise-constant Davies Liouvillians.
    """
    grid = protocol.grid
    hs = protocol.hamiltonians()

    def maps_at(b):
        c = cfg.with_beta(b)
        state = _measure(c, [np.eye(2)])
        maps = driven_maps(c, protocol, correlated_map_inputs(state))
        _check_cptp_stack(maps, 1e-6)
        return maps

    fam = _Family(grid=grid, maps_at=maps_at,
                  h_ref_at=lambda b: equilibrium_h_circledast(cfg.with_beta(b)),
                  h_s=hs, hdot=protocol.derivatives())
    rho0 = _measure(cfg, [np.eye(2)]).rho_s0
    return _run(fam, cfg.beta, rho0, richardson)


# ---------------------------------------------------------------------------
# comparison backends
# ---------------------------------------------------------------------------

@dataclass
class MeanForceTrace:
    t: np.ndarray
    beta: float
    e_u_star: np.ndarray
    s_star: np.ndarray
    q_star: np.ndarray
    sigma_star: np.ndarray


def mean_force_thermo(cfg: ModelConfig, states, grid, richardson: bool = True) -> MeanForceTrace:
    """Internal energy, entropy and entropy production built on ``H*(beta)``.

    ``E_U* = Tr{rho [H* + beta dH*]}``, ``S* = Tr{rho [-log rho + beta^2 dH*]}``,
    ``Q* = E_U*(t) - E_U*(0)`` and ``sigma* = S*(t) - S*(0) - beta Q*``; the
    first state is taken as the initial one.
    """
    grid = _as_grid(grid)
    states = np.asarray(states, dtype=complex)
    if len(states) != len(grid):
        raise ShapeError("one state per grid point is required")
    beta = cfg.beta
    hstar = mean_force_hamiltonian(cfg)
    dh = beta_derivative(lambda b: mean_force_hamiltonian(cfg.with_beta(b)), beta,
                         richardson=richardson)
    e = expect(hstar + beta * dh, states)
    s = von_neumann_entropy(states) + beta ** 2 * expect(dh, states)
    q = e - e[0]
    return MeanForceTrace(grid, beta, e, s, q, s - s[0] - beta * q)


@dataclass
class WeakTrace:
    t: np.ndarray
    beta: float
    e_weak: np.ndarray
    s_vn: np.ndarray
    q_weak: np.ndarray
    sigma_weak: np.ndarray
    sigma_weak_rate: np.ndarray


def weak_reference(h_s, states, grid, beta: float) -> WeakTrace:
    """Weak-coupling quantities: ``<H_S>``, von Neumann entropy and
    ``Q^(w) = int Tr[H_S drho/dt] dt`` (finite-difference derivative, trapezoid sum).

    ``h_s`` may be a single Hamiltonian or one per grid point.
    """
    grid = _as_grid(grid)
    states = np.asarray(states, dtype=complex)
    h = np.broadcast_to(np.asarray(h_s, dtype=complex), states.shape)
    e = expect(h, states)
    svn = von_neumann_entropy(states)
    if len(grid) > 1:
        rdot = np.gradient(states, grid, axis=0)
        q = _cumtrapz(expect(h, rdot), grid)
    else:
        q = np.zeros(1)
    sig = svn - svn[0] - beta * q
    return WeakTrace(grid, beta, e, svn, q, sig, _rate(sig, grid))
