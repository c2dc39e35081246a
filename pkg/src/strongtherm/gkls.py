"""GKLS generators, Liouvillian assembly and exact propagation.

Superoperators act on column-stacked operators (see :mod:`strongtherm.qmatrix`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NumericalFailure, PropagationAccuracyError, ShapeError
from .qmatrix import as_hermitian, dagger, devectorize, vectorize

POSITIVITY_TOL = 1e-8
TP_TOL = 1e-9
# eigenvector condition number above which exp(tL) falls back to expm
_COND_LIMIT = 1e8
# allowed max-norm deviation of the eigen route from expm at probe times
_PROBE_TOL = 1e-10


@dataclass(frozen=True)
class GKLSGenerator:
    """Hamiltonian (angular frequency units) plus weighted jump operators."""

    hamiltonian: np.ndarray
    jumps: tuple = ()

    def __post_init__(self):
        h = as_hermitian(self.hamiltonian)
        d = h.shape[-1]
        jumps = []
        for op, rate in self.jumps:
            op = np.asarray(op, dtype=complex)
            if op.shape != (d, d):
                raise ShapeError(f"jump operator shape {op.shape} != {(d, d)}")
            rate = float(rate)
            if not rate >= 0.0:
                raise ValueError(f"jump rates must be nonnegative, got {rate}")
            jumps.append((op, rate))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def rhs(self, rho):
        """Master-equation right-hand side evaluated directly on matrices."""
        h = self.hamiltonian
        out = -1j * (h @ rho - rho @ h)
        for a, g in self.jumps:
            if g == 0.0:
                continue
            ad = a.conj().T
            ada = ad @ a
            out = out + g * (a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada))
        return out


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map on ``d x d`` operators stored as a ``d^2 x d^2`` matrix."""

    matrix: np.ndarray
    trace_preserving: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"superoperator matrix must be square, got {m.shape}")
        d = int(round(np.sqrt(m.shape[0])))
        if d * d != m.shape[0]:
            raise ShapeError(f"superoperator size {m.shape[0]} is not a square")
        object.__setattr__(self, "matrix", m)
        if self.trace_preserving:
            res = tp_residual(m)
            if res > TP_TOL:
                raise NumericalFailure(f"map flagged trace preserving has residual {res:.3e}")

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return devectorize(vectorize(rho) @ self.matrix.T, self.dim)

    __call__ = apply

    def __matmul__(self, other: "SuperOperator") -> "SuperOperator":
        return SuperOperator(self.matrix @ other.matrix,
                             self.trace_preserving and other.trace_preserving)

    @classmethod
    def identity(cls, dim: int) -> "SuperOperator":
        return cls(np.eye(dim * dim, dtype=complex), True)


def tp_residual(m) -> float:
    """``max |vec(I)^dag S - vec(I)^dag|`` for a superoperator matrix (or stack)."""
    m = np.asarray(m)
    d = int(round(np.sqrt(m.shape[-1])))
    vi = vectorize(np.eye(d))
    return float(np.max(np.abs(vi.conj() @ m - vi.conj())))


def left(a) -> np.ndarray:
    """Superoperator of ``X -> a X``."""
    a = np.asarray(a, dtype=complex)
    return np.kron(np.eye(a.shape[0]), a)


def right(b) -> np.ndarray:
    """Superoperator of ``X -> X b``."""
    b = np.asarray(b, dtype=complex)
    return np.kron(b.T, np.eye(b.shape[0]))


def build_liouvillian(gen: GKLSGenerator) -> SuperOperator:
    """Matrix of ``rho -> -i[H, rho] + sum_k g_k (A rho A^+ - {A^+ A, rho}/2)``."""
    h = gen.hamiltonian
    lmat = -1j * (left(h) - right(h))
    for a, g in gen.jumps:
        if g == 0.0:
            continue
        ada = a.conj().T @ a
        lmat = lmat + g * (np.kron(a.conj(), a) - 0.5 * (left(ada) + right(ada)))
    return SuperOperator(lmat)


class LiouvillianExp:
    """Cached exponential ``t -> exp(t L)`` of a time-independent Liouvillian.

    The Liouvillian is diagonalized once; each time point then costs a
    diagonal rescaling. The eigen route is checked against
    :func:`scipy.linalg.expm` at a few probe times of every request (nearly
    coincident eigenvalues can spoil it while the eigenvector condition
    number stays small). When the check fails, or the eigenvector matrix is
    ill-conditioned, the evaluation falls back to ``expm``: one step
    exponential raised to successive powers on uniform grids, one
    exponential per time point otherwise.
    """

    def __init__(self, liouvillian: SuperOperator | np.ndarray):
        lmat = liouvillian.matrix if isinstance(liouvillian, SuperOperator) else np.asarray(liouvillian)
        self.lmat = np.asarray(lmat, dtype=complex)
        self.n = self.lmat.shape[0]
        w, v = np.linalg.eig(self.lmat)
        self.condition = float(np.linalg.cond(v))
        self.diagonalizable = np.isfinite(self.condition) and self.condition < _COND_LIMIT
        self._checked: dict[float, bool] = {}
        if self.diagonalizable:
            self.w, self.v = w, v
            self.vinv = np.linalg.inv(v)

    def _eig_route(self, times) -> np.ndarray:
        phase = np.exp(np.outer(times, self.w))
        return np.einsum("ik,tk,kj->tij", self.v, phase, self.vinv)

    def eigen_route_ok(self, times) -> bool:
        """Compare the eigen route with ``expm`` at probe times spanning ``times``."""
        if not self.diagonalizable:
            return False
        t_max = float(np.max(times)) if len(times) else 0.0
        probes = [t for t in (t_max, 0.1 * t_max, 0.01 * t_max) if t > 0]
        for t in probes:
            if t not in self._checked:
                ref = scipy.linalg.expm(t * self.lmat)
                err = np.max(np.abs(self._eig_route([t])[0] - ref))
                self._checked[t] = err <= _PROBE_TOL * max(1.0, float(np.max(np.abs(ref))))
            if not self._checked[t]:
                return False
        return True

    def _expm_stack(self, times) -> np.ndarray:
        out = np.empty((len(times), self.n, self.n), dtype=complex)
        steps = np.diff(times)
        uniform = len(times) > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0)
        if uniform:
            step = scipy.linalg.expm(steps[0] * self.lmat)
            out[0] = scipy.linalg.expm(times[0] * self.lmat)
            for k in range(1, len(times)):
                out[k] = step @ out[k - 1]
            return out
        for k, t in enumerate(times):
            out[k] = scipy.linalg.expm(t * self.lmat)
        return out

    def sandwich(self, times, left_op=None, right_op=None) -> np.ndarray:
        """Stack of ``left_op @ exp(t L) @ right_op`` for each ``t`` in ``times``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0):
            raise ValueError("propagation times must be nonnegative")
        lo = np.eye(self.n) if left_op is None else np.asarray(left_op)
        ro = np.eye(self.n) if right_op is None else np.asarray(right_op)
        if self.eigen_route_ok(times):
            a = lo @ self.v
            b = self.vinv @ ro
            phase = np.exp(np.outer(times, self.w))
            out = np.einsum("ik,tk,kj->tij", a, phase, b)
        else:
            out = lo @ self._expm_stack(times) @ ro
        # exp(0 L) is the identity; avoid V V^-1 round-off there
        out[times == 0] = lo @ ro
        if not np.all(np.isfinite(out)):
            raise NumericalFailure("superoperator exponential produced non-finite values")
        return out

    def __call__(self, t) -> np.ndarray:
        return self.sandwich([t])[0]


def propagator(liouvillian: SuperOperator, t: float) -> SuperOperator:
    """Dynamical map ``exp(t L)``, flagged trace preserving."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return SuperOperator.identity(liouvillian.dim)
    return SuperOperator(LiouvillianExp(liouvillian)(t), True)


def _check_state(rho, t):
    lam = np.linalg.eigvalsh(rho)
    if lam[..., 0].min() < -POSITIVITY_TOL:
        raise PropagationAccuracyError(
            f"propagated state at t={t:.6g} has eigenvalue {lam[..., 0].min():.3e}")


def propagate(liouvillian: SuperOperator, rho0, t: float) -> np.ndarray:
    """Return ``devec(exp(t L) vec(rho0))``.

    Raises
    ------
    PropagationAccuracyError
        If the result has an eigenvalue below ``-1e-8``.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy()
    rho = propagator(liouvillian, t).apply(rho0)
    rho = 0.5 * (rho + dagger(rho))
    _check_state(rho, t)
    return rho


def propagate_many(liouvillian: SuperOperator, rho0, times) -> np.ndarray:
    """States ``rho(t)`` for every entry of ``times``, sharing one decomposition."""
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[-1]
    maps = LiouvillianExp(liouvillian).sandwich(times)
    rho = devectorize(maps @ vectorize(rho0), d)
    rho = 0.5 * (rho + dagger(rho))
    _check_state(rho, float(np.max(times)))
    return rho


def adjoint(s: SuperOperator) -> SuperOperator:
    """Hilbert-Schmidt (Heisenberg-picture) adjoint."""
    return SuperOperator(s.matrix.conj().T)


def piecewise_propagators(liouvillians: Sequence[np.ndarray], steps: Sequence[float]) -> np.ndarray:
    """Cumulative products of ``exp(dt_k L_k)``, time ordered.

    Returns an array of shape ``(K+1, n, n)`` whose entry ``k`` is the map from
    the initial time to the end of step ``k`` (entry 0 is the identity).
    """
    if len(liouvillians) != len(steps):
        raise ShapeError("one step length per Liouvillian is required")
    n = np.asarray(liouvillians[0]).shape[0] if len(liouvillians) else 1
    out = np.empty((len(steps) + 1, n, n), dtype=complex)
    out[0] = np.eye(n)
    for k, (lmat, dt) in enumerate(zip(liouvillians, steps)):
        out[k + 1] = scipy.linalg.expm(dt * np.asarray(lmat)) @ out[k]
    return out


def _norm_estimate(gen: GKLSGenerator) -> float:
    n = 2 * np.linalg.norm(gen.hamiltonian, 2)
    for a, g in gen.jumps:
        n += 2 * g * np.linalg.norm(a, 2) ** 2
    return float(n)


def ode_oracle(gen: GKLSGenerator, rho0, t: float, dt: float) -> np.ndarray:
    """Fourth-order Runge-Kutta integration of the master equation.

    The right-hand side acts directly on matrices (no Kronecker assembly of
    the Liouvillian), so this is an independent check of :func:`propagate`.
    The fixed step is linear in ``rho`` and is tabulated once on the basis
    matrices before iterating. ``rho0`` may be a stack.
    """
    rho = np.array(rho0, dtype=complex)
    if t < 0 or dt <= 0:
        raise ValueError("need t >= 0 and dt > 0")
    if t == 0:
        return rho
    nsteps = int(np.ceil(t / dt - 1e-9))
    h = t / nsteps
    if h * _norm_estimate(gen) > 0.5:
        raise NumericalFailure(f"RK4 step {h:.3g} too large for generator norm "
                               f"{_norm_estimate(gen):.3g}")
    # rho' = K rho + rho K^+ + sum g A rho A^+
    k = -1j * gen.hamiltonian
    jumps = [(a, g) for a, g in gen.jumps if g != 0.0]
    for a, g in jumps:
        k = k - 0.5 * g * (a.conj().T @ a)
    kd = k.conj().T
    if jumps:
        a_stack = np.stack([np.sqrt(g) * a for a, g in jumps])
        ad_stack = dagger(a_stack)

        def f(r):
            return k @ r + r @ kd + np.einsum("kij,...jl,klm->...im", a_stack, r, ad_stack)
    else:
        def f(r):
            return k @ r + r @ kd

    def step(r):
        k1 = f(r)
        k2 = f(r + 0.5 * h * k1)
        k3 = f(r + 0.5 * h * k2)
        k4 = f(r + h * k3)
        return r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    # one RK4 step is linear: tabulate it on the basis matrices, then iterate
    d = rho.shape[-1]
    m = vectorize(step(devectorize(np.eye(d * d, dtype=complex)))).T
    v = vectorize(rho)
    for _ in range(nsteps):
        v = v @ m.T
    return devectorize(v)
