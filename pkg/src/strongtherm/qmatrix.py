"""Dense complex linear algebra for small operators.

All matrix functions act on Hermitian input through its eigendecomposition.
Functions accept a single ``(d, d)`` matrix or a stack ``(..., d, d)`` and
return arrays of matching shape.

Vectorization uses column stacking, ``vec(M)[i + d*j] = M[i, j]``, so that
``vec(A X B) = (B.T kron A) vec(X)``.
"""

from __future__ import annotations

import numpy as np

from .errors import NotPositiveDefiniteError, NumericalFailure, RangeError, ShapeError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
EPS_PD = 1e-300
_EXP_LIMIT = 700.0

SUBSYSTEMS = {"S": 0, "system": 0, 0: 0, "R": 1, "reservoir": 1, 1: 1}


def _square(m, name="matrix"):
    m = np.asarray(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] < 1:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def dagger(m):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(m, -1, -2))


def as_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate and symmetrize a Hermitian matrix (or stack of them).

    The tolerance is absolute for entries of order one and scales with the
    largest entry otherwise.
    """
    m = _square(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    err = float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0
    if err > tol * scale:
        raise ValueError(f"matrix is not Hermitian: max |M - M^dag| = {err:.3e}")
    return 0.5 * (m + dagger(m))


def as_density(rho, trace_tol: float = TRACE_TOL, pos_tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, positive semidefinite."""
    rho = as_hermitian(rho)
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    if np.any(np.abs(tr - 1.0) > trace_tol):
        raise ValueError(f"density matrix trace deviates from one: {tr}")
    lam = np.linalg.eigvalsh(rho)
    if np.any(lam[..., 0] < -pos_tol):
        raise ValueError(f"density matrix has negative eigenvalue {lam[..., 0].min():.3e}")
    return rho


def herm_eig(m):
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    u : ndarray
        Unitary whose columns are the matching eigenvectors, so that
        ``m = u @ diag(w) @ u^dag``.
    """
    m = as_hermitian(m)
    try:
        return np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Hermitian eigensolver did not converge: {exc}") from exc


def _reassemble(f_w, u):
    return (u * f_w[..., None, :]) @ dagger(u)


def matrix_exp_herm(m, scale: float = 1.0) -> np.ndarray:
    """Return ``exp(scale * m)`` for Hermitian ``m``.

    Raises
    ------
    RangeError
        If ``scale * lambda`` exceeds 700 for some eigenvalue.
    """
    if not np.isfinite(scale):
        raise ValueError("scale must be finite")
    w, u = herm_eig(m)
    x = scale * w
    if x.size and np.max(x) > _EXP_LIMIT:
        raise RangeError(f"exp overflow: scale*lambda_max = {np.max(x):.4g} > {_EXP_LIMIT}")
    return _reassemble(np.exp(x), u)


def matrix_log_pd(m, eps_pd: float = EPS_PD) -> np.ndarray:
    """Principal logarithm of a Hermitian positive-definite matrix.

    Raises
    ------
    NotPositiveDefiniteError
        If an eigenvalue is not above ``eps_pd``; carries the eigenvalue.
    """
    w, u = herm_eig(m)
    lo = float(np.min(w)) if w.size else 1.0
    if lo <= eps_pd:
        raise NotPositiveDefiniteError(lo)
    return _reassemble(np.log(w), u)


def tensor(a, b) -> np.ndarray:
    """Kronecker product with the system factor ``a`` leftmost."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m, dims, keep="S") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    m : array_like, shape (..., dS*dR, dS*dR)
    dims : tuple of int
        ``(dS, dR)``.
    keep : {"S", "R"}
        Which factor survives.
    """
    m = _square(m)
    ds, dr = (int(x) for x in dims)
    if m.shape[-1] != ds * dr:
        raise ShapeError(f"dimension {m.shape[-1]} does not factor as {ds}x{dr}")
    try:
        side = SUBSYSTEMS[keep]
    except KeyError:
        raise ValueError(f"keep must be 'S' or 'R', got {keep!r}") from None
    t = m.reshape(m.shape[:-2] + (ds, dr, ds, dr))
    if side == 0:
        return np.einsum("...iaja->...ij", t)
    return np.einsum("...aiaj->...ij", t)


def vectorize(m) -> np.ndarray:
    """Column-stack a matrix (or the last two axes of a stack)."""
    m = np.asarray(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ShapeError(f"cannot vectorize shape {m.shape}")
    d = m.shape[-1]
    return np.swapaxes(m, -1, -2).reshape(m.shape[:-2] + (d * d,))


def devectorize(v, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=complex)
    n = v.shape[-1]
    d = int(round(np.sqrt(n))) if dim is None else int(dim)
    if d * d != n:
        raise ShapeError(f"vector of length {n} is not dim^2 for dim={d}")
    return np.swapaxes(v.reshape(v.shape[:-1] + (d, d)), -1, -2)


def expect(op, rho) -> np.ndarray:
    """Real part of ``Tr[op rho]``, broadcasting over stacks."""
    return np.real(np.einsum("...ij,...ji->...", op, rho))
