"""Choi matrices, CPTP checks, intermediate maps and divisibility scans.

Choi convention: ``C = sum_ij E_ij (x) S(E_ij)``, so ``Tr C = d`` for
trace-preserving maps and ``C >= 0`` iff ``S`` is completely positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InversionError
from .gkls import SuperOperator, tp_residual
from .qmatrix import dagger

COND_LIMIT = 1e12


def _matrix(s):
    return s.matrix if isinstance(s, SuperOperator) else np.asarray(s, dtype=complex)


def choi(s) -> np.ndarray:
    """Choi matrix of a superoperator (or of a stack of superoperator matrices)."""
    m = _matrix(s)
    d = int(round(np.sqrt(m.shape[-1])))
    s4 = m.reshape(m.shape[:-2] + (d, d, d, d))
    # s4[..., b, a, j, i] = <a|S(|i><j|)|b>
    c4 = np.moveaxis(s4, (-1, -3, -2, -4), (-4, -3, -2, -1))
    return c4.reshape(m.shape)


def from_choi(c) -> np.ndarray:
    """Superoperator matrix whose Choi matrix is ``c`` (inverse of :func:`choi`)."""
    c = np.asarray(c, dtype=complex)
    d = int(round(np.sqrt(c.shape[-1])))
    c4 = c.reshape(c.shape[:-2] + (d, d, d, d))
    s4 = np.moveaxis(c4, (-4, -3, -2, -1), (-1, -3, -2, -4))
    return s4.reshape(c.shape)


def choi_min_eigenvalue(s) -> np.ndarray:
    c = choi(s)
    return np.linalg.eigvalsh(0.5 * (c + dagger(c)))[..., 0]


@dataclass(frozen=True)
class CPTPVerdict:
    cp: bool
    tp: bool
    min_choi_eigenvalue: float
    tp_residual: float

    @property
    def cptp(self) -> bool:
        return self.cp and self.tp

    def __bool__(self):
        return self.cptp


def is_cptp(s, tol: float = 1e-9) -> CPTPVerdict:
    """Check complete positivity and trace preservation at tolerance ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    m = _matrix(s)
    lo = float(choi_min_eigenvalue(m))
    res = tp_residual(m)
    return CPTPVerdict(lo >= -tol, res <= tol, lo, res)


def intermediate_map(s_t, s_s, cond_limit: float = COND_LIMIT) -> SuperOperator:
    """``Lambda_{t,s} = Lambda_t Lambda_s^{-1}``.

    The inverse is formed from the eigendecomposition of ``Lambda_s``; no
    pseudo-inverse regularization is attempted.

    Raises
    ------
    InversionError
        If ``Lambda_s`` (or its eigenvector basis) has condition number above
        ``cond_limit``.
    """
    a, b = _matrix(s_t), _matrix(s_s)
    try:
        w, v = np.linalg.eig(b)
        cond_v = np.linalg.cond(v)
        wmin = np.min(np.abs(w))
        cond = cond_v * np.max(np.abs(w)) / wmin if wmin > 0 else np.inf
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > cond_limit:
        raise InversionError(cond)
    inv = (v / w) @ np.linalg.inv(v)
    return SuperOperator(a @ inv)


@dataclass(frozen=True)
class IntervalVerdict:
    t_start: float
    t_end: float
    cp_divisible: bool | None
    min_choi_eigenvalue: float
    error: str | None = None


def divisibility_scan(times, maps, tol: float = 1e-9) -> list[IntervalVerdict]:
    """CP verdict of the intermediate map on each consecutive pair of times.

    Intervals whose left map cannot be inverted are reported with
    ``cp_divisible=None`` and the error message; the scan continues.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    maps = [_matrix(m) for m in maps]
    if len(maps) != len(times):
        raise ValueError("one map per time is required")
    out = []
    for k in range(len(times) - 1):
        try:
            mid = intermediate_map(maps[k + 1], maps[k])
        except InversionError as exc:
            out.append(IntervalVerdict(times[k], times[k + 1], None, np.nan, str(exc)))
            continue
        lo = float(choi_min_eigenvalue(mid.matrix))
        out.append(IntervalVerdict(times[k], times[k + 1], lo >= -tol, lo))
    return out


def transpose_map(d: int) -> SuperOperator:
    """The (positive but not completely positive) transposition map."""
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            m[j + d * i, i + d * j] = 1.0
    return SuperOperator(m, True)


def depolarizing_map(d: int) -> SuperOperator:
    """Completely depolarizing map ``X -> Tr(X) I / d``."""
    vi = np.eye(d).reshape(-1)
    return SuperOperator(np.outer(vi, vi) / d, True)
