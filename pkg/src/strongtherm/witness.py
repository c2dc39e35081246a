"""Detection of negative entropy-production rates.

A negative rate ``d sigma / dt < 0`` at some time rules out CP-divisible
dynamics, so it certifies non-Markovianity. The converse does not hold:
a report without intervals says nothing about Markovianity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .dynmaps import IntervalVerdict, divisibility_scan

DEFAULT_THRESHOLD = 1e-6


@dataclass(frozen=True)
class NegativeInterval:
    t_start: float
    t_end: float
    min_rate: float
    # verdicts of the divisibility scan on grid steps inside the interval
    divisibility: tuple = ()

    @property
    def non_cp_steps(self) -> int:
        return sum(v.cp_divisible is False for v in self.divisibility)


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of :func:`detect_negative_rate`.

    Attributes
    ----------
    intervals : tuple of NegativeInterval
        Maximal, disjoint, time-ordered intervals on which the rate is below
        ``-threshold``.
    total_negative_area : float
        Trapezoid integral of ``max(0, -d sigma/dt)`` over the whole grid.
    threshold : float
    divisibility : tuple of IntervalVerdict
        Full scan when maps were supplied, else empty.
    """

    intervals: tuple
    total_negative_area: float
    threshold: float
    divisibility: tuple = field(default=(), repr=False)

    @property
    def non_markovian(self) -> bool:
        """True when a negative rate was found. False means *inconclusive*."""
        return bool(self.intervals)

    @property
    def divisibility_agreement(self) -> list[bool | None]:
        """Per interval: does the scan also find a non-CP step inside it?

        ``None`` when no maps were supplied.
        """
        if not self.divisibility:
            return [None] * len(self.intervals)
        return [iv.non_cp_steps > 0 for iv in self.intervals]

    @property
    def non_cp_steps(self) -> int:
        return sum(v.cp_divisible is False for v in self.divisibility)

    def summary(self) -> str:
        if not self.intervals:
            return (f"no rate below -{self.threshold:g} found; "
                    "this is inconclusive about Markovianity")
        lo = min(iv.min_rate for iv in self.intervals)
        text = (f"{len(self.intervals)} interval(s) with negative entropy-production rate "
                f"(min {lo:.3e}, area {self.total_negative_area:.3e}): dynamics is non-Markovian")
        if self.divisibility:
            text += f"; divisibility scan finds {self.non_cp_steps} non-CP step(s)"
        return text


def _columns(trace):
    if hasattr(trace, "sigma_rate") and hasattr(trace, "t"):
        return np.asarray(trace.t, dtype=float), np.asarray(trace.sigma_rate, dtype=float)
    pts = list(trace)
    return (np.array([p.t for p in pts], dtype=float),
            np.array([p.sigma_rate for p in pts], dtype=float))


def detect_negative_rate(trace, threshold: float = DEFAULT_THRESHOLD, maps=None,
                         cp_tol: float = 1e-9) -> WitnessReport:
    """Locate maximal intervals where the entropy-production rate is below ``-threshold``.

    Parameters
    ----------
    trace : ThermoTrace or iterable of ThermoPoint
        Must carry ``t`` and ``sigma_rate``.
    threshold : float
        Positive tolerance, tied to the finite-difference error of the rate.
    maps : array_like, optional
        Map family on the same grid. When given, :func:`divisibility_scan`
        runs and its verdicts are attached to each interval.

    Raises
    ------
    ValueError
        For fewer than three grid points or a nonpositive threshold.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    t, rate = _columns(trace)
    if len(t) < 3:
        raise ValueError("at least three grid points are needed to resolve a rate")
    if not np.all(np.isfinite(rate)):
        raise ValueError("entropy-production rate has non-finite entries")

    scan: tuple[IntervalVerdict, ...] = ()
    if maps is not None:
        maps = np.asarray(getattr(maps, "matrix", maps))
        scan = tuple(divisibility_scan(t, maps, cp_tol))

    neg = rate < -threshold
    # run boundaries of the boolean mask
    edges = np.flatnonzero(np.diff(np.concatenate([[0], neg.astype(np.int8), [0]])))
    intervals = []
    for a, b in zip(edges[::2], edges[1::2] - 1):
        # scan entry k covers [t_k, t_k+1]; include one step either side
        inside = scan[max(a - 1, 0):b + 1] if scan else ()
        intervals.append(NegativeInterval(float(t[a]), float(t[b]), float(rate[a:b + 1].min()), inside))

    area = float(trapezoid(np.maximum(0.0, -rate), t))
    return WitnessReport(tuple(intervals), area, threshold, scan)
