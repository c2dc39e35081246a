from __future__ import annotations

import numpy as np
import pytest

from strongtherm.gkls import GKLSGenerator, LiouvillianExp, build_liouvillian
from strongtherm.spinboson import ModelConfig, gibbs_state, system_hamiltonian
from strongtherm.thermo import ThermoPoint, thermo_from_maps, thermo_static
from strongtherm.witness import detect_negative_rate

GROUND = np.diag([0.0, 1.0]).astype(complex)
HS = system_hamiltonian(1.0)
SM = np.array([[0, 0], [1, 0]], dtype=complex)


def qubit_semigroup_maps(grid, gamma=0.05):
    def maps_at(beta):
        n = 1 / np.expm1(beta)
        gen = GKLSGenerator(HS, ((SM, gamma * (n + 1)), (SM.conj().T, gamma * n)))
        return LiouvillianExp(build_liouvillian(gen)).sandwich(grid)
    return maps_at


@pytest.fixture(scope="module")
def fig1_trace():
    return thermo_static(ModelConfig(beta=1.0), GROUND, np.linspace(0, 100, 801))


def test_semigroup_has_no_interval():
    grid = np.linspace(0, 200, 401)
    maps_at = qubit_semigroup_maps(grid)
    for beta in (0.1, 1.0, 10.0):
        tr = thermo_from_maps(maps_at, HS, beta, GROUND, grid)
        rep = detect_negative_rate(tr, maps=tr.maps)
        assert rep.intervals == ()
        assert not rep.non_markovian
        assert rep.non_cp_steps == 0
        assert "inconclusive" in rep.summary()


def test_fig1_parameters_detected(fig1_trace):
    rep = detect_negative_rate(fig1_trace, maps=fig1_trace.maps)
    assert rep.non_markovian and rep.total_negative_area > 0
    assert rep.non_cp_steps > 0
    # a negative rate cannot coexist with CP intermediate maps on the same steps
    assert any(rep.divisibility_agreement)
    assert "non-Markovian" in rep.summary()


@pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
def test_cp_steps_do_not_decrease_sigma(beta):
    # a CPTP intermediate map contracts the relative entropy to the
    # propagated reference state, so sigma cannot drop across that step
    t = np.linspace(0, 5000, 4001)
    tr = thermo_static(ModelConfig(beta=beta), GROUND, t)
    cp = np.array([v.cp_divisible is True for v in detect_negative_rate(tr, maps=tr.maps).divisibility])
    step_rate = np.diff(tr.sigma) / np.diff(t)
    assert cp.sum() > len(cp) // 3
    assert step_rate[cp].min() >= -1e-8


def test_intervals_disjoint_sorted(fig1_trace):
    rep = detect_negative_rate(fig1_trace)
    ends = [(iv.t_start, iv.t_end) for iv in rep.intervals]
    assert all(a <= b for a, b in ends)
    assert all(b1 < a2 for (_, b1), (a2, _) in zip(ends, ends[1:]))
    for iv in rep.intervals:
        mask = (fig1_trace.t >= iv.t_start) & (fig1_trace.t <= iv.t_end)
        assert np.all(fig1_trace.sigma_rate[mask] < -rep.threshold)
        assert iv.min_rate == fig1_trace.sigma_rate[mask].min()
    assert rep.divisibility_agreement == [None] * len(rep.intervals)


def test_gibbs_start_empty():
    tr = thermo_static(ModelConfig(beta=1.0), gibbs_state(HS, 1.0), np.linspace(0, 100, 401))
    assert detect_negative_rate(tr).intervals == ()


def test_accepts_point_records(fig1_trace):
    pts = list(fig1_trace.points())
    assert isinstance(pts[0], ThermoPoint)
    a = detect_negative_rate(pts)
    b = detect_negative_rate(fig1_trace)
    assert a.intervals == b.intervals


def test_refinement_stability():
    cfg = ModelConfig(beta=1.0)
    coarse = detect_negative_rate(thermo_static(cfg, GROUND, np.linspace(0, 30, 601)))
    fine = detect_negative_rate(thermo_static(cfg, GROUND, np.linspace(0, 30, 1201)))
    step = 30 / 600
    assert len(coarse.intervals) == len(fine.intervals)
    for a, b in zip(coarse.intervals, fine.intervals):
        assert abs(a.t_start - b.t_start) <= step + 1e-12
        assert abs(a.t_end - b.t_end) <= step + 1e-12


def test_input_errors(fig1_trace):
    with pytest.raises(ValueError, match="three"):
        detect_negative_rate(list(fig1_trace.points())[:2])
    with pytest.raises(ValueError):
        detect_negative_rate(fig1_trace, threshold=0.0)
