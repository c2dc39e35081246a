#!/usr/bin/env python3
"""
02_gibbs_start_reversibility.py

Start the qubit in its own Gibbs state exp(-beta H_S)/Z_S, uncorrelated with
the spin, and let it evolve.

Two things happen at once:
  - The density matrix moves, since the coupled qubit does not relax to the
    product Gibbs state.
  - Every thermodynamic variable built on H_circledast(t, beta) stays fixed
    and sigma(t) stays at zero.

For contrast, the same states are fed into the mean-force construction
H*(beta). Its entropy production sigma*(t) dips below zero here, so it
cannot serve as a nonequilibrium entropy production for this start.

Run:
  python3 demos/02_gibbs_start_reversibility.py
"""

from __future__ import annotations

import numpy as np

from strongtherm import ModelConfig, gibbs_state, mean_force_thermo, thermo_static
from strongtherm.spinboson import system_hamiltonian

t = np.linspace(0.0, 20000.0, 8001)
for beta in (0.1, 0.5, 1.0):
    cfg = ModelConfig(kappa=0.95, beta=beta)
    rho0 = gibbs_state(system_hamiltonian(cfg.omega0), beta)
    tr = thermo_static(cfg, rho0, t)
    star = mean_force_thermo(cfg, tr.states, t)
    moved = np.max(np.abs(tr.states - tr.states[0]))
    drift = max(np.ptp(tr.e_u), np.ptp(tr.s), np.ptp(tr.f))
    print(f"beta={beta:4g}: state moves by {moved:.3e}, "
          f"E_U/S/F drift {drift:.1e}, max|sigma| {np.max(np.abs(tr.sigma)):.1e}, "
          f"min sigma* {star.sigma_star.min():.3e}")
