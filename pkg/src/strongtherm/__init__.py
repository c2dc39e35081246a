"""Open-system thermodynamics at arbitrary coupling, built from reduced dynamical maps.

Thermodynamic variables (internal energy, free energy, entropy, heat, work
and entropy production) are built from the reduced dynamical map of the
system alone, through the operator ``-log(Lambda_t[exp(-beta H_S)]) / beta``.
The shipped model is a qubit resonantly coupled to a reservoir spin that is
damped by a Davies generator.

Modules
-------
qmatrix     Hermitian matrix functions, partial trace, vectorization.
gkls        GKLS generators, Liouvillians and exact propagation.
dynmaps     Choi matrices, CPTP checks and divisibility scans.
spinboson   The qubit / damped-spin model and its equilibrium objects.
thermo      Thermodynamic traces for static, driven and correlated starts.
witness     Negative entropy-production-rate detection.
scenarios   Figure reproductions and CSV / SVG output (used by the CLI).
"""

from .dynmaps import (CPTPVerdict, IntervalVerdict, choi, choi_min_eigenvalue, divisibility_scan,
                      from_choi, intermediate_map, is_cptp)
from .errors import (ConfigError, DegenerateBranchError, InversionError, MapConstructionError,
                     NotPositiveDefiniteError, NumericalFailure, PropagationAccuracyError,
                     RangeError, ShapeError, StrongThermError, UnsupportedConfigurationError)
from .gkls import (GKLSGenerator, LiouvillianExp, SuperOperator, adjoint, build_liouvillian,
                   ode_oracle, propagate, propagator)
from .qmatrix import (as_density, as_hermitian, devectorize, herm_eig, matrix_exp_herm,
                      matrix_log_pd, partial_trace, tensor, vectorize)
from .spinboson import (ModelConfig, ReducedDynamics, build_model, davies_generator,
                        eigenoperators, equilibrium_h_circledast, full_hamiltonian, gibbs_state,
                        mean_force_hamiltonian, reduced_equilibrium, reduced_map,
                        system_hamiltonian)
from .thermo import (DrivenProtocol, ThermoPoint, ThermoTrace, constant_protocol,
                     h_circledast_driven, h_circledast_static, mean_force_thermo,
                     measured_initial_state, omega_aux, ramp_protocol, relative_entropy,
                     thermo_driven, thermo_driven_from_equilibrium, thermo_equilibrium,
                     thermo_from_maps, thermo_measured, thermo_static, von_neumann_entropy,
                     weak_reference)
from .witness import WitnessReport, detect_negative_rate

__version__ = "0.1.0"
