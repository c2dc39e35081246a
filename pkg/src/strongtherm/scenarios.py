"""Scenario runners: figure reproductions, custom runs and the witness report.

Each ``run_*`` function takes a :class:`RunConfig`, writes CSV (and
optionally SVG) files into ``config.out`` and returns a :class:`RunResult`.
CSV files use 17 significant digits, a header row and LF line endings, so
identical configurations give byte-identical files.
"""

from __future__ import annotations

import contextlib
import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import svg
from .errors import ConfigError, NumericalFailure
from .spinboson import ModelConfig, gibbs_state, system_hamiltonian
from .thermo import (ThermoPoint, ThermoTrace, mean_force_thermo, ramp_protocol, thermo_driven,
                     thermo_driven_from_equilibrium, thermo_equilibrium, thermo_measured,
                     thermo_static)
from .witness import detect_negative_rate

SCENARIOS = ("fig1", "figS1", "figS2", "figS3", "custom", "witness")
INITIAL_KINDS = ("ground", "excited", "gibbs", "measured", "equilibrium", "custom")
SIGMA_TOL = 1e-6
ANCHOR_TOL = 1e-10


class ScenarioFailure(NumericalFailure):
    """Numerical failure annotated with the scenario step that raised it."""


@dataclass(frozen=True)
class InitialState:
    """Initial system state.

    ``kind`` is one of ``ground``, ``excited``, ``gibbs`` (product thermal
    state of ``H_S``), ``measured`` (projective measurement of the joint
    Gibbs state in ``basis``), ``equilibrium`` (joint Gibbs state, no
    measurement) or ``custom`` (``matrix``).
    """

    kind: str = "ground"
    basis: str = "energy"
    matrix: tuple | None = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigError(f"initial_state.kind must be one of {INITIAL_KINDS}, got {self.kind!r}")
        if self.kind == "measured" and self.basis not in ("energy", "x"):
            raise ConfigError("initial_state.basis must be 'energy' or 'x'")
        if self.kind == "custom" and self.matrix is None:
            raise ConfigError("initial_state.kind = 'custom' needs a matrix")

    @property
    def factorized(self) -> bool:
        return self.kind in ("ground", "excited", "gibbs", "custom")

    def density(self, cfg: ModelConfig) -> np.ndarray:
        """System density matrix for the factorized kinds."""
        if self.kind == "ground":
            return np.diag([0.0, 1.0]).astype(complex)
        if self.kind == "excited":
            return np.diag([1.0, 0.0]).astype(complex)
        if self.kind == "gibbs":
            return gibbs_state(system_hamiltonian(cfg.omega0), cfg.beta)
        if self.kind == "custom":
            return np.asarray(self.matrix, dtype=complex)
        raise ConfigError(f"initial state {self.kind!r} is not a system density matrix")

    def projectors(self) -> list[np.ndarray]:
        if self.basis == "energy":
            return [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
        plus = np.array([1.0, 1.0]) / np.sqrt(2)
        minus = np.array([1.0, -1.0]) / np.sqrt(2)
        return [np.outer(plus, plus).astype(complex), np.outer(minus, minus).astype(complex)]


@dataclass(frozen=True)
class Drive:
    """Smooth ramp of the system frequency from ``omega0`` to ``omega_end`` over ``duration``."""

    omega_end: float
    duration: float

    def __post_init__(self):
        if not (self.omega_end > 0 and self.duration > 0):
            raise ConfigError("drive.omega_end and drive.duration must be positive")


@dataclass(frozen=True)
class RunConfig:
    """Everything a scenario run needs.

    ``t_max`` is measured in units of ``1 / gamma`` with ``gamma`` the larger
    effective decay rate; the grid is ``points`` evenly spaced times on
    ``[0, t_max / gamma]``.
    """

    scenario: str = "fig1"
    model: ModelConfig = field(default_factory=ModelConfig)
    initial_state: InitialState = field(default_factory=InitialState)
    betas: tuple = (0.1, 1.0, 10.0)
    t_max: float = 5.0
    points: int = 20001
    c_list: tuple = (1.0, 2.0, 4.0, 8.0, 16.0)
    out: Path = Path("results")
    svg: bool = False
    drive: Drive | None = None
    threshold: float = 1e-6

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if not len(self.betas):
            raise ConfigError("betas must be nonempty")
        if any(not (b > 0 and np.isfinite(b)) for b in self.betas):
            raise ConfigError("betas must be positive and finite")
        if not (self.t_max > 0 and np.isfinite(self.t_max)):
            raise ConfigError("t_max must be positive")
        if int(self.points) != self.points or self.points < 16:
            raise ConfigError("points must be an integer >= 16")
        if not len(self.c_list) or any(c < 1 for c in self.c_list):
            raise ConfigError("c_list must be nonempty with entries >= 1")
        if not self.threshold > 0:
            raise ConfigError("threshold must be positive")
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "c_list", tuple(float(c) for c in self.c_list))
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "out", Path(self.out))

    @property
    def time_grid(self) -> tuple[float, int]:
        return self.t_max, self.points

    def grid(self, model: ModelConfig | None = None) -> np.ndarray:
        m = self.model if model is None else model
        gamma = max(m.rates)
        if gamma <= 0:
            raise ConfigError("at least one decay rate must be positive to set the time unit")
        return np.linspace(0.0, self.t_max / gamma, self.points)


def default_config(scenario: str, **overrides) -> RunConfig:
    """Defaults of each scenario, updated by ``overrides``."""
    base: dict = dict(scenario=scenario)
    if scenario == "figS1":
        base["betas"] = (1.0,)
    elif scenario == "figS2":
        base["betas"] = (0.1, 1.0)
    elif scenario == "figS3":
        base["betas"] = (0.1, 0.5, 1.0)
        base["model"] = ModelConfig(kappa=0.95)
        base["initial_state"] = InitialState("gibbs")
    base.update(overrides)
    return RunConfig(**base)


@dataclass
class RunResult:
    files: list = field(default_factory=list)
    summary: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path, header, rows) -> Path:
    """Comma-separated values with 17 significant digits and LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def validate_trace(trace: ThermoTrace, anchored: bool = True) -> None:
    """Check the per-row invariants before anything is written.

    Every entry must be finite and ``sigma >= -1e-6``; for factorized
    starts the ``t = 0`` row must also have ``e_u = e_u_weak`` and
    ``s = s_vn`` within 1e-10.
    """
    table = np.column_stack([np.asarray(getattr(trace, n), dtype=float) for n in ThermoPoint._fields])
    bad = ~np.all(np.isfinite(table), axis=1)
    if bad.any():
        raise ScenarioFailure(f"validation: non-finite value at t={trace.t[np.argmax(bad)]:.17g}")
    if trace.sigma.min() < -SIGMA_TOL:
        k = int(np.argmin(trace.sigma))
        raise ScenarioFailure(f"validation: sigma = {trace.sigma[k]:.3e} < -{SIGMA_TOL:g} "
                              f"at t={trace.t[k]:.17g} (beta={trace.beta:g})")
    if anchored and trace.t[0] == 0.0:
        if abs(trace.e_u[0] - trace.e_u_weak[0]) > ANCHOR_TOL or abs(trace.s[0] - trace.s_vn[0]) > ANCHOR_TOL:
            raise ScenarioFailure(f"validation: t=0 anchors violated (beta={trace.beta:g})")


@contextlib.contextmanager
def _step(name: str):
    """Prefix numerical failures with the scenario step that raised them."""
    try:
        yield
    except ScenarioFailure:
        raise
    except NumericalFailure as exc:
        raise ScenarioFailure(f"{name}: {exc}") from exc


def _tag(beta: float) -> str:
    return f"beta{beta:g}"


def _svg(cfg: RunConfig, name: str, series, xlabel, ylabel, title, dashed=()):
    return svg.line_chart(cfg.out / name, series, xlabel, ylabel, title, dashed)


T_LABEL = "t (1/omega0)"


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def static_trace(model: ModelConfig, initial: InitialState, grid) -> ThermoTrace:
    """Trace for a time-independent Hamiltonian and any supported initial state."""
    if initial.kind == "measured":
        return thermo_measured(model, initial.projectors(), grid)
    if initial.kind == "equilibrium":
        return thermo_equilibrium(model, grid)
    return thermo_static(model, initial.density(model), grid)


def _traces(cfg: RunConfig, model: ModelConfig | None = None, initial=None):
    model = cfg.model if model is None else model
    initial = cfg.initial_state if initial is None else initial
    grid = cfg.grid(model)
    for beta in cfg.betas:
        m = model.with_beta(beta)
        with _step(f"static pipeline (beta={beta:g}, c={m.c:g})"):
            tr = static_trace(m, initial, grid)
        validate_trace(tr, initial.factorized)
        yield tr


FIG1_COLUMNS = ("t", "beta", "e_u", "e_u_weak", "s", "q", "sigma", "sigma_rate")


def run_fig1(cfg: RunConfig) -> RunResult:
    """Internal energy and entropy production for several temperatures."""
    res = RunResult()
    traces = list(_traces(cfg))
    rows = [row for tr in traces for row in _rows(tr, FIG1_COLUMNS)]
    res.files.append(write_csv(cfg.out / "fig1.csv", FIG1_COLUMNS, rows))
    for tr in traces:
        res.summary.append(
            f"beta={tr.beta:g}: max|E_U - <H_S>| = {np.max(np.abs(tr.e_u - tr.e_u_weak)):.6e}, "
            f"min sigma = {tr.sigma.min():.3e}, min sigma_rate = {tr.sigma_rate.min():.3e}")
    if cfg.svg:
        energy = []
        for tr in traces:
            energy += [(f"E_U {_tag(tr.beta)}", tr.t, tr.e_u), (f"<H_S> {_tag(tr.beta)}", tr.t, tr.e_u_weak)]
        dashed = {s[0] for s in energy if s[0].startswith("<H_S>")}
        res.files.append(_svg(cfg, "fig1_energy.svg", energy, T_LABEL, "e_u, e_u_weak (omega0)",
                              "Internal energy", dashed))
        res.files.append(_svg(cfg, "fig1_sigma.svg",
                              [(_tag(tr.beta), tr.t, tr.sigma) for tr in traces],
                              T_LABEL, "sigma", "Entropy production"))
    return res


def _rows(tr: ThermoTrace, columns):
    cols = [np.full(len(tr), tr.beta) if c == "beta" else tr.column(c) for c in columns]
    return zip(*cols)


def max_energy_gap(cfg: RunConfig, c: float, beta: float) -> float:
    model = replace(cfg.model, c=c, beta=beta)
    grid = cfg.grid(model)
    with _step(f"static pipeline (beta={beta:g}, c={c:g})"):
        tr = static_trace(model, cfg.initial_state, grid)
    validate_trace(tr, cfg.initial_state.factorized)
    return float(np.max(np.abs(tr.e_u - tr.e_u_weak)))


def run_figS1(cfg: RunConfig) -> RunResult:
    """Maximal gap between E_U and <H_S> across the weak-coupling sweep."""
    if len(cfg.betas) != 1:
        raise ConfigError("figS1 takes exactly one beta")
    beta = cfg.betas[0]
    res = RunResult()
    gaps = [max_energy_gap(cfg, c, beta) for c in cfg.c_list]
    res.files.append(write_csv(cfg.out / "figS1.csv", ("c", "max_diff"), zip(cfg.c_list, gaps)))
    decreasing = bool(np.all(np.diff(gaps) < 0))
    res.summary.append(f"beta={beta:g}: max_diff " + ", ".join(
        f"c={c:g}: {g:.6e}" for c, g in zip(cfg.c_list, gaps)))
    res.summary.append(f"strictly decreasing in c: {'yes' if decreasing else 'NO'}")
    if len(gaps) > 1 and min(gaps) > 0:
        slope = np.polyfit(np.log(cfg.c_list), np.log(gaps), 1)[0]
        res.summary.append(f"log-log slope: {slope:.3f}")
    if cfg.svg:
        res.files.append(_svg(cfg, "figS1.svg", [("max_diff", cfg.c_list, gaps)], "c",
                              "max_diff (omega0)", "Convergence towards weak coupling"))
    return res


def run_figS2(cfg: RunConfig) -> RunResult:
    """E_U against <H_S> and the mean-force internal energy E_U*."""
    res = RunResult()
    rows = []
    for tr in _traces(cfg):
        star = mean_force_thermo(cfg.model.with_beta(tr.beta), tr.states, tr.t)
        rows += zip(tr.t, np.full(len(tr), tr.beta), tr.e_u, tr.e_u_weak, star.e_u_star)
        closer = np.abs(tr.e_u - tr.e_u_weak) <= np.abs(star.e_u_star - tr.e_u_weak)
        res.summary.append(f"beta={tr.beta:g}: E_U closer to <H_S> than E_U* at "
                           f"{100 * closer.mean():.1f}% of grid points")
        if cfg.svg:
            res.files.append(_svg(cfg, f"figS2_{_tag(tr.beta)}.svg",
                                  [("e_u", tr.t, tr.e_u), ("e_u_weak", tr.t, tr.e_u_weak),
                                   ("e_u_star", tr.t, star.e_u_star)],
                                  T_LABEL, "energy (omega0)", f"Internal energies, {_tag(tr.beta)}",
                                  {"e_u_weak"}))
    res.files.insert(0, write_csv(cfg.out / "figS2.csv",
                                  ("t", "beta", "e_u", "e_u_weak", "e_u_star"), rows))
    return res


def run_figS3(cfg: RunConfig) -> RunResult:
    """Mean-force entropy production sigma* against sigma for a product-thermal start."""
    res = RunResult()
    rows, series = [], []
    for tr in _traces(cfg):
        star = mean_force_thermo(cfg.model.with_beta(tr.beta), tr.states, tr.t)
        rows += zip(tr.t, np.full(len(tr), tr.beta), star.sigma_star, tr.sigma)
        res.summary.append(f"beta={tr.beta:g}: min sigma* = {star.sigma_star.min():.3e}, "
                           f"max |sigma| = {np.max(np.abs(tr.sigma)):.3e}")
        series += [(f"sigma* {_tag(tr.beta)}", tr.t, star.sigma_star), (f"sigma {_tag(tr.beta)}", tr.t, tr.sigma)]
    res.files.append(write_csv(cfg.out / "figS3.csv", ("t", "beta", "sigma_star", "sigma"), rows))
    if cfg.svg:
        res.files.append(_svg(cfg, "figS3.svg", series, T_LABEL, "sigma_star, sigma",
                              "Entropy production", {s[0] for s in series if s[0].startswith("sigma ")}))
    return res


CUSTOM_COLUMNS = ("t", "beta", "e_u", "e_u_weak", "f", "s", "q", "w", "sigma", "sigma_rate", "s_vn")


def custom_trace(cfg: RunConfig, beta: float) -> ThermoTrace:
    model = cfg.model.with_beta(beta)
    grid = cfg.grid(model)
    init = cfg.initial_state
    if cfg.drive is None:
        with _step(f"static pipeline (beta={beta:g})"):
            return static_trace(model, init, grid)
    protocol = ramp_protocol(model.omega0, cfg.drive.omega_end, cfg.drive.duration, grid)
    with _step(f"driven pipeline (beta={beta:g})"):
        if init.kind == "equilibrium":
            return thermo_driven_from_equilibrium(model, protocol)
        if init.kind == "measured":
            raise ConfigError("measured initial states are supported without driving only")
        return thermo_driven(model, protocol, init.density(model))


def run_custom(cfg: RunConfig) -> RunResult:
    """Any model, initial state and optional frequency ramp; all trace columns."""
    res = RunResult()
    traces = []
    for beta in cfg.betas:
        tr = custom_trace(cfg, beta)
        validate_trace(tr, cfg.initial_state.factorized)
        traces.append(tr)
        res.summary.append(f"beta={beta:g}: min sigma = {tr.sigma.min():.3e}, "
                           f"final E_U = {tr.e_u[-1]:.6e}, final W = {tr.w[-1]:.6e}")
    rows = [row for tr in traces for row in _rows(tr, CUSTOM_COLUMNS)]
    res.files.append(write_csv(cfg.out / "custom.csv", CUSTOM_COLUMNS, rows))
    if cfg.svg:
        res.files.append(_svg(cfg, "custom_energy.svg",
                              [(f"E_U {_tag(tr.beta)}", tr.t, tr.e_u) for tr in traces],
                              T_LABEL, "e_u (omega0)", "Internal energy"))
        res.files.append(_svg(cfg, "custom_sigma.svg",
                              [(_tag(tr.beta), tr.t, tr.sigma) for tr in traces],
                              T_LABEL, "sigma", "Entropy production"))
    return res


WITNESS_COLUMNS = ("beta", "t_start", "t_end", "min_rate", "non_cp_steps")


def run_witness(cfg: RunConfig) -> RunResult:
    """Negative entropy-production-rate intervals with a divisibility cross-check."""
    res = RunResult()
    rows, series = [], []
    for tr in _traces(cfg):
        with _step(f"divisibility scan (beta={tr.beta:g})"):
            rep = detect_negative_rate(tr, cfg.threshold, maps=tr.maps)
        rows += [(tr.beta, iv.t_start, iv.t_end, iv.min_rate, iv.non_cp_steps) for iv in rep.intervals]
        res.summary.append(f"beta={tr.beta:g}: {rep.summary()}")
        series.append((_tag(tr.beta), tr.t, tr.sigma_rate))
    res.files.append(write_csv(cfg.out / "witness.csv", WITNESS_COLUMNS, rows))
    if cfg.svg:
        res.files.append(_svg(cfg, "witness_rate.svg", series, T_LABEL, "sigma_rate",
                              "Entropy-production rate"))
    return res


RUNNERS = {"fig1": run_fig1, "figS1": run_figS1, "figS2": run_figS2, "figS3": run_figS3,
           "custom": run_custom, "witness": run_witness}


def run(cfg: RunConfig) -> RunResult:
    return RUNNERS[cfg.scenario](cfg)


__all__ = ["RunConfig", "InitialState", "Drive", "RunResult", "ScenarioFailure", "default_config",
           "run", "run_fig1", "run_figS1", "run_figS2", "run_figS3", "run_custom", "run_witness",
           "write_csv", "validate_trace", "static_trace"]
