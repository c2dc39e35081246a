"""Command-line scenario runner.

Usage::

    strongtherm {fig1,figS1,figS2,figS3,custom,witness} [--config PATH] [--out DIR]
                [--svg] [--grid-points N] [--t-max X] [--beta LIST] [--c-list LIST]

Configuration files are TOML; command-line flags override file values. See
``demos/config_example.toml`` for an annotated example.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, StrongThermError
from .scenarios import SCENARIOS, Drive, InitialState, RunConfig, default_config, run
from .spinboson import ModelConfig

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

_MODEL_KEYS = {f.name for f in fields(ModelConfig)} - {"beta"}
_STATE_KEYS = {"kind", "basis", "matrix_real", "matrix_imag"}
_RUN_KEYS = {"betas", "t_max", "points", "c_list", "out", "svg", "threshold"}
_DRIVE_KEYS = {"omega_end", "duration"}


def _check_keys(section: str, table: dict, allowed: set) -> None:
    if not isinstance(table, dict):
        raise ConfigError(f"[{section}] must be a table")
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def _initial_state(table: dict, base: InitialState) -> InitialState:
    _check_keys("initial_state", table, _STATE_KEYS)
    matrix = base.matrix
    if "matrix_real" in table:
        re = table["matrix_real"]
        im = table.get("matrix_imag", [[0.0] * len(row) for row in re])
        try:
            matrix = tuple(tuple(complex(a, b) for a, b in zip(r, i)) for r, i in zip(re, im))
        except TypeError as exc:
            raise ConfigError(f"initial_state matrix entries must be numbers: {exc}") from None
    elif "matrix_imag" in table:
        raise ConfigError("matrix_imag given without matrix_real")
    return InitialState(table.get("kind", base.kind), table.get("basis", base.basis), matrix)


def config_from_mapping(scenario: str, data: dict) -> RunConfig:
    """Build a :class:`RunConfig` from parsed TOML data on top of the scenario defaults."""
    _check_keys("top level", data, {"scenario", "model", "initial_state", "run", "drive"})
    if data.get("scenario", scenario) != scenario:
        raise ConfigError(f"config is for scenario {data['scenario']!r}, not {scenario!r}")
    cfg = default_config(scenario)
    updates: dict = {}
    if "model" in data:
        _check_keys("model", data["model"], _MODEL_KEYS)
        updates["model"] = replace(cfg.model, **data["model"])
    if "initial_state" in data:
        updates["initial_state"] = _initial_state(data["initial_state"], cfg.initial_state)
    if "run" in data:
        _check_keys("run", data["run"], _RUN_KEYS)
        updates.update(data["run"])
    if "drive" in data:
        _check_keys("drive", data["drive"], _DRIVE_KEYS)
        updates["drive"] = Drive(**data["drive"])
    return replace(cfg, **updates)


def load_config(path, scenario: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return config_from_mapping(scenario, data)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="strongtherm",
        description="Thermodynamic traces of a qubit coupled to a damped spin.")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", type=Path, help="TOML configuration file")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--svg", action="store_true", default=None, help="also write SVG charts")
    p.add_argument("--grid-points", type=int, help="number of time points")
    p.add_argument("--t-max", type=float, help="final time in units of 1/gamma")
    p.add_argument("--beta", type=_float_list, help="comma-separated inverse temperatures")
    p.add_argument("--c-list", type=_float_list, help="comma-separated coupling scalings (figS1)")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config, args.scenario) if args.config else default_config(args.scenario)
    flags = {"out": args.out, "svg": args.svg, "points": args.grid_points,
             "t_max": args.t_max, "betas": args.beta, "c_list": args.c_list}
    return replace(cfg, **{k: v for k, v in flags.items() if v is not None})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve_config(args)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (StrongThermError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for line in result.summary:
        print(line)
    for f in result.files:
        print(f"wrote {f}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
