"""Command-line front end.

Every subcommand writes a CSV table (stdout by default) and some also
write an SVG plot. Options can come from a flat JSON file (``--config``)
whose keys are the long flag names. Explicit flags override the file,
and the file overrides built-in defaults.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import experiments, gates, plots, sampling, solver

EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        self.code = code
        super().__init__(msg)


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _positive(conv):
    def check(v):
        out = conv(v)
        vals = out if isinstance(out, list) else [out]
        if not vals or any(not x > 0 for x in vals):
            raise ValueError(f"expected positive value(s), got {v!r}")
        return out
    return check


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _workers(v) -> int:
    n = int(v)
    if n < 1:
        raise ValueError("workers must be >= 1")
    return n


def _opt_str(v):
    return None if v is None else str(v)


# option name -> (converter, help)
OPTIONS: dict[str, tuple[Callable, str]] = {
    "gate": (str, "gate name: " + ", ".join(gates.GATE_NAMES)),
    "theta": (float, "loop polar angle for single-pulse / two-qubit gates"),
    "phi": (float, "loop azimuth"),
    "dphi": (float, "phase-shift loop difference phi' - phi"),
    "beta-over-fi": (_positive(float), "inverse pulse length over f_i"),
    "gamma-over-fi": (_positive(_floats), "decay rate(s) over f_i, comma separated"),
    "f1e-over-f0e": (_positive(float), "counter-rotating frequency ratio"),
    "rwa": (_bool, "use the RWA Hamiltonian"),
    "beta-min": (_positive(float), "smallest beta/f_i"),
    "beta-max": (_positive(float), "largest beta/f_i"),
    "n-beta": (_positive(int), "number of beta points"),
    "f-min": (_positive(float), "smallest f/beta"),
    "f-max": (_positive(float), "largest f/beta"),
    "n-f": (_positive(int), "frequency grid points per axis"),
    "gamma-over-beta": (_positive(float), "decay rate over beta"),
    "ratio-min": (_positive(float), "smallest f1e/f0e"),
    "ratio-max": (_positive(float), "largest f1e/f0e"),
    "n-ratio": (_positive(int), "number of ratio points"),
    "f0e-over-beta": (_positive(float), "fixed f0e/beta"),
    "dt-factor": (_positive(float), "idle gap between pulse windows, in units of 1/beta"),
    "n-states": (_positive(int), "number of Fibonacci input states"),
    "rel-tol": (_positive(float), "integrator relative tolerance"),
    "abs-tol": (_positive(float), "integrator absolute tolerance"),
    "n": (_positive(int), "number of sphere points"),
    "out": (_opt_str, "CSV output path (default stdout)"),
    "svg": (_opt_str, "SVG plot output path"),
    "ridge-out": (_opt_str, "CSV path for the optimal-f1e ridge"),
    "workers": (_workers, "parallel workers (default $HOLONOMY_WORKERS or 1)"),
}

_RUN = {"n-states": 100, "rel-tol": 1e-9, "abs-tol": 1e-11, "out": None, "workers": None}
_ANGLES = {"theta": None, "phi": 0.0, "dphi": None}

COMMANDS: dict[str, dict[str, Any]] = {
    "simulate": {"gate": None, **_ANGLES, "beta-over-fi": 0.1, "gamma-over-fi": [1e-3],
                 "f1e-over-f0e": 1.0, "dt-factor": 10.0, "rwa": False, **_RUN},
    "sweep-beta": {"gate": None, **_ANGLES, "gamma-over-fi": [1e-3], "beta-min": 1e-2, "beta-max": 1.0,
                   "n-beta": 40, "dt-factor": 10.0, "svg": None, **_RUN},
    "opt-beta": {"gate": None, **_ANGLES, "gamma-over-fi": [1e-4, 1e-3], "beta-min": 0.03, "beta-max": 0.3,
                 "n-beta": 40, "dt-factor": 10.0, "svg": None, **_RUN},
    "freq-grid": {"gate": None, **_ANGLES, "f-min": 2.0, "f-max": 20.0, "n-f": 30, "gamma-over-beta": 0.02,
                  "dt-factor": 10.0, "svg": None, "ridge-out": None, **_RUN},
    "freq-ratio": {"gate": None, **_ANGLES, "ratio-min": 0.5, "ratio-max": 2.0, "n-ratio": 50,
                   "f0e-over-beta": 10.0, "gamma-over-beta": 1e-3, "dt-factor": 20.0, "svg": None, **_RUN},
    "cz-sweep": {"gamma-over-fi": [1e-3], "beta-min": 1e-2, "beta-max": 1.0, "n-beta": 40, "svg": None,
                 **{k: v for k, v in _RUN.items() if k != "n-states"}},
    "sample-sphere": {"n": 100, "out": None},
}
REQUIRED = {"gate"}


@dataclass
class RunConfig:
    command: str
    values: dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def get(self, key: str, default=None):
        return self.values.get(key, default)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="holonomy", description="Holonomic Λ-system gates beyond the RWA")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, defaults in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON file with option values")
        for key in defaults:
            _, help_text = OPTIONS[key]
            if key == "rwa":
                p.add_argument("--rwa", action="store_const", const=True, default=argparse.SUPPRESS, help=help_text)
            else:
                p.add_argument(f"--{key}", default=argparse.SUPPRESS, help=help_text)
    return parser


def _convert(key: str, raw) -> Any:
    conv, _ = OPTIONS[key]
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_USAGE, f"invalid value for {key}: {raw!r} ({exc})") from None


def _load_config_file(path: str, command: str) -> dict[str, Any]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_USAGE, f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise CliError(EXIT_USAGE, f"config file {path} must hold a JSON object")
    out = {}
    for raw_key, value in data.items():
        key = raw_key.replace("_", "-")
        if key == "command":
            if value != command:
                raise CliError(EXIT_USAGE, f"config file is for {value!r}, not {command!r}")
            continue
        if key not in COMMANDS[command]:
            raise CliError(EXIT_USAGE, f"unknown key {raw_key!r} for {command}")
        out[key] = None if value is None else _convert(key, value)
    return out


def parse_config(argv: list[str]) -> RunConfig:
    """Defaults, then ``--config`` file values, then explicit flags."""
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    config_path = ns.pop("config", None)
    values = dict(COMMANDS[command])
    if config_path:
        values.update(_load_config_file(config_path, command))
    for key, raw in ns.items():
        key = key.replace("_", "-")
        values[key] = _convert(key, raw)
    for key in REQUIRED & values.keys():
        if values[key] is None:
            raise CliError(EXIT_USAGE, f"missing required option --{key}")
    return RunConfig(command, values)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps({"command": cfg.command, **cfg.values}, indent=2, sort_keys=True)


# --- output -----------------------------------------------------------------

def fmt(x: float) -> str:
    """Shortest round-trip scientific notation, e.g. ``1.0e-1``."""
    return np.format_float_scientific(float(x), unique=True, trim="0", exp_digits=1)


def write_table(header: list[str], rows: list[list[float]], path: str | None) -> None:
    if not rows:
        raise CliError(EXIT_IO, "refusing to write an empty table")
    text = ",".join(header) + "\n" + "".join(",".join(fmt(v) for v in row) + "\n" for row in rows)
    _write_text(text, path)


def _write_text(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from None


def csv_rows(result: experiments.SweepResult) -> tuple[list[str], list[list[float]]]:
    if result.kind == "beta":
        gammas, betas = result.axis("gamma_over_fi"), result.axis("beta_over_fi")
        header = ["beta_over_fi", "gamma_over_fi", "mean_inf", "min_inf", "max_inf", "rwa_mean_inf"]
        rows = [
            [b, g, s.mean_infidelity, s.min_infidelity, s.max_infidelity, r.mean_infidelity]
            for i, g in enumerate(gammas) for j, b in enumerate(betas)
            for s, r in [(result.stats[i, j], result.rwa[i, j])]
        ]
    elif result.kind == "grid":
        f0, f1 = result.axis("f0e_over_beta"), result.axis("f1e_over_beta")
        header = ["f0e_over_beta", "f1e_over_beta", "mean_inf"]
        rows = [[a, b, result.stats[i, j].mean_infidelity] for i, a in enumerate(f0) for j, b in enumerate(f1)]
    elif result.kind == "ratio":
        header = ["f1e_over_f0e", "mean_inf", "min_inf", "max_inf"]
        rows = [
            [r, s.mean_infidelity, s.min_infidelity, s.max_infidelity]
            for r, s in zip(result.axis("f1e_over_f0e"), result.stats)
        ]
    else:
        raise CliError(EXIT_USAGE, f"no CSV layout for result kind {result.kind!r}")
    return header, rows


def emit_csv(result: experiments.SweepResult, path: str | None) -> None:
    if result is None or len(result) == 0:
        raise CliError(EXIT_IO, "result is empty, nothing to write")
    write_table(*csv_rows(result), path)


def svg_for(result: experiments.SweepResult) -> str:
    if result.kind == "grid" or len(result.axes) > 2:
        raise CliError(EXIT_USAGE, "2-D grids are exported as CSV only")
    gate = result.meta.get("gate", "")
    if result.kind == "beta":
        (_, gammas), (xname, x) = result.axes
        inf, rwa = result.mean_infidelity(), result.mean_infidelity(rwa=True)
        series = []
        for i, g in enumerate(gammas):
            series.append((f"gamma/f_i={g:g}", inf[i], ""))
            series.append((f"RWA gamma/f_i={g:g}", rwa[i], "2,3"))
        return plots.line_plot(x, series, "beta / f_i", "mean infidelity", f"{gate} gate")
    (xname, x), = result.axes
    return plots.line_plot(x, [("mean", result.mean_infidelity(), "")], "f1e / f0e", "mean infidelity",
                           f"{gate} gate")


def emit_svg(result: experiments.SweepResult, path: str) -> None:
    _write_text(svg_for(result), path)


# --- commands -----------------------------------------------------------------

def _gate(cfg: RunConfig) -> gates.GateSpec:
    try:
        return gates.catalog(cfg["gate"], theta=cfg.get("theta"), phi=cfg.get("phi"), dphi=cfg.get("dphi"))
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None


def _settings(cfg: RunConfig) -> solver.IntegratorSettings:
    return solver.IntegratorSettings(rel_tol=cfg["rel-tol"], abs_tol=cfg["abs-tol"])


def _logspace(lo: float, hi: float, n: int, key: str) -> np.ndarray:
    if n > 1 and not hi > lo:
        raise CliError(EXIT_USAGE, f"{key}: max must exceed min")
    return np.geomspace(lo, hi, n) if n > 1 else np.array([lo])


def cmd_simulate(cfg: RunConfig) -> None:
    from .model import DriveConfig

    gate = _gate(cfg)
    beta = cfg["beta-over-fi"]
    gamma = cfg["gamma-over-fi"][0]
    ratio = cfg["f1e-over-f0e"]
    drive = DriveConfig(1.0, ratio, gamma, cfg["rwa"])
    stats = experiments.average_fidelity(gate, drive, beta, cfg["n-states"], cfg["dt-factor"] / beta, _settings(cfg))
    write_table(
        ["beta_over_fi", "gamma_over_fi", "f1e_over_f0e", "mean_inf", "min_inf", "max_inf"],
        [[beta, gamma, ratio, stats.mean_infidelity, stats.min_infidelity, stats.max_infidelity]],
        cfg["out"],
    )


def _beta_sweep(cfg: RunConfig, gate: gates.GateSpec, n_states: int) -> None:
    betas = _logspace(cfg["beta-min"], cfg["beta-max"], cfg["n-beta"], "beta")
    result = experiments.sweep_beta(gate, cfg["gamma-over-fi"], betas, n_states=n_states,
                                    dt_factor=cfg.get("dt-factor", experiments.BETA_SWEEP_DT),
                                    settings=_settings(cfg), workers=cfg["workers"])
    emit_csv(result, cfg["out"])
    if cfg.get("svg"):
        emit_svg(result, cfg["svg"])


def cmd_sweep_beta(cfg: RunConfig) -> None:
    _beta_sweep(cfg, _gate(cfg), cfg["n-states"])


def cmd_cz_sweep(cfg: RunConfig) -> None:
    _beta_sweep(cfg, gates.catalog("CZ"), 4)


def cmd_opt_beta(cfg: RunConfig) -> None:
    gate = _gate(cfg)
    gammas = cfg["gamma-over-fi"]
    if not cfg["beta-max"] > cfg["beta-min"]:
        raise CliError(EXIT_USAGE, "beta: max must exceed min")
    rows = []
    for g in gammas:
        b, inf = experiments.find_beta_opt(gate, g, (cfg["beta-min"], cfg["beta-max"]), max(cfg["n-beta"], 2),
                                           cfg["n-states"], cfg["dt-factor"], _settings(cfg), cfg["workers"])
        rows.append([g, b, inf])
    write_table(["gamma_over_fi", "beta_opt_over_fi", "mean_inf"], rows, cfg["out"])
    if cfg.get("svg"):
        g = np.array([r[0] for r in rows])
        svg = plots.line_plot(g, [("beta_opt / f_i", [r[1] for r in rows], ""),
                                  ("infidelity", [r[2] for r in rows], "2,3")],
                              "gamma / f_i", "value", f"{gate.name} gate")
        _write_text(svg, cfg["svg"])


def cmd_freq_grid(cfg: RunConfig) -> None:
    if cfg.get("svg"):
        raise CliError(EXIT_USAGE, "2-D grids are exported as CSV only")
    gate = _gate(cfg)
    grid = _logspace(cfg["f-min"], cfg["f-max"], cfg["n-f"], "f")
    result = experiments.frequency_grid(gate, grid, grid, cfg["gamma-over-beta"], cfg["n-states"],
                                        cfg["dt-factor"], _settings(cfg), cfg["workers"])
    emit_csv(result, cfg["out"])
    if cfg.get("ridge-out"):
        write_table(["f0e_over_beta", "f1e_opt_over_beta", "mean_inf"], [list(r) for r in result.ridge],
                    cfg["ridge-out"])


def cmd_freq_ratio(cfg: RunConfig) -> None:
    gate = _gate(cfg)
    ratios = _logspace(cfg["ratio-min"], cfg["ratio-max"], cfg["n-ratio"], "ratio")
    result = experiments.frequency_ratio_sweep(gate, ratios, cfg["f0e-over-beta"], cfg["gamma-over-beta"],
                                               cfg["dt-factor"], cfg["n-states"], _settings(cfg), cfg["workers"])
    emit_csv(result, cfg["out"])
    if cfg.get("svg"):
        emit_svg(result, cfg["svg"])


def cmd_sample_sphere(cfg: RunConfig) -> None:
    write_table(["x", "y", "z"], sampling.fibonacci_nodes(cfg["n"]).tolist(), cfg["out"])


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep-beta": cmd_sweep_beta,
    "opt-beta": cmd_opt_beta,
    "freq-grid": cmd_freq_grid,
    "freq-ratio": cmd_freq_ratio,
    "cz-sweep": cmd_cz_sweep,
    "sample-sphere": cmd_sample_sphere,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        HANDLERS[cfg.command](cfg)
    except CliError as exc:
        print(f"holonomy: {exc}", file=sys.stderr)
        return exc.code
    except (solver.IntegrationError, experiments.PointError, FloatingPointError) as exc:
        print(f"holonomy: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
