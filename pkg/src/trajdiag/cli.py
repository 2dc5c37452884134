"""Command-line front end wiring the whole pipeline.

Subcommands::

    trajdiag simulate   write dictionary.csv (golden + all fault sweeps)
    trajdiag optimize   run the GA; write ga_log.csv, best_vector.json,
                        trajectories.csv at the best vector
    trajdiag diagnose   classify a measurement (--measured m1,m2 | --inject C:d)
    trajdiag plot-data  render trajectories.csv to trajectories.svg

Settings come from an optional JSON config file (--config); every field
can be overridden by a flag of the same name. Exit codes: 0 success,
1 pipeline/numeric failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .acsim import log_grid
from .data import biquad_path
from .diagnose import classify, format_report, write_diagnosis_csv
from .errors import ConfigError, NetlistError, TrajdiagError
from .evolve import GaConfig, run_ga, write_ga_log_csv
from .faultlib import FaultConfig, FaultSpec, build_dictionary, evaluate_at, write_dictionary_csv
from .netlist import PASSIVE_KINDS, parse_netlist
from .trajectory import (
    TestVector,
    build_trajectories,
    count_intersections,
    read_trajectories_csv,
    signature,
    write_trajectories_csv,
)

_UNITS = {"rad/s": 1.0, "hz": 2.0 * math.pi}


@dataclass
class RunConfig:
    """Validated run settings; flat so JSON keys and flags line up."""

    netlist: str = ""
    outdir: str = "out"
    unit: str = "rad/s"
    f_min: float = 0.01
    f_max: float = 100.0
    grid: int = 201
    targets: tuple[str, ...] | None = None
    range_low: float = 0.6
    range_high: float = 1.4
    step: float = 0.1
    population_size: int = 128
    generations: int = 15
    reproduction_rate: float = 0.5
    mutation_rate: float = 0.4
    n_frequencies: int = 2
    seed: int = 1
    tol: float = 1e-6
    origin_tol: float = 1e-6
    ambiguity_margin: float = 0.05

    @property
    def omega_scale(self) -> float:
        return _UNITS[self.unit]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def load_config(config_path: str | None, overrides: dict) -> RunConfig:
    """Merge defaults, JSON config and CLI overrides, then validate."""
    values: dict = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: invalid JSON ({exc})") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path}: top level must be an object")
        for key in loaded:
            if key not in _FIELD_TYPES:
                raise ConfigError(f"config field {key!r}: unknown field")
        values.update(loaded)
    values.update({k: v for k, v in overrides.items() if v is not None})

    config = RunConfig()
    for key, value in values.items():
        try:
            setattr(config, key, _coerce(key, value))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config field {key!r}: {exc}") from None
    _validate(config)
    return config


def _coerce(key: str, value):
    if key == "targets":
        if value is None:
            return None
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        return tuple(str(v) for v in value)
    if key in ("netlist", "outdir"):
        return str(value)
    if key == "unit":
        return str(value).lower()
    if key in ("grid", "population_size", "generations", "n_frequencies", "seed"):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"expected an integer, got {value}")
        return int(value)
    return float(value)


def _validate(config: RunConfig) -> None:
    if not config.netlist:
        config.netlist = str(biquad_path())
    if not Path(config.netlist).is_file():
        raise ConfigError(f"config field 'netlist': file not found: {config.netlist}")
    if config.unit not in _UNITS:
        raise ConfigError(
            f"config field 'unit': expected one of {sorted(_UNITS)}, got {config.unit!r}"
        )
    if not (0.0 < config.f_min < config.f_max):
        raise ConfigError("config field 'f_min'/'f_max': need 0 < f_min < f_max")
    if config.grid < 1:
        raise ConfigError("config field 'grid': need at least one sweep point")
    for name in ("tol", "origin_tol"):
        if getattr(config, name) <= 0.0:
            raise ConfigError(f"config field {name!r}: must be positive")
    if config.ambiguity_margin < 0.0:
        raise ConfigError("config field 'ambiguity_margin': must be non-negative")
    try:
        FaultConfig(("placeholder",), config.range_low, config.range_high, config.step)
    except ConfigError as exc:
        raise ConfigError(f"config field 'range_low'/'range_high'/'step': {exc}") from None
    try:
        GaConfig(
            population_size=config.population_size,
            generations=config.generations,
            reproduction_rate=config.reproduction_rate,
            mutation_rate=config.mutation_rate,
            n_frequencies=config.n_frequencies,
            f_min=config.f_min,
            f_max=config.f_max,
            seed=config.seed,
        )
    except ConfigError as exc:
        raise ConfigError(f"config field (GA): {exc}") from None


def _load_circuit(config: RunConfig):
    return parse_netlist(Path(config.netlist).read_text())


def _fault_config(config: RunConfig, circuit) -> FaultConfig:
    targets = config.targets
    if targets is None:
        targets = circuit.passive_ids()
    else:
        for target in targets:
            try:
                element = circuit.element(target)
            except ValueError as exc:
                raise ConfigError(f"config field 'targets': {exc}") from None
            if element.kind not in PASSIVE_KINDS:
                raise ConfigError(
                    f"config field 'targets': {target} is not a passive element"
                )
    return FaultConfig(targets, config.range_low, config.range_high, config.step)


def _outdir(config: RunConfig) -> Path:
    out = Path(config.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(config: RunConfig) -> int:
    circuit = _load_circuit(config)
    fault_config = _fault_config(config, circuit)
    user_grid = log_grid(config.f_min, config.f_max, config.grid)
    dictionary = build_dictionary(circuit, fault_config, user_grid * config.omega_scale)
    out = _outdir(config)
    write_dictionary_csv(out / "dictionary.csv", dictionary, frequencies=user_grid)
    print(
        f"wrote {out / 'dictionary.csv'}: golden + {len(dictionary.entries)} faults "
        f"x {config.grid} points"
    )
    return 0


def cmd_optimize(config: RunConfig) -> int:
    circuit = _load_circuit(config)
    fault_config = _fault_config(config, circuit)
    scale = config.omega_scale
    ga_config = GaConfig(
        population_size=config.population_size,
        generations=config.generations,
        reproduction_rate=config.reproduction_rate,
        mutation_rate=config.mutation_rate,
        n_frequencies=config.n_frequencies,
        f_min=config.f_min * scale,
        f_max=config.f_max * scale,
        seed=config.seed,
    )
    best, log = run_ga(
        circuit, fault_config, ga_config, tol=config.tol, origin_tol=config.origin_tol
    )
    out = _outdir(config)
    write_ga_log_csv(out / "ga_log.csv", log, frequency_scale=scale)
    payload = {
        "unit": config.unit,
        "frequencies": [f / scale for f in best.frequencies],
        "fitness": log.best_fitness,
        "intersections": log.best_intersections,
        "seed": log.seed,
    }
    (out / "best_vector.json").write_text(json.dumps(payload, indent=2) + "\n")
    write_trajectories_csv(
        out / "trajectories.csv", build_trajectories(circuit, fault_config, best)
    )
    print(
        f"best vector {[f / scale for f in best.frequencies]} ({config.unit}): "
        f"fitness {log.best_fitness:g}, intersections {log.best_intersections}"
    )
    if log.best_fitness < 1.0:
        print(
            "warning: best fitness below 1; trajectories still intersect",
            file=sys.stderr,
        )
    return 0


def _load_best_vector(config: RunConfig) -> TestVector:
    path = Path(config.outdir) / "best_vector.json"
    if not path.is_file():
        raise ConfigError(f"missing {path}; run 'optimize' first")
    payload = json.loads(path.read_text())
    scale = _UNITS[payload.get("unit", config.unit)]
    return TestVector(tuple(f * scale for f in payload["frequencies"]))


def cmd_diagnose(config: RunConfig, measured: str | None, inject: str | None) -> int:
    circuit = _load_circuit(config)
    fault_config = _fault_config(config, circuit)
    tv = _load_best_vector(config)
    golden = evaluate_at(circuit, None, tv.frequencies)

    if measured is not None:
        try:
            values = tuple(float(v) for v in measured.split(","))
        except ValueError:
            raise ConfigError("--measured: expected comma-separated dB values") from None
        if len(values) != len(tv.frequencies):
            raise ConfigError(
                f"--measured: expected {len(tv.frequencies)} values, got {len(values)}"
            )
        query = signature(golden, values)
    else:
        component, _, amount = inject.partition(":")
        if not amount:
            raise ConfigError("--inject: expected <component>:<deviation>")
        try:
            element = circuit.element(component)
        except ValueError as exc:
            raise ConfigError(f"--inject: {exc}") from None
        if element.kind not in PASSIVE_KINDS:
            raise ConfigError(f"--inject: {component} is not a passive element")
        try:
            deviation = float(amount)
        except ValueError:
            raise ConfigError(f"--inject: malformed deviation {amount!r}") from None
        faulty = evaluate_at(circuit, FaultSpec(component, deviation), tv.frequencies)
        query = signature(golden, faulty)

    trajectories = build_trajectories(circuit, fault_config, tv)
    result = classify(
        query,
        trajectories,
        ambiguity_margin=config.ambiguity_margin,
        origin_tol=config.origin_tol,
    )
    out = _outdir(config)
    write_diagnosis_csv(out / "diagnosis.csv", result)
    print(format_report(result), end="")
    return 0


_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
)


def render_svg(trajectories, query=None) -> str:
    """Static SVG of the 2-D trajectory map; presentation only."""
    points = [p.coords[:2] for t in trajectories for p in t.points]
    points.append((0.0, 0.0))
    if query is not None:
        points.append(tuple(query[:2]))
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    span_x = max(xs) - min(xs) or 1.0
    span_y = max(ys) - min(ys) or 1.0
    lo_x, lo_y = min(xs) - 0.05 * span_x, min(ys) - 0.05 * span_y
    span_x *= 1.1
    span_y *= 1.1

    width, height, margin = 640.0, 480.0, 60.0

    def sx(x):
        return margin + (x - lo_x) / span_x * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - lo_y) / span_y * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" '
        f'height="{height:g}" viewBox="0 0 {width:g} {height:g}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for index, trajectory in enumerate(trajectories):
        color = _PALETTE[index % len(_PALETTE)]
        coords = " ".join(
            f"{sx(p.coords[0]):.2f},{sy(p.coords[1]):.2f}" for p in trajectory.points
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = 20.0 + 16.0 * index
        parts.append(
            f'<rect x="{width - 150:.2f}" y="{ly - 9:.2f}" width="10" height="10" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{width - 134:.2f}" y="{ly:.2f}" font-size="12" '
            f'font-family="sans-serif">{trajectory.component}</text>'
        )
    ox, oy = sx(0.0), sy(0.0)
    parts.append(
        f'<path d="M {ox - 6:.2f} {oy:.2f} H {ox + 6:.2f} M {ox:.2f} {oy - 6:.2f} '
        f'V {oy + 6:.2f}" stroke="black" stroke-width="1.5"/>'
    )
    parts.append(
        f'<text x="{ox + 8:.2f}" y="{oy - 8:.2f}" font-size="12" '
        f'font-family="sans-serif">golden</text>'
    )
    if query is not None:
        qx, qy = sx(query[0]), sy(query[1])
        star = []
        for k in range(10):
            radius = 9.0 if k % 2 == 0 else 3.8
            angle = -math.pi / 2 + k * math.pi / 5
            star.append(
                f"{qx + radius * math.cos(angle):.2f},{qy + radius * math.sin(angle):.2f}"
            )
        parts.append(f'<polygon points="{" ".join(star)}" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot_data(config: RunConfig, query: str | None) -> int:
    path = Path(config.outdir) / "trajectories.csv"
    if not path.is_file():
        raise ConfigError(f"missing {path}; run 'optimize' first")
    try:
        trajectories = read_trajectories_csv(path)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    query_point = None
    if query is not None:
        try:
            query_point = tuple(float(v) for v in query.split(","))
        except ValueError:
            raise ConfigError("--query: expected comma-separated coordinates") from None
        if len(query_point) != 2:
            raise ConfigError("--query: expected exactly two coordinates")
    svg = render_svg(trajectories, query_point)
    out = Path(config.outdir) / "trajectories.svg"
    out.write_text(svg)
    print(f"wrote {out}: {len(trajectories)} trajectories")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajdiag",
        description="Analog fault diagnosis via signature-space fault trajectories.",
    )
    parser.add_argument("--version", action="version", version=f"trajdiag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--netlist", help="netlist file (default: bundled biquad)")
        p.add_argument("--outdir", help="output directory (default: out)")
        p.add_argument("--unit", choices=sorted(_UNITS), help="frequency unit")
        p.add_argument("--f-min", type=float, dest="f_min")
        p.add_argument("--f-max", type=float, dest="f_max")
        p.add_argument("--grid", type=int, help="sweep points (log spaced)")
        p.add_argument("--targets", help="comma-separated fault targets")
        p.add_argument("--range-low", type=float, dest="range_low")
        p.add_argument("--range-high", type=float, dest="range_high")
        p.add_argument("--step", type=float)
        p.add_argument("--population-size", type=int, dest="population_size")
        p.add_argument("--generations", type=int)
        p.add_argument("--reproduction-rate", type=float, dest="reproduction_rate")
        p.add_argument("--mutation-rate", type=float, dest="mutation_rate")
        p.add_argument("--n-frequencies", type=int, dest="n_frequencies")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--origin-tol", type=float, dest="origin_tol")
        p.add_argument("--ambiguity-margin", type=float, dest="ambiguity_margin")

    add_common(sub.add_parser("simulate", help="write the fault dictionary CSV"))
    add_common(sub.add_parser("optimize", help="evolve a test vector"))
    diag = sub.add_parser("diagnose", help="classify a measurement")
    add_common(diag)
    group = diag.add_mutually_exclusive_group(required=True)
    group.add_argument("--measured", help="comma-separated dB magnitudes")
    group.add_argument("--inject", help="<component>:<deviation> to simulate")
    plot = sub.add_parser("plot-data", help="render trajectories.csv to SVG")
    add_common(plot)
    plot.add_argument("--query", help="x,y query point marker")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key)
        for key in _FIELD_TYPES
        if hasattr(args, key) and getattr(args, key) is not None
    }
    try:
        config = load_config(args.config, overrides)
        if args.command == "simulate":
            return cmd_simulate(config)
        if args.command == "optimize":
            return cmd_optimize(config)
        if args.command == "diagnose":
            return cmd_diagnose(config, args.measured, args.inject)
        return cmd_plot_data(config, args.query)
    except (ConfigError, NetlistError) as exc:
        # problems with what the user supplied, not with the computation
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrajdiagError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
