"""Command-line front end.

Subcommands: ``rates``, ``classify``, ``divisibility``, ``bloch``, ``sweep``.
Family parameters come from flags or a flat ``key = value`` config file
(flags override the file).  Outputs are deterministic CSV or JSON; identical
invocations produce byte-identical bytes.

Exit codes: 0 analysis produced (whatever the verdict), 2 configuration
error, 3 internal numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import build_timeline, classify, divisibility_scan
from .bloch import constant_rates, integrate, ode_rate_functions
from .errors import QmapError, SingularityError, ValidationError
from .families import (
    DepolarizingFamily,
    MixtureSpec,
    NonUnitalFamily,
    PauliMixtureFamily,
    affine_trajectory,
    amplitude_damping,
    exp_profile,
    generalized_amplitude_damping,
)
from .rates import nonunital_rates, rate_source

DEFAULT_SEED = 42
SEED_ENV_VAR = "QMAP_ENM_SEED"

UNITAL_FAMILIES = ("mix", "depolarizing")
NONUNITAL_FAMILIES = ("ad", "gad")
ALL_FAMILIES = UNITAL_FAMILIES + NONUNITAL_FAMILIES + ("forced",)


class ConfigError(Exception):
    """Invalid run configuration; the message names the offending key."""


@dataclass
class RunConfig:
    command: str
    family: str | None = None
    weights: tuple[float, float, float] | None = None
    c: float = 1.0
    gamma: float = 1.0
    r_inf: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma3: float = 0.0
    t_max: float | None = None
    samples: int = 400
    delta_min: float = 1e-4
    zero_tol: float = 1e-9
    step: float = 1e-3
    r0: tuple[float, float, float] = (0.0, 0.0, 1.0)
    grid: int = 20
    format: str | None = None
    output: str | None = None
    precision: int = 9
    seed: int = DEFAULT_SEED


_FLOAT_KEYS = ("c", "gamma", "r_inf", "alpha", "beta", "gamma3", "t_max",
               "delta_min", "zero_tol", "step")
_INT_KEYS = ("samples", "grid", "precision", "seed")
_VECTOR_KEYS = ("weights", "r0")
_STRING_KEYS = ("family", "format", "output")


def _parse_scalar(key: str, text: str):
    try:
        if key in _INT_KEYS:
            return int(text)
        return float(text)
    except ValueError as err:
        raise ConfigError(f"invalid value for {key}: {text!r}") from err


def _parse_vector(key: str, text: str) -> tuple[float, ...]:
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise ConfigError(f"invalid value for {key}: expected 3 numbers, got {text!r}")
    try:
        return tuple(float(part) for part in parts)
    except ValueError as err:
        raise ConfigError(f"invalid value for {key}: {text!r}") from err


def read_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` config file ('#' starts a comment)."""
    values: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line_number} is not 'key = value': {raw.strip()!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key in _VECTOR_KEYS:
            values[key] = _parse_vector(key, text)
        elif key in _FLOAT_KEYS or key in _INT_KEYS:
            values[key] = _parse_scalar(key, text)
        elif key in _STRING_KEYS:
            values[key] = text
        else:
            raise ConfigError(f"unknown config key: {key}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmap-enm",
        description="Qubit dynamical maps: decay rates, positivity and "
                    "non-Markovianity analysis.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("rates", "canonical decay rates on a time grid"),
        ("classify", "Markovianity classification report"),
        ("divisibility", "Choi check of intermediate propagators"),
        ("bloch", "integrate the Bloch equations"),
        ("sweep", "classify a grid of mixing weights"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--family", choices=ALL_FAMILIES)
        sub.add_argument("--weights", nargs=3, type=float, metavar=("W1", "W2", "W3"))
        sub.add_argument("--c", type=float)
        sub.add_argument("--gamma", type=float)
        sub.add_argument("--r-inf", dest="r_inf", type=float)
        sub.add_argument("--alpha", type=float)
        sub.add_argument("--beta", type=float)
        sub.add_argument("--gamma3", type=float)
        sub.add_argument("--t-max", dest="t_max", type=float)
        sub.add_argument("--samples", type=int)
        sub.add_argument("--delta-min", dest="delta_min", type=float)
        sub.add_argument("--zero-tol", dest="zero_tol", type=float)
        sub.add_argument("--step", type=float)
        sub.add_argument("--r0", nargs=3, type=float, metavar=("X", "Y", "Z"))
        sub.add_argument("--grid", type=int)
        sub.add_argument("--format", choices=("csv", "json"))
        sub.add_argument("--output")
        sub.add_argument("--config")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--precision", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, environment, config file and flags (flags win)."""
    config = RunConfig(command=args.command)
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        config.seed = int(_parse_scalar("seed", env_seed))
    if args.config:
        for key, value in read_config_file(args.config).items():
            setattr(config, key, value)
    for key in (_FLOAT_KEYS + _INT_KEYS + _STRING_KEYS):
        if key == "output":
            continue
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    if args.output is not None:
        config.output = args.output
    if args.weights is not None:
        config.weights = tuple(args.weights)
    if args.r0 is not None:
        config.r0 = tuple(args.r0)

    if config.family is None:
        if config.weights is not None or config.command == "sweep":
            config.family = "mix"
    _validate(config)
    return config


def _validate(config: RunConfig):
    if config.family is None:
        raise ConfigError("family: no family resolvable (set --family or --weights)")
    if config.family not in ALL_FAMILIES:
        raise ConfigError(f"family: unknown family {config.family!r}")
    if config.family == "mix" and config.command != "sweep":
        if config.weights is None:
            raise ConfigError("weights: family 'mix' needs three mixing weights")
        total = sum(config.weights)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"weights: must sum to 1, got {total!r}")
    if config.family in UNITAL_FAMILIES and not config.c > 0:
        raise ConfigError(f"c: must be > 0, got {config.c}")
    if config.family in NONUNITAL_FAMILIES and not config.gamma > 0:
        raise ConfigError(f"gamma: must be > 0, got {config.gamma}")
    if config.family == "gad" and abs(config.r_inf) > 1.0:
        raise ConfigError(f"r_inf: must be in [-1, 1], got {config.r_inf}")
    for key in ("samples", "grid", "precision"):
        if getattr(config, key) <= 0:
            raise ConfigError(f"{key}: must be positive, got {getattr(config, key)}")
    for key in ("delta_min", "zero_tol", "step"):
        if getattr(config, key) <= 0:
            raise ConfigError(f"{key}: must be positive, got {getattr(config, key)}")
    if config.t_max is not None and config.t_max <= 0:
        raise ConfigError(f"t_max: must be positive, got {config.t_max}")
    if config.samples < 2:
        raise ConfigError(f"samples: need at least 2, got {config.samples}")
    if config.grid < 2:
        raise ConfigError(f"grid: need resolution >= 2, got {config.grid}")


def build_family(config: RunConfig):
    if config.family == "mix":
        try:
            spec = MixtureSpec(*config.weights)
        except ValidationError as err:
            raise ConfigError(f"weights: {err}") from err
        return PauliMixtureFamily(spec, exp_profile(config.c))
    if config.family == "depolarizing":
        return DepolarizingFamily(exp_profile(config.c))
    if config.family == "ad":
        return amplitude_damping(config.gamma)
    if config.family == "gad":
        return generalized_amplitude_damping(config.gamma, config.r_inf)
    raise ConfigError(f"family: {config.family!r} has no map representation here")


def _time_scale(config: RunConfig) -> float:
    return config.c if config.family in UNITAL_FAMILIES else config.gamma


def _format_float(value: float, precision: int) -> str:
    if value == 0.0:
        value = 0.0  # normalize negative zero
    return f"{value:.{precision}g}"


class _Output:
    def __init__(self, config: RunConfig):
        self.precision = config.precision
        self.lines: list[str] = []

    def row(self, cells):
        rendered = [cell if isinstance(cell, str) else _format_float(cell, self.precision)
                    for cell in cells]
        self.lines.append(",".join(rendered))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _emit(config: RunConfig, text: str):
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _tabular_json(config: RunConfig, columns, rows) -> str:
    payload = {
        "schema": 1,
        "command": config.command,
        "columns": list(columns),
        "rows": [[None if cell == "" else cell for cell in row] for row in rows],
        "seed": config.seed,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def cmd_rates(config: RunConfig) -> int:
    if config.family == "forced":
        raise ConfigError("family: 'forced' has no canonical rates to report")
    family = build_family(config)
    t_max = config.t_max if config.t_max is not None else 10.0 / _time_scale(config)
    times = np.linspace(0.0, t_max, config.samples)

    if isinstance(family, NonUnitalFamily):
        columns = ("t", "alpha", "beta", "gamma_plus", "gamma_minus", "gamma3")
        evaluate = lambda t: tuple(nonunital_rates(family, t))
    else:
        columns = ("t", "gamma1", "gamma2", "gamma3")
        source = rate_source(family)
        evaluate = source.values

    rows = []
    for t in times:
        try:
            rows.append((float(t),) + tuple(evaluate(float(t))))
        except SingularityError as err:
            sys.stderr.write(f"warning: rate singular at t={t:.6g}: {err}\n")
            rows.append((float(t),) + ("",) * (len(columns) - 1))

    if (config.format or "csv") == "json":
        _emit(config, _tabular_json(config, columns, rows))
    else:
        out = _Output(config)
        out.row(columns)
        for row in rows:
            out.row(row)
        _emit(config, out.text())
    return 0


def cmd_classify(config: RunConfig) -> int:
    if (config.format or "json") != "json":
        raise ConfigError("format: classify reports are JSON only")
    if config.family == "forced":
        raise ConfigError("family: 'forced' cannot be classified")
    family = build_family(config)
    source = rate_source(family)
    timeline = build_timeline(source, horizon=config.t_max, n=config.samples,
                              zero_tol=config.zero_tol)
    report = classify(timeline, delta_min=config.delta_min, zero_tol=config.zero_tol,
                      trajectory=affine_trajectory(family))
    payload = report.to_dict()
    payload["seed"] = config.seed
    _emit(config, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_divisibility(config: RunConfig) -> int:
    if config.family == "forced":
        raise ConfigError("family: 'forced' has no map to divide")
    family = build_family(config)
    t_max = config.t_max if config.t_max is not None else 5.0 / _time_scale(config)
    times = np.linspace(0.0, t_max, config.grid)
    report = divisibility_scan(affine_trajectory(family), times,
                               tolerance=config.zero_tol)
    values = {pair: value for pair, value in zip(report.pairs, report.min_eigenvalues)}
    skipped = {(t1, t2): message for t1, t2, message in report.skipped}
    for (t1, t2), message in sorted(skipped.items()):
        sys.stderr.write(f"warning: singular propagator start at "
                         f"t1={t1:.6g} (pair t2={t2:.6g}): {message}\n")

    columns = ("t1", "t2", "min_choi_eig")
    rows = []
    for i, t1 in enumerate(times):
        for t2 in times[i:]:
            pair = (float(t1), float(t2))
            if pair in values:
                rows.append(pair + (values[pair],))
            else:
                rows.append(pair + ("",))

    if (config.format or "csv") == "json":
        _emit(config, _tabular_json(config, columns, rows))
    else:
        out = _Output(config)
        out.row(columns)
        for row in rows:
            out.row(row)
        _emit(config, out.text())
    return 0


def cmd_bloch(config: RunConfig) -> int:
    if config.family == "forced":
        rates = constant_rates(config.alpha, config.beta, config.gamma3)
        scale = 1.0
    else:
        family = build_family(config)
        try:
            rates = ode_rate_functions(family)
        except ValidationError as err:
            raise ConfigError(f"weights: {err}") from err
        scale = _time_scale(config)
    t_max = config.t_max if config.t_max is not None else 10.0 / scale
    if config.step > t_max / 10.0:
        raise ConfigError(f"step: {config.step} too large for t_max {t_max}")

    trajectory = integrate(rates, config.r0, t_max, config.step)
    if trajectory.halted is not None:
        sys.stderr.write(f"warning: integration halted at t={trajectory.halted[0]:.6g}: "
                         f"{trajectory.halted[1]}\n")

    node_count = len(trajectory.times)
    if node_count > config.samples:
        keep = np.unique(np.linspace(0, node_count - 1, config.samples).round().astype(int))
    else:
        keep = np.arange(node_count)

    out = _Output(config)
    out.row(("t", "r1", "r2", "r3", "norm"))
    for index in keep:
        point = trajectory.points[index]
        out.row((float(trajectory.times[index]), float(point[0]), float(point[1]),
                 float(point[2]), float(np.linalg.norm(point))))
    text = out.text()
    if (config.format or "csv") == "json":
        footer = {
            "schema": 1,
            "violation": None if trajectory.violation is None else {
                "time": float(trajectory.violation.time),
                "component": int(trajectory.violation.component),
                "norm": float(trajectory.violation.norm),
            },
            "halted": None if trajectory.halted is None else {
                "time": float(trajectory.halted[0]), "error": trajectory.halted[1]},
        }
        text += json.dumps(footer, sort_keys=True) + "\n"
    _emit(config, text)
    return 0


def cmd_sweep(config: RunConfig) -> int:
    if config.family != "mix":
        raise ConfigError("family: sweep explores mixing weights, use family 'mix'")
    if not config.c > 0:
        raise ConfigError(f"c: must be > 0, got {config.c}")
    profile = exp_profile(config.c)
    resolution = config.grid

    rows = []
    for i in range(resolution + 1):
        for j in range(resolution + 1 - i):
            k = resolution - i - j
            weights = (i / resolution, j / resolution, k / resolution)
            try:
                family = PauliMixtureFamily(MixtureSpec(*weights), profile)
                timeline = build_timeline(rate_source(family), horizon=config.t_max,
                                          n=config.samples, zero_tol=config.zero_tol)
                report = classify(timeline, delta_min=config.delta_min,
                                  zero_tol=config.zero_tol)
                rows.append(weights + (
                    report.verdict.value,
                    "" if report.t_star is None else float(report.t_star),
                    "" if report.asymptote is None else float(report.asymptote),
                ))
            except QmapError as err:
                sys.stderr.write(f"warning: sweep point {weights} failed: {err}\n")
                rows.append(weights + ("error", "", ""))
    rows.sort(key=lambda row: (row[0], row[1]))

    columns = ("w1", "w2", "w3", "verdict", "t_star", "asymptote")
    if (config.format or "csv") == "json":
        _emit(config, _tabular_json(config, columns, rows))
    else:
        out = _Output(config)
        out.row(columns)
        for row in rows:
            out.row(row)
        _emit(config, out.text())
    return 0


_COMMANDS = {
    "rates": cmd_rates,
    "classify": cmd_classify,
    "divisibility": cmd_divisibility,
    "bloch": cmd_bloch,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
    except ConfigError as err:
        sys.stderr.write(f"config error: {err}\n")
        return 2
    try:
        return _COMMANDS[config.command](config)
    except ConfigError as err:
        sys.stderr.write(f"config error: {err}\n")
        return 2
    except ValidationError as err:
        sys.stderr.write(f"config error: {err}\n")
        return 2
    except QmapError as err:
        sys.stderr.write(f"numeric failure: {err}\n")
        return 3


def entry_point():
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
