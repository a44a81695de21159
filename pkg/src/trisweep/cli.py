"""Command-line interface.

Subcommands
-----------
simulate   Run a scenario (preset and/or config file) and write CSV + manifest.
analytic   Run the closed-form twin of a three-level scenario.
sweep      Evaluate an interference-pattern grid to long-format CSV.
compare    Deviation report between two trace CSVs.
steps      Count sustained population drops in a trace CSV.
chain      Compose asymptotic crossing-chain probabilities for a block model.
presets    List the named presets.

Configuration files are flat INI: sections [scenario], [model], [drive],
[grid], [couplings] mirroring ScenarioConfig; run manifests are themselves
valid configuration files.  Command-line ``--set section.key=value``
overrides take precedence over file values, which take precedence over the
preset.  Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analytic import chain_compose, down_chain, up_chain
from .errors import ConfigError, ConservationError, DomainError, IntegrationError, NumericError
from .models import DriveSpec, Harmonic, ModelParams, QuantizedCouplings
from .presets import (
    BLOCK_REGIMES,
    PRESETS,
    SWEEP_PRESETS,
    get_preset,
    get_sweep_preset,
)
from .propagate import TimeGrid
from .runner import (
    ScenarioConfig,
    SweepSpec,
    analytic_twin,
    compare,
    count_steps,
    read_trace_csv,
    run_scenario,
    sweep_pattern,
)

_CONFIG_SECTIONS = ("scenario", "model", "drive", "grid", "couplings")


def _parse_harmonics(text: str) -> tuple[Harmonic, ...]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if len(parts) not in (2, 3):
            raise ConfigError(f"harmonic {chunk!r} must be 'amp freq [phase]'")
        amp, freq = float(parts[0]), float(parts[1])
        phase = float(parts[2]) if len(parts) == 3 else 0.0
        out.append(Harmonic(amp, freq, phase))
    return tuple(out)


def _merge_overrides(values: dict[str, dict[str, str]], sets: list[str]):
    for item in sets:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        key, _, value = item.partition("=")
        section, _, name = key.strip().partition(".")
        if section not in _CONFIG_SECTIONS:
            raise ConfigError(f"unknown config section {section!r}")
        values.setdefault(section, {})[name.strip()] = value.strip()


def _read_config_file(path: Path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return {
        section: dict(parser[section])
        for section in parser.sections()
        if section in _CONFIG_SECTIONS
    }


def _config_from_values(values: dict[str, dict[str, str]],
                        base: ScenarioConfig | None) -> ScenarioConfig:
    scn = values.get("scenario", {})
    mdl = values.get("model", {})
    drv = values.get("drive", {})
    grd = values.get("grid", {})
    cpl = values.get("couplings", {})

    def pick(section, key, fallback):
        return section[key] if key in section else fallback

    if base is None:
        required = [("scenario", "engine"), ("model", "alpha"),
                    ("grid", "t_start"), ("grid", "t_end"), ("grid", "output_stride")]
        for sec, key in required:
            if key not in values.get(sec, {}):
                raise ConfigError(f"config is missing [{sec}] {key}")

    model = ModelParams(
        alpha=float(pick(mdl, "alpha", base.model.alpha if base else 1.0)),
        d_aniso=float(pick(mdl, "d_aniso", base.model.d_aniso if base else 0.0)),
    )
    if "harmonics" in drv:
        harmonics = _parse_harmonics(drv["harmonics"])
    else:
        harmonics = base.drive.harmonics if base else ()
    drive = DriveSpec(
        static_delta=float(
            pick(drv, "static_delta", base.drive.static_delta if base else 0.0)
        ),
        harmonics=harmonics,
    )
    grid = TimeGrid(
        t_start=float(pick(grd, "t_start", base.grid.t_start if base else 0.0)),
        t_end=float(pick(grd, "t_end", base.grid.t_end if base else 1.0)),
        output_stride=float(
            pick(grd, "output_stride", base.grid.output_stride if base else 0.1)
        ),
        rel_tol=float(pick(grd, "rel_tol", base.grid.rel_tol if base else 1e-10)),
        abs_tol=float(pick(grd, "abs_tol", base.grid.abs_tol if base else 1e-10)),
    )
    couplings = base.couplings if base else None
    if cpl:
        pairs: dict[tuple[int, int], float] = {}
        uniform = None
        omega = float(cpl.get("omega", couplings.omega if couplings else 0.0))
        n_a = int(cpl.get("n_a", couplings.n_a if couplings else 1))
        n_b = int(cpl.get("n_b", couplings.n_b if couplings else 1))
        for key, value in cpl.items():
            if key.startswith("pair_"):
                _, i, j = key.split("_")
                pairs[(int(i), int(j))] = float(value)
            elif key == "uniform":
                uniform = float(value)
        if uniform is not None:
            couplings = QuantizedCouplings.uniform(uniform, omega, n_a, n_b)
        elif pairs:
            couplings = QuantizedCouplings(pairs, omega, n_a, n_b)
        elif couplings is not None:
            couplings = QuantizedCouplings(couplings.lam, omega, n_a, n_b)
    return ScenarioConfig(
        name=pick(scn, "name", base.name if base else "custom"),
        model=model,
        drive=drive,
        grid=grid,
        engine=pick(scn, "engine", base.engine if base else "numeric-density"),
        model_variant=pick(
            scn, "model_variant", base.model_variant if base else "su3"
        ),
        initial_level=int(
            pick(scn, "initial_level", base.initial_level if base else 2)
        ),
        couplings=couplings,
        chain_regime=pick(scn, "chain_regime", base.chain_regime if base else None),
        description=base.description if base else "",
    )


def _load_scenario(args) -> ScenarioConfig:
    base = get_preset(args.preset) if args.preset else None
    values: dict[str, dict[str, str]] = {}
    if args.config:
        values = _read_config_file(Path(args.config))
    if args.set:
        _merge_overrides(values, args.set)
    if base is None and not values:
        raise ConfigError("provide --preset and/or --config")
    if not values:
        return base
    return _config_from_values(values, base)


def _cmd_simulate(args) -> int:
    cfg = _load_scenario(args)
    result = run_scenario(cfg, args.out)
    print(f"wrote {result.csv_path} and {result.manifest_path}")
    return 0


def _cmd_analytic(args) -> int:
    cfg = analytic_twin(_load_scenario(args))
    result = run_scenario(cfg, args.out)
    print(f"wrote {result.csv_path} and {result.manifest_path}")
    return 0


def _cmd_sweep(args) -> int:
    if args.preset in SWEEP_PRESETS:
        cfg, spec = get_sweep_preset(args.preset)
    else:
        cfg = _load_scenario(args)
        spec = SweepSpec(
            t_range=(cfg.grid.t_start, cfg.grid.t_end),
            y_name=args.axis,
            y_range=(args.y_min, args.y_max),
        )
    if args.resolution:
        spec = replace(spec, resolution=args.resolution)
    if args.workers is not None:
        spec = replace(spec, workers=args.workers)
    sweep_pattern(cfg, spec, args.out)
    print(f"wrote {Path(args.out) / (cfg.name + '.sweep.csv')}")
    return 0


def _cmd_compare(args) -> int:
    trace_a, _ = read_trace_csv(args.trace_a)
    trace_b, _ = read_trace_csv(args.trace_b)
    report = compare(trace_a, trace_b)
    for i in range(report.deviations.shape[1]):
        print(f"p{i + 1}: max_abs = {report.max_abs[i]:.6e}  rms = {report.rms[i]:.6e}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "deviation.csv"
        report.write_csv(path)
        print(f"wrote {path}")
    return 0


def _cmd_steps(args) -> int:
    trace, meta = read_trace_csv(args.trace)
    alpha = float(meta.get("alpha", args.alpha))
    count = count_steps(trace, args.level - 1, alpha=alpha)
    print(count)
    return 0


def _cmd_chain(args) -> int:
    build = up_chain if args.model == "h_up" else down_chain
    chain = build(args.lam, args.regime, d=args.d, omega=args.omega)
    dist = chain_compose(chain)
    dim = 4 if args.model == "h_up" else 5
    probs = [dist.get(level, 0.0) for level in range(dim)]
    for level, value in enumerate(probs):
        print(f"P(2 -> level {level + 1}) = {value:.12f}")
    print(f"sum = {sum(probs):.15f}")
    return 0


def _cmd_presets(args) -> int:
    if args.action != "list":
        raise ConfigError("usage: trisweep presets list")
    for name in PRESETS:
        cfg = get_preset(name)
        print(f"{name:16s} {cfg.engine:16s} {cfg.model_variant:10s} {cfg.description}")
    for name in SWEEP_PRESETS:
        cfg, spec = get_sweep_preset(name)
        print(f"{name:16s} {'sweep':16s} {cfg.model_variant:10s} {cfg.description}")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="INI scenario configuration file")
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--preset", help="named preset to start from")
    sub.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override one config value (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trisweep",
        description="Swept three-level LZSM interferometry toolkit",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("simulate", help="run a scenario")
    _add_common(sub)
    sub.set_defaults(func=_cmd_simulate)

    sub = subs.add_parser("analytic", help="run the closed-form twin")
    _add_common(sub)
    sub.set_defaults(func=_cmd_analytic)

    sub = subs.add_parser("sweep", help="interference-pattern grid")
    _add_common(sub)
    sub.add_argument("--resolution", type=int, default=None)
    sub.add_argument("--workers", type=int, default=None)
    sub.add_argument("--axis", choices=("D", "omega"), default="D")
    sub.add_argument("--y-min", type=float, default=-10.0)
    sub.add_argument("--y-max", type=float, default=10.0)
    sub.set_defaults(func=_cmd_sweep)

    sub = subs.add_parser("compare", help="deviation report between two traces")
    sub.add_argument("trace_a")
    sub.add_argument("trace_b")
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=_cmd_compare)

    sub = subs.add_parser("steps", help="count population steps in a trace")
    sub.add_argument("trace")
    sub.add_argument("--level", type=int, default=2, help="1-based level label")
    sub.add_argument("--alpha", type=float, default=1.0)
    sub.set_defaults(func=_cmd_steps)

    sub = subs.add_parser("chain", help="asymptotic crossing-chain probabilities")
    sub.add_argument("--model", choices=("h_up", "h_down"), default="h_down")
    sub.add_argument("--regime", choices=("D=0", "D=omega", "omega<<D"),
                     required=True)
    sub.add_argument("--lam", type=float, required=True,
                     help="common coupling in units of sqrt(alpha)")
    sub.add_argument("--d", type=float, default=None)
    sub.add_argument("--omega", type=float, default=20.0)
    sub.set_defaults(func=_cmd_chain)

    sub = subs.add_parser("presets", help="list named presets")
    sub.add_argument("action", choices=("list",))
    sub.set_defaults(func=_cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, ConservationError, NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
