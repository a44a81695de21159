"""Experiment layer: named scenarios, sweeps, comparisons and persistent output.

A `ScenarioConfig` pairs a model with an engine (exact propagation, one of
the closed-form families, the asymptotic chain composer, or the adiabatic
formula) and a time grid.  `run_scenario` executes it and writes a CSV trace
plus a manifest that echoes the full configuration; re-running the echoed
configuration reproduces the CSV bit-identically (deterministic engines,
fixed tolerances).

Engine/variant pairs: the analytic-* and adiabatic engines require the
three-level semiclassical model; the chain engine requires one of the
photon-resolved blocks; numeric engines accept every variant.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, replace
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import __version__ as _code_version
from .analytic import (
    chain_compose,
    down_chain,
    p_poly,
    p_static_ext,
    transition_matrix_finite,
    up_chain,
)
from .adiabatic import adiabatic_transition_trace
from .errors import ConfigError, DomainError, IntegrationError
from .models import (
    DriveSpec,
    ModelParams,
    QuantizedCouplings,
    h_down_terms,
    h_up_terms,
    nine_level_terms,
    semiclassical_terms,
)
from .propagate import (
    PopulationTrace,
    TimeGrid,
    basis_state,
    evolve_density,
    evolve_state,
    level_projector,
)

__all__ = [
    "ScenarioConfig",
    "SweepSpec",
    "RunManifest",
    "RunResult",
    "DeviationReport",
    "ENGINES",
    "MODEL_VARIANTS",
    "run_scenario",
    "execute",
    "analytic_twin",
    "sweep_pattern",
    "count_steps",
    "locate_drops",
    "compare",
    "read_trace_csv",
    "write_trace_csv",
]

ENGINES = (
    "numeric-density",
    "numeric-state",
    "analytic-mono",
    "analytic-static",
    "analytic-poly",
    "chain",
    "adiabatic",
)
MODEL_VARIANTS = {"su3": 3, "h_up": 4, "h_down": 5, "nine_level": 9}
_SU3_ONLY = {"analytic-mono", "analytic-static", "analytic-poly", "adiabatic"}


@dataclass(frozen=True)
class ScenarioConfig:
    """One reproducible run: model, drive, engine, grid and bookkeeping.

    ``initial_level`` uses the 1-based labels of the chosen variant's basis
    (so 2 is the middle level of the three-level model and of the 5x5
    block, while the 4x4 block starts from its second state).
    """

    name: str
    model: ModelParams
    drive: DriveSpec
    grid: TimeGrid
    engine: str
    model_variant: str = "su3"
    initial_level: int = 2
    couplings: QuantizedCouplings | None = None
    chain_regime: str | None = None
    description: str = ""

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}")
        if self.model_variant not in MODEL_VARIANTS:
            raise ConfigError(f"unknown model variant {self.model_variant!r}")
        dim = MODEL_VARIANTS[self.model_variant]
        if self.engine in _SU3_ONLY and self.model_variant != "su3":
            raise ConfigError(f"engine {self.engine} requires the su3 variant")
        if self.engine == "chain" and self.model_variant not in ("h_up", "h_down"):
            raise ConfigError("the chain engine requires the h_up or h_down variant")
        if self.model_variant != "su3" and self.couplings is None:
            raise ConfigError(f"variant {self.model_variant} needs couplings")
        if self.engine == "chain" and self.chain_regime is None:
            raise ConfigError("the chain engine needs a chain_regime")
        if not 1 <= self.initial_level <= dim:
            raise ConfigError(
                f"initial_level {self.initial_level} outside 1..{dim} "
                f"for variant {self.model_variant}"
            )

    @property
    def dim(self) -> int:
        return MODEL_VARIANTS[self.model_variant]


def _single_harmonic(cfg: ScenarioConfig):
    if len(cfg.drive.harmonics) != 1:
        raise ConfigError(f"engine {cfg.engine} needs exactly one drive harmonic")
    return cfg.drive.harmonics[0]


def _terms(cfg: ScenarioConfig):
    if cfg.model_variant == "su3":
        return semiclassical_terms(cfg.model, cfg.drive)
    builders = {
        "h_up": h_up_terms,
        "h_down": h_down_terms,
        "nine_level": nine_level_terms,
    }
    return builders[cfg.model_variant](cfg.model, cfg.couplings)


def _eq9_trace(times, pp, pm, level0):
    """Populations from the perturbative transition-matrix structure."""
    pops = np.zeros((times.size, 3))
    if level0 == 0:
        pops[:, 0], pops[:, 1], pops[:, 2] = 1.0 - pp, pp, 0.0
    elif level0 == 1:
        pops[:, 0], pops[:, 1], pops[:, 2] = pp, 1.0 - pp - pm, pm
    else:
        pops[:, 0], pops[:, 1], pops[:, 2] = 0.0, pm, 1.0 - pm
    return pops


def _uniform_lambda(cfg: ScenarioConfig) -> float:
    values = set(cfg.couplings.lam.values())
    if len(values) != 1:
        raise ConfigError("the chain engine needs uniform couplings")
    return values.pop() / np.sqrt(cfg.model.alpha)


def execute(cfg: ScenarioConfig) -> PopulationTrace:
    """Run a scenario's engine and return its population trace."""
    level0 = cfg.initial_level - 1
    grid = cfg.grid
    times = grid.times()
    if cfg.engine == "numeric-density":
        rho0 = level_projector(cfg.dim, level0)
        return evolve_density(_terms(cfg), rho0, grid)
    if cfg.engine == "numeric-state":
        return evolve_state(_terms(cfg), basis_state(cfg.dim, level0), grid)
    if cfg.engine == "analytic-mono":
        h = _single_harmonic(cfg)
        if cfg.drive.static_delta != 0.0:
            raise ConfigError("analytic-mono requires a zero static coupling")
        mats = transition_matrix_finite(
            times, grid.t_start, cfg.model, h.amp, h.freq, h.phase
        )
        return PopulationTrace(times=times, populations=mats[:, level0, :].copy())
    if cfg.engine == "analytic-static":
        h = _single_harmonic(cfg)
        pp, pm = p_static_ext(
            times, cfg.model, cfg.drive.static_delta, h.amp, h.freq, h.phase
        )
        return PopulationTrace(times=times, populations=_eq9_trace(times, pp, pm, level0))
    if cfg.engine == "analytic-poly":
        if cfg.drive.static_delta != 0.0:
            raise ConfigError(
                "analytic-poly takes the static part as a zero-frequency harmonic"
            )
        pp, pm = p_poly(times, cfg.model, cfg.drive.harmonics)
        return PopulationTrace(times=times, populations=_eq9_trace(times, pp, pm, level0))
    if cfg.engine == "chain":
        lam = _uniform_lambda(cfg)
        build = up_chain if cfg.model_variant == "h_up" else down_chain
        chain = build(
            lam,
            cfg.chain_regime,
            d=cfg.model.d_aniso,
            omega=cfg.couplings.omega,
            alpha=cfg.model.alpha,
        )
        if chain.initial_level != level0:
            raise ConfigError(
                "chain formulas are derived for the block's canonical initial level "
                f"(label {chain.initial_level + 1})"
            )
        final = chain_compose(chain)
        pops = np.zeros((2, cfg.dim))
        pops[0, level0] = 1.0
        for lvl, val in final.items():
            pops[1, lvl] = val
        return PopulationTrace(
            times=np.array([grid.t_start, grid.t_end]), populations=pops
        )
    if cfg.engine == "adiabatic":
        pops = adiabatic_transition_trace(cfg.model, cfg.drive, grid.t_start, times, level0)
        return PopulationTrace(times=times, populations=pops)
    raise ConfigError(f"unknown engine {cfg.engine!r}")


def analytic_twin(cfg: ScenarioConfig) -> ScenarioConfig:
    """The closed-form engine matching a numeric three-level scenario."""
    if cfg.model_variant != "su3":
        raise ConfigError("analytic twins exist only for the su3 variant")
    if cfg.drive.static_delta > 0:
        engine = "analytic-static" if len(cfg.drive.harmonics) == 1 else "analytic-poly"
    elif len(cfg.drive.harmonics) == 1:
        engine = "analytic-mono"
    else:
        engine = "analytic-poly"
    if engine == "analytic-poly" and cfg.drive.static_delta > 0:
        drive = DriveSpec(
            0.0, ((cfg.drive.static_delta, 0.0, 0.0),) + cfg.drive.harmonics
        )
        return replace(cfg, name=cfg.name + "-analytic", engine=engine, drive=drive)
    return replace(cfg, name=cfg.name + "-analytic", engine=engine)


# --- CSV / manifest ---------------------------------------------------------


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fmt(x) -> str:
    return f"{x:.17g}" if isinstance(x, float) else str(x)


def _config_echo(cfg: ScenarioConfig) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {
        "scenario": {
            "name": cfg.name,
            "engine": cfg.engine,
            "model_variant": cfg.model_variant,
            "initial_level": str(cfg.initial_level),
        },
        "model": {
            "alpha": _fmt(cfg.model.alpha),
            "d_aniso": _fmt(cfg.model.d_aniso),
        },
        "drive": {
            "static_delta": _fmt(cfg.drive.static_delta),
            "harmonics": "; ".join(
                f"{_fmt(h.amp)} {_fmt(h.freq)} {_fmt(h.phase)}"
                for h in cfg.drive.harmonics
            ),
        },
        "grid": {
            "t_start": _fmt(cfg.grid.t_start),
            "t_end": _fmt(cfg.grid.t_end),
            "output_stride": _fmt(cfg.grid.output_stride),
            "rel_tol": _fmt(cfg.grid.rel_tol),
            "abs_tol": _fmt(cfg.grid.abs_tol),
        },
    }
    if cfg.chain_regime is not None:
        sections["scenario"]["chain_regime"] = cfg.chain_regime
    if cfg.couplings is not None:
        q = cfg.couplings
        sections["couplings"] = {
            "omega": _fmt(q.omega),
            "n_a": str(q.n_a),
            "n_b": str(q.n_b),
        }
        for (i, j), value in sorted(q.lam.items()):
            sections["couplings"][f"pair_{i}_{j}"] = _fmt(value)
    return sections


@dataclass(frozen=True)
class RunManifest:
    """Provenance record written atomically alongside every output file."""

    name: str
    code_version: str
    created_utc: str
    wall_time_s: float
    exit_status: str
    config: dict[str, dict[str, str]]
    integrator: dict[str, str] = field(default_factory=dict)
    invariants: dict[str, str] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            "[run]",
            f"name = {self.name}",
            f"code_version = {self.code_version}",
            f"created_utc = {self.created_utc}",
            f"wall_time_s = {self.wall_time_s:.3f}",
            f"exit_status = {self.exit_status}",
        ]
        for section, entries in self.config.items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in entries.items())
        if self.integrator:
            lines.append("[integrator]")
            lines.extend(f"{k} = {v}" for k, v in self.integrator.items())
        if self.invariants:
            lines.append("[invariants]")
            lines.extend(f"{k} = {v}" for k, v in self.invariants.items())
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunResult:
    trace: PopulationTrace
    csv_path: Path
    manifest_path: Path
    manifest: RunManifest


def write_trace_csv(path: Path, trace: PopulationTrace, alpha: float, meta: dict):
    """Write a trace as CSV: metadata comments, header, one row per sample.

    The time column is in units of 1/sqrt(alpha); numbers carry full
    round-trip precision so comparisons stay bit-stable.
    """
    dim = trace.dim
    header = ["t_sqrt_alpha"] + [f"p{i + 1}" for i in range(dim)]
    cols = [trace.times * np.sqrt(alpha)] + [
        trace.populations[:, i] for i in range(dim)
    ]
    if trace.bloch is not None:
        header += ["R", "Q", "W"]
        cols += [trace.bloch[:, i] for i in range(3)]
    lines = [f"# {k} = {v}" for k, v in meta.items()]
    lines.append(",".join(header))
    data = np.column_stack(cols)
    lines.extend(",".join(f"{v:.17g}" for v in row) for row in data)
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def read_trace_csv(path) -> tuple[PopulationTrace, dict]:
    """Read a trace CSV back into a PopulationTrace plus its metadata."""
    meta: dict[str, str] = {}
    rows = []
    header = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    key, _, value = line[1:].partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    if header is None or not rows:
        raise DomainError(f"no trace data in {path}")
    data = np.asarray(rows)
    alpha = float(meta.get("alpha", 1.0))
    times = data[:, 0] / np.sqrt(alpha)
    pcols = [i for i, name in enumerate(header) if name.startswith("p")]
    pops = data[:, pcols]
    bloch = None
    if header[-3:] == ["R", "Q", "W"]:
        bloch = data[:, -3:]
    return PopulationTrace(times=times, populations=pops, bloch=bloch), meta


def run_scenario(cfg: ScenarioConfig, out_dir) -> RunResult:
    """Execute a scenario and persist its CSV trace and manifest.

    On propagation failure the partial trace (if any) is written with a
    ``partial`` flag in both files and the error is re-raised.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg.name}.csv"
    manifest_path = out / f"{cfg.name}.manifest.txt"
    started = time.perf_counter()
    created = datetime.now(timezone.utc).isoformat()

    status = "ok"
    trace = None
    err: IntegrationError | None = None
    try:
        trace = execute(cfg)
    except IntegrationError as exc:
        status = f"failed: {exc}"
        err = exc
        partial = getattr(exc, "partial_trace", None)
        if partial is not None:
            trace = partial

    wall = time.perf_counter() - started
    diagnostics = trace.diagnostics if trace is not None else {}
    integrator = {
        k: _fmt(diagnostics[k])
        for k in ("rel_tol", "abs_tol", "max_step", "n_steps", "n_rejected")
        if k in diagnostics
    }
    invariants = {
        k: _fmt(diagnostics[k])
        for k in (
            "max_trace_drift",
            "max_herm_drift",
            "max_norm_drift",
            "max_quadratic_drift",
        )
        if k in diagnostics
    }
    manifest = RunManifest(
        name=cfg.name,
        code_version=_code_version,
        created_utc=created,
        wall_time_s=wall,
        exit_status=status,
        config=_config_echo(cfg),
        integrator=integrator,
        invariants=invariants,
    )
    meta = {
        "preset": cfg.name,
        "engine": cfg.engine,
        "model_variant": cfg.model_variant,
        "alpha": _fmt(cfg.model.alpha),
        "d_aniso": _fmt(cfg.model.d_aniso),
        "initial_level": cfg.initial_level,
    }
    if status != "ok":
        meta["partial"] = "true"
    if trace is not None:
        write_trace_csv(csv_path, trace, cfg.model.alpha, meta)
    _atomic_write(manifest_path, manifest.to_text())
    if err is not None:
        raise err
    return RunResult(
        trace=trace, csv_path=csv_path, manifest_path=manifest_path, manifest=manifest
    )


# --- Parameter sweeps -------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """Grid over (t, D) or (t, omega) for interference-pattern maps."""

    t_range: tuple[float, float]
    y_name: str  # "D" or "omega"
    y_range: tuple[float, float]
    resolution: int = 200
    workers: int | None = None

    def __post_init__(self):
        if self.y_name not in ("D", "omega"):
            raise ConfigError("sweep axis must be 'D' or 'omega'")
        if self.resolution < 2:
            raise ConfigError("sweep resolution must be at least 2")


def _sweep_chunk(args):
    (alpha, d_aniso, amp, omega, phase, t0, y_name, y_values, t_values, level0) = args
    out = np.empty((len(y_values), len(t_values)))
    for row, y in enumerate(y_values):
        d = y if y_name == "D" else d_aniso
        om = y if y_name == "omega" else omega
        mats = transition_matrix_finite(
            t_values, t0, ModelParams(alpha=alpha, d_aniso=d), amp, om, phase
        )
        out[row] = mats[:, level0, level0]
    return out


def sweep_pattern(cfg: ScenarioConfig, sweep: SweepSpec, out_dir=None):
    """Survival-probability map over a (t, D) or (t, omega) grid.

    Cells are evaluated with the finite-initial-time analytic engine
    (initial time = the scenario grid's t_start), distributed over a
    process pool in row blocks.  Returns (t_values, y_values, p_grid) with
    ``p_grid[i, j]`` the survival probability at (y_values[i],
    t_values[j]); optionally writes a long-format CSV ``x, y, p22``.
    """
    if cfg.model_variant != "su3":
        raise ConfigError("sweeps are defined for the su3 variant")
    h = _single_harmonic(cfg)
    level0 = cfg.initial_level - 1
    t_values = np.linspace(*sweep.t_range, sweep.resolution)
    y_values = np.linspace(*sweep.y_range, sweep.resolution)
    args = [
        (
            cfg.model.alpha,
            cfg.model.d_aniso,
            h.amp,
            h.freq,
            h.phase,
            cfg.grid.t_start,
            sweep.y_name,
            chunk,
            t_values,
            level0,
        )
        for chunk in np.array_split(y_values, min(16, sweep.resolution))
    ]
    workers = sweep.workers if sweep.workers is not None else min(8, os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_sweep_chunk, args))
    else:
        blocks = [_sweep_chunk(a) for a in args]
    grid = np.vstack(blocks)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{cfg.name}.sweep.csv"
        sq = np.sqrt(cfg.model.alpha)
        lines = [
            f"# preset = {cfg.name}",
            f"# alpha = {_fmt(cfg.model.alpha)}",
            f"# y_axis = {sweep.y_name}",
            f"# t0_sqrt_alpha = {_fmt(cfg.grid.t_start * sq)}",
            "x,y,p22",
        ]
        for i, y in enumerate(y_values):
            for j, t in enumerate(t_values):
                lines.append(f"{t * sq:.17g},{y / sq:.17g},{grid[i, j]:.17g}")
        _atomic_write(path, "\n".join(lines) + "\n")
    return t_values, y_values, grid


# --- Step counting and trace comparison -------------------------------------


def locate_drops(trace: PopulationTrace, level: int, alpha: float = 1.0,
                 window: float | None = None, threshold: float = 0.05,
                 merge_radius: float | None = None) -> np.ndarray:
    """Times of sustained population drops of one level.

    The trace is resampled uniformly, smoothed with a moving average of
    width ``window`` (default 0.5/sqrt(alpha)), and the drop across each
    window is measured; local maxima exceeding ``threshold`` times the
    total transferred population are clustered with ``merge_radius``
    (default 1/sqrt(alpha)).  Returns the cluster centres.
    """
    window = 0.5 / np.sqrt(alpha) if window is None else window
    merge_radius = 1.0 / np.sqrt(alpha) if merge_radius is None else merge_radius
    times = np.asarray(trace.times, float)
    pops = np.asarray(trace.populations[:, level], float)
    if times.size < 4:
        return np.empty(0)
    dt = np.median(np.diff(times))
    uniform_t = np.arange(times[0], times[-1] + dt / 2, dt)
    p = np.interp(uniform_t, times, pops)

    k = max(1, int(round(window / dt)))
    kernel = np.ones(k) / k
    smooth = np.convolve(np.pad(p, k, mode="edge"), kernel, mode="same")[k:-k]

    total_drop = smooth[0] - smooth[-1]
    if total_drop < 1e-8:
        return np.empty(0)

    # The interferometric ringing flanking each crossing survives a boxcar
    # of width `window`; a median filter a few merge radii wide removes it
    # while keeping the step edges, so the drop measured across a span of
    # two merge radii peaks once per sustained drop at its full height.
    m_med = max(3, int(round(6.0 * merge_radius / dt)))
    filt = ndimage.median_filter(smooth, size=min(m_med, smooth.size), mode="nearest")
    span = max(1, int(round(2.0 * merge_radius / dt)))
    if 2 * span >= filt.size:
        span = (filt.size - 1) // 2
    drop = filt[: -2 * span] - filt[2 * span :]
    centres = uniform_t[span : span + drop.size]

    floor = threshold * total_drop
    is_peak = np.zeros(drop.size, bool)
    is_peak[1:-1] = (
        (drop[1:-1] >= drop[:-2]) & (drop[1:-1] > drop[2:]) & (drop[1:-1] > floor)
    )
    peak_times = centres[is_peak]
    peak_drops = drop[is_peak]
    if peak_times.size == 0:
        return peak_times

    # Steps closer than the drop-measurement span cannot be resolved as
    # distinct; cluster within the larger of it and the merge radius.
    sep = max(merge_radius, 2.0 * span * dt)
    clusters = [[0]]
    for i in range(1, peak_times.size):
        if peak_times[i] - peak_times[clusters[-1][-1]] <= sep:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return np.asarray(
        [peak_times[c[int(np.argmax(peak_drops[c]))]] for c in clusters]
    )


def count_steps(trace: PopulationTrace, level: int, alpha: float = 1.0,
                window: float | None = None, threshold: float = 0.05,
                merge_radius: float | None = None) -> int:
    """Number of sustained drops in one level's population (see `locate_drops`)."""
    return int(
        locate_drops(trace, level, alpha, window, threshold, merge_radius).size
    )


@dataclass(frozen=True)
class DeviationReport:
    """Per-column deviation of two traces resampled to a common grid."""

    times: np.ndarray
    deviations: np.ndarray  # (m, dim), a - b
    max_abs: np.ndarray  # (dim,)
    rms: np.ndarray  # (dim,)

    def write_csv(self, path):
        dim = self.deviations.shape[1]
        header = ["t"] + [f"dev_p{i + 1}" for i in range(dim)]
        lines = [",".join(header)]
        for k in range(self.times.size):
            row = [self.times[k]] + list(self.deviations[k])
            lines.append(",".join(f"{v:.17g}" for v in row))
        _atomic_write(Path(path), "\n".join(lines) + "\n")


def compare(trace_a: PopulationTrace, trace_b: PopulationTrace) -> DeviationReport:
    """Deviation report between two traces of the same dimension.

    Both traces are linearly interpolated onto the overlap of their time
    ranges (sampled at trace_a's times); disjoint ranges are an error.
    """
    if trace_a.dim != trace_b.dim:
        raise DomainError("traces have different dimensions")
    lo = max(trace_a.times[0], trace_b.times[0])
    hi = min(trace_a.times[-1], trace_b.times[-1])
    if lo >= hi:
        raise DomainError("traces cover disjoint time ranges")
    mask = (trace_a.times >= lo) & (trace_a.times <= hi)
    ts = trace_a.times[mask]
    dev = np.empty((ts.size, trace_a.dim))
    for i in range(trace_a.dim):
        pa = trace_a.populations[mask, i]
        pb = np.interp(ts, trace_b.times, trace_b.populations[:, i])
        dev[:, i] = pa - pb
    return DeviationReport(
        times=ts,
        deviations=dev,
        max_abs=np.abs(dev).max(axis=0),
        rms=np.sqrt((dev**2).mean(axis=0)),
    )
