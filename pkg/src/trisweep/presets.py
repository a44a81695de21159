"""Named scenario presets reproducing the reference parameter sets.

All presets use sweep-rate units alpha = 1, so times are in 1/sqrt(alpha)
and energies in sqrt(alpha).  The drive amplitude is A = 0.005 sqrt(alpha)
throughout the three-level scenarios; block-model presets take the common
coupling as a parameter with default 0.5 sqrt(alpha).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .models import DriveSpec, Harmonic, ModelParams, QuantizedCouplings
from .propagate import TimeGrid
from .runner import ScenarioConfig, SweepSpec

__all__ = ["PRESETS", "SWEEP_PRESETS", "get_preset", "get_sweep_preset", "preset_names"]

_A = 0.005
_SPIKE_OMEGA = (2 * 5 + 1) * np.pi / 2  # resonance D = omega = (2M+1) pi/2, M = 5


def _su3(name, d, omega, t_span, engine="numeric-density", amp=_A, phi=0.0,
         delta=0.0, stride=0.02, description=""):
    return ScenarioConfig(
        name=name,
        model=ModelParams(alpha=1.0, d_aniso=d),
        drive=DriveSpec(static_delta=delta, harmonics=(Harmonic(amp, omega, phi),)),
        grid=TimeGrid(-t_span, t_span, stride),
        engine=engine,
        initial_level=2,
        description=description,
    )


def _spike(name, n_harmonics, description=""):
    d = _SPIKE_OMEGA
    harmonics = tuple(
        Harmonic(_A, n * _SPIKE_OMEGA, 0.0) for n in range(1, n_harmonics + 1)
    )
    t_span = (n_harmonics + 1) * _SPIKE_OMEGA + 20.0
    return ScenarioConfig(
        name=name,
        model=ModelParams(alpha=1.0, d_aniso=d),
        drive=DriveSpec(harmonics=harmonics),
        grid=TimeGrid(-t_span, t_span, 0.05),
        engine="numeric-density",
        initial_level=2,
        description=description,
    )


def _block(name, variant, d, omega, lam=0.5, pairs=None, t_span=500.0,
           description=""):
    if pairs is None:
        couplings = QuantizedCouplings.uniform(lam, omega)
    else:
        couplings = QuantizedCouplings(pairs, omega)
    return ScenarioConfig(
        name=name,
        model=ModelParams(alpha=1.0, d_aniso=d),
        drive=DriveSpec(),
        grid=TimeGrid(-t_span, t_span, 1.0, rel_tol=1e-6, abs_tol=1e-6),
        engine="numeric-state",
        model_variant=variant,
        initial_level=3 if variant == "h_down" else 2,
        couplings=couplings,
        description=description,
    )


_RT2 = np.sqrt(2.0)


def _build(name: str, lam: float | None) -> ScenarioConfig:
    if name == "zero-drive":
        cfg = _su3("zero-drive", 0.5, 10.0, 10.0, amp=0.0, stride=0.05,
                   description="no transverse coupling: populations stay put")
        return cfg
    if name == "fig2a":
        return _su3("fig2a", 0.05, 15.0, 40.0,
                    description="small triangle, fast drive: two-step pattern")
    if name == "fig2b":
        return _su3("fig2b", 15.0, 1.5, 40.0,
                    description="large triangle, slow drive: beats riding on steps")
    if name == "fig3a":
        return _su3("fig3a", 12.0, 12.0, 40.0,
                    description="anisotropy matches drive frequency: three steps")
    if name == "fig3b":
        return _su3("fig3b", 15.0, 8.0, 40.0,
                    description="well-separated split crossings: four steps")
    if name == "fig3b-swapped":
        return _su3("fig3b-swapped", 8.0, 15.0, 40.0,
                    description="same four-step pattern with D and omega swapped")
    if name == "fig4a":
        return _block("fig4a", "h_down", 0.08, 10.0, t_span=40.0,
                      pairs={p: 0.00176 * _RT2 for p in
                             ((1, 5), (3, 5), (5, 7), (5, 9))},
                      description="five-level block, two-step regime")
    if name == "fig4b":
        return _block("fig4b", "h_down", 12.0, 1.0, t_span=40.0,
                      pairs={p: 0.0021 * _RT2 for p in
                             ((1, 5), (3, 5), (5, 7), (5, 9))},
                      description="five-level block, beats coexisting with steps")
    if name == "fig4ka":
        return _block("fig4ka", "h_down", 12.0, 12.0, t_span=40.0,
                      pairs={(1, 5): 0.00176 * _RT2, (3, 5): 0.00176 * _RT2,
                             (5, 7): 0.0025 * _RT2, (5, 9): 0.0025 * _RT2},
                      description="five-level block, three-step pump setting")
    if name == "fig4kb":
        return _block("fig4kb", "h_down", 18.0, 8.0, t_span=40.0,
                      pairs={(1, 5): 0.00176 * _RT2, (5, 7): 0.00176 * _RT2,
                             (3, 5): 0.0025 * _RT2, (5, 9): 0.0025 * _RT2},
                      description="five-level block, four-step pump setting")
    if name in ("fig5q-n2", "fig5q-n3", "fig5q-n4", "fig5q-n5"):
        n = int(name[-1])
        return _spike(name, n, description=f"spike drive with {n} harmonics")
    if name == "fig6a":
        return _su3("fig6a", 19.4163, 19.4163, 55.0, delta=0.00167,
                    description="static plus periodic coupling: five steps")
    if name == "fig6b":
        return _su3("fig6b", 30.0, 15.5, 60.0, delta=0.00167,
                    description="static plus periodic coupling: six steps")
    lam = 0.5 if lam is None else lam
    if name == "fig8-d0":
        return _block("fig8-d0", "h_down", 0.0, 20.0, lam=lam,
                      description="five-level block asymptotics, two hubs")
    if name == "fig8-deq":
        return _block("fig8-deq", "h_down", 20.0, 20.0, lam=lam,
                      description="five-level block asymptotics, hub between pairs")
    if name == "fig8-wld":
        return _block("fig8-wld", "h_down", 30.0, 20.0, lam=lam,
                      description="five-level block asymptotics, four pair crossings")
    if name == "fig9-d0":
        return _block("fig9-d0", "h_up", 0.0, 20.0, lam=lam,
                      description="four-level block asymptotics, D = 0")
    if name == "fig9-deq":
        return _block("fig9-deq", "h_up", 20.0, 20.0, lam=lam,
                      description="four-level block asymptotics, D = omega")
    if name == "fig9-wld":
        return _block("fig9-wld", "h_up", 20.0, 10.0, lam=lam,
                      description="four-level block asymptotics, omega << D")
    raise ConfigError(f"unknown preset {name!r}")


PRESETS = (
    "zero-drive",
    "fig2a", "fig2b", "fig3a", "fig3b", "fig3b-swapped",
    "fig4a", "fig4b", "fig4ka", "fig4kb",
    "fig5q-n2", "fig5q-n3", "fig5q-n4", "fig5q-n5",
    "fig6a", "fig6b",
    "fig8-d0", "fig8-deq", "fig8-wld",
    "fig9-d0", "fig9-deq", "fig9-wld",
)

#: Chain regime implied by each block preset.
BLOCK_REGIMES = {
    "fig8-d0": "D=0", "fig8-deq": "D=omega", "fig8-wld": "omega<<D",
    "fig9-d0": "D=0", "fig9-deq": "D=omega", "fig9-wld": "omega<<D",
}


def get_preset(name: str, lam: float | None = None) -> ScenarioConfig:
    """Look up a preset by name; ``lam`` overrides block-model couplings."""
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; known presets: {', '.join(PRESETS)}"
        )
    return _build(name, lam)


SWEEP_PRESETS = ("fig5",)


def get_sweep_preset(name: str) -> tuple[ScenarioConfig, SweepSpec]:
    """Sweep presets: base scenario plus grid specification."""
    if name != "fig5":
        raise ConfigError(f"unknown sweep preset {name!r}; known: fig5")
    cfg = _su3("fig5", 0.0, 12.0, 10.0, engine="analytic-mono", stride=0.1,
               description="interference map over (t, D) at omega = 12")
    spec = SweepSpec(t_range=(-10.0, 10.0), y_name="D", y_range=(-10.0, 10.0),
                     resolution=200)
    return cfg, spec


def preset_names() -> list[str]:
    return list(PRESETS) + list(SWEEP_PRESETS)
