"""Closed-form transition probabilities of the swept three-level system.

In the fast-sweep (non-adiabatic) limit the population that leaves the
middle level through each crossing region is captured by interference
windows built from Fresnel integrals.  This module provides

- the monochromatic-drive probabilities `p_mono` (valid from t0 = -inf),
- the finite-initial-time transition matrix `transition_matrix_finite`,
- the static-plus-periodic extension `p_static_ext`,
- the polychromatic generalisation `p_poly`,
- the long-time multilevel crossing-chain composer `chain_compose` with the
  closed-form chain solutions `chain_up_asymptotic`/`chain_down_asymptotic`
  for the 4- and 5-level photon-resolved blocks, and
- the weak-coupling survival probability `weak_coupling_p22`.

Conventions: the two returned quantities (p_plus, p_minus) are the
populations transferred through the negative-time and positive-time crossing
regions respectively, and the middle-level survival probability is
P22 = 1 - p_plus - p_minus (to first order in the level-crossing parameter
delta = A^2 / 4 alpha).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .models import DriveSpec, Harmonic, ModelParams
from .specfun import interf_f, interf_g, windowed_cs

__all__ = [
    "PhaseSet",
    "LevelCrossingParams",
    "CrossingEvent",
    "CrossingChain",
    "p_mono",
    "transition_matrix_finite",
    "p_static_ext",
    "p_poly",
    "chain_up_asymptotic",
    "chain_down_asymptotic",
    "chain_compose",
    "up_chain",
    "down_chain",
    "weak_coupling_p22",
    "CHAIN_REGIMES",
]


@dataclass(frozen=True)
class PhaseSet:
    """Interference phases accumulated between crossings.

    theta_-/+ = phi -/+ D w / alpha;  Psi_+- = phi + (D +- w)^2 / 2 alpha;
    phi_+- = phi - (D +- w)^2 / 2 alpha;  chi_-+ = D^2/2alpha - Psi_-+;
    xi_-+ = D^2/2alpha + phi_-+.  For phi = 0, chi and xi coincide.
    """

    theta_minus: float
    theta_plus: float
    psi_plus: float
    psi_minus: float
    phi_plus: float
    phi_minus: float
    chi_minus: float
    chi_plus: float
    xi_minus: float
    xi_plus: float

    @classmethod
    def from_params(cls, p: ModelParams, omega: float, phi: float) -> "PhaseSet":
        d, al = p.d_aniso, p.alpha
        psi_p = phi + (d + omega) ** 2 / (2 * al)
        psi_m = phi + (d - omega) ** 2 / (2 * al)
        phi_p = phi - (d + omega) ** 2 / (2 * al)
        phi_m = phi - (d - omega) ** 2 / (2 * al)
        half_d2 = d * d / (2 * al)
        return cls(
            theta_minus=phi - d * omega / al,
            theta_plus=phi + d * omega / al,
            psi_plus=psi_p,
            psi_minus=psi_m,
            phi_plus=phi_p,
            phi_minus=phi_m,
            chi_minus=half_d2 - psi_m,
            chi_plus=half_d2 - psi_p,
            xi_minus=half_d2 + phi_m,
            xi_plus=half_d2 + phi_p,
        )


@dataclass(frozen=True)
class LevelCrossingParams:
    """Dimensionless smallness parameters of the non-adiabatic expansion."""

    delta: float  # A^2 / 4 alpha
    eta: float  # Delta^2 / alpha

    def __post_init__(self):
        if self.delta < 0 or self.eta < 0:
            raise DomainError("level-crossing parameters must be >= 0")

    @classmethod
    def from_drive(cls, p: ModelParams, drive: DriveSpec) -> "LevelCrossingParams":
        amp = drive.harmonics[0].amp if drive.harmonics else 0.0
        return cls(
            delta=amp * amp / (4 * p.alpha),
            eta=drive.static_delta**2 / p.alpha,
        )


def _signed_args(t, p, omega, phi, sign):
    """Window arguments and phases of the sign = +/- crossing region.

    For p_plus (sign=+1) the crossings sit at t = -(D -+ w)/alpha, i.e. the
    windows are t + (D -+ w)/alpha; p_minus mirrors them at positive times.
    """
    d, al = p.d_aniso, p.alpha
    x_inner = t + sign * (d - sign * omega) / al  # phase Psi(-+)
    x_outer = t + sign * (d + sign * omega) / al  # phase phi(+-)
    psi = phi + (d - sign * omega) ** 2 / (2 * al)
    vphi = phi - (d + sign * omega) ** 2 / (2 * al)
    theta = phi - sign * d * omega / al
    return x_inner, x_outer, psi, vphi, theta


def p_mono(t, p: ModelParams, amp, omega, phi):
    """Transferred populations (p_plus, p_minus) for a monochromatic drive.

    Each branch collects the windows of its two Stark-split crossings plus
    their cross interference weighted by cos/sin of twice the accumulated
    phase theta-+ = phi -+ D w / alpha.  Vectorized over t.
    """
    al = p.alpha
    delta = amp * amp / (4 * al)
    out = []
    for sign in (+1.0, -1.0):
        x1, x2, _, _, theta = _signed_args(np.asarray(t, float), p, omega, phi, sign)
        val = (np.pi * delta) * (
            interf_f(x1, x1, al)
            + interf_f(x2, x2, al)
            + 2.0 * interf_f(x2, x1, al) * np.cos(2.0 * theta)
            + 2.0 * interf_g(x2, x1, al) * np.sin(2.0 * theta)
        )
        out.append(val)
    return out[0], out[1]


def _p_windowed(t, t0, p: ModelParams, amp, omega, phi):
    """Finite-initial-time (p_plus, p_minus) from the windowed Fresnel form."""
    al = p.alpha
    delta = amp * amp / (4 * al)
    t = np.asarray(t, float)
    out = []
    for sign in (+1.0, -1.0):
        x1, x2, psi, vphi, _ = _signed_args(t, p, omega, phi, sign)
        x10, x20, _, _, _ = _signed_args(np.asarray(t0, float), p, omega, phi, sign)
        w1 = windowed_cs(x1, x10, al)
        w2 = windowed_cs(x2, x20, al)
        g_cc = 0.5 * (
            w1.c * np.cos(psi) + w2.c * np.cos(vphi)
            + w1.s * np.sin(psi) - w2.s * np.sin(vphi)
        )
        g_cs = 0.5 * (
            w1.s * np.cos(psi) + w2.s * np.cos(vphi)
            - w1.c * np.sin(psi) + w2.c * np.sin(vphi)
        )
        out.append(2.0 * np.pi * delta * (g_cc**2 + g_cs**2))
    return out[0], out[1]


def transition_matrix_finite(t, t0, p: ModelParams, amp, omega, phi):
    """Perturbative transition matrix P[k', k] between times t0 and t.

    Rows are initial diabatic levels; rows sum to one by construction and
    the corner probabilities 1 -> 3 and 3 -> 1 vanish (no direct coupling).
    ``t0 = -inf`` is allowed and reproduces the infinite-window formula.
    Scalar t gives a (3, 3) matrix; an array of shape (m,) gives (m, 3, 3).
    """
    t_arr = np.asarray(t, float)
    if np.any(t_arr < t0):
        raise DomainError("final time must not precede the initial time")
    pp, pm = _p_windowed(t_arr, t0, p, amp, omega, phi)
    pp = np.asarray(pp, float)
    out = np.zeros(pp.shape + (3, 3))
    out[..., 0, 0] = 1.0 - pp
    out[..., 0, 1] = pp
    out[..., 1, 0] = pp
    out[..., 1, 1] = 1.0 - pp - pm
    out[..., 1, 2] = pm
    out[..., 2, 1] = pm
    out[..., 2, 2] = 1.0 - pm
    return out


def p_static_ext(t, p: ModelParams, delta_static, amp, omega, phi):
    """(p_plus, p_minus) for the drive Delta + A cos(w t + phi).

    Adds to `p_mono` the static-coupling window r_+- = pi eta F(t +- D/alpha)
    and the mixed interference q_+- weighted by sqrt(delta eta), with
    eta = Delta^2 / alpha.  Delta = 0 reduces to `p_mono`; A = 0 leaves only
    the static two-crossing result.
    """
    al, d = p.alpha, p.d_aniso
    delta = amp * amp / (4 * al)
    eta = delta_static**2 / al
    t = np.asarray(t, float)
    pp, pm = p_mono(t, p, amp, omega, phi)
    phases = PhaseSet.from_params(p, omega, phi)
    out = []
    for sign, base in ((+1.0, pp), (-1.0, pm)):
        x_d = t + sign * d / al
        x1, x2, _, _, _ = _signed_args(t, p, omega, phi, sign)
        chi = phases.chi_minus if sign > 0 else phases.chi_plus
        xi = phases.xi_plus if sign > 0 else phases.xi_minus
        r = np.pi * eta * interf_f(x_d, x_d, al)
        q = (2.0 * np.pi * np.sqrt(delta * eta)) * (
            interf_f(x_d, x1, al) * np.cos(chi)
            + interf_f(x_d, x2, al) * np.cos(xi)
            - interf_g(x_d, x1, al) * np.sin(chi)
            - interf_g(x_d, x2, al) * np.sin(xi)
        )
        out.append(base + q + r)
    return out[0], out[1]


def p_poly(t, p: ModelParams, harmonics):
    """(p_plus, p_minus) for a polychromatic drive sum_n A_n cos(w_n t + phi_n).

    Double sum over harmonic pairs (n, m) with weights
    delta_nm = A_n A_m / 4 alpha: every pair of split sublevels contributes
    a constructively (F, cosine) and destructively (G, sine) interfering
    wave, with phases Psi/phi accumulated at the respective crossings.
    Reduces to `p_mono` for a single harmonic.
    """
    al, d = p.alpha, p.d_aniso
    t = np.asarray(t, float)
    harm = [Harmonic(*h) for h in harmonics]
    out = []
    for sign in (+1.0, -1.0):
        acc = np.zeros_like(t)
        pre = []
        for h in harm:
            x1 = t + sign * (d - sign * h.freq) / al
            x2 = t + sign * (d + sign * h.freq) / al
            psi = h.phase + (d - sign * h.freq) ** 2 / (2 * al)
            vphi = h.phase - (d + sign * h.freq) ** 2 / (2 * al)
            pre.append((h.amp, x1, x2, psi, vphi))
        for a_n, x1n, x2n, psi_n, vphi_n in pre:
            for a_m, x1m, x2m, psi_m, vphi_m in pre:
                dnm = a_n * a_m / (4 * al)
                if dnm == 0.0:
                    continue
                acc = acc + (np.pi * dnm) * (
                    np.cos(psi_n - psi_m) * interf_f(x1n, x1m, al)
                    + np.cos(psi_n + vphi_m) * interf_f(x1n, x2m, al)
                    + np.cos(vphi_n + psi_m) * interf_f(x2n, x1m, al)
                    + np.cos(vphi_n - vphi_m) * interf_f(x2n, x2m, al)
                    - np.sin(psi_n - psi_m) * interf_g(x1n, x1m, al)
                    + np.sin(vphi_n + psi_m) * interf_g(x2n, x1m, al)
                    - np.sin(psi_n + vphi_m) * interf_g(x1n, x2m, al)
                    + np.sin(vphi_n - vphi_m) * interf_g(x2n, x2m, al)
                )
        out.append(acc if acc.ndim else float(acc))
    return out[0], out[1]


# --- Long-time crossing-chain solutions ------------------------------------

CHAIN_REGIMES = ("D=0", "D=omega", "omega<<D")


def _check_lambda(lam):
    if not np.isfinite(lam) or lam < 0:
        raise DomainError("coupling ratio lambda/sqrt(alpha) must be >= 0")


def chain_up_asymptotic(lam: float, regime: str) -> np.ndarray:
    """Final populations of the four-level block started in its second level.

    ``lam`` is the common coupling in units of sqrt(alpha).  Output is
    ordered like the block basis [|1>, |2,w>, |2,-w>, |3>]; probabilities
    sum to one exactly.
    """
    _check_lambda(lam)
    p = np.exp(-np.pi * lam * lam)  # plain two-level survival
    ph = np.exp(-np.pi * lam * lam / 2.0)  # sqrt(2)-divided hub survival
    if regime == "D=0":
        return np.array([p * (1 - p), p * p, (1 - p) ** 2, p * (1 - p)])
    if regime == "D=omega":
        leak = 2.0 * (ph - ph * ph)
        return np.array(
            [leak, (2 * ph - 1) ** 2, leak * (1 - ph * ph), leak * ph * ph]
        )
    if regime == "omega<<D":
        return np.array([1 - p, p * p, p * (1 - p) ** 2, p * p * (1 - p)])
    raise DomainError(f"unknown chain regime {regime!r}; expected one of {CHAIN_REGIMES}")


def chain_down_asymptotic(lam: float, regime: str) -> np.ndarray:
    """Final populations of the five-level block started in its middle level.

    Ordered like the block basis [|1,w>, |1,-w>, |2>, |3,-w>, |3,w>].
    """
    _check_lambda(lam)
    p = np.exp(-np.pi * lam * lam)
    ph = np.exp(-np.pi * lam * lam / 2.0)
    if regime == "D=0":
        leak = 2.0 * (ph - ph * ph)
        stay = (2 * ph - 1) ** 2
        return np.array([leak, stay * leak, stay * stay, leak, stay * leak])
    if regime == "D=omega":
        stay = (2 * ph - 1) ** 2
        return np.array(
            [1 - p, 2 * p * (ph - p), p * p * stay, 2 * p * (ph - p), p * stay * (1 - p)]
        )
    if regime == "omega<<D":
        return np.array(
            [1 - p, p * (1 - p), p**4, p * p * (1 - p), p**3 * (1 - p)]
        )
    raise DomainError(f"unknown chain regime {regime!r}; expected one of {CHAIN_REGIMES}")


@dataclass(frozen=True)
class CrossingEvent:
    """One well-separated avoided crossing of a chain.

    ``kind`` is "two-level" (levels = the two involved states) or
    "three-level-hub" (levels = (rising branch, middle, falling branch)).
    ``p`` is the pairwise survival probability of the event;
    ``coupling_divided`` records whether p was computed with the coupling
    divided by sqrt(2) (the rule for hubs embedded in a chain).
    """

    time: float
    kind: str
    p: float
    levels: tuple[int, ...]
    coupling_divided: bool = False

    def __post_init__(self):
        if self.kind not in ("two-level", "three-level-hub"):
            raise DomainError(f"unknown crossing kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError("event probability must lie in [0, 1]")
        want = 2 if self.kind == "two-level" else 3
        if len(self.levels) != want:
            raise DomainError(f"{self.kind} event needs {want} level labels")


@dataclass(frozen=True)
class CrossingChain:
    """Ordered sequence of crossing events traversed from an initial level."""

    initial_level: int
    events: tuple[CrossingEvent, ...] = ()

    def __post_init__(self):
        times = [e.time for e in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("crossing times must be strictly increasing")


def chain_compose(chain: CrossingChain) -> dict[int, float]:
    """Compose a crossing chain incoherently into final level probabilities.

    Each event redistributes probability among its named levels with the
    classic stochastic matrices (squared moduli of the crossing amplitudes;
    accumulated phases drop out for well-separated crossings):

    two-level with survival p:      [[p, 1-p], [1-p, p]]
    hub (rising, middle, falling):  middle -> middle (2p-1)^2, middle ->
    either branch 2p(1-p), branch -> same-side branch p^2, branch -> middle
    2p(1-p), branch -> opposite branch (1-p)^2.

    An empty chain returns {initial_level: 1.0}.
    """
    dist = {chain.initial_level: 1.0}
    for event in chain.events:
        p = event.p
        if event.kind == "two-level":
            i, j = event.levels
            mat = {(i, i): p, (i, j): 1 - p, (j, i): 1 - p, (j, j): p}
        else:
            up, mid, down = event.levels
            stay = (2 * p - 1) ** 2
            leak = 2 * p * (1 - p)
            mat = {
                (mid, mid): stay,
                (mid, up): leak,
                (mid, down): leak,
                (up, up): p * p,
                (up, mid): leak,
                (up, down): (1 - p) ** 2,
                (down, down): p * p,
                (down, mid): leak,
                (down, up): (1 - p) ** 2,
            }
        new = {}
        involved = set(event.levels)
        for level, weight in dist.items():
            if level in involved:
                for target in involved:
                    val = weight * mat.get((level, target), 0.0)
                    if val:
                        new[target] = new.get(target, 0.0) + val
            else:
                new[level] = new.get(level, 0.0) + weight
        dist = new
    return dist


def _lz_probs(lam):
    p_two = float(np.exp(-np.pi * lam * lam))
    p_hub = float(np.exp(-np.pi * lam * lam / 2.0))
    return p_two, p_hub


def up_chain(lam, regime, d=None, omega=20.0, alpha=1.0) -> CrossingChain:
    """Crossing chain of the four-level block for a given regime.

    Level labels are 0-based indices into the block basis
    [|1>, |2,w>, |2,-w>, |3>]; the initial level is |2,w>.  ``d`` defaults
    to the regime's canonical value (0, omega, or 2*omega).  Simultaneous
    crossings of disjoint level pairs commute; they are kept strictly
    ordered by an infinitesimal tie-breaking offset.
    """
    _check_lambda(lam)
    p2, ph = _lz_probs(lam)
    tie = 1e-9 / alpha
    if regime == "D=0":
        return CrossingChain(1, (
            CrossingEvent(-omega / alpha, "two-level", p2, (1, 3)),
            CrossingEvent(-omega / alpha + tie, "two-level", p2, (0, 2)),
            CrossingEvent(omega / alpha, "two-level", p2, (0, 1)),
            CrossingEvent(omega / alpha + tie, "two-level", p2, (2, 3)),
        ))
    if regime == "D=omega":
        return CrossingChain(1, (
            CrossingEvent(-2 * omega / alpha, "two-level", p2, (0, 2)),
            CrossingEvent(0.0, "three-level-hub", ph, (0, 1, 3), True),
            CrossingEvent(2 * omega / alpha, "two-level", p2, (2, 3)),
        ))
    if regime == "omega<<D":
        d = 2 * omega if d is None else d
        return CrossingChain(1, (
            CrossingEvent(-(d + omega) / alpha, "two-level", p2, (0, 2)),
            CrossingEvent(-(d - omega) / alpha, "two-level", p2, (0, 1)),
            CrossingEvent((d - omega) / alpha, "two-level", p2, (1, 3)),
            CrossingEvent((d + omega) / alpha, "two-level", p2, (2, 3)),
        ))
    raise DomainError(f"unknown chain regime {regime!r}; expected one of {CHAIN_REGIMES}")


def down_chain(lam, regime, d=None, omega=20.0, alpha=1.0) -> CrossingChain:
    """Crossing chain of the five-level block for a given regime.

    Level labels are 0-based indices into [|1,w>, |1,-w>, |2>, |3,-w>,
    |3,w>]; the initial level is the middle |2>.
    """
    _check_lambda(lam)
    p2, ph = _lz_probs(lam)
    if regime == "D=0":
        return CrossingChain(2, (
            CrossingEvent(-omega / alpha, "three-level-hub", ph, (0, 2, 3), True),
            CrossingEvent(omega / alpha, "three-level-hub", ph, (1, 2, 4), True),
        ))
    if regime == "D=omega":
        return CrossingChain(2, (
            CrossingEvent(-2 * omega / alpha, "two-level", p2, (0, 2)),
            CrossingEvent(0.0, "three-level-hub", ph, (1, 2, 3), True),
            CrossingEvent(2 * omega / alpha, "two-level", p2, (2, 4)),
        ))
    if regime == "omega<<D":
        if d is None:
            d = 3 * omega / 2
        return CrossingChain(2, (
            CrossingEvent(-(d + omega) / alpha, "two-level", p2, (0, 2)),
            CrossingEvent(-(d - omega) / alpha, "two-level", p2, (1, 2)),
            CrossingEvent((d - omega) / alpha, "two-level", p2, (2, 3)),
            CrossingEvent((d + omega) / alpha, "two-level", p2, (2, 4)),
        ))
    raise DomainError(f"unknown chain regime {regime!r}; expected one of {CHAIN_REGIMES}")


def weak_coupling_p22(amp, alpha, n_a, n_b):
    """Weak-coupling middle-level survival 1 - (pi/alpha)(A^2/2n_a + A^2/2n_b).

    For n_a = n_b = 1 this equals 1 - 4 pi delta with delta = A^2/4 alpha,
    matching the long-time limit of `p_mono` at resonance
    D w / alpha = (2N+1) pi / 2.
    """
    if n_a not in (1, 2) or n_b not in (1, 2):
        raise DomainError("photon numbers n_a, n_b must be 1 or 2")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return 1.0 - (np.pi / alpha) * (amp**2 / (2 * n_a) + amp**2 / (2 * n_b))
