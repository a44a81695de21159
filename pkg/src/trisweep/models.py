"""Hamiltonian builders for the swept spin-1 system and its photon-resolved
relatives.

The semiclassical model is

    H(t) = alpha * t * Sz + f(t) * Sx + D * Sz**2,

with a drive f(t) = Delta + sum_n A_n cos(w_n t + phi_n) acting on a spin-1
(three diabatic levels |1>, |2>, |3> = Sz eigenstates m = +1, 0, -1).  The
quantized-field description replaces the drive by two cavity modes with at
most two photons each, which yields a nine-level model that splits into a
4x4 and a 5x5 block under a basis permutation.

Every builder returns a real symmetric matrix.  Builders are pure and cheap;
for time propagation use the `*_terms` companions, which expose the
decomposition H(t) = H0 + t*H1 + sum_k cos(w_k t + p_k) * Ck consumed by the
fast integrator path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

import numpy as np

from .errors import DomainError, NumericError, StructureError

__all__ = [
    "Harmonic",
    "DriveSpec",
    "ModelParams",
    "SpinOperators",
    "QuantizedCouplings",
    "HamiltonianTerms",
    "spin1_operators",
    "drive_value",
    "drive_slope",
    "build_semiclassical_h",
    "semiclassical_terms",
    "eigenenergies_closed",
    "build_nine_level_h",
    "nine_level_terms",
    "block_rotation",
    "block_decompose",
    "build_h_up",
    "h_up_terms",
    "build_h_down",
    "h_down_terms",
    "coupling_from_amplitude",
    "NINE_LEVEL_PAIRS",
    "UP_BLOCK_PAIRS",
    "DOWN_BLOCK_PAIRS",
]


class Harmonic(NamedTuple):
    """One monochromatic component A cos(w t + phi) of the transverse drive."""

    amp: float
    freq: float
    phase: float = 0.0


@dataclass(frozen=True)
class ModelParams:
    """Sweep rate and uniaxial anisotropy of the three-level model.

    Parameters
    ----------
    alpha : float
        Constant sweep velocity of the longitudinal field, > 0.
    d_aniso : float
        Uniaxial anisotropy D multiplying Sz**2.  May have either sign.
    """

    alpha: float
    d_aniso: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise DomainError("sweep rate alpha must be positive and finite")
        if not np.isfinite(self.d_aniso):
            raise DomainError("anisotropy d_aniso must be finite")


@dataclass(frozen=True)
class DriveSpec:
    """Transverse coupling f(t) = static_delta + sum_n A_n cos(w_n t + phi_n).

    An empty harmonics tuple with static_delta > 0 is the constant-coupling
    model; static_delta = 0 with a single harmonic is the purely
    monochromatic drive.
    """

    static_delta: float = 0.0
    harmonics: tuple[Harmonic, ...] = ()

    def __post_init__(self):
        if not np.isfinite(self.static_delta) or self.static_delta < 0:
            raise DomainError("static_delta must be finite and >= 0")
        norm = tuple(Harmonic(*h) for h in self.harmonics)
        for h in norm:
            if not all(np.isfinite(v) for v in h):
                raise DomainError("harmonic parameters must be finite")
            if h.freq < 0:
                raise DomainError("harmonic frequencies must be >= 0")
        object.__setattr__(self, "harmonics", norm)

    @classmethod
    def monochromatic(cls, amp, freq, phase=0.0):
        return cls(harmonics=(Harmonic(amp, freq, phase),))

    @property
    def max_frequency(self):
        return max((h.freq for h in self.harmonics), default=0.0)


def drive_value(drive: DriveSpec, t):
    """Evaluate f(t); vectorized over t."""
    t = np.asarray(t, dtype=float)
    out = np.full_like(t, drive.static_delta)
    for amp, freq, phase in drive.harmonics:
        out = out + amp * np.cos(freq * t + phase)
    return float(out) if out.ndim == 0 else out


def drive_slope(drive: DriveSpec, t):
    """Evaluate f'(t) analytically; vectorized over t."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for amp, freq, phase in drive.harmonics:
        out = out - amp * freq * np.sin(freq * t + phase)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpinOperators:
    """Spin-1 operators in the diabatic basis {|1>, |2>, |3>} (m = 1, 0, -1)."""

    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray


def spin1_operators() -> SpinOperators:
    """Spin-1 su(2) generators with [Sx, Sy] = i Sz and cyclic."""
    sx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float) / np.sqrt(2)
    sy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]) / np.sqrt(2)
    sz = np.diag([1.0, 0.0, -1.0])
    return SpinOperators(sx=sx, sy=sy, sz=sz)


_S = spin1_operators()
_SZ2 = _S.sz @ _S.sz


@dataclass(frozen=True)
class HamiltonianTerms:
    """Structured decomposition H(t) = h0 + t*h1 + sum_k cos(w_k t + p_k)*hk.

    All our models are of this form with real symmetric matrices, which lets
    the propagator evaluate H(t) exactly and cheaply.  Instances are also
    plain Hamiltonian providers: calling one at time t returns the matrix.
    """

    h0: np.ndarray
    h1: np.ndarray
    hcos: np.ndarray  # shape (k, n, n); k may be 0
    freqs: np.ndarray  # shape (k,)
    phases: np.ndarray  # shape (k,)

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    def matrix(self, t: float) -> np.ndarray:
        h = self.h0 + t * self.h1
        for k in range(self.freqs.size):
            h = h + np.cos(self.freqs[k] * t + self.phases[k]) * self.hcos[k]
        return h

    def __call__(self, t: float) -> np.ndarray:
        return self.matrix(t)


def _terms(h0, h1, cos_terms=()):
    n = h0.shape[0]
    k = len(cos_terms)
    hcos = np.zeros((k, n, n))
    freqs = np.zeros(k)
    phases = np.zeros(k)
    for i, (mat, freq, phase) in enumerate(cos_terms):
        hcos[i] = mat
        freqs[i] = freq
        phases[i] = phase
    return HamiltonianTerms(
        h0=np.asarray(h0, dtype=float),
        h1=np.asarray(h1, dtype=float),
        hcos=hcos,
        freqs=freqs,
        phases=phases,
    )


def semiclassical_terms(p: ModelParams, drive: DriveSpec) -> HamiltonianTerms:
    """Structured form of H(t) = alpha t Sz + f(t) Sx + D Sz^2."""
    h0 = p.d_aniso * _SZ2 + drive.static_delta * _S.sx
    h1 = p.alpha * _S.sz
    cos_terms = [(h.amp * _S.sx, h.freq, h.phase) for h in drive.harmonics]
    return _terms(h0, h1, cos_terms)


def build_semiclassical_h(p: ModelParams, drive: DriveSpec, t: float) -> np.ndarray:
    """Semiclassical spin-1 Hamiltonian at time t (real symmetric 3x3).

    Diagonal (alpha t + D, 0, -alpha t + D); entries (1,2) and (2,3) equal
    f(t)/sqrt(2); entry (1,3) vanishes.
    """
    return semiclassical_terms(p, drive).matrix(t)


def eigenenergies_closed(p: ModelParams, drive: DriveSpec, t: float) -> np.ndarray:
    """Closed-form instantaneous eigenenergies, sorted ascending.

    Implements the trigonometric solution of the characteristic cubic:
    E_n = 2D/3 + 2 sqrt(pc/3) cos(theta_n / 3) with
    theta_n = arccos((3 qc / 2 pc) sqrt(3 / pc)) - delta_n for branch offsets
    delta_n in {4 pi, 2 pi, 0}, where pc = (alpha t)^2 + D^2/3 + f^2 and
    qc = 2D ((alpha t)^2 - D^2/9 - f^2/2) / 3.
    """
    d = p.d_aniso
    f = drive_value(drive, t)
    at2 = (p.alpha * t) ** 2
    pc = at2 + d * d / 3.0 + f * f
    qc = 2.0 * d * (at2 - d * d / 9.0 - f * f / 2.0) / 3.0
    if not (np.isfinite(pc) and np.isfinite(qc)):
        raise NumericError("non-finite cubic invariants in eigenenergy formula")
    if pc == 0.0:
        # H is the zero matrix (t = 0, D = 0, f = 0): triple degeneracy.
        return np.full(3, 2.0 * d / 3.0)
    arg = (3.0 * qc / (2.0 * pc)) * np.sqrt(3.0 / pc)
    if not np.isfinite(arg):
        raise NumericError("non-finite arccos argument in eigenenergy formula")
    if abs(arg) > 1.0:
        if abs(arg) - 1.0 > 1e-12:
            raise NumericError(
                f"arccos argument {arg!r} outside [-1, 1] beyond roundoff tolerance"
            )
        arg = np.clip(arg, -1.0, 1.0)
    theta = np.arccos(arg)
    radius = 2.0 * np.sqrt(pc / 3.0)
    branches = np.array([4.0 * np.pi, 2.0 * np.pi, 0.0])
    energies = 2.0 * d / 3.0 + radius * np.cos((theta - branches) / 3.0)
    return np.sort(energies)


# Sparsity pattern of the nine-level quantized model (1-based upper pairs).
NINE_LEVEL_PAIRS = ((1, 5), (2, 4), (2, 6), (3, 5), (4, 8), (5, 7), (5, 9), (6, 8))

# Which nine-level pairs land in which block after the rotation, expressed in
# 1-based indices of the respective block bases.
UP_BLOCK_PAIRS = {(2, 4): (1, 2), (2, 6): (1, 3), (4, 8): (2, 4), (6, 8): (3, 4)}
DOWN_BLOCK_PAIRS = {(1, 5): (1, 3), (3, 5): (2, 3), (5, 7): (3, 4), (5, 9): (3, 5)}


@dataclass(frozen=True)
class QuantizedCouplings:
    """Couplings and cavity data of the photon-resolved nine-level model.

    Parameters
    ----------
    lam : mapping
        Map (i, j) -> coupling value, with 1-based indices into the
        nine-level basis ordering |1,w>, |1>, |1,-w>, |2,w>, |2>, |2,-w>,
        |3,-w>, |3>, |3,w>, where |m, s*w> labels the spin projection m and
        the net photon offset s.  Keys must lie in the allowed sparsity
        pattern; either orientation of a pair is accepted and symmetrized.
    omega : float
        Cavity (photon) frequency, >= 0.
    n_a, n_b : int
        Photon numbers of the two pump modes, each 1 or 2.
    """

    lam: Mapping[tuple[int, int], float]
    omega: float
    n_a: int = 1
    n_b: int = 1

    def __post_init__(self):
        if not np.isfinite(self.omega) or self.omega < 0:
            raise DomainError("cavity frequency omega must be finite and >= 0")
        if self.n_a not in (1, 2) or self.n_b not in (1, 2):
            raise DomainError("photon numbers n_a, n_b must be 1 or 2")
        allowed = set(NINE_LEVEL_PAIRS)
        norm: dict[tuple[int, int], float] = {}
        for (i, j), value in dict(self.lam).items():
            key = (min(i, j), max(i, j))
            if key not in allowed:
                raise StructureError(
                    f"coupling ({i},{j}) outside the nine-level sparsity pattern"
                )
            if key in norm and norm[key] != value:
                raise StructureError(
                    f"conflicting values for symmetric coupling pair {key}"
                )
            if not np.isfinite(value):
                raise DomainError("coupling values must be finite")
            norm[key] = float(value)
        object.__setattr__(self, "lam", norm)

    @classmethod
    def uniform(cls, lam, omega, n_a=1, n_b=1):
        """All eight couplings set to the same value."""
        return cls({pair: lam for pair in NINE_LEVEL_PAIRS}, omega, n_a, n_b)

    def value(self, i, j):
        return self.lam.get((min(i, j), max(i, j)), 0.0)


def _nine_level_static(p: ModelParams, q: QuantizedCouplings):
    d, w = p.d_aniso, q.omega
    h0 = np.diag([d + w, d, d - w, w, 0.0, -w, d - w, d, d + w])
    for (i, j), value in q.lam.items():
        h0[i - 1, j - 1] = h0[j - 1, i - 1] = value / np.sqrt(2)
    h1 = np.diag([1.0, 1.0, 1.0, 0.0, 0.0, 0.0, -1.0, -1.0, -1.0]) * p.alpha
    return h0, h1


def nine_level_terms(p: ModelParams, q: QuantizedCouplings) -> HamiltonianTerms:
    h0, h1 = _nine_level_static(p, q)
    return _terms(h0, h1)


def build_nine_level_h(p: ModelParams, q: QuantizedCouplings, t: float) -> np.ndarray:
    """Nine-level quantized-field Hamiltonian at time t (9x9 real symmetric).

    Diagonal entries are m * alpha * t + D m^2 + omega (n_a - n_b) over the
    basis ordering documented on `QuantizedCouplings`; every coupling enters
    divided by sqrt(2).
    """
    return nine_level_terms(p, q).matrix(t)


# Basis permutation splitting the nine-level model into blocks: entry k of
# _BLOCK_ORDER is the (0-based) nine-level index appearing at block position k.
_BLOCK_ORDER = (1, 3, 5, 7, 0, 2, 4, 6, 8)


def block_rotation() -> np.ndarray:
    """The explicit 9x9 permutation matrix U with U^T H U block diagonal."""
    u = np.zeros((9, 9))
    for pos, src in enumerate(_BLOCK_ORDER):
        u[src, pos] = 1.0
    return u


def block_decompose(h9: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a nine-level Hamiltonian into its 4x4 and 5x5 blocks.

    The rotation is a pure index permutation, so the off-block entries of
    U^T H U vanish identically for any matrix with the nine-level sparsity
    pattern; a nonzero off-block entry therefore signals an invalid input
    and raises `StructureError`.
    """
    h9 = np.asarray(h9)
    if h9.shape != (9, 9):
        raise StructureError("expected a 9x9 matrix")
    order = np.array(_BLOCK_ORDER)
    rotated = h9[np.ix_(order, order)]
    if np.any(rotated[:4, 4:] != 0.0) or np.any(rotated[4:, :4] != 0.0):
        raise StructureError(
            "input violates the nine-level sparsity pattern (nonzero off-block entries)"
        )
    return rotated[:4, :4].copy(), rotated[4:, 4:].copy()


def _block_terms(p: ModelParams, q: QuantizedCouplings, block: str):
    h0, h1 = _nine_level_static(p, q)
    order = np.array(_BLOCK_ORDER)
    sel = order[:4] if block == "up" else order[4:]
    return _terms(h0[np.ix_(sel, sel)], h1[np.ix_(sel, sel)])


def h_up_terms(p: ModelParams, q: QuantizedCouplings) -> HamiltonianTerms:
    return _block_terms(p, q, "up")


def build_h_up(p: ModelParams, q: QuantizedCouplings, t: float) -> np.ndarray:
    """Four-level block over the basis [|1>, |2,w>, |2,-w>, |3>].

    Diagonal (alpha t + D, omega, -omega, -alpha t + D); uses the nine-level
    coupling pairs (2,4), (2,6), (4,8), (6,8).
    """
    return h_up_terms(p, q).matrix(t)


def h_down_terms(p: ModelParams, q: QuantizedCouplings) -> HamiltonianTerms:
    return _block_terms(p, q, "down")


def build_h_down(p: ModelParams, q: QuantizedCouplings, t: float) -> np.ndarray:
    """Five-level block over the basis [|1,w>, |1,-w>, |2>, |3,-w>, |3,w>].

    Diagonal (alpha t + D + w, alpha t + D - w, 0, -alpha t + D - w,
    -alpha t + D + w); uses the nine-level coupling pairs (1,5), (3,5),
    (5,7), (5,9).  With all couplings equal this is the five-level model
    whose middle state shuttles population between the split extremal
    levels.
    """
    return h_down_terms(p, q).matrix(t)


def coupling_from_amplitude(a: float, n_photons: int) -> float:
    """Cavity coupling lambda = A / sqrt(4 n) matching the classical drive.

    Valid for n_photons in {1, 2} (at most four photons in the cavity).
    """
    if n_photons not in (1, 2):
        raise DomainError("n_photons must be 1 or 2")
    if not np.isfinite(a) or a < 0:
        raise DomainError("amplitude must be finite and >= 0")
    return a / np.sqrt(4 * n_photons)
