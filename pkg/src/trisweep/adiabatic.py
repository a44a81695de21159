"""Adiabatic-frame machinery: instantaneous eigenbasis with a continuous
gauge, non-adiabatic coupling strengths, dynamical phase surfaces and the
strong-adiabatic transition formula.

In the slow-sweep limit (A^2/alpha >> 1) the system follows the
instantaneous eigenstates; transitions between diabatic levels are then
governed purely by the rotation of the eigenbasis and the dynamical phases
Lambda_kl = int (E_k - E_l) dt accumulated between the frames at t0 and t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DegenerateGapError, DomainError, NumericError
from .models import (
    DriveSpec,
    ModelParams,
    build_semiclassical_h,
    drive_slope,
    eigenenergies_closed,
    spin1_operators,
)

__all__ = [
    "AdiabaticFrame",
    "adiabatic_frame",
    "nonadiabatic_coupling",
    "dynamical_phase",
    "adiabatic_transition_prob",
    "adiabatic_transition_trace",
]

_S = spin1_operators()


@dataclass(frozen=True)
class AdiabaticFrame:
    """Instantaneous eigenframe at one time.

    ``w[n, k]`` is the n-th diabatic component of the k-th eigenvector;
    columns are ordered by ascending energy and the sign gauge is fixed by
    continuity against the previous frame along a trajectory.
    """

    t: float
    energies: np.ndarray
    w: np.ndarray


def adiabatic_frame(
    p: ModelParams, drive: DriveSpec, t: float, prev: AdiabaticFrame | None = None
) -> AdiabaticFrame:
    """Eigen-decompose H(t) with a continuous sign gauge.

    Without ``prev`` each column is normalised to have a positive entry of
    largest magnitude; with ``prev`` each column keeps a positive overlap
    with its predecessor (raises `NumericError` if an overlap vanishes,
    which signals a gauge discontinuity or too coarse a trajectory step).
    """
    h = build_semiclassical_h(p, drive, t)
    energies, w = np.linalg.eigh(h)
    if not np.all(np.isfinite(w)):
        raise NumericError("eigensolver produced non-finite vectors")
    w = w.copy()
    if prev is None:
        for k in range(3):
            lead = np.argmax(np.abs(w[:, k]))
            if w[lead, k] < 0:
                w[:, k] = -w[:, k]
    else:
        for k in range(3):
            overlap = float(prev.w[:, k] @ w[:, k])
            if overlap == 0.0:
                raise NumericError(
                    f"vanishing frame overlap for column {k} at t={t:.6g}"
                )
            if overlap < 0:
                w[:, k] = -w[:, k]
    return AdiabaticFrame(t=float(t), energies=energies, w=w)


def _gap_floor(h: np.ndarray) -> float:
    return 1e-12 * max(np.abs(h).max(), 1.0)


def nonadiabatic_coupling(
    p: ModelParams, drive: DriveSpec, t: float, kappa: int, ell: int
) -> float:
    """Coupling strength nu_kl = -<phi_k| dH/dt |phi_l> / (E_k - E_l).

    Indices are 0-based into the ascending-energy eigenbasis; dH/dt =
    alpha Sz + f'(t) Sx is evaluated analytically.  Near-degenerate gaps
    (below 1e-12 * ||H||) raise `DegenerateGapError` - the adiabatic
    description is invalid there.
    """
    if kappa == ell:
        raise DomainError("non-adiabatic coupling is defined for kappa != ell")
    if not (0 <= kappa < 3 and 0 <= ell < 3):
        raise DomainError("level indices must lie in 0..2")
    frame = adiabatic_frame(p, drive, t)
    h = build_semiclassical_h(p, drive, t)
    gap = frame.energies[kappa] - frame.energies[ell]
    if abs(gap) < _gap_floor(h):
        raise DegenerateGapError(
            f"gap |E_{kappa} - E_{ell}| = {abs(gap):.3e} below degeneracy floor at t={t:.6g}"
        )
    dh = p.alpha * _S.sz + drive_slope(drive, t) * _S.sx
    return float(-(frame.w[:, kappa] @ dh @ frame.w[:, ell]) / gap)


def dynamical_phase(
    p: ModelParams, drive: DriveSpec, t0: float, t: float, kappa: int, ell: int
) -> float:
    """Dynamical phase Lambda_kl(t, t0) = int_t0^t (E_k - E_l) dt'.

    Antisymmetric in (kappa, ell) and zero on the diagonal; evaluated by
    adaptive quadrature over the closed-form eigenenergies.
    """
    if not (0 <= kappa < 3 and 0 <= ell < 3):
        raise DomainError("level indices must lie in 0..2")
    if t < t0:
        raise DomainError("t must not precede t0")
    if kappa == ell or t == t0:
        return 0.0

    def gap(tp):
        e = eigenenergies_closed(p, drive, tp)
        return e[kappa] - e[ell]

    # Subdivide by the drive period so quad resolves the oscillatory gap.
    fmax = drive.max_frequency
    n_osc = int((t - t0) * fmax / (2 * np.pi)) + 1 if fmax > 0 else 1
    breaks = np.linspace(t0, t, min(n_osc, 2000) + 1)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        val, err = integrate.quad(gap, a, b, epsabs=1e-12, epsrel=1e-11, limit=200)
        if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
            raise NumericError(
                f"dynamical-phase quadrature did not converge on [{a:.3g}, {b:.3g}]"
            )
        total += val
    return total


def _frame_pair_products(w: np.ndarray, kappa: int) -> np.ndarray:
    """p^kappa_{nj} = w[kappa, n] w[kappa, j]; gauge invariant."""
    row = w[kappa, :]
    return np.outer(row, row)


def adiabatic_transition_prob(
    p: ModelParams,
    drive: DriveSpec,
    t0: float,
    t: float,
    kappa_init: int,
    kappa_final: int,
) -> float:
    """Strong-adiabatic transition probability between diabatic levels.

    P_{k'->k}(t0, t) = sum_{n,j} p^{k'}_{nj}(t0) p^{k}_{nj}(t)
    cos Lambda_{nj}(t, t0), with p^k_{nj} = w_{kn} w_{kj}.  The result
    depends only on gauge-invariant eigenvector products; summing over the
    final level gives exactly one.
    """
    if not (0 <= kappa_init < 3 and 0 <= kappa_final < 3):
        raise DomainError("level indices must lie in 0..2")
    f0 = adiabatic_frame(p, drive, t0)
    f1 = adiabatic_frame(p, drive, t, prev=f0)
    lam = np.zeros((3, 3))
    for n in range(3):
        for j in range(n + 1, 3):
            lam[n, j] = dynamical_phase(p, drive, t0, t, n, j)
            lam[j, n] = -lam[n, j]
    p0 = _frame_pair_products(f0.w, kappa_init)
    p1 = _frame_pair_products(f1.w, kappa_final)
    return float(np.sum(p0 * p1 * np.cos(lam)))


def adiabatic_transition_trace(
    p: ModelParams, drive: DriveSpec, t0: float, times, kappa_init: int
) -> np.ndarray:
    """Diabatic populations predicted by the adiabatic formula along a sweep.

    Returns an array of shape (len(times), 3); row k holds
    P_{kappa_init -> kappa}(t0, times[k]) for the three diabatic levels.
    Phases are accumulated cumulatively with fixed-order Gauss-Legendre
    panels between samples, and the frame gauge is carried continuously.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("times must be a non-empty 1-D array")
    if np.any(np.diff(times) <= 0) or times[0] < t0:
        raise DomainError("times must be increasing and start at or after t0")

    nodes, weights = np.polynomial.legendre.leggauss(12)
    frame0 = adiabatic_frame(p, drive, t0)
    p0 = {k: _frame_pair_products(frame0.w, k) for k in range(3)}

    out = np.empty((times.size, 3))
    lam = np.zeros((3, 3))
    prev_t = t0
    prev_frame = frame0
    for idx, tk in enumerate(times):
        if tk > prev_t:
            # Panelise finely enough to resolve drive oscillations.
            fmax = drive.max_frequency
            span = tk - prev_t
            n_panels = max(1, int(span * max(fmax, np.sqrt(p.alpha)) / 3.0) + 1)
            for a, b in zip(
                np.linspace(prev_t, tk, n_panels + 1)[:-1],
                np.linspace(prev_t, tk, n_panels + 1)[1:],
            ):
                half = 0.5 * (b - a)
                mid = 0.5 * (a + b)
                for x, wgt in zip(nodes, weights):
                    e = eigenenergies_closed(p, drive, mid + half * x)
                    for n in range(3):
                        for j in range(n + 1, 3):
                            lam[n, j] += half * wgt * (e[n] - e[j])
        frame = adiabatic_frame(p, drive, tk, prev=prev_frame)
        lam_full = lam - lam.T
        cosl = np.cos(lam_full)
        for k in range(3):
            out[idx, k] = float(np.sum(p0[kappa_init] * _frame_pair_products(frame.w, k) * cosl))
        prev_t = tk
        prev_frame = frame
    return out
