"""Fresnel integrals and the interferometric window functions.

All transition probabilities of the swept three-level model are assembled
from the cosine/sine Fresnel integrals C and S (Abramowitz & Stegun
convention, ``C(x) = int_0^x cos(pi u^2 / 2) du``) and two bilinear
combinations of them:

``interf_f(x, y)``
    constructive interference of two waves emerging from crossings located
    where the window arguments x and y vanish,
``interf_g(x, y)``
    the destructive counterpart (antisymmetric in its arguments).

The 1/sqrt(alpha) time scaling lives inside these functions, so callers
pass physical times; the sweep rate ``alpha`` enters through the argument
scaling sqrt(alpha/pi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "FresnelPair",
    "fresnel_c",
    "fresnel_s",
    "interf_f",
    "interf_g",
    "lz_window",
    "windowed_cs",
]

#: Peak of the single-crossing window F(t, t): the Fresnel overshoot.
WINDOW_PEAK = 1.3704429197031105


@dataclass(frozen=True)
class FresnelPair:
    """Pair of windowed Fresnel integral values (cosine part, sine part)."""

    c: float | np.ndarray
    s: float | np.ndarray


def _check_finite(x, name):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    return x


def _check_alpha(alpha):
    if not np.isscalar(alpha) or not np.isfinite(alpha) or alpha <= 0:
        raise DomainError("sweep rate alpha must be a positive finite scalar")
    return float(alpha)


def _maybe_scalar(value, *inputs):
    if all(np.isscalar(x) or np.ndim(x) == 0 for x in inputs):
        return float(value)
    return value


def fresnel_c(x):
    """Cosine Fresnel integral C(x) = int_0^x cos(pi u^2 / 2) du.

    Odd in x, with C(x) -> +-1/2 as x -> +-inf.  Accepts scalars or arrays.
    """
    xa = _check_finite(x, "x")
    return _maybe_scalar(special.fresnel(xa)[1], x)


def fresnel_s(x):
    """Sine Fresnel integral S(x) = int_0^x sin(pi u^2 / 2) du."""
    xa = _check_finite(x, "x")
    return _maybe_scalar(special.fresnel(xa)[0], x)


def _half_plus_cs(x, alpha):
    """(1/2 + C, 1/2 + S) at the scaled argument sqrt(alpha/pi) x.

    These are the infinite-initial-time window factors: each tends to 0 as
    x -> -inf and to 1 as x -> +inf.  ``x`` may contain +-inf.
    """
    s, c = special.fresnel(np.sqrt(alpha / np.pi) * np.asarray(x, dtype=float))
    return 0.5 + c, 0.5 + s


def interf_f(x, y, alpha):
    """Constructive two-wave interference window F(x, y).

    Symmetric in (x, y); F(x, x) is the single-crossing window `lz_window`.
    The arguments are physical times measured from the respective crossing.
    """
    alpha = _check_alpha(alpha)
    cx, sx = _half_plus_cs(x, alpha)
    cy, sy = _half_plus_cs(y, alpha)
    return _maybe_scalar(0.5 * (cx * cy + sx * sy), x, y)


def interf_g(x, y, alpha):
    """Destructive two-wave interference window G(x, y) = -G(y, x).

    Satisfies F(x,y)^2 + G(x,y)^2 = F(x,x) F(y,y) pointwise.
    """
    alpha = _check_alpha(alpha)
    cx, sx = _half_plus_cs(x, alpha)
    cy, sy = _half_plus_cs(y, alpha)
    return _maybe_scalar(0.5 * (cx * sy - sx * cy), x, y)


def lz_window(t, alpha):
    """Single-crossing window F(t) = F(t, t).

    Rises from 0 at t -> -inf to 1 at t -> +inf with Fresnel ringing
    (maximum ~1.37); F(0) = 1/4.  Up to a factor pi*delta this is the
    population that non-adiabatically traverses one crossing.
    """
    return interf_f(t, t, alpha)


def windowed_cs(x_t, x_t0, alpha):
    """Finite-initial-time Fresnel windows.

    Returns the pair ``C(sqrt(alpha/pi) x_t) - C(sqrt(alpha/pi) x_t0)`` and
    the analogous sine combination.  With ``x_t0 = -inf`` these reduce to the
    (1/2 + C, 1/2 + S) factors used by `interf_f`/`interf_g`.
    """
    alpha = _check_alpha(alpha)
    scale = np.sqrt(alpha / np.pi)
    s1, c1 = special.fresnel(scale * np.asarray(x_t, dtype=float))
    s0, c0 = special.fresnel(scale * np.asarray(x_t0, dtype=float))
    return FresnelPair(
        c=_maybe_scalar(c1 - c0, x_t, x_t0),
        s=_maybe_scalar(s1 - s0, x_t, x_t0),
    )
