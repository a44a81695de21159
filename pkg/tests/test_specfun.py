"""Fresnel integrals and interference windows against independent oracles."""

import numpy as np
import pytest

from trisweep.errors import DomainError
from trisweep.specfun import (
    WINDOW_PEAK,
    fresnel_c,
    fresnel_s,
    interf_f,
    interf_g,
    lz_window,
    windowed_cs,
)

# Composite Gauss-Legendre quadrature of the Fresnel integrands: independent
# of the implementation route (no scipy.special involved).
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(24)


def fresnel_quadrature(xs):
    """Cumulative int_0^x of cos and sin of pi u^2 / 2 at sorted points."""
    xs = np.asarray(xs, dtype=float)
    order = np.argsort(xs)
    pts = np.concatenate([[0.0], xs[order]])
    c_vals = np.empty(xs.size)
    s_vals = np.empty(xs.size)
    c_acc = s_acc = 0.0
    for i in range(1, pts.size):
        a, b = pts[i - 1], pts[i]
        # Split long segments so each panel sees at most ~1 oscillation.
        n_panels = max(1, int(abs(b - a) * (abs(a) + abs(b) + 2) / 2))
        for lo, hi in zip(
            np.linspace(a, b, n_panels + 1)[:-1], np.linspace(a, b, n_panels + 1)[1:]
        ):
            half = 0.5 * (hi - lo)
            mid = 0.5 * (hi + lo)
            u = mid + half * _NODES
            phase = 0.5 * np.pi * u * u
            c_acc += half * np.sum(_WEIGHTS * np.cos(phase))
            s_acc += half * np.sum(_WEIGHTS * np.sin(phase))
        c_vals[order[i - 1]] = c_acc
        s_vals[order[i - 1]] = s_acc
    return c_vals, s_vals


def test_fresnel_trivial_values():
    assert fresnel_c(0.0) == 0.0
    assert fresnel_s(0.0) == 0.0
    assert abs(fresnel_c(1e4) - 0.5) < 1e-4
    assert abs(fresnel_s(1e4) - 0.5) < 1e-4


def test_fresnel_odd_symmetry():
    xs = np.linspace(0.1, 12.0, 57)
    np.testing.assert_allclose(fresnel_c(-xs), -fresnel_c(xs), rtol=0, atol=1e-15)
    np.testing.assert_allclose(fresnel_s(-xs), -fresnel_s(xs), rtol=0, atol=1e-15)


def test_fresnel_against_quadrature_oracle():
    xs = np.linspace(-20.0, 20.0, 1000)
    c_ref, s_ref = fresnel_quadrature(xs)
    np.testing.assert_allclose(fresnel_c(xs), c_ref, rtol=0, atol=1e-10)
    np.testing.assert_allclose(fresnel_s(xs), s_ref, rtol=0, atol=1e-10)


def test_fresnel_at_one_matches_quadrature():
    c_ref, s_ref = fresnel_quadrature(np.array([1.0]))
    assert abs(fresnel_c(1.0) - c_ref[0]) < 1e-12
    assert abs(fresnel_s(1.0) - s_ref[0]) < 1e-12


def test_fresnel_rejects_non_finite():
    with pytest.raises(DomainError):
        fresnel_c(np.nan)
    with pytest.raises(DomainError):
        fresnel_s(np.inf)


def test_interf_f_trivial_points():
    assert interf_f(0.0, 0.0, 1.0) == pytest.approx(0.25, abs=1e-15)
    assert interf_f(np.inf, np.inf, 2.0) == 1.0
    assert interf_f(-np.inf, 5.0, 1.0) == 0.0


def test_interf_f_matches_quadrature_build():
    alpha = 0.7
    x, y = 2.0 / np.sqrt(alpha), -1.0 / np.sqrt(alpha)
    scale = np.sqrt(alpha / np.pi)
    c_ref, s_ref = fresnel_quadrature(np.array([scale * x, scale * y]))
    want = 0.5 * (
        (0.5 + c_ref[0]) * (0.5 + c_ref[1]) + (0.5 + s_ref[0]) * (0.5 + s_ref[1])
    )
    assert interf_f(x, y, alpha) == pytest.approx(want, abs=1e-10)


def test_interf_g_trivial_and_limit():
    assert interf_g(3.3, 3.3, 1.0) == 0.0
    # x -> +inf limit: (S - C)/2 at the scaled y argument.
    y, alpha = 0.7, 1.3
    want = (fresnel_s(np.sqrt(alpha / np.pi) * y) - fresnel_c(np.sqrt(alpha / np.pi) * y)) / 2
    assert interf_g(1e8, y, alpha) == pytest.approx(want, abs=1e-6)


def test_interf_g_quadrature_case():
    alpha = 1.9
    x, y = 1.0 / np.sqrt(alpha), 3.0 / np.sqrt(alpha)
    scale = np.sqrt(alpha / np.pi)
    c_ref, s_ref = fresnel_quadrature(np.array([scale * x, scale * y]))
    want = 0.5 * (
        (0.5 + c_ref[0]) * (0.5 + s_ref[1]) - (0.5 + s_ref[0]) * (0.5 + c_ref[1])
    )
    assert interf_g(x, y, alpha) == pytest.approx(want, abs=1e-10)


def test_window_symmetries_and_identity():
    rng = np.random.default_rng(7)
    x = rng.uniform(-25, 25, 10_000)
    y = rng.uniform(-25, 25, 10_000)
    for alpha in (0.5, 1.0, 2.7):
        f_xy = interf_f(x, y, alpha)
        g_xy = interf_g(x, y, alpha)
        np.testing.assert_allclose(f_xy, interf_f(y, x, alpha), rtol=0, atol=1e-12)
        np.testing.assert_allclose(g_xy, -interf_g(y, x, alpha), rtol=0, atol=1e-12)
        np.testing.assert_allclose(
            f_xy**2 + g_xy**2,
            interf_f(x, x, alpha) * interf_f(y, y, alpha),
            rtol=0,
            atol=1e-12,
        )


def test_lz_window_shape():
    alpha = 1.0
    assert lz_window(-1e6, alpha) == pytest.approx(0.0, abs=1e-6)
    assert lz_window(0.0, alpha) == pytest.approx(0.25, abs=1e-15)
    assert lz_window(1e6, alpha) == pytest.approx(1.0, abs=1e-6)
    t = np.linspace(-30, 30, 4001)
    w = lz_window(t, alpha)
    assert w.max() <= WINDOW_PEAK + 1e-12
    assert abs(w.max() - WINDOW_PEAK) < 1e-4


def test_single_crossing_probability_curve():
    # pi * dhat * F(t) is the finite-time single-crossing transition
    # probability; it saturates at pi * dhat and passes a quarter of it at
    # the crossing.
    dhat = 0.0025
    curve = np.pi * dhat * lz_window(np.array([-40.0, 0.0, 40.0]), 1.0)
    assert curve[0] < 1e-4 * np.pi * dhat * 10
    assert curve[1] == pytest.approx(np.pi * dhat / 4, rel=1e-12)
    assert curve[2] == pytest.approx(np.pi * dhat, rel=2e-2)


def test_windowed_cs_cases():
    pair = windowed_cs(2.3, 2.3, 1.0)
    assert pair.c == 0.0 and pair.s == 0.0
    pair = windowed_cs(np.inf, -np.inf, 0.8)
    assert pair.c == pytest.approx(1.0, abs=1e-15)
    assert pair.s == pytest.approx(1.0, abs=1e-15)
    # finite pair against the quadrature oracle
    alpha, x_t, x_t0 = 1.4, 1.7, -0.9
    scale = np.sqrt(alpha / np.pi)
    c_ref, s_ref = fresnel_quadrature(np.array([scale * x_t, scale * x_t0]))
    pair = windowed_cs(x_t, x_t0, alpha)
    assert pair.c == pytest.approx(c_ref[0] - c_ref[1], abs=1e-10)
    assert pair.s == pytest.approx(s_ref[0] - s_ref[1], abs=1e-10)
    # infinite initial time reduces to the (1/2 + C, 1/2 + S) form
    pair = windowed_cs(x_t, -np.inf, alpha)
    assert pair.c == pytest.approx(0.5 + fresnel_c(scale * x_t), abs=1e-15)


def test_alpha_domain_errors():
    for bad in (0.0, -1.0, np.nan):
        with pytest.raises(DomainError):
            interf_f(1.0, 2.0, bad)
        with pytest.raises(DomainError):
            interf_g(1.0, 2.0, bad)
        with pytest.raises(DomainError):
            lz_window(1.0, bad)
        with pytest.raises(DomainError):
            windowed_cs(1.0, 0.0, bad)
