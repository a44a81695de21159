"""Hamiltonian builders: structure, closed-form eigenenergies, block algebra."""

import numpy as np
import pytest

from trisweep.errors import DomainError, NumericError, StructureError
from trisweep.models import (
    NINE_LEVEL_PAIRS,
    DriveSpec,
    Harmonic,
    ModelParams,
    QuantizedCouplings,
    block_decompose,
    block_rotation,
    build_h_down,
    build_h_up,
    build_nine_level_h,
    build_semiclassical_h,
    coupling_from_amplitude,
    drive_value,
    eigenenergies_closed,
    h_down_terms,
    h_up_terms,
    nine_level_terms,
    semiclassical_terms,
    spin1_operators,
)


def test_spin1_algebra():
    s = spin1_operators()
    comm = s.sx @ s.sy - s.sy @ s.sx
    np.testing.assert_allclose(comm, 1j * s.sz, atol=1e-15)
    comm = s.sy @ s.sz - s.sz @ s.sy
    np.testing.assert_allclose(comm, 1j * s.sx, atol=1e-15)
    # ladder action of Sx: <m +- 1|Sx|m> = sqrt(2 - m(m +- 1)) / 2
    np.testing.assert_allclose(s.sx[0, 1], np.sqrt(2) / 2, atol=1e-15)
    np.testing.assert_allclose(s.sx[2, 1], np.sqrt(2) / 2, atol=1e-15)


def test_model_params_validation():
    with pytest.raises(DomainError):
        ModelParams(alpha=0.0)
    with pytest.raises(DomainError):
        ModelParams(alpha=-1.0)
    with pytest.raises(DomainError):
        ModelParams(alpha=1.0, d_aniso=np.inf)


def test_drive_spec_validation():
    with pytest.raises(DomainError):
        DriveSpec(static_delta=-0.1)
    with pytest.raises(DomainError):
        DriveSpec(harmonics=((1.0, -2.0, 0.0),))
    drive = DriveSpec(harmonics=[(0.1, 2.0, 0.3)])
    assert isinstance(drive.harmonics[0], Harmonic)


def test_drive_value_cases():
    assert drive_value(DriveSpec.monochromatic(1.0, 0.0), 12.3) == 1.0
    assert drive_value(DriveSpec(static_delta=0.5), -3.0) == 0.5
    # spike signal: term-by-term summation oracle
    t0, omega, amp = 0.7, 2.0, 1.0
    harmonics = tuple(
        Harmonic(amp / n, n * omega, n * omega * t0) for n in range(1, 6)
    )
    drive = DriveSpec(harmonics=harmonics)
    ts = np.linspace(-3, 3, 11)
    expect = sum(
        (amp / n) * np.cos(n * omega * ts + n * omega * t0) for n in range(1, 6)
    )
    np.testing.assert_allclose(drive_value(drive, ts), expect, atol=1e-14)


def test_semiclassical_structure():
    p = ModelParams(alpha=1.0, d_aniso=0.0)
    h = build_semiclassical_h(p, DriveSpec(), 2.0)
    np.testing.assert_allclose(h, np.diag([2.0, 0.0, -2.0]), atol=0)

    p = ModelParams(alpha=0.8, d_aniso=1.3)
    drive = DriveSpec(static_delta=0.2, harmonics=((0.4, 3.0, 0.5),))
    for t in (-2.0, 0.0, 1.7):
        h = build_semiclassical_h(p, drive, t)
        f = drive_value(drive, t)
        assert h[0, 1] == pytest.approx(f / np.sqrt(2), abs=1e-15)
        assert h[1, 2] == pytest.approx(f / np.sqrt(2), abs=1e-15)
        assert h[0, 2] == 0.0
        np.testing.assert_allclose(
            np.diag(h),
            [p.alpha * t + p.d_aniso, 0.0, -p.alpha * t + p.d_aniso],
            atol=1e-15,
        )
        assert np.trace(h) == pytest.approx(2 * p.d_aniso, abs=1e-14)
        np.testing.assert_allclose(h, h.T, atol=0)


def test_terms_match_direct_builders():
    p = ModelParams(alpha=1.4, d_aniso=-0.6)
    drive = DriveSpec(static_delta=0.1, harmonics=((0.3, 2.0, 0.1), (0.2, 5.0, 1.0)))
    terms = semiclassical_terms(p, drive)
    for t in np.linspace(-4, 4, 17):
        np.testing.assert_allclose(
            terms(t), build_semiclassical_h(p, drive, t), atol=1e-15
        )


def test_eigenenergies_diagonal_case():
    p = ModelParams(alpha=1.0, d_aniso=0.0)
    e = eigenenergies_closed(p, DriveSpec(), 3.0)
    np.testing.assert_allclose(e, [-3.0, 0.0, 3.0], atol=1e-12)


def test_eigenenergies_block_split_at_zero():
    # At t = 0 the matrix splits into a 1x1 and a 2x2 block: eigenvalues
    # are D and (D +- sqrt(D^2 + 4 A^2)) / 2.
    amp, d = 2.0, 5.0
    p = ModelParams(alpha=1.0, d_aniso=d)
    drive = DriveSpec.monochromatic(amp, 1.0, 0.0)
    root = np.sqrt(d * d + 4 * amp * amp)
    want = np.sort([d, (d + root) / 2, (d - root) / 2])
    np.testing.assert_allclose(
        eigenenergies_closed(p, drive, 0.0), want, atol=1e-12
    )


def test_eigenenergies_match_diagonalization():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        p = ModelParams(
            alpha=rng.uniform(0.2, 4.0), d_aniso=rng.uniform(-20.0, 20.0)
        )
        drive = DriveSpec(
            static_delta=rng.uniform(0, 1.0),
            harmonics=((rng.uniform(0, 4.0), rng.uniform(0, 10.0), rng.uniform(0, 6.0)),),
        )
        t = rng.uniform(-20.0, 20.0)
        closed = eigenenergies_closed(p, drive, t)
        direct = np.linalg.eigvalsh(build_semiclassical_h(p, drive, t))
        worst = max(worst, np.abs(closed - direct).max())
    assert worst < 1e-10


def test_eigenenergies_general_point():
    p = ModelParams(alpha=1.0, d_aniso=5.0)
    drive = DriveSpec.monochromatic(2.0, 1.0, 0.0)
    closed = eigenenergies_closed(p, drive, 3.0)
    direct = np.linalg.eigvalsh(build_semiclassical_h(p, drive, 3.0))
    np.testing.assert_allclose(closed, direct, atol=1e-10)


def test_eigenenergies_zero_matrix():
    p = ModelParams(alpha=1.0, d_aniso=0.0)
    np.testing.assert_allclose(eigenenergies_closed(p, DriveSpec(), 0.0), 0.0, atol=0)


def test_quantized_couplings_validation():
    with pytest.raises(StructureError):
        QuantizedCouplings({(1, 2): 0.3}, omega=1.0)
    with pytest.raises(DomainError):
        QuantizedCouplings({(1, 5): 0.3}, omega=1.0, n_a=3)
    with pytest.raises(DomainError):
        QuantizedCouplings({(1, 5): np.nan}, omega=1.0)
    q = QuantizedCouplings({(5, 1): 0.3}, omega=1.0)
    assert q.value(1, 5) == 0.3


def test_nine_level_diagonal():
    alpha, d, omega = 1.0, 0.7, 2.5
    p = ModelParams(alpha=alpha, d_aniso=d)
    q = QuantizedCouplings({}, omega=omega)
    for t in (-3.0, 0.0, 1.2):
        h = build_nine_level_h(p, q, t)
        at = alpha * t
        want = np.diag(
            [at + d + omega, at + d, at + d - omega, omega, 0.0, -omega,
             -at + d - omega, -at + d, -at + d + omega]
        )
        np.testing.assert_allclose(h, want, atol=0)


def test_nine_level_matches_spin_pair_model():
    # With all couplings equal the nine-level model is two spin-1 systems
    # coupled through their x components with exchange sqrt(2) * lam.
    alpha, d, omega, lam, t = 1.0, 3.0, 7.0, 0.9, 2.5
    p = ModelParams(alpha=alpha, d_aniso=d)
    q = QuantizedCouplings.uniform(lam, omega)
    s = spin1_operators()
    eye = np.eye(3)
    pair = (
        alpha * t * np.kron(s.sz, eye)
        + omega * np.kron(eye, s.sz)
        + np.sqrt(2) * lam * np.kron(s.sx.real, s.sx.real)
        + d * np.kron(s.sz @ s.sz, eye)
    )
    perm = [0, 1, 2, 3, 4, 5, 8, 7, 6]
    np.testing.assert_allclose(
        build_nine_level_h(p, q, t), pair[np.ix_(perm, perm)], atol=1e-14
    )


def test_builders_hermitian_for_random_couplings():
    rng = np.random.default_rng(3)
    p = ModelParams(alpha=1.0, d_aniso=1.0)
    for _ in range(50):
        lam = {pair: rng.normal() for pair in NINE_LEVEL_PAIRS}
        q = QuantizedCouplings(lam, omega=rng.uniform(0, 5))
        t = rng.uniform(-5, 5)
        for h in (
            build_nine_level_h(p, q, t),
            build_h_up(p, q, t),
            build_h_down(p, q, t),
        ):
            assert np.abs(h - h.T).max() == 0.0


def test_block_rotation_is_explicit_permutation():
    u = block_rotation()
    assert np.array_equal(u @ u.T, np.eye(9))
    p = ModelParams(alpha=1.0, d_aniso=0.4)
    q = QuantizedCouplings.uniform(0.7, 2.0)
    h9 = build_nine_level_h(p, q, 1.3)
    rotated = u.T @ h9 @ u
    up, down = block_decompose(h9)
    np.testing.assert_allclose(rotated[:4, :4], up, atol=0)
    np.testing.assert_allclose(rotated[4:, 4:], down, atol=0)
    assert np.abs(rotated[:4, 4:]).max() == 0.0


def test_block_decompose_matches_direct_builders():
    rng = np.random.default_rng(5)
    p = ModelParams(alpha=1.3, d_aniso=-0.8)
    for _ in range(20):
        lam = {pair: rng.normal() for pair in NINE_LEVEL_PAIRS}
        q = QuantizedCouplings(lam, omega=rng.uniform(0, 4))
        t = rng.uniform(-4, 4)
        h9 = build_nine_level_h(p, q, t)
        up, down = block_decompose(h9)
        np.testing.assert_allclose(up, build_h_up(p, q, t), atol=0)
        np.testing.assert_allclose(down, build_h_down(p, q, t), atol=0)
        # orthogonal similarity: eigenvalue multisets merge
        merged = np.sort(
            np.concatenate([np.linalg.eigvalsh(up), np.linalg.eigvalsh(down)])
        )
        np.testing.assert_allclose(
            merged, np.linalg.eigvalsh(h9), atol=1e-10
        )


def test_block_decompose_rejects_bad_sparsity():
    h = np.zeros((9, 9))
    h[0, 1] = h[1, 0] = 0.3  # forbidden position
    with pytest.raises(StructureError):
        block_decompose(h)
    with pytest.raises(StructureError):
        block_decompose(np.zeros((4, 4)))


def test_block_diagonals_zero_coupling():
    alpha, d, omega, t = 1.0, 0.9, 1.7, 0.8
    p = ModelParams(alpha=alpha, d_aniso=d)
    q = QuantizedCouplings({}, omega=omega)
    at = alpha * t
    np.testing.assert_allclose(
        build_h_up(p, q, t), np.diag([at + d, omega, -omega, -at + d]), atol=0
    )
    np.testing.assert_allclose(
        build_h_down(p, q, t),
        np.diag([at + d + omega, at + d - omega, 0.0, -at + d - omega, -at + d + omega]),
        atol=0,
    )


def test_h_down_degeneracy_at_d_omega_zero():
    # For D = omega = 0 the split sublevels return to the bare energies
    # +-alpha t and the five-level model reduces to a spin-1 crossing.
    p = ModelParams(alpha=1.0, d_aniso=0.0)
    q = QuantizedCouplings({}, omega=0.0)
    h = build_h_down(p, q, 2.0)
    assert h[0, 0] == h[1, 1] == 2.0
    assert h[3, 3] == h[4, 4] == -2.0


def test_terms_for_blocks():
    p = ModelParams(alpha=1.1, d_aniso=0.5)
    q = QuantizedCouplings.uniform(0.4, 1.9)
    for terms, builder in (
        (h_up_terms(p, q), build_h_up),
        (h_down_terms(p, q), build_h_down),
        (nine_level_terms(p, q), build_nine_level_h),
    ):
        for t in (-1.0, 0.3):
            np.testing.assert_allclose(terms(t), builder(p, q, t), atol=0)


def test_coupling_from_amplitude():
    assert coupling_from_amplitude(0.0, 1) == 0.0
    assert coupling_from_amplitude(0.005, 1) == pytest.approx(0.0025, abs=1e-18)
    assert coupling_from_amplitude(0.005, 2) == pytest.approx(
        0.005 / (2 * np.sqrt(2)), abs=1e-18
    )
    with pytest.raises(DomainError):
        coupling_from_amplitude(0.1, 3)
    with pytest.raises(DomainError):
        coupling_from_amplitude(-0.1, 1)
