import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import plane_wave, steering
from rootfringe.errors import FieldTooSmall, NoInteriorRoot, OutOfBounds
from rootfringe.fields import wrap
from rootfringe.rootmusic import (
    EstimatorConfig,
    estimate_field,
    estimate_parameters,
    estimate_pixel,
    extract_window,
    music_polynomials,
    select_root,
)
from rootfringe.smallmat import companion_roots, root_residuals, svd


def centred_window(L, wx, wy, alpha=0.0, amp=1.0):
    return amp * plane_wave((2 * L + 1, 2 * L + 1), wx, wy, alpha, origin=(L, L))


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(L=0)
    with pytest.raises(ValueError):
        EstimatorConfig(unit_circle_tol=0.2)
    with pytest.raises(ValueError):
        EstimatorConfig(border_policy="wrap")
    assert EstimatorConfig(L=4).M == 9


def test_window_constant():
    f = np.full((10, 12), 2 - 1j)
    np.testing.assert_array_equal(extract_window(f, 5, 4, 1), np.full((3, 3), 2 - 1j))


def test_window_plane_wave_orientation():
    f = plane_wave((7, 7), 0.3, 0.5, origin=(3, 3))
    w = extract_window(f, 3, 3, 1)
    for r, y in enumerate((-1, 0, 1)):
        for c, x in enumerate((-1, 0, 1)):
            assert w[r, c] == pytest.approx(np.exp(1j * (0.3 * x + 0.5 * y)), abs=1e-15)


def test_window_corner_replicate():
    rng = np.random.default_rng(0)
    f = rng.standard_normal((6, 8)) + 1j * rng.standard_normal((6, 8))
    w = extract_window(f, 0, 0, 2)
    expected = np.empty((5, 5), complex)
    for r in range(5):
        for c in range(5):
            expected[r, c] = f[min(max(r - 2, 0), 5), min(max(c - 2, 0), 7)]
    np.testing.assert_array_equal(w, expected)


def test_window_skip_policy():
    f = np.ones((6, 6), complex)
    with pytest.raises(OutOfBounds):
        extract_window(f, 0, 3, 1, border_policy="skip")
    assert extract_window(f, 1, 1, 1, border_policy="skip").shape == (3, 3)


def test_polynomial_zero_at_true_frequency():
    w = centred_window(1, 0.2, 0.5)
    py, px = music_polynomials(w)
    assert py.size == px.size == 5
    u = svd(w).U
    a = steering(np.exp(0.5j), 3)
    assert np.linalg.norm(a.conj() @ u[:, 1:]) < 1e-10
    # p(z) on the unit circle is z^(M-1) times the pseudospectrum denominator
    z = np.exp(0.5j)
    assert abs(np.polynomial.polynomial.polyval(z, py)) < 1e-10
    zx = np.exp(-0.2j)
    assert abs(np.polynomial.polynomial.polyval(zx, px)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_polynomials_conjugate_palindromic(L, seed):
    rng = np.random.default_rng(seed)
    m = 2 * L + 1
    w = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    for p in music_polynomials(w):
        assert p.size == 2 * m - 1
        np.testing.assert_allclose(p, np.conj(p[::-1]), atol=1e-12)
        assert p[-1] != 0


def test_noise_only_window_roots_well_defined():
    rng = np.random.default_rng(11)
    w = rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7))
    py, _ = music_polynomials(w)
    r = companion_roots(py)
    assert r.size == 12
    assert root_residuals(py, r).max() < 1e-8


def test_select_root_examples():
    assert select_root([0.5, 0.9 * np.exp(1j), 1.3 * np.exp(1j)]) == pytest.approx(0.9 * np.exp(1j))
    pair = [0.95 * np.exp(0.7j), np.exp(0.7j) / 0.95]
    assert select_root(pair) == pytest.approx(pair[0])
    assert select_root([np.exp(0.5j), np.exp(0.5j)]) == pytest.approx(np.exp(0.5j))


def test_select_root_tie_break_smallest_arg():
    assert select_root([0.9 * np.exp(2j), 0.9 * np.exp(-1j), 0.9 * np.exp(1j)]) == pytest.approx(0.9 * np.exp(-1j))


def test_select_root_none_inside():
    with pytest.raises(NoInteriorRoot):
        select_root([1.5, 2j])


@pytest.mark.parametrize("method", ["aberth", "qr"])
def test_exact_model(method):
    est = estimate_pixel(centred_window(2, 0.3, 0.5, 0.2), EstimatorConfig(L=2, root_method=method))
    assert est.omega_x == pytest.approx(0.3, abs=1e-6)
    assert est.omega_y == pytest.approx(0.5, abs=1e-6)
    assert est.alpha == pytest.approx(0.2, abs=1e-6)


def test_constant_window():
    est = estimate_pixel(np.full((5, 5), np.exp(1j)), EstimatorConfig(L=2))
    assert est.alpha == pytest.approx(1.0, abs=1e-6)
    assert abs(est.omega_x) < 1e-6 and abs(est.omega_y) < 1e-6


def test_orthogonality_and_eigen_structure():
    rng = np.random.default_rng(12)
    for _ in range(20):
        L = int(rng.integers(1, 8))
        m = 2 * L + 1
        wx, wy = rng.uniform(-2.5, 2.5, 2)
        amp = rng.uniform(0.2, 5)
        w = centred_window(L, wx, wy, rng.uniform(-3, 3), amp)
        r = svd(w)
        assert np.linalg.norm(steering(np.exp(1j * wy), m).conj() @ r.U[:, 1:]) < 1e-8
        assert r.S[0] ** 2 == pytest.approx(m * m * amp * amp, rel=1e-8)


def _noisy_window(rng, L, snr_db=5.0):
    m = 2 * L + 1
    w = centred_window(L, *rng.uniform(-2, 2, 2), rng.uniform(-3, 3))
    s = 10 ** (-snr_db / 20) / np.sqrt(2)
    return w + s * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(0.01, 100))
def test_global_phase_and_amplitude(seed, c, s):
    rng = np.random.default_rng(seed)
    cfg = EstimatorConfig(L=int(rng.integers(1, 6)))
    w = _noisy_window(rng, cfg.L)
    base = estimate_pixel(w, cfg)
    rot = estimate_pixel(np.exp(1j * c) * w, cfg)
    assert rot.omega_x == pytest.approx(base.omega_x, abs=1e-9)
    assert rot.omega_y == pytest.approx(base.omega_y, abs=1e-9)
    assert abs(wrap(rot.alpha - base.alpha - c)) < 1e-9
    sc = estimate_pixel(s * w, cfg)
    assert sc.omega_x == pytest.approx(base.omega_x, abs=1e-9)
    assert sc.omega_y == pytest.approx(base.omega_y, abs=1e-9)
    assert abs(wrap(sc.alpha - base.alpha)) < 1e-9


def test_conjugate_root_pairing():
    rng = np.random.default_rng(13)
    for _ in range(20):
        py, _ = music_polynomials(_noisy_window(rng, 3))
        r = companion_roots(py)
        mirror = 1 / np.conj(r)
        for z in r:
            assert np.abs(mirror - z).min() < 1e-6


def test_monte_carlo_10db():
    rng = np.random.default_rng(2024)
    cfg = EstimatorConfig(L=5)
    w0 = centred_window(5, 0.3, 0.5, 0.2)
    sigma = np.sqrt(10 ** (-10 / 10) / 2)
    errs = []
    for _ in range(1000):
        noise = sigma * (rng.standard_normal((11, 11)) + 1j * rng.standard_normal((11, 11)))
        errs.append(abs(estimate_pixel(w0 + noise, cfg).omega_y - 0.5))
    assert np.mean(errs) < 0.02


def test_field_plane_wave_64():
    f = plane_wave((64, 64), 0.3, 0.5)
    wrapped, diag = estimate_field(f, EstimatorConfig(L=3))
    y, x = np.mgrid[0:64, 0:64]
    err = wrap(wrapped.values - (0.3 * x + 0.5 * y))[3:-3, 3:-3]
    assert np.abs(err).max() < 1e-5
    assert diag["degenerate_pixels"] == 0 and diag["pixels"] == 64 * 64


def test_field_skip_policy_flags_border():
    f = plane_wave((20, 24), 0.3, -0.2)
    est = estimate_parameters(f, EstimatorConfig(L=2, border_policy="skip"))
    assert est.skipped == 20 * 24 - 16 * 20
    assert est.degenerate == 0


def test_field_too_small():
    with pytest.raises(FieldTooSmall):
        estimate_field(np.ones((6, 20), complex), EstimatorConfig(L=3))


def test_thread_count_determinism():
    rng = np.random.default_rng(14)
    f = np.exp(1j * rng.uniform(-3, 3, (37, 29))) + 0.5 * rng.standard_normal((37, 29))
    cfg = EstimatorConfig(L=2)
    ref = estimate_parameters(f, cfg, threads=1)
    for t in (2, 3, 8):
        got = estimate_parameters(f, cfg, threads=t)
        for name in ("alpha", "omega_x", "omega_y", "flags"):
            assert getattr(got, name).tobytes() == getattr(ref, name).tobytes()


def test_degenerate_pixels_filled_from_neighbour():
    f = plane_wave((12, 12), 0.4, 0.1)
    f[4:9, 4:9] = 0.0
    est = estimate_parameters(f, EstimatorConfig(L=1))
    assert est.degenerate > 0
    bad = est.flags == 1
    assert np.all(np.isfinite(est.alpha))
    # each flagged pixel copies the last good alpha before it in scan order
    flat_a = est.alpha.ravel()
    flat_f = est.flags.ravel()
    for i in np.flatnonzero(bad.ravel()):
        j = i - 1
        while flat_f[j] == 1:
            j -= 1
        assert flat_a[i] == flat_a[j]
