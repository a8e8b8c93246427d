import numpy as np
import pytest
from scipy.integrate import quad

from rootfringe.errors import InvalidSpec
from rootfringe.synth import (
    DiffusionSpec,
    PhantomSpec,
    carrier_fringe,
    fick_concentration,
    fick_gradient,
    gaussian_peaks,
    make_phantom,
    measured_snr_db,
)


def heat_kernel_concentration(D, t, c0, x):
    """Step initial condition convolved with the heat kernel, by quadrature."""
    s = np.sqrt(2 * D * t)

    def integrand(u):
        return np.exp(-((x - u) ** 2) / (2 * s * s)) / (s * np.sqrt(2 * np.pi))

    val, _ = quad(integrand, -np.inf, 0.0, epsabs=1e-14, epsrel=1e-12)
    return c0 * val


def test_plane_phantom_exact():
    truth, field = make_phantom(PhantomSpec(kind="plane", size=32))
    y, x = np.mgrid[0:32, 0:32]
    np.testing.assert_array_equal(truth.values, 0.3 * x + 0.5 * y)
    np.testing.assert_array_equal(field, np.exp(1j * (0.3 * x + 0.5 * y)))


def test_snr_zero_db_measured():
    spec = PhantomSpec(size=512, snr_db=0.0, seed=3)
    truth, field = make_phantom(spec)
    assert abs(measured_snr_db(field, truth)) < 0.1


@pytest.mark.parametrize("snr", [-5.0, 10.0, 20.0])
def test_noise_variance_matches_snr(snr):
    truth, field = make_phantom(PhantomSpec(size=256, snr_db=snr, seed=1))
    eta = field - np.exp(1j * truth.values)
    assert np.var(eta.real) == pytest.approx(np.var(eta.imag), rel=0.05)
    assert abs(measured_snr_db(field, truth) - snr) < 0.1


def test_seed_determinism():
    a = make_phantom(PhantomSpec(size=64, snr_db=3.0, seed=9))[1]
    b = make_phantom(PhantomSpec(size=64, snr_db=3.0, seed=9))[1]
    c = make_phantom(PhantomSpec(size=64, snr_db=3.0, seed=10))[1]
    assert a.tobytes() == b.tobytes()
    assert a.tobytes() != c.tobytes()


def test_noiseless_when_snr_none():
    truth, field = make_phantom(PhantomSpec(size=32))
    np.testing.assert_array_equal(field, np.exp(1j * truth.values))


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        make_phantom(PhantomSpec(size=8))
    with pytest.raises(InvalidSpec):
        make_phantom(PhantomSpec(kind="rings"))
    with pytest.raises(InvalidSpec):
        make_phantom(PhantomSpec(amplitude=np.inf))
    with pytest.raises(InvalidSpec):
        DiffusionSpec(D=-1.0)


def test_gaussian_peaks_peak_to_valley():
    g = gaussian_peaks(128, 70.0)
    assert g.min() == 0.0
    assert g.max() == pytest.approx(70.0)


def test_default_phantom_sampled_without_aliasing():
    truth = make_phantom(PhantomSpec(size=512))[0].values
    assert np.abs(np.diff(truth, axis=0)).max() < np.pi
    assert np.abs(np.diff(truth, axis=1)).max() < np.pi


def test_fick_example_value():
    spec = DiffusionSpec(D=1e-9, t=600.0, c0=1.0)
    got = float(fick_concentration(spec, 1e-3))
    assert got == pytest.approx(0.1806, abs=1e-4)
    assert got == pytest.approx(0.18065521426, abs=1e-10)
    assert got == pytest.approx(heat_kernel_concentration(1e-9, 600.0, 1.0, 1e-3), rel=1e-9)


@pytest.mark.parametrize("x", [-2e-3, -3e-4, 0.0, 5e-4, 2.5e-3])
def test_fick_against_quadrature(x):
    spec = DiffusionSpec(D=1.5e-9, t=120.0, c0=1.75)
    assert float(fick_concentration(spec, x)) == pytest.approx(
        heat_kernel_concentration(spec.D, spec.t, spec.c0, x), rel=1e-9, abs=1e-14
    )


def pde_residual(spec):
    """Five-point central differences of dc/dt - D d2c/dx2, scaled by c0/t."""
    t = spec.t
    ell = np.sqrt(spec.D * t)
    dx, dt = 0.01 * ell, 0.01 * t
    x = np.linspace(-6 * ell, 6 * ell, 1201)

    def c(tt, xx):
        return fick_concentration(DiffusionSpec(D=spec.D, t=tt, c0=spec.c0, x_scale=spec.x_scale), xx)

    ct = (-c(t + 2 * dt, x) + 8 * c(t + dt, x) - 8 * c(t - dt, x) + c(t - 2 * dt, x)) / (12 * dt)
    cxx = (
        -c(t, x + 2 * dx) + 16 * c(t, x + dx) - 30 * c(t, x) + 16 * c(t, x - dx) - c(t, x - 2 * dx)
    ) / (12 * dx * dx)
    return np.abs(ct - spec.D * cxx).max() / (spec.c0 / t)


@pytest.mark.parametrize("t", [120.0, 600.0, 1500.0])
def test_pde_residual(t):
    assert pde_residual(DiffusionSpec(t=t)) < 1e-6


def test_fick_monotone_and_gradient():
    x = np.linspace(-5e-3, 5e-3, 2001)
    for t in (1.0, 120.0, 1e4):
        spec = DiffusionSpec(t=t)
        c = fick_concentration(spec, x)
        assert np.all(np.diff(c) <= 0)
        num = np.gradient(c, x)
        np.testing.assert_allclose(fick_gradient(spec, x), num, atol=2e-3 * np.abs(num).max())


def test_fick_phantom_profile():
    spec = PhantomSpec(kind="fick-profile", size=64, amplitude=9.0)
    truth, _ = make_phantom(spec)
    col = truth.values[:, 0]
    assert np.all(truth.values == col[:, None])
    assert np.argmin(col) in (31, 32)


def test_carrier_fringe_uint8():
    img = carrier_fringe(np.zeros((4, 8)), 0.25, 0.0)
    assert img.dtype == np.uint8
    assert img[0, [0, 2, 4, 6]].tolist() == [255, 0, 255, 0]
    # quarter-period samples sit on the 127.5 rounding tie
    assert set(img[0, [1, 3, 5, 7]].tolist()) <= {127, 128}


def test_noise_white_at_lag_one():
    truth, field = make_phantom(PhantomSpec(size=512, snr_db=0.0, seed=11))
    eta = field - np.exp(1j * truth.values)
    for part in (eta.real, eta.imag):
        p = part - part.mean()
        var = np.mean(p * p)
        assert abs(np.mean(p[:, 1:] * p[:, :-1]) / var) < 0.02
        assert abs(np.mean(p[1:] * p[:-1]) / var) < 0.02
