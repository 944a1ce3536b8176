"""Spectral-layer tests: kernel closed forms, transforms, derivatives,
convolutions against quadrature oracles, and the pointwise kernel bounds."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dghsim.grid import (
    Field,
    NonFiniteFieldError,
    PeriodicGrid,
    Spectrum,
    dealiased_product,
    deriv_values,
    derivative,
    dgreen_convolve,
    dgreen_kernel,
    forward_transform,
    green_kernel,
    helmholtz_convolve,
    integral,
    interp_values,
    interpolate,
    interpolate_many,
    inverse_transform,
    pad_values,
    project_values,
    random_trig_field,
    resample,
)
from helpers import fd_derivative, kernel_quadrature, trig_poly

TWO_SINH_HALF = 2.0 * np.sinh(0.5)


# ---------------------------------------------------------------------------
# kernel closed forms

def test_kernel_peak_and_trough():
    # max at the corner, min at the antipode; both in closed form
    e = np.e
    assert green_kernel(0.0) == pytest.approx((e + 1.0) / (2.0 * (e - 1.0)), abs=1e-15)
    assert green_kernel(0.5) == pytest.approx(1.0 / TWO_SINH_HALF, abs=1e-15)
    assert green_kernel(0.5) == pytest.approx(0.9595173756674719, abs=1e-15)


def test_kernel_periodic_and_even(rng):
    x = rng.uniform(-3.0, 3.0, size=200)
    assert np.allclose(green_kernel(x + 1.0), green_kernel(x), atol=1e-14)
    assert np.allclose(green_kernel(-x), green_kernel(x), atol=1e-14)
    lo, hi = 1.0 / TWO_SINH_HALF, np.cosh(0.5) / TWO_SINH_HALF
    v = green_kernel(x)
    assert np.all(v >= lo - 1e-15) and np.all(v <= hi + 1e-15)


def test_kernel_unit_mass():
    # trapezoid with the corner sitting on a node stays second order
    x = np.arange(4096) / 4096
    assert np.mean(green_kernel(x)) == pytest.approx(1.0, abs=1e-6)


def test_dgreen_kernel_values():
    assert dgreen_kernel(0.0) == 0.0
    assert dgreen_kernel(2.0) == 0.0
    # one-sided limits at the corner differ by the unit jump
    assert dgreen_kernel(1e-12) == pytest.approx(-0.5, abs=1e-9)
    assert dgreen_kernel(1.0 - 1e-12) == pytest.approx(0.5, abs=1e-9)


def test_dgreen_matches_difference_quotient(rng):
    x = rng.uniform(0.05, 0.95, size=50)
    h = 1e-6
    dq = (green_kernel(x + h) - green_kernel(x - h)) / (2.0 * h)
    assert np.allclose(dq, dgreen_kernel(x), atol=1e-8)


# ---------------------------------------------------------------------------
# grid and field containers

def test_grid_basics():
    g = PeriodicGrid(16)
    assert g.dx == pytest.approx(1.0 / 16.0)
    assert g.nodes[0] == 0.0
    assert np.allclose(np.diff(g.nodes), g.dx)
    assert g.helmholtz_symbol[0] == 1.0
    assert g.ik[-1] == 0.0  # odd Nyquist symbol is dropped


@pytest.mark.parametrize("bad", [7, 9, 6, 0, -16])
def test_grid_rejects_bad_sizes(bad):
    with pytest.raises(ValueError):
        PeriodicGrid(bad)


def test_grid_rejects_non_int():
    with pytest.raises(TypeError):
        PeriodicGrid(16.0)


def test_field_validation():
    g = PeriodicGrid(8)
    with pytest.raises(ValueError):
        Field(g, np.zeros(7))
    with pytest.raises(NonFiniteFieldError):
        Field(g, np.full(8, np.nan))
    with pytest.raises(NonFiniteFieldError):
        Field(g, np.array([0.0, np.inf, 0, 0, 0, 0, 0, 0]))


def test_field_constructors():
    g = PeriodicGrid(32)
    f = Field.from_function(g, lambda x: np.sin(2.0 * np.pi * x))
    assert f.values[8] == pytest.approx(1.0, abs=1e-15)
    c = Field.constant(g, 2.5)
    assert np.all(c.values == 2.5)


# ---------------------------------------------------------------------------
# transforms

def test_transform_round_trip(rng):
    g = PeriodicGrid(64)
    f = Field(g, rng.normal(size=64))
    back = inverse_transform(forward_transform(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12


def test_cosine_coefficients():
    g = PeriodicGrid(32)
    f = Field.from_function(g, lambda x: np.cos(2.0 * np.pi * x))
    s = forward_transform(f)
    assert s.coefficient(1) == pytest.approx(0.5, abs=1e-14)
    assert s.coefficient(-1) == pytest.approx(0.5, abs=1e-14)
    assert abs(s.coefficient(0)) < 1e-14
    with pytest.raises(ValueError):
        s.coefficient(16)


def test_spectrum_conjugate_symmetry(rng):
    g = PeriodicGrid(32)
    s = forward_transform(Field(g, rng.normal(size=32)))
    for k in range(1, 16):
        assert s.coefficient(-k) == pytest.approx(np.conj(s.coefficient(k)), abs=1e-13)


def test_spectrum_shape_validation():
    with pytest.raises(ValueError):
        Spectrum(PeriodicGrid(8), np.zeros(9, dtype=complex))


# ---------------------------------------------------------------------------
# derivatives

def test_derivative_of_sine_exact():
    g = PeriodicGrid(64)
    f = Field.from_function(g, lambda x: np.sin(2.0 * np.pi * x))
    d1 = derivative(f)
    assert np.max(np.abs(d1.values - 2.0 * np.pi * np.cos(2.0 * np.pi * g.nodes))) < 1e-12
    d2 = derivative(f, order=2)
    assert np.max(np.abs(d2.values + (2.0 * np.pi) ** 2 * f.values)) < 1e-10


@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivative_of_constant_vanishes(order):
    f = Field.constant(PeriodicGrid(16), 3.7)
    assert np.max(np.abs(derivative(f, order=order).values)) < 1e-12


def test_derivative_rejects_bad_order():
    f = Field.constant(PeriodicGrid(16), 1.0)
    with pytest.raises(ValueError):
        derivative(f, order=0)


def test_nyquist_mode_handling():
    # the sawtooth-phase mode (-1)^j has no odd derivative but a clean even one
    n = 32
    v = (-1.0) ** np.arange(n)
    assert np.max(np.abs(deriv_values(v, 1))) < 1e-12
    d2 = deriv_values(v, 2)
    assert np.allclose(d2, -((np.pi * n) ** 2) * v, rtol=1e-12)


def test_derivative_against_finite_differences():
    g = PeriodicGrid(128)
    f = Field.from_function(g, lambda x: np.exp(np.sin(2.0 * np.pi * x)))
    for order in (1, 2):
        spectral = derivative(f, order=order).values
        stencil = fd_derivative(f.values, g.dx, order)
        assert np.max(np.abs(spectral - stencil)) < 1e-6


@given(a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_derivative_linearity(a, b):
    g = PeriodicGrid(32)
    f = trig_poly(g, 0.3, cos_c=(1.0, -0.5), sin_c=(0.2,))
    h = trig_poly(g, -1.0, cos_c=(0.0, 0.7), sin_c=(-0.4, 0.1))
    lhs = deriv_values(a * f + b * h, 1)
    rhs = a * deriv_values(f, 1) + b * deriv_values(h, 1)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


# ---------------------------------------------------------------------------
# interpolation

def test_interpolate_cosine_off_grid():
    g = PeriodicGrid(64)
    f = Field.from_function(g, lambda x: np.cos(2.0 * np.pi * x))
    assert interpolate(f, 0.125) == pytest.approx(np.cos(np.pi / 4.0), abs=1e-12)


def test_interpolate_reproduces_nodes(rng):
    g = PeriodicGrid(48)
    f = Field(g, rng.normal(size=48))
    at_nodes = interpolate_many(f, g.nodes)
    assert np.max(np.abs(at_nodes - f.values)) < 1e-12


def test_interpolate_analytic_function():
    # coefficients of exp(cos) decay like Bessel I_k(1); truncation at n=64
    # is far below double precision, so interpolation hits the true value
    g = PeriodicGrid(64)
    f = Field.from_function(g, lambda x: np.exp(np.cos(2.0 * np.pi * x)))
    x = 0.1371
    assert interpolate(f, x) == pytest.approx(np.exp(np.cos(2.0 * np.pi * x)), abs=1e-9)


def test_interpolate_periodic_argument():
    g = PeriodicGrid(32)
    f = Field.from_function(g, lambda x: np.sin(2.0 * np.pi * x))
    assert interpolate(f, 0.3) == pytest.approx(interpolate(f, 1.3), abs=1e-12)
    assert interpolate(f, 0.3) == pytest.approx(interpolate(f, -0.7), abs=1e-12)


# ---------------------------------------------------------------------------
# smoothing convolutions

def test_helmholtz_fixes_constants():
    f = Field.constant(PeriodicGrid(32), 4.2)
    out = helmholtz_convolve(f)
    assert np.max(np.abs(out.values - 4.2)) < 1e-13


@pytest.mark.parametrize("k", [1, 3, 7])
def test_helmholtz_eigenfunctions(k):
    g = PeriodicGrid(64)
    f = Field.from_function(g, lambda x: np.cos(2.0 * np.pi * k * x))
    out = helmholtz_convolve(f)
    lam = 1.0 / (1.0 + 4.0 * np.pi**2 * k**2)
    assert np.max(np.abs(out.values - lam * f.values)) < 1e-14


def test_helmholtz_inverts_operator(rng):
    g = PeriodicGrid(128)
    f = random_trig_field(g, rng, max_mode=20)
    smooth = helmholtz_convolve(f)
    recovered = smooth.values - deriv_values(smooth.values, 2)
    assert np.max(np.abs(recovered - f.values)) < 1e-10


def test_helmholtz_against_quadrature(rng):
    g = PeriodicGrid(128)
    for _ in range(3):
        f = random_trig_field(g, rng, max_mode=10)
        oracle = kernel_quadrature(f.values, g, green_kernel)
        out = helmholtz_convolve(f).values
        assert np.max(np.abs(out - oracle)) < 1e-6


def test_helmholtz_of_discrete_delta():
    # the spectral image of a unit-mass node spike is the kernel's band
    # truncation; the miss at the corner node is the Fourier tail,
    # 2 sum_{k>n/2} 1/(1+4 pi^2 k^2) ~ 1/(pi^2 n), not a solver error
    errs = {}
    for n in (256, 512):
        g = PeriodicGrid(n)
        spike = np.zeros(n)
        spike[0] = n  # integrates to one
        out = helmholtz_convolve(Field(g, spike)).values
        errs[n] = np.max(np.abs(out - green_kernel(g.nodes)))
        assert errs[n] == pytest.approx(1.0 / (np.pi**2 * n), rel=0.2)
        # away from the corner the agreement is much tighter
        interior = np.abs(out - green_kernel(g.nodes))[n // 4 : 3 * n // 4]
        assert np.max(interior) < 1e-6
    assert errs[512] < 0.6 * errs[256]


def test_dgreen_convolve_basics(rng):
    g = PeriodicGrid(64)
    assert np.max(np.abs(dgreen_convolve(Field.constant(g, 5.0)).values)) < 1e-14
    f = Field.from_function(g, lambda x: np.sin(2.0 * np.pi * x))
    lam = 2.0 * np.pi / (1.0 + 4.0 * np.pi**2)
    expected = lam * np.cos(2.0 * np.pi * g.nodes)
    assert np.max(np.abs(dgreen_convolve(f).values - expected)) < 1e-14


def test_dgreen_is_derivative_of_helmholtz(rng):
    g = PeriodicGrid(128)
    f = random_trig_field(g, rng, max_mode=30)
    a = dgreen_convolve(f).values
    b = derivative(helmholtz_convolve(f)).values
    assert np.max(np.abs(a - b)) < 1e-12
    assert abs(np.mean(a)) < 1e-13


def test_kernel_lower_bound_on_nonnegative_input(rng):
    # G * f >= min(G) * integral(f) when f >= 0; build f as an exact square
    # so the inequality holds for the interpolant, not just the samples
    g = PeriodicGrid(256)
    for _ in range(5):
        p = random_trig_field(g, rng, max_mode=6)
        f = dealiased_product(p, p)
        out = helmholtz_convolve(f)
        floor = integral(f) / TWO_SINH_HALF
        assert np.min(out.values) >= floor - 1e-12


def test_smoothing_dominates_square(rng):
    # G * (f^2 + f'^2 / 2) >= f^2 / 2 pointwise, the inequality behind the
    # wave-steepening threshold; exact band arithmetic keeps it sharp
    g = PeriodicGrid(256)
    for _ in range(5):
        f = random_trig_field(g, rng, max_mode=6, rms=2.0)
        fx = derivative(f)
        src = dealiased_product(f, f).values + 0.5 * dealiased_product(fx, fx).values
        out = helmholtz_convolve(Field(g, src)).values
        assert np.min(out - 0.5 * f.values * f.values) >= -1e-12


# ---------------------------------------------------------------------------
# padding, projection, products, resampling

def test_pad_project_round_trip(rng):
    v = rng.normal(size=64)
    w = pad_values(v, 128)
    assert np.max(np.abs(w[::2] - v)) < 1e-13  # original nodes survive
    back = project_values(w, 64)
    assert np.max(np.abs(back - v)) < 1e-13


def test_pad_project_validation():
    with pytest.raises(ValueError):
        pad_values(np.zeros(16), 8)
    with pytest.raises(ValueError):
        pad_values(np.zeros(16), 33)
    with pytest.raises(ValueError):
        project_values(np.zeros(16), 32)


def test_dealiased_product_exact_when_band_fits(rng):
    g = PeriodicGrid(128)
    f = random_trig_field(g, rng, max_mode=3)
    h = random_trig_field(g, rng, max_mode=4)
    prod = dealiased_product(f, h)
    assert np.max(np.abs(prod.values - f.values * h.values)) < 1e-12


def test_dealiased_product_removes_aliasing():
    # cos^2 at a mode past n/4: the doubled frequency leaves the band, so
    # the clean answer is the constant 1/2, while the raw pointwise product
    # folds it back into the grid
    n = 64
    g = PeriodicGrid(n)
    f = Field.from_function(g, lambda x: np.cos(2.0 * np.pi * 20 * x))
    clean = dealiased_product(f, f).values
    assert np.max(np.abs(clean - 0.5)) < 1e-12
    raw = f.values * f.values
    assert np.max(np.abs(raw - 0.5)) > 0.4


def test_dealiased_product_grid_mismatch():
    f = Field.constant(PeriodicGrid(16), 1.0)
    h = Field.constant(PeriodicGrid(32), 1.0)
    with pytest.raises(ValueError):
        dealiased_product(f, h)


def test_resample_round_trip(rng):
    g = PeriodicGrid(32)
    f = random_trig_field(g, rng, max_mode=10)
    up = resample(f, 128)
    assert up.grid.n == 128
    expected = interp_values(f.values, up.grid.nodes)
    assert np.max(np.abs(up.values - expected)) < 1e-12
    down = resample(up, 32)
    assert np.max(np.abs(down.values - f.values)) < 1e-12


def test_random_trig_field_contract(rng):
    g = PeriodicGrid(64)
    f = random_trig_field(g, rng, max_mode=5, rms=1.5, zero_mean=True)
    assert abs(np.mean(f.values)) < 1e-12
    assert np.sqrt(np.mean(f.values**2)) == pytest.approx(1.5, abs=1e-12)
    c = np.abs(np.fft.rfft(f.values)) / g.n
    assert np.max(c[6:]) < 1e-12
    with pytest.raises(ValueError):
        random_trig_field(g, rng, max_mode=32)


# ---------------------------------------------------------------------------
# property checks

@given(seed=st.integers(0, 2**32 - 1))
def test_round_trip_property(seed):
    r = np.random.default_rng(seed)
    g = PeriodicGrid(32)
    f = Field(g, r.uniform(-10.0, 10.0, size=32))
    back = inverse_transform(forward_transform(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-11


@given(seed=st.integers(0, 2**32 - 1))
def test_interpolation_matches_nodes_property(seed):
    r = np.random.default_rng(seed)
    g = PeriodicGrid(16)
    f = Field(g, r.uniform(-5.0, 5.0, size=16))
    assert np.max(np.abs(interpolate_many(f, g.nodes) - f.values)) < 1e-12


@given(seed=st.integers(0, 2**32 - 1))
def test_kernel_bound_property(seed):
    r = np.random.default_rng(seed)
    g = PeriodicGrid(64)
    p = random_trig_field(g, r, max_mode=4, rms=r.uniform(0.1, 3.0))
    f = dealiased_product(p, p)
    out = helmholtz_convolve(f)
    assert np.min(out.values) >= integral(f) / TWO_SINH_HALF - 1e-10
