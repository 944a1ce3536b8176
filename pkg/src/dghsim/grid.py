"""Spectral machinery on the periodic unit interval.

A field is identified with the real trigonometric polynomial that
interpolates its samples on n equispaced nodes x_j = j/n (wavenumbers
-n/2 .. n/2 - 1; the unpaired Nyquist mode is treated as a split cosine).
The smoothing kernel

    G(x) = cosh(x - floor(x) - 1/2) / (2 sinh(1/2))

is the 1-periodic fundamental solution of f - f'' = delta, so convolving
with G inverts 1 - d^2/dx^2.  Both G* and (G*)' are applied as exact
Fourier symbols, 1/(1 + 4 pi^2 k^2) and 2 pi i k/(1 + 4 pi^2 k^2).

Products of fields are never formed on the native grid: quadratic and
cubic nonlinearities are evaluated on a 2n-point grid and projected back,
which removes aliasing into the retained band.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "NonFiniteFieldError",
    "PeriodicGrid",
    "Field",
    "Spectrum",
    "green_kernel",
    "dgreen_kernel",
    "forward_transform",
    "inverse_transform",
    "derivative",
    "helmholtz_convolve",
    "dgreen_convolve",
    "interpolate",
    "interpolate_many",
    "integral",
    "resample",
    "dealiased_product",
    "random_trig_field",
    "pad_values",
    "project_values",
    "deriv_values",
    "interp_values",
]

_TWO_SINH_HALF = 2.0 * np.sinh(0.5)


class NonFiniteFieldError(ValueError):
    """A field holds (or an operation produced) non-finite samples."""


def green_kernel(x):
    """Periodic Helmholtz kernel cosh(x - floor(x) - 1/2) / (2 sinh(1/2)).

    Accepts scalars or arrays; 1-periodic, even, with a corner at the
    integers.  Bounded between 1/(2 sinh(1/2)) and cosh(1/2)/(2 sinh(1/2)),
    and integrates to 1 over one period.
    """
    x = np.asarray(x, dtype=float)
    out = np.cosh(x - np.floor(x) - 0.5) / _TWO_SINH_HALF
    return out if out.ndim else float(out)


def dgreen_kernel(x):
    """Derivative of the kernel, sinh(x - floor(x) - 1/2) / (2 sinh(1/2)).

    Jumps by -1 at the integers; the value there is reported as 0, the
    midpoint of the two one-sided limits (the natural quadrature value).
    """
    x = np.asarray(x, dtype=float)
    frac = x - np.floor(x)
    out = np.sinh(frac - 0.5) / _TWO_SINH_HALF
    out = np.where(frac == 0.0, 0.0, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PeriodicGrid:
    """n equispaced nodes on [0, 1); n must be even and at least 8."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int):
            raise TypeError(f"grid size must be an int, got {type(self.n).__name__}")
        if self.n < 8:
            raise ValueError(f"grid size must be at least 8, got n={self.n}")
        if self.n % 2 != 0:
            raise ValueError(f"grid size must be even, got n={self.n}")

    @cached_property
    def dx(self) -> float:
        return 1.0 / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.n) / self.n
        x.flags.writeable = False
        return x

    # Symbol tables in rfft layout (k = 0 .. n/2), shared by every operator
    # call on this grid.

    @cached_property
    def modes(self) -> np.ndarray:
        k = np.arange(self.n // 2 + 1, dtype=float)
        k.flags.writeable = False
        return k

    @cached_property
    def ik(self) -> np.ndarray:
        # first-derivative symbol; the odd Nyquist mode is zeroed
        s = 2j * np.pi * self.modes
        s[-1] = 0.0
        s.flags.writeable = False
        return s

    @cached_property
    def helmholtz_symbol(self) -> np.ndarray:
        s = 1.0 / (1.0 + 4.0 * np.pi**2 * self.modes**2)
        s.flags.writeable = False
        return s

    @cached_property
    def dgreen_symbol(self) -> np.ndarray:
        s = self.ik * self.helmholtz_symbol
        s.flags.writeable = False
        return s


@dataclass(frozen=True)
class Field:
    """Real samples on a periodic grid.  Samples must be finite."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} samples, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise NonFiniteFieldError("field samples must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: PeriodicGrid, fn) -> "Field":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def constant(cls, grid: PeriodicGrid, value: float) -> "Field":
        return cls(grid, np.full(grid.n, float(value)))


@dataclass(frozen=True)
class Spectrum:
    """Coefficients c_k of e^{2 pi i k x} for k = -n/2 .. n/2 - 1."""

    grid: PeriodicGrid
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        c = np.ascontiguousarray(self.coefficients, dtype=complex)
        if c.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coefficients", c)

    def coefficient(self, k: int) -> complex:
        half = self.grid.n // 2
        if not -half <= k < half:
            raise ValueError(f"wavenumber {k} outside -{half} .. {half - 1}")
        return complex(self.coefficients[k + half])


def _same_grid(f: Field, g: Field) -> PeriodicGrid:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return f.grid


def forward_transform(f: Field) -> Spectrum:
    c = np.fft.fftshift(np.fft.fft(f.values)) / f.grid.n
    return Spectrum(f.grid, c)


def inverse_transform(s: Spectrum) -> Field:
    v = np.fft.ifft(np.fft.ifftshift(s.coefficients)) * s.grid.n
    return Field(s.grid, v.real)


# ---------------------------------------------------------------------------
# array-level kernels; Field wrappers below

def deriv_values(v: np.ndarray, order: int) -> np.ndarray:
    if order < 1:
        raise ValueError(f"derivative order must be positive, got {order}")
    n = v.size
    k = np.arange(n // 2 + 1, dtype=float)
    sym = (2j * np.pi * k) ** order
    if order % 2 == 1:
        sym[-1] = 0.0
    return np.fft.irfft(sym * np.fft.rfft(v), n)


def pad_values(v: np.ndarray, m: int) -> np.ndarray:
    """Resample to a finer m-point grid by zero-padding the spectrum.

    Exact for the interpolating trigonometric polynomial; the Nyquist
    coefficient is split between +n/2 and -n/2.
    """
    n = v.size
    if m < n or m % 2 != 0:
        raise ValueError(f"target size must be even and >= {n}, got {m}")
    if m == n:
        return np.array(v, dtype=float)
    c = np.fft.rfft(v)
    cf = np.zeros(m // 2 + 1, dtype=complex)
    cf[: n // 2] = c[: n // 2]
    cf[n // 2] = 0.5 * c[n // 2]
    return np.fft.irfft(cf, m) * (m / n)


def project_values(v: np.ndarray, n: int) -> np.ndarray:
    """Restrict fine-grid samples to the n-point band (adjoint of pad)."""
    m = v.size
    if n > m or n % 2 != 0:
        raise ValueError(f"target size must be even and <= {m}, got {n}")
    if n == m:
        return np.array(v, dtype=float)
    cf = np.fft.rfft(v)
    c = np.empty(n // 2 + 1, dtype=complex)
    c[: n // 2] = cf[: n // 2]
    c[n // 2] = 2.0 * cf[n // 2].real
    return np.fft.irfft(c, n) * (n / m)


def interp_values(v: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Evaluate the interpolating trig polynomial at arbitrary points."""
    n = v.size
    c = np.fft.rfft(v) / n
    xs = np.asarray(xs, dtype=float)
    k = np.arange(1, n // 2)
    phases = np.exp((2j * np.pi) * xs[..., None] * k)
    out = c[0].real + 2.0 * (phases @ c[1 : n // 2]).real
    out += c[n // 2].real * np.cos(np.pi * n * xs)
    return out


# ---------------------------------------------------------------------------
# Field-level operations

def derivative(f: Field, order: int = 1) -> Field:
    """Spectral derivative of the given order (Nyquist zeroed when odd)."""
    return Field(f.grid, deriv_values(f.values, order))


def helmholtz_convolve(f: Field) -> Field:
    """G * f, the inverse of 1 - d^2/dx^2, applied as an exact symbol."""
    c = np.fft.rfft(f.values) * f.grid.helmholtz_symbol
    return Field(f.grid, np.fft.irfft(c, f.grid.n))


def dgreen_convolve(f: Field) -> Field:
    """(G * f)', the smoothing gradient; output always has zero mean."""
    c = np.fft.rfft(f.values) * f.grid.dgreen_symbol
    return Field(f.grid, np.fft.irfft(c, f.grid.n))


def interpolate(f: Field, x: float) -> float:
    """Trigonometric interpolation at a single (possibly off-grid) point."""
    return float(interp_values(f.values, np.asarray([float(x)]))[0])


def interpolate_many(f: Field, xs: np.ndarray) -> np.ndarray:
    return interp_values(f.values, np.asarray(xs, dtype=float))


def integral(f: Field) -> float:
    """Trapezoidal quadrature over one period (= the node mean)."""
    return float(np.mean(f.values))


def resample(f: Field, m: int) -> Field:
    """Spectrally resample to an m-point grid (refine or coarsen)."""
    if m == f.grid.n:
        return f
    if m > f.grid.n:
        return Field(PeriodicGrid(m), pad_values(f.values, m))
    return Field(PeriodicGrid(m), project_values(f.values, m))


def dealiased_product(f: Field, g: Field) -> Field:
    """Pointwise product formed on a 2n grid, projected back to n modes."""
    grid = _same_grid(f, g)
    m = 2 * grid.n
    prod = pad_values(f.values, m) * pad_values(g.values, m)
    return Field(grid, project_values(prod, grid.n))


def random_trig_field(
    grid: PeriodicGrid,
    rng: np.random.Generator,
    max_mode: int = 8,
    rms: float = 1.0,
    zero_mean: bool = False,
) -> Field:
    """Random band-limited field with mildly decaying mode amplitudes."""
    if max_mode < 1 or max_mode >= grid.n // 2:
        raise ValueError(f"max_mode must be in 1 .. {grid.n // 2 - 1}")
    x = grid.nodes
    v = np.zeros(grid.n)
    if not zero_mean:
        v += rng.normal()
    for k in range(1, max_mode + 1):
        decay = 1.0 / (1.0 + k)
        v += decay * rng.normal() * np.cos(2.0 * np.pi * k * x)
        v += decay * rng.normal() * np.sin(2.0 * np.pi * k * x)
    scale = np.sqrt(np.mean(v * v))
    if scale > 0.0:
        v *= rms / scale
    return Field(grid, v)
