"""Breakdown thresholds, slope tracking, and growth envelopes.

Everything here descends from two conserved/monitored quantities of the
flow: the energy e0 = integral(u^2 + u_x^2 + rho^2) and the (doubled)
velocity mean a0 = 2 integral(u).  A state whose minimal slope starts
below one of the thresholds, at a point where the density vanishes, rides
a Riccati inequality m' <= -m^2/2 + K into a finite-time slope blow-up;
a density bounded away from zero instead yields an exponential envelope
that rules blow-up out.

The embedding constant (e+1)/(2(e-1)) is sharp for max f^2 <= C |f|_H1^2
on the unit circle and is attained by translates of the smoothing kernel;
the mean-based route max f^2 <= (eps+2)/24 int f_x^2 + (eps+2)/(4 eps) a0^2
holds for every eps > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Field, derivative, green_kernel, interpolate
from .model import ModelParams, State, energy_e0, mean_u

__all__ = [
    "SHARP_EMBEDDING_CONSTANT",
    "KERNEL_MAX",
    "SlopeTrace",
    "RateEstimate",
    "LyapunovTrace",
    "Verdict",
    "CriterionReport",
    "InsufficientWindowError",
    "DensitySignChangeError",
    "refined_min",
    "refined_max",
    "track_slope",
    "k_sharp",
    "threshold_sharp",
    "k_mean",
    "threshold_mean",
    "threshold_zero_mean",
    "riccati_blowup_time",
    "blowup_time_bound",
    "estimate_blowup_rate",
    "lyapunov_trace",
    "sobolev_sharp_check",
    "poincare_check",
    "evaluate_criteria",
]

# sharp constant of the H1 -> Linf embedding on the unit circle
SHARP_EMBEDDING_CONSTANT = (math.e + 1.0) / (2.0 * (math.e - 1.0))
# peak of the smoothing kernel; numerically the same value, kept separate
# because it enters the envelope bound through the kernel, not the embedding
KERNEL_MAX = green_kernel(0.0)


class InsufficientWindowError(ValueError):
    """Too few trace samples qualify for the blow-up rate fit."""


class DensitySignChangeError(RuntimeError):
    """rho(t, xi(t)) changed sign or vanished: resolution failure."""


def refined_min(values: np.ndarray, dx: float) -> tuple[float, float]:
    """Minimum over nodes, refined by a quadratic through the neighbors.

    Returns (value, location); ties break to the first node.  The parabola
    vertex never lies further than half a spacing from the winning node.
    """
    values = np.asarray(values)
    j = int(np.argmin(values))
    n = values.size
    vm = float(values[(j - 1) % n])
    v0 = float(values[j])
    vp = float(values[(j + 1) % n])
    x0 = (j * dx) % 1.0
    curv = vm - 2.0 * v0 + vp
    if curv <= 0.0:
        return v0, x0
    delta = 0.5 * (vm - vp) / curv * dx
    m = v0 - (vp - vm) ** 2 / (8.0 * curv)
    return m, (x0 + delta) % 1.0


def refined_max(values: np.ndarray, dx: float) -> tuple[float, float]:
    m, x = refined_min(-np.asarray(values), dx)
    return -m, x


def track_slope(s: State) -> tuple[float, float, float]:
    """(m, xi, alpha): minimal slope, its location, density sampled there."""
    ux = derivative(s.u, 1)
    m, xi = refined_min(ux.values, s.grid.dx)
    alpha = interpolate(s.rho, xi)
    return m, xi, alpha


@dataclass(frozen=True)
class SlopeTrace:
    """Per-step history of the minimal slope and the density riding it."""

    times: np.ndarray
    m: np.ndarray
    xi: np.ndarray
    alpha: np.ndarray

    def __post_init__(self) -> None:
        for name in ("times", "m", "xi", "alpha"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        if not (self.times.size == self.m.size == self.xi.size == self.alpha.size):
            raise ValueError("trace arrays must have equal length")


# ---------------------------------------------------------------------------
# slope thresholds

def _check_e0(e0: float) -> None:
    if e0 < 0.0 or not np.isfinite(e0):
        raise ValueError(f"energy must be finite and nonnegative, got {e0}")


def k_sharp(e0: float, gamma: float, a: float) -> float:
    """Riccati forcing bound obtained through the sharp embedding."""
    _check_e0(e0)
    c = SHARP_EMBEDDING_CONSTANT
    return 0.5 * c * e0 + 2.0 * abs(gamma - a) * math.sqrt(c * e0)


def threshold_sharp(e0: float, gamma: float, a: float) -> float:
    """Slope threshold -sqrt(2 K) for the sharp-embedding route."""
    return -math.sqrt(2.0 * k_sharp(e0, gamma, a))


def k_mean(e0: float, a0: float, eps: float, gamma: float, a: float) -> float:
    """Riccati forcing bound through the mean-based embedding (any eps > 0)."""
    _check_e0(e0)
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    base = (eps + 2.0) / 48.0 * e0 + (eps + 2.0) / (8.0 * eps) * a0**2
    root = math.sqrt((eps + 2.0) / 6.0 * e0 + (eps + 2.0) / eps * a0**2)
    return base + abs(gamma - a) * root


def threshold_mean(e0: float, a0: float, eps: float, gamma: float, a: float) -> float:
    return -math.sqrt(2.0 * k_mean(e0, a0, eps, gamma, a))


def threshold_zero_mean(e0: float, gamma: float, a: float) -> float:
    """eps -> 0 limit of the mean route at a0 = 0."""
    _check_e0(e0)
    return -math.sqrt(e0 / 12.0 + 2.0 * abs(gamma - a) * math.sqrt(e0 / 3.0))


def riccati_blowup_time(c: float, k: float, y0: float) -> float:
    """Upper bound on the blow-up time of y' <= -c y^2 + k from y(0) = y0.

    Requires c > 0, k >= 0 and y0 < -sqrt(k/c); the solution then reaches
    -infinity no later than 1/(-c y0 + k/y0).
    """
    if c <= 0.0:
        raise ValueError(f"quadratic coefficient must be positive, got {c}")
    if k < 0.0:
        raise ValueError(f"forcing bound must be nonnegative, got {k}")
    if y0 >= -math.sqrt(k / c):
        raise ValueError(
            f"initial value {y0} does not clear the threshold {-math.sqrt(k / c)}"
        )
    return 1.0 / (-c * y0 + k / y0)


def blowup_time_bound(m0: float, k: float) -> float:
    """Specialization 2 m0 / (2 k - m0^2) of the Riccati bound at c = 1/2."""
    return riccati_blowup_time(0.5, k, m0)


# ---------------------------------------------------------------------------
# blow-up rate

@dataclass(frozen=True)
class RateEstimate:
    t_blowup: float
    rate: float
    fit_quality: float
    samples: int


def estimate_blowup_rate(
    trace: SlopeTrace,
    min_samples: int = 10,
    start_factor: float = 3.0,
    peak_fraction: float = 0.5,
) -> RateEstimate:
    """Fit y(t) = -1/m(t) linearly over the trusted part of the slope dive.

    Near a slope blow-up, y decays linearly to zero with slope 1/rate, so
    the line's root estimates the blow-up time and a clean breaking wave
    reports a rate near -2.

    On a fixed grid the dive is only trustworthy down to the resolution
    ceiling: the truncated expansion cannot steepen past |m| ~ sqrt(n e0)
    with the energy it conserves, so m stalls there and any later descent
    rides on spurious energy growth.  The fit window therefore runs from
    start_factor |m(0)| (past the threshold scale, where the asymptote has
    set in) down to peak_fraction times the deepest slope of the first
    sustained dive; the dive ends where m recovers to half its running
    minimum, which the true solution cannot do below the threshold.
    """
    m = trace.m
    t = trace.times
    cutoff = -start_factor * abs(float(m[0]))
    start = int(np.argmax(m <= cutoff))
    if m[start] > cutoff:
        raise InsufficientWindowError(
            f"slope never fell past the fit cutoff {cutoff:.3g}"
        )
    peak = m[start]
    end = m.size
    for i in range(start, m.size):
        peak = min(peak, m[i])
        if m[i] >= 0.5 * peak:
            end = i
            break
    mask = (m[start:end] <= cutoff) & (m[start:end] >= peak_fraction * peak)
    count = int(np.count_nonzero(mask))
    if count < min_samples:
        raise InsufficientWindowError(
            f"only {count} samples between the cutoff {cutoff:.3g} and the "
            f"dive floor {peak_fraction * peak:.3g} (need {min_samples})"
        )
    tt = t[start:end][mask]
    y = -1.0 / m[start:end][mask]
    slope, intercept = np.polyfit(tt, y, 1)
    if slope >= 0.0:
        raise InsufficientWindowError("trace tail is not steepening")
    resid = y - (slope * tt + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    quality = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0.0 else 1.0
    return RateEstimate(
        t_blowup=float(-intercept / slope),
        rate=float(1.0 / slope),
        fit_quality=quality,
        samples=count,
    )


# ---------------------------------------------------------------------------
# global-existence envelope

@dataclass(frozen=True)
class LyapunovTrace:
    times: np.ndarray
    w: np.ndarray
    envelope: np.ndarray
    beta: float
    c1: float
    c2: float
    violations: np.ndarray


def lyapunov_trace(
    trace: SlopeTrace, rho0: Field, u0: Field, e0: float, p: ModelParams
) -> LyapunovTrace:
    """Certificate w(t) and envelope for runs with density of one sign.

    w(t) = alpha(0) alpha(t) + (alpha(0)/alpha(t)) (1 + m(t)^2) grows at
    most like exp((c1 + 1/2) t), which caps |m(t)| by
    (c2 / (2 beta)) exp((c1 + 1/2) t) with beta = min |rho0| > 0.
    """
    dx = rho0.grid.dx
    lo, _ = refined_min(rho0.values, dx)
    hi, _ = refined_max(rho0.values, dx)
    if lo > 0.0:
        beta = lo
    elif hi < 0.0:
        beta = -hi
    else:
        raise ValueError("density must be bounded away from zero")

    alpha = trace.alpha
    if np.any(alpha * alpha[0] <= 0.0):
        raise DensitySignChangeError(
            "tracked density changed sign or vanished along the slope minimum"
        )
    w = alpha[0] * alpha + (alpha[0] / alpha) * (1.0 + trace.m**2)

    c = SHARP_EMBEDDING_CONSTANT
    c1 = c * e0 + 2.0 * abs(p.gamma - p.A) * math.sqrt(c * e0) + KERNEL_MAX * e0
    ux0 = derivative(u0, 1).values
    sup_ux0 = max(abs(refined_min(ux0, dx)[0]), abs(refined_max(ux0, dx)[0]))
    sup_rho0 = max(abs(lo), abs(hi))
    c2 = sup_rho0**2 + 1.0 + sup_ux0**2

    envelope = (c2 / (2.0 * beta)) * np.exp((c1 + 0.5) * trace.times)
    violations = np.nonzero(np.abs(trace.m) > envelope)[0]
    return LyapunovTrace(
        times=trace.times,
        w=w,
        envelope=envelope,
        beta=beta,
        c1=c1,
        c2=c2,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# inequality spot checks

def _corner_safe_mean(v: np.ndarray) -> float:
    # trapezoid sums at n and n/2 (subsampled), Richardson-combined: exact
    # for trig polynomials below a quarter of the band, and O(n^-4) for
    # fields with isolated corners such as the kernel itself
    return float((4.0 * np.mean(v) - np.mean(v[::2])) / 3.0)


def sobolev_sharp_check(f: Field, fx: Field | None = None) -> float:
    """max f^2 / integral(f^2 + f_x^2); never exceeds the sharp constant.

    The derivative defaults to the spectral one; pass fx explicitly when
    the samples come from a function with corners.
    """
    v = f.values
    if float(np.max(np.abs(v))) == 0.0:
        raise ValueError("zero field has no embedding ratio")
    if fx is None:
        dv = derivative(f, 1).values
    else:
        if fx.grid != f.grid:
            raise ValueError("fx must live on the grid of f")
        dv = fx.values
    num, _ = refined_max(v * v, f.grid.dx)
    den = _corner_safe_mean(v * v + dv * dv)
    return num / den


def poincare_check(f: Field, eps: float) -> float:
    """Margin of (eps+2)/24 int f_x^2 + (eps+2)/(4 eps) a0^2 - max f^2."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    v = f.values
    dv = derivative(f, 1).values
    a0 = 2.0 * float(np.mean(v))
    lhs, _ = refined_max(v * v, f.grid.dx)
    rhs = (eps + 2.0) / 24.0 * _corner_safe_mean(dv * dv) + (eps + 2.0) / (
        4.0 * eps
    ) * a0**2
    return rhs - lhs


# ---------------------------------------------------------------------------
# combined report

BLOWUP_PREDICTED = "BlowupPredicted"
GLOBAL_PREDICTED = "GlobalPredicted"
NO_PREDICTION = "NoPrediction"


@dataclass(frozen=True)
class Verdict:
    hypothesis_met: bool
    predicted: str


@dataclass(frozen=True)
class CriterionReport:
    e0: float
    a0: float
    thresholds: dict[str, float]
    k_values: dict[str, float]
    riccati_t: float | None
    verdicts: dict[str, Verdict]
    m0: float = 0.0
    xi0: float = 0.0

    def __post_init__(self) -> None:
        for name, value in self.thresholds.items():
            if value > 0.0:
                raise ValueError(f"threshold {name} must be nonpositive")
        if self.riccati_t is not None and self.riccati_t <= 0.0:
            raise ValueError("riccati_t must be positive when present")


def evaluate_criteria(
    u0: Field,
    rho0: Field,
    p: ModelParams,
    eps_list: tuple[float, ...] = (0.1, 1.0, 10.0),
) -> CriterionReport:
    """Evaluate every breakdown/global criterion on the initial data."""
    s0 = State(u0, rho0)
    e0 = energy_e0(s0)
    a0 = 2.0 * mean_u(s0)
    dx = u0.grid.dx

    ux0 = derivative(u0, 1).values
    m0, xi0 = refined_min(ux0, dx)
    rho_at_xi = interpolate(rho0, xi0)
    rho_hi, _ = refined_max(np.abs(rho0.values), dx)
    rho_vanishes = abs(rho_at_xi) <= 1.0e-10 * rho_hi

    thresholds = {"sharp": threshold_sharp(e0, p.gamma, p.A)}
    k_values = {"sharp": k_sharp(e0, p.gamma, p.A)}
    for eps in eps_list:
        key = f"mean_eps_{eps:g}"
        thresholds[key] = threshold_mean(e0, a0, eps, p.gamma, p.A)
        k_values[key] = k_mean(e0, a0, eps, p.gamma, p.A)
    thresholds["zero_mean"] = threshold_zero_mean(e0, p.gamma, p.A)

    verdicts: dict[str, Verdict] = {}
    bounds: list[float] = []

    met = rho_vanishes and m0 < thresholds["sharp"]
    verdicts["sharp"] = Verdict(met, BLOWUP_PREDICTED if met else NO_PREDICTION)
    if met:
        bounds.append(blowup_time_bound(m0, k_values["sharp"]))

    for eps in eps_list:
        key = f"mean_eps_{eps:g}"
        met = rho_vanishes and m0 < thresholds[key]
        verdicts[key] = Verdict(met, BLOWUP_PREDICTED if met else NO_PREDICTION)
        if met:
            bounds.append(blowup_time_bound(m0, k_values[key]))

    zero_mean = abs(a0) <= 1.0e-12 * max(1.0, math.sqrt(e0))
    met = rho_vanishes and zero_mean and m0 < thresholds["zero_mean"]
    verdicts["zero_mean"] = Verdict(met, BLOWUP_PREDICTED if met else NO_PREDICTION)

    rho_lo, _ = refined_min(rho0.values, dx)
    rho_top, _ = refined_max(rho0.values, dx)
    nonvanishing = rho_lo > 0.0 or rho_top < 0.0
    verdicts["positive_density"] = Verdict(
        nonvanishing, GLOBAL_PREDICTED if nonvanishing else NO_PREDICTION
    )

    return CriterionReport(
        e0=e0,
        a0=a0,
        thresholds=thresholds,
        k_values=k_values,
        riccati_t=min(bounds) if bounds else None,
        verdicts=verdicts,
        m0=m0,
        xi0=xi0,
    )
