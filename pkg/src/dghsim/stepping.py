"""Adaptive RK4 time integration with slope-based breakdown detection.

The step size tracks both the advective CFL limit and the steepness of
the solution: dt = min(cfl dx / max|u - gamma|, slope_dt_factor / |min u_x|,
time remaining).  As the minimal slope dives, steps shrink in proportion,
so a genuine blow-up walks down to the detection threshold in a controlled
geometric cascade instead of going non-finite.

Runs terminate with one of four causes:

  ReachedEnd      integrated to t_end
  BlowupDetected  min u_x fell through blowup_slope, or dt underflowed
                  while the slope was negative and still falling
  DtUnderflow     dt fell below dt_min without a steepening slope
  NonFiniteState  an RK4 stage produced non-finite samples
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .characteristics import CharacteristicEnsemble
from .criteria import SlopeTrace, refined_min
from .grid import Field, PeriodicGrid, deriv_values, interp_values
from .model import (
    InvariantRecord,
    ModelParams,
    State,
    energy_e0,
    hamiltonian_e,
    hamiltonian_f,
    mean_u,
    rhs_values,
)

__all__ = [
    "SimConfig",
    "Termination",
    "SimResult",
    "NonFiniteStateError",
    "SERIES_COLUMNS",
    "adaptive_dt",
    "step_rk4",
    "run",
    "TERM_REACHED_END",
    "TERM_BLOWUP",
    "TERM_DT_UNDERFLOW",
    "TERM_NONFINITE",
]

TERM_REACHED_END = "ReachedEnd"
TERM_BLOWUP = "BlowupDetected"
TERM_DT_UNDERFLOW = "DtUnderflow"
TERM_NONFINITE = "NonFiniteState"

SERIES_COLUMNS = ("t", "E0", "meanU", "hamE", "hamF", "minUx", "xi", "alpha", "dt")


class NonFiniteStateError(RuntimeError):
    """An RK4 stage produced non-finite samples."""


@dataclass(frozen=True)
class SimConfig:
    n: int
    t_end: float
    cfl: float = 0.3
    slope_dt_factor: float = 0.05
    dt_min: float = 1.0e-12
    blowup_slope: float = -1.0e6
    record_every: int = 10
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        PeriodicGrid(self.n)  # validates n
        if not (np.isfinite(self.t_end) and self.t_end > 0.0):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.slope_dt_factor <= 0.0:
            raise ValueError("slope_dt_factor must be positive")
        if self.dt_min <= 0.0:
            raise ValueError("dt_min must be positive")
        if self.blowup_slope >= 0.0:
            raise ValueError("blowup_slope must be negative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        object.__setattr__(
            self, "snapshot_times", tuple(float(t) for t in self.snapshot_times)
        )


@dataclass(frozen=True)
class Termination:
    cause: str
    t: float


@dataclass(frozen=True)
class SimResult:
    invariants: list[InvariantRecord]
    slope_trace: SlopeTrace
    snapshots: list[tuple[float, State]]
    termination: Termination
    series: np.ndarray  # one row per record, columns SERIES_COLUMNS
    ensemble: CharacteristicEnsemble | None = None


def adaptive_dt(
    s: State,
    p: ModelParams,
    c: SimConfig,
    t_remaining: float,
    min_slope: float | None = None,
) -> float:
    """Advective-CFL / slope-limited step, clipped to the time remaining."""
    speed = float(np.max(np.abs(s.u.values - p.gamma)))
    if min_slope is None:
        min_slope, _ = refined_min(deriv_values(s.u.values, 1), s.grid.dx)
    dt_advect = c.cfl * s.grid.dx / max(speed, 1.0e-8)
    dt_slope = c.slope_dt_factor / max(abs(min_slope), 1.0)
    return min(dt_advect, dt_slope, t_remaining)


def _require_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteStateError("non-finite samples in an RK4 stage")


def _advance(
    u: np.ndarray,
    rho: np.ndarray,
    grid: PeriodicGrid,
    p: ModelParams,
    dt: float,
    q: np.ndarray | None = None,
    lq: np.ndarray | None = None,
):
    """One classical RK4 step; optionally carries characteristics along.

    Trajectories use the same stage structure: stage positions advance with
    interpolated stage velocities, and the log-Jacobian integrates the
    interpolated stage slopes.
    """
    track = q is not None
    half = 0.5 * dt
    with np.errstate(over="ignore", invalid="ignore"):
        k1u, k1r = rhs_values(u, rho, grid, p)
        _require_finite(k1u, k1r)
        u2, r2 = u + half * k1u, rho + half * k1r
        k2u, k2r = rhs_values(u2, r2, grid, p)
        _require_finite(k2u, k2r)
        u3, r3 = u + half * k2u, rho + half * k2r
        k3u, k3r = rhs_values(u3, r3, grid, p)
        _require_finite(k3u, k3r)
        u4, r4 = u + dt * k3u, rho + dt * k3r
        k4u, k4r = rhs_values(u4, r4, grid, p)
        _require_finite(k4u, k4r)
        u_new = u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        rho_new = rho + (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        _require_finite(u_new, rho_new)

        if not track:
            return u_new, rho_new, None, None

        stages = (u, u2, u3, u4)
        slopes = tuple(deriv_values(s, 1) for s in stages)
        qk1 = interp_values(stages[0], q)
        lk1 = interp_values(slopes[0], q)
        qa = q + half * qk1
        qk2 = interp_values(stages[1], qa)
        lk2 = interp_values(slopes[1], qa)
        qb = q + half * qk2
        qk3 = interp_values(stages[2], qb)
        lk3 = interp_values(slopes[2], qb)
        qc = q + dt * qk3
        qk4 = interp_values(stages[3], qc)
        lk4 = interp_values(slopes[3], qc)
        q_new = q + (dt / 6.0) * (qk1 + 2.0 * qk2 + 2.0 * qk3 + qk4)
        lq_new = lq + (dt / 6.0) * (lk1 + 2.0 * lk2 + 2.0 * lk3 + lk4)
        _require_finite(q_new, lq_new)
        return u_new, rho_new, q_new, lq_new


def step_rk4(s: State, p: ModelParams, dt: float) -> State:
    """Single classical RK4 step of the field equations."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    u, rho, _, _ = _advance(s.u.values, s.rho.values, s.grid, p, dt)
    return State(Field(s.grid, u), Field(s.grid, rho))


def run(
    s0: State,
    p: ModelParams,
    c: SimConfig,
    seeds: np.ndarray | None = None,
) -> SimResult:
    """Integrate from t = 0 until t_end or breakdown.

    Invariants are recorded every `record_every` steps, at snapshot times
    and at termination; the slope trace records every step.  Passing seed
    positions couples a characteristic ensemble into the same RK4 stages.
    """
    grid = s0.grid
    if grid.n != c.n:
        raise ValueError(f"state lives on n={grid.n}, config says n={c.n}")
    u = np.array(s0.u.values)
    rho = np.array(s0.rho.values)
    track = seeds is not None
    if track:
        q = np.array(seeds, dtype=float)
        lq = np.zeros_like(q)
    else:
        q = lq = None

    tiny = 1.0e-12 * max(1.0, c.t_end)
    snaps_due = deque(
        sorted({t for t in c.snapshot_times if 0.0 <= t <= c.t_end})
    )

    t = 0.0
    step = 0
    last_recorded = -1
    trace_t: list[float] = []
    trace_m: list[float] = []
    trace_xi: list[float] = []
    trace_alpha: list[float] = []
    rows: list[list[float]] = []
    invariants: list[InvariantRecord] = []
    snapshots: list[tuple[float, State]] = []
    ens_t: list[float] = []
    ens_q: list[np.ndarray] = []
    ens_lq: list[np.ndarray] = []
    ens_rq: list[np.ndarray] = []

    def observe() -> None:
        ux = deriv_values(u, 1)
        m, xi = refined_min(ux, grid.dx)
        alpha = float(interp_values(rho, np.asarray([xi]))[0])
        trace_t.append(t)
        trace_m.append(m)
        trace_xi.append(xi)
        trace_alpha.append(alpha)

    def record(dt_next: float) -> None:
        nonlocal last_recorded
        if step == last_recorded:
            return
        last_recorded = step
        st = State(Field(grid, u), Field(grid, rho))
        e0 = energy_e0(st)
        mu = mean_u(st)
        he = hamiltonian_e(st)
        hf = hamiltonian_f(st, p)
        invariants.append(InvariantRecord(t, e0, mu, he, hf))
        rows.append(
            [t, e0, mu, he, hf, trace_m[-1], trace_xi[-1], trace_alpha[-1], dt_next]
        )
        if track:
            ens_t.append(t)
            ens_q.append(q.copy())
            ens_lq.append(lq.copy())
            ens_rq.append(interp_values(rho, q))

    def take_snapshot() -> None:
        snapshots.append((t, State(Field(grid, u), Field(grid, rho))))

    observe()
    termination: Termination | None = None
    while True:
        t_remaining = c.t_end - t
        if t_remaining <= tiny:
            record(0.0)
            termination = Termination(TERM_REACHED_END, t)
            break

        state_view = State(Field(grid, u), Field(grid, rho))
        dt = adaptive_dt(state_view, p, c, t_remaining, min_slope=trace_m[-1])
        hit_snapshot = False
        if snaps_due:
            if snaps_due[0] <= t + tiny:
                snaps_due.popleft()  # t = 0 (or an already-passed) snapshot
                take_snapshot()
                record(dt)
                continue
            if t + dt >= snaps_due[0] - tiny:
                dt = snaps_due[0] - t
                hit_snapshot = True

        if step == 0:
            record(dt)
        if dt < c.dt_min:
            steepening = (
                len(trace_m) >= 2
                and trace_m[-1] < 0.0
                and trace_m[-1] < trace_m[-2]
            )
            record(dt)
            cause = TERM_BLOWUP if steepening else TERM_DT_UNDERFLOW
            termination = Termination(cause, t)
            break

        try:
            u, rho, q, lq = _advance(u, rho, grid, p, dt, q, lq)
        except NonFiniteStateError:
            record(dt)
            termination = Termination(TERM_NONFINITE, t)
            break

        if hit_snapshot:
            t = snaps_due.popleft()
        else:
            t = t + dt
        step += 1
        observe()

        if trace_m[-1] <= c.blowup_slope:
            record(dt)
            termination = Termination(TERM_BLOWUP, t)
            break
        if hit_snapshot:
            take_snapshot()
            record(dt)
        elif step % c.record_every == 0:
            record(dt)

    trace = SlopeTrace(
        times=np.asarray(trace_t),
        m=np.asarray(trace_m),
        xi=np.asarray(trace_xi),
        alpha=np.asarray(trace_alpha),
    )
    ensemble = None
    if track:
        ensemble = CharacteristicEnsemble(
            seeds=np.asarray(seeds, dtype=float),
            times=np.asarray(ens_t),
            q=np.vstack(ens_q),
            log_qx=np.vstack(ens_lq),
            rho_q=np.vstack(ens_rq),
        )
    return SimResult(
        invariants=invariants,
        slope_trace=trace,
        snapshots=snapshots,
        termination=termination,
        series=np.asarray(rows, dtype=float),
        ensemble=ensemble,
    )
