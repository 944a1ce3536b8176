"""Command-line front end.

Subcommands:

    run <config>        integrate a scenario and write series/report artifacts
    criteria <config>   evaluate thresholds and verdicts only, no simulation
    sweep <config> --param key=lo:hi:count
                        run copies of the scenario across a parameter range
    selftest            run the built-in oracle suites

Exit codes: 0 success (a detected blow-up is a success), 2 config error,
3 I/O error, 4 internal numerical fault (non-finite state outside a
declared blow-up approach).

All numeric output uses round-trip float formatting, and reports contain
no timestamps, so identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .characteristics import (
    default_seeds,
    is_monotone,
    sign_preserved,
    verify_density_transport,
)
from .criteria import (
    BLOWUP_PREDICTED,
    SHARP_EMBEDDING_CONSTANT,
    DensitySignChangeError,
    InsufficientWindowError,
    estimate_blowup_rate,
    evaluate_criteria,
    k_mean,
    k_sharp,
    lyapunov_trace,
    poincare_check,
    riccati_blowup_time,
    sobolev_sharp_check,
    threshold_mean,
    threshold_sharp,
    threshold_zero_mean,
)
from .grid import (
    Field,
    NonFiniteFieldError,
    PeriodicGrid,
    derivative,
    dgreen_convolve,
    dgreen_kernel,
    green_kernel,
    helmholtz_convolve,
    random_trig_field,
)
from .model import ModelParams, State, energy_e0, mean_u
from .scenarios import (
    ConfigError,
    Scenario,
    build_initial_data,
    parse_config_entries,
    resolved_config,
    scenario_from_entries,
)
from .stepping import (
    TERM_NONFINITE,
    SERIES_COLUMNS,
    SimConfig,
    run,
    step_rk4,
)

__all__ = ["main", "run_scenario", "EXIT_OK", "EXIT_CONFIG", "EXIT_IO", "EXIT_NUMERIC"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="ascii")


def _report_criteria(rep) -> dict:
    return {
        "e0": rep.e0,
        "a0": rep.a0,
        "m0": rep.m0,
        "xi0": rep.xi0,
        "thresholds": dict(rep.thresholds),
        "k_values": dict(rep.k_values),
        "riccati_t": rep.riccati_t,
        "verdicts": {
            name: {"hypothesis_met": v.hypothesis_met, "predicted": v.predicted}
            for name, v in rep.verdicts.items()
        },
    }


def _snapshot_name(t: float, used: set) -> str:
    base = f"t_{t:g}"
    name = base
    k = 2
    while name in used:
        name = f"{base}_{k}"
        k += 1
    used.add(name)
    return name


def run_scenario(sc: Scenario, out_dir: Path, quiet: bool = False) -> int:
    """Execute one scenario and write its artifacts under out_dir."""
    sc = sc.resolve()
    s0 = sc.build_state()
    report = evaluate_criteria(s0.u, s0.rho, sc.model, sc.eps_list)
    seeds = default_seeds(sc.characteristic_count) if sc.characteristics else None
    result = run(s0, sc.model, sc.sim, seeds=seeds)

    doc: dict = {"config": resolved_config(sc), "criteria": _report_criteria(report)}
    first, last = result.invariants[0], result.invariants[-1]
    doc["run"] = {
        "termination": {
            "cause": result.termination.cause,
            "t": result.termination.t,
        },
        "t_sim": result.termination.t,
        "steps": len(result.slope_trace.times) - 1,
        "records": len(result.invariants),
        "drift": {
            "e0_rel": abs(last.e0 - first.e0) / max(abs(first.e0), 1.0e-300),
            "mean_u_abs": abs(last.mean_u - first.mean_u),
        },
        "final": {
            "e0": last.e0,
            "mean_u": last.mean_u,
            "min_ux": float(result.slope_trace.m[-1]),
        },
    }

    try:
        est = estimate_blowup_rate(result.slope_trace)
        doc["rate_estimate"] = {
            "t_blowup": est.t_blowup,
            "rate": est.rate,
            "fit_quality": est.fit_quality,
            "samples": est.samples,
        }
    except InsufficientWindowError as exc:
        doc["rate_estimate"] = {"unavailable": str(exc)}

    try:
        lt = lyapunov_trace(result.slope_trace, s0.rho, s0.u, report.e0, sc.model)
        doc["lyapunov"] = {
            "beta": lt.beta,
            "c1": lt.c1,
            "c2": lt.c2,
            "violations": int(lt.violations.size),
            "bound_satisfied": lt.violations.size == 0,
        }
    except (ValueError, DensitySignChangeError) as exc:
        doc["lyapunov"] = {"unavailable": str(exc)}

    if result.ensemble is not None:
        ens = result.ensemble
        doc["characteristics"] = {
            "transport_residual": verify_density_transport(ens, s0.rho),
            "monotone": is_monotone(ens),
            "sign_preserved": sign_preserved(ens, s0.rho),
            "min_jacobian": float(np.exp(ens.log_qx.min())),
        }
    else:
        doc["characteristics"] = None

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "series.csv", SERIES_COLUMNS, result.series)
    _write_json(out_dir / "report.json", doc)
    if result.snapshots:
        snap_dir = out_dir / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        used: set = set()
        x = s0.grid.nodes
        for t, st in result.snapshots:
            name = _snapshot_name(t, used)
            rows = np.column_stack([x, st.u.values, st.rho.values])
            _write_csv(snap_dir / f"{name}.csv", ("x", "u", "rho"), rows)
    if result.ensemble is not None:
        ens = result.ensemble
        rows = []
        for i, t in enumerate(ens.times):
            for j, seed in enumerate(ens.seeds):
                rows.append(
                    (t, seed, ens.q[i, j], np.exp(ens.log_qx[i, j]), ens.rho_q[i, j])
                )
        _write_csv(
            out_dir / "characteristics.csv",
            ("t", "seed", "q", "qx", "rho_q"),
            rows,
        )

    if not quiet:
        print(
            f"{sc.name}: {result.termination.cause} at t={result.termination.t:.6g} "
            f"({doc['run']['steps']} steps), artifacts in {out_dir}"
        )

    if result.termination.cause == TERM_NONFINITE:
        predicted = any(
            v.predicted == BLOWUP_PREDICTED for v in report.verdicts.values()
        )
        m = result.slope_trace.m
        diving = float(m[-1]) <= -10.0 * max(1.0, abs(float(m[0])))
        if not (predicted or diving):
            if not quiet:
                print(
                    f"{sc.name}: non-finite state without a declared blow-up "
                    f"approach",
                    file=sys.stderr,
                )
            return EXIT_NUMERIC
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommand handlers

def _load_scenario(path: str) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    return scenario_from_entries(parse_config_entries(text))


def _cmd_run(args) -> int:
    sc = _load_scenario(args.config)
    return run_scenario(sc, Path(args.out_dir), quiet=args.quiet)


def _cmd_criteria(args) -> int:
    sc = _load_scenario(args.config).resolve()
    s0 = sc.build_state()
    report = evaluate_criteria(s0.u, s0.rho, sc.model, sc.eps_list)
    doc = {"config": resolved_config(sc), "criteria": _report_criteria(report)}
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "report.json", doc)
    if not args.quiet:
        print(f"{sc.name}: E0={report.e0:.6g} a0={report.a0:.6g} m0={report.m0:.6g}")
        for name, v in report.verdicts.items():
            print(f"  {name}: hypothesis_met={v.hypothesis_met} -> {v.predicted}")
        if report.riccati_t is not None:
            print(f"  blow-up time bound: {report.riccati_t:.6g}")
    return EXIT_OK


def _parse_sweep_param(spec: str) -> tuple[str, np.ndarray]:
    key, sep, rng = spec.partition("=")
    key = key.strip()
    parts = rng.split(":")
    if not sep or not key or len(parts) != 3:
        raise ConfigError(
            f"--param must look like key=lo:hi:count, got {spec!r}"
        )
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise ConfigError(f"bad sweep range {rng!r}") from None
    if count < 1:
        raise ConfigError(f"sweep count must be at least 1, got {count}")
    return key, np.linspace(lo, hi, count)


def _cmd_sweep(args) -> int:
    key, values = _parse_sweep_param(args.param)
    text = Path(args.config).read_text(encoding="utf-8")
    entries = parse_config_entries(text)
    base_name = entries.get("scenario.name", entries.get("scenario.family", "sweep"))
    out_root = Path(args.out_dir)
    summary = []
    worst = EXIT_OK
    for i, value in enumerate(values):
        sub = dict(entries)
        sub[key] = _fmt(value)
        sub["scenario.name"] = f"{base_name}__{i:03d}"
        sc = scenario_from_entries(sub)
        code = run_scenario(sc, out_root / sc.name, quiet=args.quiet)
        worst = max(worst, code)
        report = json.loads((out_root / sc.name / "report.json").read_text())
        summary.append(
            {
                "name": sc.name,
                key: float(value),
                "termination": report["run"]["termination"]["cause"],
                "t_sim": report["run"]["t_sim"],
                "exit_code": code,
            }
        )
    out_root.mkdir(parents=True, exist_ok=True)
    _write_json(out_root / "sweep.json", {"param": key, "runs": summary})
    if not args.quiet:
        print(f"sweep over {key}: {len(values)} runs, artifacts in {out_root}")
    return worst


# ---------------------------------------------------------------------------
# selftest: compact versions of the oracle suites

def _kernel_quadrature(values: np.ndarray, grid: PeriodicGrid, m: int = 8192):
    """Direct fine-grid quadrature of kernel * field, for checking the symbol."""
    from .grid import interp_values

    y = np.arange(m) / m
    vy = interp_values(values, y)
    out = np.empty(grid.n)
    for i, xi in enumerate(grid.nodes):
        out[i] = np.mean(green_kernel(xi - y) * vy)
    return out


def _integrate_riccati(c: float, k: float, y0: float, y_stop: float = -1.0e6):
    """RK4 integration of y' = -c y^2 + k until y falls through y_stop."""
    def f(y):
        return -c * y * y + k

    t, y = 0.0, y0
    while y > y_stop:
        dt = 0.005 / max(c * abs(y), 1.0)
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        if t > 1.0e6:
            raise RuntimeError("riccati integration did not blow up")
    return t


def _st_threshold_algebra(rng) -> str | None:
    for _ in range(2000):
        e0 = float(rng.uniform(0.0, 50.0))
        a0 = float(rng.uniform(-5.0, 5.0))
        eps = float(rng.uniform(1.0e-3, 20.0))
        gamma = float(rng.uniform(-3.0, 3.0))
        a = float(rng.uniform(0.1, 3.0))
        t1 = threshold_sharp(e0, gamma, a)
        if abs(t1 * t1 - 2.0 * k_sharp(e0, gamma, a)) > 1.0e-12 * max(1.0, t1 * t1):
            return f"sharp identity broke at e0={e0}"
        t2 = threshold_mean(e0, a0, eps, gamma, a)
        if abs(t2 * t2 - 2.0 * k_mean(e0, a0, eps, gamma, a)) > 1.0e-12 * max(
            1.0, t2 * t2
        ):
            return f"mean identity broke at e0={e0}, eps={eps}"
        lim = threshold_mean(e0, 0.0, 1.0e-8, gamma, a)
        if abs(lim - threshold_zero_mean(e0, gamma, a)) > 1.0e-4:
            return f"zero-mean limit broke at e0={e0}"
    return None


def _st_sharp_kernel(rng) -> str | None:
    grid = PeriodicGrid(512)
    f = Field(grid, green_kernel(grid.nodes))
    fx_vals = dgreen_kernel(grid.nodes)
    fx_vals[0] = -0.5  # one-sided corner value, so fx^2 keeps its size there
    ratio = sobolev_sharp_check(f, Field(grid, fx_vals))
    if abs(ratio - SHARP_EMBEDDING_CONSTANT) > 1.0e-6:
        return f"kernel ratio {ratio!r} off the sharp constant"
    for _ in range(200):
        g = random_trig_field(grid, rng, max_mode=8, rms=float(rng.uniform(0.1, 3.0)))
        if sobolev_sharp_check(g) > SHARP_EMBEDDING_CONSTANT + 1.0e-9:
            return "random field exceeded the sharp constant"
    return None


def _st_poincare(rng) -> str | None:
    grid = PeriodicGrid(256)
    for _ in range(200):
        f = random_trig_field(grid, rng, max_mode=8, rms=float(rng.uniform(0.1, 3.0)))
        for eps in (0.1, 1.0, 10.0):
            if poincare_check(f, eps) < -1.0e-9:
                return f"margin negative at eps={eps}"
    return None


def _st_helmholtz_oracle(rng) -> str | None:
    grid = PeriodicGrid(256)
    for _ in range(3):
        f = random_trig_field(grid, rng, max_mode=12, rms=1.0)
        direct = _kernel_quadrature(f.values, grid)
        err = float(np.max(np.abs(helmholtz_convolve(f).values - direct)))
        if err > 1.0e-6:
            return f"quadrature mismatch {err:.3e}"
    for _ in range(5):
        f = random_trig_field(grid, rng, max_mode=20, rms=1.0)
        split = derivative(helmholtz_convolve(f))
        err = float(np.max(np.abs(dgreen_convolve(f).values - split.values)))
        if err > 1.0e-12:
            return f"derivative factorization mismatch {err:.3e}"
    return None


def _st_constant_steady(rng) -> str | None:
    grid = PeriodicGrid(64)
    s = State(Field.constant(grid, 0.5), Field.constant(grid, 1.0))
    p = ModelParams()
    for _ in range(1000):
        s = step_rk4(s, p, 1.0e-3)
    dev = max(
        float(np.max(np.abs(s.u.values - 0.5))),
        float(np.max(np.abs(s.rho.values - 1.0))),
    )
    if dev > 1.0e-10:
        return f"constant state drifted by {dev:.3e}"
    return None


def _st_rk4_order(rng) -> str | None:
    grid = PeriodicGrid(64)
    u0 = random_trig_field(grid, rng, max_mode=4, rms=0.2)
    r0 = Field(grid, 1.0 + 0.2 * random_trig_field(grid, rng, max_mode=4).values)
    p = ModelParams(gamma=0.1)

    def integrate(steps: int) -> np.ndarray:
        s = State(u0, r0)
        dt = 0.1 / steps
        for _ in range(steps):
            s = step_rk4(s, p, dt)
        return s.u.values

    ref = integrate(1024)
    errs = [float(np.max(np.abs(integrate(k) - ref))) for k in (32, 64, 128)]
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    if min(orders) < 3.9:
        return f"observed orders {orders}"
    return None


def _st_riccati(rng) -> str | None:
    for _ in range(10):
        c = float(rng.uniform(0.1, 2.0))
        k = float(rng.uniform(0.0, 4.0))
        y0 = -np.sqrt(k / c) * float(rng.uniform(1.2, 4.0)) - 0.1
        bound = riccati_blowup_time(c, k, y0)
        t_blow = _integrate_riccati(c, k, y0)
        if t_blow > bound * 1.01:
            return f"numeric blow-up at {t_blow} exceeds bound {bound}"
    return None


def _st_transport_trivial(rng) -> str | None:
    grid = PeriodicGrid(64)
    s0 = State(Field.constant(grid, 0.4), Field.constant(grid, 2.0))
    cfg = SimConfig(n=64, t_end=1.0, record_every=5)
    result = run(s0, ModelParams(), cfg, seeds=default_seeds(16))
    resid = verify_density_transport(result.ensemble, s0.rho)
    if resid > 1.0e-10:
        return f"constant-state transport residual {resid:.3e}"
    return None


_SELFTESTS = (
    ("threshold-algebra", _st_threshold_algebra),
    ("sharp-kernel-ratio", _st_sharp_kernel),
    ("poincare-margin", _st_poincare),
    ("helmholtz-oracle", _st_helmholtz_oracle),
    ("constant-steady-state", _st_constant_steady),
    ("rk4-order", _st_rk4_order),
    ("riccati-bound", _st_riccati),
    ("transport-trivial", _st_transport_trivial),
)


def _cmd_selftest(args) -> int:
    failures = 0
    for i, (name, check) in enumerate(_SELFTESTS):
        rng = np.random.default_rng(args.seed + i)
        problem = check(rng)
        if problem is None:
            if not args.quiet:
                print(f"ok   {name}")
        else:
            failures += 1
            print(f"FAIL {name}: {problem}", file=sys.stderr)
    if failures:
        print(f"{failures} selftest(s) failed", file=sys.stderr)
        return EXIT_NUMERIC
    if not args.quiet:
        print(f"all {len(_SELFTESTS)} selftests passed")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dghsim",
        description="Pseudospectral simulator for a two-component "
        "shallow-water wave system on the circle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out-dir", default="out", help="artifact directory")
        p.add_argument("--seed", type=int, default=0, help="seed for random checks")
        p.add_argument("--quiet", action="store_true", help="suppress progress lines")

    p_run = sub.add_parser("run", help="integrate a scenario")
    p_run.add_argument("config", help="flat key=value config file")
    common(p_run)
    p_run.set_defaults(handler=_cmd_run)

    p_cr = sub.add_parser("criteria", help="evaluate thresholds only")
    p_cr.add_argument("config")
    common(p_cr)
    p_cr.set_defaults(handler=_cmd_criteria)

    p_sw = sub.add_parser("sweep", help="run a scenario across a parameter range")
    p_sw.add_argument("config")
    p_sw.add_argument(
        "--param", required=True, metavar="key=lo:hi:count",
        help="config key and inclusive range to sweep",
    )
    common(p_sw)
    p_sw.set_defaults(handler=_cmd_sweep)

    p_st = sub.add_parser("selftest", help="run the built-in oracle suites")
    common(p_st)
    p_st.set_defaults(handler=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteFieldError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
