"""Initial-data families, scenario descriptions, and the flat config format.

A scenario bundles one initial-data family with model parameters, run
settings, and analysis options.  Configs are flat ``key = value`` text with
section prefixes::

    scenario.family = global41
    scenario.r0     = 2.0
    model.gamma     = 0.0
    sim.n           = 256
    sim.t_end       = 10.0

Unknown keys are rejected by name so typos fail loudly instead of being
silently ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .criteria import threshold_sharp
from .grid import Field, PeriodicGrid
from .model import ModelParams, State, energy_e0
from .stepping import SimConfig

__all__ = [
    "ConfigError",
    "Scenario",
    "FAMILIES",
    "build_initial_data",
    "solve_blowup_amplitude",
    "parse_config",
    "parse_config_entries",
    "scenario_from_entries",
    "resolved_config",
]


class ConfigError(ValueError):
    """Malformed configuration: unknown key, bad value, or missing field."""


def _to_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


def _to_int(text: str) -> int:
    x = _to_float(text)
    if x != int(x):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(x)


def _to_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _to_float_tuple(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",")]
    return tuple(_to_float(p) for p in parts if p)


def _to_amplitude(text: str):
    if text.strip().lower() == "auto":
        return "auto"
    return _to_float(text)


# family -> ordered {param: (converter, default)}; None default means required
_FAMILY_PARAMS: dict[str, dict[str, tuple]] = {
    "constant": {"c": (_to_float, 0.5), "r": (_to_float, 1.0)},
    "blowup31": {
        "a": (_to_amplitude, "auto"),
        "b": (_to_float, 1.0),
        "margin": (_to_float, 1.05),
    },
    "global41": {"r0": (_to_float, 2.0), "ru": (_to_float, 1.0)},
    "zero-mean": {"a": (_to_float, 1.0)},
    "custom-fourier": {
        "u_mean": (_to_float, 0.0),
        "u_cos": (_to_float_tuple, ()),
        "u_sin": (_to_float_tuple, ()),
        "rho_mean": (_to_float, 0.0),
        "rho_cos": (_to_float_tuple, ()),
        "rho_sin": (_to_float_tuple, ()),
    },
}

FAMILIES = tuple(_FAMILY_PARAMS)


def _merge_family_params(family: str, params: dict) -> dict:
    if family not in _FAMILY_PARAMS:
        known = ", ".join(FAMILIES)
        raise ConfigError(f"unknown family {family!r} (known: {known})")
    spec = _FAMILY_PARAMS[family]
    for key in params:
        if key not in spec:
            raise ConfigError(f"unknown key 'scenario.{key}' for family {family!r}")
    merged = {name: params.get(name, default) for name, (_, default) in spec.items()}
    _check_family_constraints(family, merged)
    return merged


def _check_family_constraints(family: str, p: dict) -> None:
    if family == "global41" and p["r0"] <= 1.0:
        raise ConfigError(f"global41 requires r0 > 1, got r0 = {p['r0']}")
    if family == "blowup31":
        if p["margin"] <= 1.0:
            raise ConfigError(
                f"blowup31 margin must exceed 1 (slope beyond threshold), "
                f"got {p['margin']}"
            )
        if p["a"] != "auto" and p["a"] <= 0.0:
            raise ConfigError(f"blowup31 amplitude must be positive, got {p['a']}")
    if family == "zero-mean" and p["a"] == 0.0:
        raise ConfigError("zero-mean amplitude must be nonzero")


def _trig_series(
    grid: PeriodicGrid, mean: float, cos_c: tuple, sin_c: tuple
) -> np.ndarray:
    top = max(len(cos_c), len(sin_c))
    if top > grid.n // 2 - 1:
        raise ConfigError(
            f"custom-fourier mode {top} does not fit on an n={grid.n} grid "
            f"(need n >= {2 * top + 2})"
        )
    x = grid.nodes
    v = np.full(grid.n, float(mean))
    for k, c in enumerate(cos_c, start=1):
        v += c * np.cos(2.0 * np.pi * k * x)
    for k, c in enumerate(sin_c, start=1):
        v += c * np.sin(2.0 * np.pi * k * x)
    return v


def build_initial_data(family: str, params: dict, grid: PeriodicGrid) -> State:
    """Construct initial fields for one of the named families.

    constant(c, r)        u = c, rho = r
    blowup31(a, b)        u = (a/2pi) sin(2pi x), so min u' = -a at x = 1/2;
                          rho = b sin^2(pi (x - 1/2)), vanishing exactly there
    global41(r0, ru)      rho = r0 + sin(2pi x) with r0 > 1; u = ru sin(2pi x)/2pi
    zero-mean(a)          u = (a/2pi) sin(2pi x) (mean zero), rho = 0
    custom-fourier(...)   truncated cosine/sine series for both fields
    """
    p = _merge_family_params(family, params)
    x = grid.nodes
    if family == "constant":
        return State(Field.constant(grid, p["c"]), Field.constant(grid, p["r"]))
    if family == "blowup31":
        a = p["a"]
        if a == "auto":
            raise ConfigError(
                "blowup31 amplitude is unresolved; use Scenario.resolve() or "
                "pass a number for scenario.a"
            )
        u = (a / (2.0 * np.pi)) * np.sin(2.0 * np.pi * x)
        rho = p["b"] * np.sin(np.pi * (x - 0.5)) ** 2
        return State(Field(grid, u), Field(grid, rho))
    if family == "global41":
        u = p["ru"] * np.sin(2.0 * np.pi * x) / (2.0 * np.pi)
        rho = p["r0"] + np.sin(2.0 * np.pi * x)
        return State(Field(grid, u), Field(grid, rho))
    if family == "zero-mean":
        u = (p["a"] / (2.0 * np.pi)) * np.sin(2.0 * np.pi * x)
        return State(Field(grid, u), Field.constant(grid, 0.0))
    u = _trig_series(grid, p["u_mean"], p["u_cos"], p["u_sin"])
    rho = _trig_series(grid, p["rho_mean"], p["rho_cos"], p["rho_sin"])
    return State(Field(grid, u), Field(grid, rho))


def solve_blowup_amplitude(
    b: float,
    margin: float,
    model: ModelParams,
    n: int,
    tol: float = 1.0e-9,
) -> float:
    """Amplitude a with initial slope -a exactly margin times the sharp threshold.

    The threshold depends on the initial energy, which itself grows with a,
    so this is a fixed point: a = margin |threshold(E0(a))|.  The overshoot
    a - margin |threshold| is negative near 0 (the sqrt(E0) term dominates)
    and positive once a outruns the threshold's linear growth, so bisection
    on a bracket found by doubling converges unconditionally.
    """
    grid = PeriodicGrid(n)

    def overshoot(a: float) -> float:
        s = build_initial_data("blowup31", {"a": a, "b": b}, grid)
        th = threshold_sharp(energy_e0(s), model.gamma, model.A)
        return a - margin * abs(th)

    hi = 1.0
    for _ in range(64):
        if overshoot(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise ConfigError(
            f"blowup31 margin {margin} admits no amplitude: the threshold "
            f"outgrows the slope at every scale"
        )
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if overshoot(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Scenario:
    """One named run: initial-data family, model, integrator, and analysis options."""

    name: str
    family: str
    family_params: tuple[tuple[str, object], ...]
    model: ModelParams
    sim: SimConfig
    eps_list: tuple[float, ...] = (0.1, 1.0, 10.0)
    characteristics: bool = False
    characteristic_count: int = 64

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("scenario name must be nonempty")
        merged = _merge_family_params(self.family, dict(self.family_params))
        object.__setattr__(self, "family_params", tuple(merged.items()))
        object.__setattr__(
            self, "eps_list", tuple(float(e) for e in self.eps_list)
        )
        if any(e <= 0.0 for e in self.eps_list):
            raise ConfigError(f"eps_list entries must be positive: {self.eps_list}")
        if self.characteristic_count < 2:
            raise ConfigError(
                f"characteristic count must be at least 2, got "
                f"{self.characteristic_count}"
            )

    @property
    def params(self) -> dict:
        return dict(self.family_params)

    def resolve(self) -> "Scenario":
        """Replace any 'auto' amplitude with its solved value."""
        p = self.params
        if self.family != "blowup31" or p["a"] != "auto":
            return self
        p["a"] = solve_blowup_amplitude(p["b"], p["margin"], self.model, self.sim.n)
        return replace(self, family_params=tuple(p.items()))

    def build_state(self) -> State:
        return build_initial_data(self.family, self.params, PeriodicGrid(self.sim.n))


# ---------------------------------------------------------------------------
# flat config text

def parse_config_entries(text: str) -> dict[str, str]:
    """Split config text into a key -> raw-value map, rejecting malformed lines."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


_MODEL_KEYS = {"model.A": _to_float, "model.gamma": _to_float}
_SIM_KEYS = {
    "sim.n": _to_int,
    "sim.t_end": _to_float,
    "sim.cfl": _to_float,
    "sim.slope_dt_factor": _to_float,
    "sim.dt_min": _to_float,
    "sim.blowup_slope": _to_float,
    "sim.record_every": _to_int,
    "sim.snapshot_times": _to_float_tuple,
}


def scenario_from_entries(entries: dict[str, str]) -> Scenario:
    entries = dict(entries)

    def take(key: str, conv, default=None, required: bool = False):
        if key not in entries:
            if required:
                raise ConfigError(f"missing required key {key!r}")
            return default
        raw = entries.pop(key)
        try:
            return conv(raw)
        except ConfigError as exc:
            raise ConfigError(f"key {key!r}: {exc}") from None

    family = take("scenario.family", str, required=True)
    if family not in _FAMILY_PARAMS:
        known = ", ".join(FAMILIES)
        raise ConfigError(f"unknown family {family!r} (known: {known})")
    name = take("scenario.name", str, default=family)

    fam_params: dict[str, object] = {}
    for key in [k for k in entries if k.startswith("scenario.")]:
        pname = key[len("scenario."):]
        if pname not in _FAMILY_PARAMS[family]:
            raise ConfigError(f"unknown key {key!r} for family {family!r}")
        conv = _FAMILY_PARAMS[family][pname][0]
        raw = entries.pop(key)
        try:
            fam_params[pname] = conv(raw)
        except ConfigError as exc:
            raise ConfigError(f"key {key!r}: {exc}") from None

    model_kwargs = {}
    for key, conv in _MODEL_KEYS.items():
        if key in entries:
            model_kwargs[key.split(".", 1)[1]] = take(key, conv)
    sim_kwargs = {}
    for key, conv in _SIM_KEYS.items():
        if key in entries:
            sim_kwargs[key.split(".", 1)[1]] = take(key, conv)
    if "n" not in sim_kwargs:
        raise ConfigError("missing required key 'sim.n'")
    if "t_end" not in sim_kwargs:
        raise ConfigError("missing required key 'sim.t_end'")

    eps_list = take("criteria.eps_list", _to_float_tuple, default=(0.1, 1.0, 10.0))
    chars_on = take("characteristics.enabled", _to_bool, default=False)
    char_count = take("characteristics.count", _to_int, default=64)

    if entries:
        stray = sorted(entries)[0]
        raise ConfigError(f"unknown key {stray!r}")

    try:
        model = ModelParams(**model_kwargs)
        sim = SimConfig(**sim_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return Scenario(
        name=name,
        family=family,
        family_params=tuple(fam_params.items()),
        model=model,
        sim=sim,
        eps_list=eps_list,
        characteristics=chars_on,
        characteristic_count=char_count,
    )


def parse_config(text: str) -> Scenario:
    return scenario_from_entries(parse_config_entries(text))


def resolved_config(sc: Scenario) -> dict:
    """Full configuration echo for the run report, resolved and typed."""
    fam = {}
    for key, value in sc.family_params:
        fam[key] = list(value) if isinstance(value, tuple) else value
    return {
        "scenario": {"name": sc.name, "family": sc.family, **fam},
        "model": {"A": sc.model.A, "gamma": sc.model.gamma},
        "sim": {
            "n": sc.sim.n,
            "t_end": sc.sim.t_end,
            "cfl": sc.sim.cfl,
            "slope_dt_factor": sc.sim.slope_dt_factor,
            "dt_min": sc.sim.dt_min,
            "blowup_slope": sc.sim.blowup_slope,
            "record_every": sc.sim.record_every,
            "snapshot_times": list(sc.sim.snapshot_times),
        },
        "criteria": {"eps_list": list(sc.eps_list)},
        "characteristics": {
            "enabled": sc.characteristics,
            "count": sc.characteristic_count,
        },
    }
