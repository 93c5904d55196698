"""Experiment configuration: strict JSON parsing and pre-run validation.

Every problem is reported as a :class:`ConfigError` naming the offending
field. Validation runs before any evolution starts.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from nlscatter.errors import (
    AnnulusError,
    ConfigError,
    ExponentRangeError,
    GridTooLargeError,
    StepSizeError,
    TruncationWarning,
)
from nlscatter.evolution import EvolutionParams
from nlscatter.lattice import GridSpec, make_annulus_packet, packet_tail, TAIL_TOLERANCE
from nlscatter.potentials import LongRange, Potential, potential_from_dict, potential_for_gamma
from nlscatter.symbols import (
    Symbol,
    certify_classes,
    group_speed_range,
    infer_direction,
    symbol_from_dict,
)

SCHEMA_VERSION = 1
DEFAULT_OUT_ENV = "NLSCATTER_OUT"

DIAGNOSTICS = (
    "unitarity",
    "heisenberg",
    "cone_decay",
    "cook",
    "pairing",
    "outside_mass",
    "lemma2",
    "cauchy_gap",
    "divergence",
)
LONG_RANGE_ONLY = {"pairing", "lemma2", "divergence"}
NEEDS_POTENTIAL = {"cauchy_gap"}

TOLERANCE_DEFAULTS = {
    "unitarity": 1e-10,
    "heisenberg_rel": 1e-6,
    "cone_exponent_max": -4.0,
    "cook_exponent_abs": 0.1,
    "cauchy_slope_abs": 0.15,
    "gap_shrink_slope": -0.1,
    "witness_exponent_abs": 0.15,
    "witness_drift": 0.05,
    "log_bound_factor": 0.5,
    "zero": 1e-10,
}

_TOP_KEYS = {
    "version", "name", "symbol", "grid", "packet", "potential", "times", "time_pairs",
    "dt", "diagnostics", "direction", "N", "fit_window", "witness_window",
    "calibration_window", "tolerances", "output_dir", "seed",
}
_SWEEP_KEYS = {"version", "name", "base", "gammas", "strength", "output_dir"}


def _require(d, key, where):
    if key not in d:
        raise ConfigError(f"{where}{key}", "missing required field")
    return d[key]


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(where.rstrip(".") or "<root>", "expected an object")
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError(f"{where}{unknown[0]}", "unknown key")


def _number(v, where, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(where, f"expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(where, "must be positive")
    return float(v)


def parse_times(spec, where, dt=None) -> np.ndarray:
    """A list of times, or ``{"start", "stop", "num", "spacing"}``.

    Times are rounded to multiples of ``dt`` when given, then deduplicated.
    """
    if isinstance(spec, dict):
        _check_keys(spec, {"start", "stop", "num", "spacing"}, where + ".")
        a = _number(_require(spec, "start", where + "."), where + ".start", positive=True)
        b = _number(_require(spec, "stop", where + "."), where + ".stop", positive=True)
        n = _require(spec, "num", where + ".")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ConfigError(where + ".num", "must be a positive integer")
        spacing = spec.get("spacing", "geometric")
        if spacing == "geometric":
            t = np.geomspace(a, b, n)
        elif spacing == "linear":
            t = np.linspace(a, b, n)
        else:
            raise ConfigError(where + ".spacing", "must be 'geometric' or 'linear'")
    elif isinstance(spec, list):
        t = np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(spec)], dtype=float)
    else:
        raise ConfigError(where, "expected a list or a range object")
    if dt is not None:
        t = np.round(t / dt) * dt
        t = np.unique(t)
    if len(t) == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ConfigError(where, "times must be positive and strictly increasing")
    return t


def _window(v, where):
    if v is None:
        return None
    if not (isinstance(v, list) and len(v) == 2):
        raise ConfigError(where, "expected [t_lo, t_hi]")
    lo, hi = _number(v[0], where + "[0]"), _number(v[1], where + "[1]")
    if not lo < hi:
        raise ConfigError(where, "t_lo must be below t_hi")
    return (lo, hi)


@dataclass(frozen=True)
class PacketSpec:
    eps: float
    R: float
    center: tuple
    smoothness: float = 0.2
    profile: str = "gaussian"


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    name: str
    symbol: Symbol
    grid: GridSpec
    packet: PacketSpec
    potential: Potential | None
    times: np.ndarray
    time_pairs: tuple
    dt: float
    diagnostics: tuple
    direction: str
    N: int = 2
    fit_window: tuple | None = None
    witness_window: tuple | None = None
    calibration_window: tuple = (1.0, 5.0)
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCE_DEFAULTS))
    output_dir: str | None = None
    seed: int = 0
    raw: dict = field(default_factory=dict)

    @property
    def params(self) -> EvolutionParams:
        return EvolutionParams(self.symbol, self.potential, self.dt)

    def make_packet(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            return make_annulus_packet(self.grid, self.packet.eps, self.packet.R,
                                       list(self.packet.center), self.packet.smoothness,
                                       self.packet.profile)


def parse_experiment(raw: dict, where: str = "") -> ExperimentConfig:
    _check_keys(raw, _TOP_KEYS, where)
    version = _require(raw, "version", where)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{where}version", f"unsupported schema version {version!r}")

    try:
        symbol = symbol_from_dict(_require(raw, "symbol", where))
    except KeyError as exc:
        raise ConfigError(f"{where}symbol", str(exc).strip("'\"")) from None
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}symbol", str(exc)) from None

    g = _require(raw, "grid", where)
    _check_keys(g, {"dim", "points", "half_length"}, f"{where}grid.")
    try:
        grid = GridSpec(int(_require(g, "dim", f"{where}grid.")),
                        int(_require(g, "points", f"{where}grid.")),
                        _number(_require(g, "half_length", f"{where}grid."),
                                f"{where}grid.half_length"))
    except GridTooLargeError as exc:
        raise ConfigError(f"{where}grid.points", str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"{where}grid", str(exc)) from None

    pk = _require(raw, "packet", where)
    _check_keys(pk, {"eps", "R", "center", "smoothness", "profile"}, f"{where}packet.")
    center = _require(pk, "center", f"{where}packet.")
    if isinstance(center, (int, float)) and not isinstance(center, bool):
        center = [center]
    if not isinstance(center, list):
        raise ConfigError(f"{where}packet.center", "expected a number or a list")
    packet = PacketSpec(
        _number(_require(pk, "eps", f"{where}packet."), f"{where}packet.eps", positive=True),
        _number(_require(pk, "R", f"{where}packet."), f"{where}packet.R", positive=True),
        tuple(_number(c, f"{where}packet.center") for c in center),
        _number(pk.get("smoothness", 0.2), f"{where}packet.smoothness", positive=True),
        pk.get("profile", "gaussian"),
    )
    if packet.profile not in ("gaussian", "window"):
        raise ConfigError(f"{where}packet.profile", "must be 'gaussian' or 'window'")

    pot_raw = raw.get("potential")
    potential = None
    if pot_raw is not None:
        if not isinstance(pot_raw, dict):
            raise ConfigError(f"{where}potential", "expected an object or null")
        fam = pot_raw.get("family")
        try:
            potential = potential_from_dict(pot_raw)
        except ExponentRangeError as exc:
            raise ConfigError(f"{where}potential.gamma", str(exc)) from None
        except KeyError as exc:
            raise ConfigError(f"{where}potential", str(exc).strip("'\"")) from None
        except TypeError as exc:
            raise ConfigError(f"{where}potential",
                              f"{exc}; only real-valued potentials are supported") from None
        except ValueError as exc:
            raise ConfigError(f"{where}potential.{'C' if fam == 'short_range' else 'kappa'}",
                              str(exc)) from None

    dt = _number(raw.get("dt", 0.05), f"{where}dt", positive=True)
    times = parse_times(_require(raw, "times", where), f"{where}times", dt)
    pairs_raw = raw.get("time_pairs")
    if pairs_raw is None:
        pairs = ()
    elif isinstance(pairs_raw, dict) and set(pairs_raw) == {"doubling"}:
        base = parse_times(pairs_raw["doubling"], f"{where}time_pairs.doubling", dt)
        pairs = tuple((float(t), float(2 * t)) for t in base)
    elif isinstance(pairs_raw, list):
        pairs = []
        for i, pr in enumerate(pairs_raw):
            if not (isinstance(pr, list) and len(pr) == 2):
                raise ConfigError(f"{where}time_pairs[{i}]", "expected [t1, t2]")
            a, b = (_number(v, f"{where}time_pairs[{i}]") for v in pr)
            if not 0 <= a < b:
                raise ConfigError(f"{where}time_pairs[{i}]", "need 0 <= t1 < t2")
            pairs.append((a, b))
        pairs = tuple(pairs)
    else:
        raise ConfigError(f"{where}time_pairs", "expected a list of pairs or {\"doubling\": times}")

    diags = raw.get("diagnostics", ["unitarity"])
    if not isinstance(diags, list) or not diags:
        raise ConfigError(f"{where}diagnostics", "expected a non-empty list")
    for i, d in enumerate(diags):
        if d not in DIAGNOSTICS:
            raise ConfigError(f"{where}diagnostics[{i}]", f"unknown diagnostic {d!r}")

    N = raw.get("N", 2)
    if not isinstance(N, int) or isinstance(N, bool) or N < 0:
        raise ConfigError(f"{where}N", "must be a non-negative integer")

    tol_raw = raw.get("tolerances", {})
    _check_keys(tol_raw, set(TOLERANCE_DEFAULTS), f"{where}tolerances.")
    tol = dict(TOLERANCE_DEFAULTS)
    for k, v in tol_raw.items():
        tol[k] = _number(v, f"{where}tolerances.{k}")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"{where}seed", "must be an integer")
    out = raw.get("output_dir")
    if out is not None and not isinstance(out, str):
        raise ConfigError(f"{where}output_dir", "must be a string")
    name = raw.get("name", "experiment")
    if not isinstance(name, str) or not name or "/" in name:
        raise ConfigError(f"{where}name", "must be a non-empty name without '/'")

    direction = raw.get("direction")
    cfg = ExperimentConfig(
        name=name, symbol=symbol, grid=grid, packet=packet, potential=potential,
        times=times, time_pairs=pairs, dt=dt, diagnostics=tuple(diags),
        direction=direction or "", N=N,
        fit_window=_window(raw.get("fit_window"), f"{where}fit_window"),
        witness_window=_window(raw.get("witness_window"), f"{where}witness_window"),
        calibration_window=_window(raw.get("calibration_window"), f"{where}calibration_window")
        or (1.0, 5.0),
        tolerances=tol, output_dir=out, seed=seed, raw=raw,
    )
    return validate(cfg, where)


def validate(cfg: ExperimentConfig, where: str = "") -> ExperimentConfig:
    """Check every modelling assumption a run relies on; returns ``cfg`` with
    the envelope direction filled in."""
    p = cfg.packet
    if len(p.center) != cfg.grid.dim:
        raise ConfigError(f"{where}packet.center", f"needs {cfg.grid.dim} components")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            phi = make_annulus_packet(cfg.grid, p.eps, p.R, list(p.center), p.smoothness,
                                      p.profile)
    except AnnulusError as exc:
        raise ConfigError(f"{where}packet", str(exc)) from None
    tail = packet_tail(phi)
    if tail > TAIL_TOLERANCE:
        raise ConfigError(f"{where}grid.half_length",
                          f"packet tail {tail:.2e} at |x| = L/2 exceeds {TAIL_TOLERANCE:g}")

    # symbol: non-negative and non-decreasing with a monotone envelope on the band
    values = certify_classes(cfg.symbol, (p.eps**2, p.R**2), n_samples=256, k_max=1)
    if not values.in_tilde_B:
        raise ConfigError(f"{where}symbol",
                          f"symbol must be non-negative and non-decreasing ({values.first_violation})")
    report = certify_classes(cfg.symbol, (p.eps, p.R), n_samples=256, k_max=1)
    direction = cfg.direction
    if direction:
        if direction not in ("increasing", "decreasing"):
            raise ConfigError(f"{where}direction", "must be 'increasing' or 'decreasing'")
        ok = report.envelope_increasing if direction == "increasing" else report.envelope_decreasing
        if not ok:
            raise ConfigError(f"{where}direction",
                              f"envelope Psi'(s^2)s is {report.psi_prime_sigma_monotone} "
                              f"on [{p.eps}, {p.R}], not {direction}")
    else:
        direction = infer_direction(report)
        if direction == "inf" and set(cfg.diagnostics) & {"cone_decay", "pairing",
                                                              "outside_mass", "lemma2", "heisenberg"}:
            raise ConfigError(f"{where}symbol",
                              "envelope Psi'(s^2)s is not monotone on the packet band")

    pot = cfg.potential
    for i, d in enumerate(cfg.diagnostics):
        if d in LONG_RANGE_ONLY and not isinstance(pot, LongRange):
            raise ConfigError(f"{where}diagnostics[{i}]", f"{d} needs a long_range potential")
        if d in NEEDS_POTENTIAL and pot is None:
            raise ConfigError(f"{where}diagnostics[{i}]", f"{d} needs a potential")
        if d == "cauchy_gap" and not cfg.time_pairs:
            raise ConfigError(f"{where}time_pairs", "cauchy_gap needs time pairs")
    if "lemma2" in cfg.diagnostics and cfg.N < 2:
        raise ConfigError(f"{where}N", "lemma2 needs N >= 2")
    if "pairing" in cfg.diagnostics and cfg.times[0] < 1:
        raise ConfigError(f"{where}times", "pairing needs t >= 1")

    try:
        EvolutionParams(cfg.symbol, pot, cfg.dt)
    except StepSizeError as exc:
        raise ConfigError(f"{where}dt", str(exc)) from None

    # cone-fits-box: fastest component must stay inside the central half
    _, vmax = group_speed_range(cfg.symbol, p.eps, p.R)
    t_max = float(cfg.times[-1])
    if cfg.time_pairs:
        t_max = max(t_max, max(b for _, b in cfg.time_pairs))
    if vmax * t_max >= cfg.grid.half_length / 2:
        raise ConfigError(f"{where}grid.half_length",
                          f"fastest group speed {vmax:.4g} times t_max={t_max:g} "
                          f"reaches half the box (L/2={cfg.grid.half_length / 2:g})")
    if direction != cfg.direction:
        object.__setattr__(cfg, "direction", direction)
    return cfg


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True, eq=False)
class SweepConfig:
    name: str
    base: dict
    gammas: tuple
    strength: float
    output_dir: str | None = None

    def point(self, gamma: float) -> ExperimentConfig:
        raw = dict(self.base)
        pot = potential_for_gamma(gamma, self.strength)
        raw["potential"] = pot.to_dict()
        raw["name"] = f"gamma_{gamma:g}"
        return parse_experiment(raw, f"base[gamma={gamma:g}].")


def parse_sweep(raw: dict) -> SweepConfig:
    _check_keys(raw, _SWEEP_KEYS, "")
    if _require(raw, "version", "") != SCHEMA_VERSION:
        raise ConfigError("version", f"unsupported schema version {raw['version']!r}")
    base = _require(raw, "base", "")
    if not isinstance(base, dict):
        raise ConfigError("base", "expected an object")
    if "potential" in base:
        raise ConfigError("base.potential", "sweeps set the potential from 'gammas'")
    gammas = _require(raw, "gammas", "")
    if not isinstance(gammas, list) or not gammas:
        raise ConfigError("gammas", "expected a non-empty list")
    gs = tuple(_number(g, f"gammas[{i}]", positive=True) for i, g in enumerate(gammas))
    strength = _number(raw.get("strength", 0.05), "strength")
    if strength == 0:
        raise ConfigError("strength", "must be non-zero")
    if not base.get("time_pairs"):
        raise ConfigError("base.time_pairs", "sweeps need time pairs for the Cauchy gaps")
    out = raw.get("output_dir")
    sweep = SweepConfig(raw.get("name", "sweep"), base, gs, strength, out)
    for g in gs:  # validate every point up front
        sweep.point(g)
    return sweep


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError("--config", f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None


def default_output_root() -> str:
    return os.environ.get(DEFAULT_OUT_ENV, "out")
