"""Time-series diagnostics for wave-operator existence and non-existence.

Every series is sampled at caller-supplied times and carries an optional
power-law fit. ``Omega(t) phi`` stands for ``exp(itH) exp(-itH_0) phi``.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from nlscatter import kernels
from nlscatter.errors import (
    BoxBoundaryWarning,
    CalibrationError,
    ConeExceedsBoxError,
    FamilyError,
    InsufficientSamplesError,
)
from nlscatter.evolution import EvolutionParams, StrangPropagator, free_evolve, full_evolve
from nlscatter.lattice import (
    WavePacket,
    inner_product,
    position_moment_norm,
    position_weighted_norm,
    radial_mass,
)
from nlscatter.potentials import LongRange, Potential, sample_potential
from nlscatter.symbols import Symbol, cone_threshold, group_speed_envelope

QUANTITIES = (
    "cook_integrand",
    "cone_mass_inside",
    "cauchy_gap",
    "pairing",
    "heisenberg_norm",
    "divergence_integral",
)
MIN_FIT_SAMPLES = 8
MIN_R2 = 0.9
#: fits ignore times below this (pre-asymptotic regime)
DEFAULT_T_MIN = 10.0
#: fraction of trailing samples excluded from default fit windows
TRAILING_FRACTION = 0.1
#: mass tolerated at |x| >= L/2 before a boundary warning
BOX_MASS_TOL = 1e-10


# ---------------------------------------------------------------------------
# series and fits


@dataclass(frozen=True)
class PowerFit:
    """``value ~ prefactor * t**exponent`` over ``window``.

    ``model`` is ``"power"`` for a direct log-log fit and ``"increment"`` when
    the exponent comes from the increments of a growing series. For ``"log"``
    fits ``exponent`` is the slope ``b`` of ``value ~ a + b log t`` and
    ``prefactor`` the intercept ``a``.
    """

    exponent: float
    prefactor: float
    r2: float
    window: tuple
    model: str = "power"

    def to_line(self) -> str:
        return (f"#fit,model={self.model},exponent={self.exponent:.17g},"
                f"prefactor={self.prefactor:.17g},r2={self.r2:.17g},"
                f"t_lo={self.window[0]:.17g},t_hi={self.window[1]:.17g}")

    @classmethod
    def from_line(cls, line: str) -> "PowerFit":
        parts = dict(p.split("=", 1) for p in line.strip().split(",")[1:])
        return cls(float(parts["exponent"]), float(parts["prefactor"]), float(parts["r2"]),
                   (float(parts["t_lo"]), float(parts["t_hi"])), parts["model"])


@dataclass(frozen=True, eq=False)
class TimeSeries:
    quantity: str
    times: np.ndarray
    values: np.ndarray
    fit: PowerFit | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("series values must be finite")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.times)

    def with_fit(self, fit: PowerFit | None) -> "TimeSeries":
        return replace(self, fit=fit)

    @property
    def params_hash(self) -> str:
        return params_hash(self.params)


def params_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def default_window(times) -> tuple:
    """``[max(t0, 10), t_k]`` with the last 10% of samples dropped."""
    t = np.asarray(times, dtype=float)
    keep = max(1, int(math.ceil(len(t) * (1.0 - TRAILING_FRACTION))))
    return (max(float(t[0]), DEFAULT_T_MIN), float(t[keep - 1]))


def _in_window(times, window):
    lo, hi = window
    rel = 1e-12 * max(abs(lo), abs(hi), 1.0)
    return (times >= lo - rel) & (times <= hi + rel)


def _linfit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 1e-28 * max(1.0, float(y @ y)):
        r2 = 1.0 if ss_res <= 1e-24 * max(1.0, float(y @ y)) else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(icpt), float(r2)


def fit_exponent(series: TimeSeries, window=None):
    """Least-squares line through ``(log t, log value)`` inside ``window``.

    Returns a :class:`PowerFit`, or ``None`` when ``r^2 < 0.9``. Raises
    :class:`InsufficientSamplesError` unless at least 8 samples lie in the
    window and all of them are positive.
    """
    window = default_window(series.times) if window is None else tuple(map(float, window))
    m = _in_window(series.times, window)
    t, v = series.times[m], series.values[m]
    if len(t) < MIN_FIT_SAMPLES or np.any(v <= 0):
        raise InsufficientSamplesError(
            f"need {MIN_FIT_SAMPLES} positive samples in window {window}, "
            f"have {int(np.sum(v > 0))} of {len(t)}")
    slope, icpt, r2 = _linfit(np.log(t), np.log(v))
    if r2 < MIN_R2:
        return None
    return PowerFit(slope, math.exp(icpt), r2, window, "power")


def fit_log(series: TimeSeries, window=None):
    """Least-squares ``value ~ a + b log t``; returns a ``"log"`` :class:`PowerFit`."""
    window = default_window(series.times) if window is None else tuple(map(float, window))
    m = _in_window(series.times, window)
    t, v = series.times[m], series.values[m]
    if len(t) < MIN_FIT_SAMPLES:
        raise InsufficientSamplesError(f"need {MIN_FIT_SAMPLES} samples in window {window}")
    slope, icpt, r2 = _linfit(np.log(t), v)
    if r2 < MIN_R2:
        return None
    return PowerFit(slope, icpt, r2, window, "log")


def fit_growth_exponent(series: TimeSeries, window=None):
    """Exponent ``a`` of ``value ~ c t^a`` estimated from increments.

    The difference quotients are fitted as a power of ``t`` at geometric
    midpoints and ``a = slope + 1``. Unlike a direct log-log fit this ignores
    any additive offset of the series.
    """
    window = default_window(series.times) if window is None else tuple(map(float, window))
    m = _in_window(series.times, window)
    t, v = series.times[m], series.values[m]
    dv = np.diff(v) / np.diff(t)
    tm = np.sqrt(t[1:] * t[:-1])
    if len(dv) < MIN_FIT_SAMPLES or np.any(dv <= 0):
        raise InsufficientSamplesError(
            f"need {MIN_FIT_SAMPLES} positive increments in window {window}")
    slope, icpt, r2 = _linfit(np.log(tm), np.log(dv))
    if r2 < MIN_R2:
        return None
    a = slope + 1.0
    pref = math.exp(icpt) / a if a != 0 else math.nan
    return PowerFit(a, pref, r2, window, "increment")


def trend_slope(series: TimeSeries, window=None) -> float:
    """Log-log slope over ``window`` without the ``r^2`` gate (for trend verdicts)."""
    window = default_window(series.times) if window is None else tuple(map(float, window))
    m = _in_window(series.times, window)
    t, v = series.times[m], series.values[m]
    if len(t) < 2 or np.any(v <= 0):
        raise InsufficientSamplesError("need two positive samples for a trend")
    return _linfit(np.log(t), np.log(v))[0]


def try_fit(series: TimeSeries, window=None, model: str = "power") -> TimeSeries:
    """Attach a fit when one is possible; leave ``fit`` empty otherwise."""
    fn = {"power": fit_exponent, "log": fit_log, "increment": fit_growth_exponent}[model]
    try:
        return series.with_fit(fn(series, window))
    except InsufficientSamplesError:
        return series.with_fit(None)


def refit(series: TimeSeries) -> TimeSeries:
    """Repeat the stored fit (same model and window) on the stored samples."""
    if series.fit is None:
        return series
    return try_fit(series, series.fit.window, series.fit.model)


def tail_converges(fit: PowerFit, margin: float = 0.0) -> bool:
    """Integral test for ``t^exponent`` on ``[1, inf)``.

    With ``margin > 0`` the tail counts as convergent only when
    ``exponent + margin < -1``, i.e. for every exponent the fit cannot exclude.
    """
    return fit.exponent + margin < -1.0


# ---------------------------------------------------------------------------
# CSV


def write_series_csv(series: TimeSeries, path) -> None:
    """``quantity,params_hash`` header, ``t,value`` rows and an optional ``#fit`` line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("quantity,params_hash\n")
        fh.write(f"{series.quantity},{series.params_hash}\n")
        fh.write("t,value\n")
        for t, v in zip(series.times, series.values):
            fh.write(f"{t:.17g},{v:.17g}\n")
        if series.fit is not None:
            fh.write(series.fit.to_line() + "\n")


def read_series_csv(path):
    """Return ``(series, params_hash)``; the series keeps any stored fit."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if len(lines) < 3 or lines[0] != "quantity,params_hash" or lines[2] != "t,value":
        raise ValueError(f"{path}: not a time-series CSV")
    quantity, phash = lines[1].split(",")
    ts, vs, fit = [], [], None
    for ln in lines[3:]:
        if ln.startswith("#fit"):
            fit = PowerFit.from_line(ln)
        elif ln and not ln.startswith("#"):
            a, b = ln.split(",")
            ts.append(float(a))
            vs.append(float(b))
    return TimeSeries(quantity, ts, vs, fit), phash


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class BoundConstants:
    """Explicit constants of the pairing lower bound and the long-range upper bound.

    ``c4`` has no closed form and stays ``None`` until calibrated.
    """

    Gamma: float
    direction: str
    eps: float
    R: float
    dim: int
    threshold: float  # direction-consistent cone speed
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    c4: float | None = None
    N: int = 2
    C: float | None = None
    kappa: float | None = None
    gamma_S: float | None = None
    gamma_L: float | None = None

    @classmethod
    def from_symbol(cls, symbol: Symbol, eps: float, R: float, direction: str, dim: int = 1,
                    potential: Potential | None = None, N: int = 2) -> "BoundConstants":
        if direction == "increasing":
            edge = float(group_speed_envelope(symbol, R))
        elif direction == "decreasing":
            edge = float(group_speed_envelope(symbol, eps))
        else:
            raise ValueError("direction must be 'increasing' or 'decreasing'")
        Gamma = max(4.0 * math.sqrt(dim) * edge, 1.0)
        threshold = cone_threshold(symbol, eps, R, direction)
        kw = {}
        if isinstance(potential, LongRange):
            g = potential.gamma
            kw = dict(
                kappa=potential.kappa, gamma_L=g,
                c1=0.5 * (2.0 * Gamma) ** (-g),
                c2=2.0 * Gamma ** (-2.0 - g),
                c3=abs(potential.kappa) * threshold ** (-g),
            )
        elif potential is not None:
            kw = dict(C=potential.strength, gamma_S=potential.gamma)
        return cls(Gamma, direction, float(eps), float(R), int(dim), float(threshold), N=N, **kw)

    def to_text(self, prefix: str = "constants") -> str:
        out = []
        for k, v in self.__dict__.items():
            if v is not None:
                out.append(f"{prefix}.{k} = {v!r}")
        return "\n".join(out)


# ---------------------------------------------------------------------------
# helpers


def _check_times(times, positive=True):
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or len(t) == 0:
        raise ValueError("need a non-empty list of times")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    if positive and t[0] <= 0:
        raise ValueError("times must be positive")
    return t


def _box_guard(phi: WavePacket, label: str):
    _, outside = radial_mass(phi, phi.grid.half_length / 2)
    if outside > BOX_MASS_TOL * phi.norm() ** 2:
        warnings.warn(f"{label}: mass {outside:.2e} beyond half the box; "
                      "results may feel the periodic boundary",
                      BoxBoundaryWarning, stacklevel=3)


def _require_long_range(potential):
    if not isinstance(potential, LongRange):
        raise FamilyError("this diagnostic needs a long_range potential")


def omega(phi: WavePacket, params: EvolutionParams, t: float) -> WavePacket:
    """``Omega(t) phi`` by the direct route (free forward, interacting backward)."""
    return full_evolve(free_evolve(phi, params.symbol, t), params, -t)


def _free_series(phi, symbol, times):
    for t in times:
        yield float(t), free_evolve(phi, symbol, float(t))


# ---------------------------------------------------------------------------
# series


def cook_integrand_series(phi: WavePacket, symbol: Symbol, potential: Potential | None,
                          times, window=None) -> TimeSeries:
    """``||V exp(-itH_0) phi||`` at each time, with a power fit when possible."""
    t = _check_times(times)
    params = {"symbol": symbol.to_dict(), "potential": _pot_dict(potential)}
    if potential is None:
        return TimeSeries("cook_integrand", t, np.zeros_like(t), None, params)
    V = sample_potential(potential, phi.grid)
    w = V * V
    vals = [math.sqrt(kernels.weighted_mass(p.values.ravel(), w) * p.grid.cell)
            for _, p in _free_series(phi, symbol, t)]
    return try_fit(TimeSeries("cook_integrand", t, vals, None, params), window)


def pairing_series(phi: WavePacket, symbol: Symbol, potential: Potential, times,
                   window=None) -> TimeSeries:
    """``(1/kappa) (V phi_t, phi_t)`` with ``phi_t`` the free evolution."""
    _require_long_range(potential)
    t = _check_times(times)
    if t[0] < 1:
        raise ValueError("pairing is only defined for t >= 1")
    w = sample_potential(potential, phi.grid) / potential.kappa
    vals = [kernels.weighted_mass(p.values.ravel(), w) * p.grid.cell
            for _, p in _free_series(phi, symbol, t)]
    params = {"symbol": symbol.to_dict(), "potential": _pot_dict(potential)}
    return try_fit(TimeSeries("pairing", t, vals, None, params), window)


def heisenberg_norm_series(phi: WavePacket, symbol: Symbol, times) -> TimeSeries:
    """``||x exp(-itH_0) phi||`` at each time."""
    t = _check_times(times, positive=False)
    vals = [position_moment_norm(p) for _, p in _free_series(phi, symbol, t)]
    return TimeSeries("heisenberg_norm", t, vals, None, {"symbol": symbol.to_dict()})


def cauchy_gap_series(phi: WavePacket, params: EvolutionParams, time_pairs,
                      window=None) -> TimeSeries:
    """``||Omega(t2) phi - Omega(t1) phi||`` for each ``(t1, t2)``, indexed by ``t1``.

    Uses ``||exp(i(t2-t1)H) phi_{t2} - phi_{t1}||``, equal by unitarity.
    """
    pairs = [(float(a), float(b)) for a, b in time_pairs]
    if any(not (0 <= a < b) for a, b in pairs):
        raise ValueError("each pair needs 0 <= t1 < t2")
    t1s = _check_times([a for a, _ in pairs], positive=False)
    prop = StrangPropagator(phi.grid, params)
    kin_sym = params.symbol
    vals = []
    for a, b in pairs:
        pb = free_evolve(phi, kin_sym, b)
        pa = free_evolve(phi, kin_sym, a)
        back = prop.run(pb.values, -(b - a))
        vals.append(float(np.sqrt(np.sum(np.abs(back - pa.values) ** 2) * phi.grid.cell)))
    _box_guard(free_evolve(phi, kin_sym, max(b for _, b in pairs)), "cauchy_gap")
    meta = {"symbol": kin_sym.to_dict(), "potential": _pot_dict(params.potential),
            "dt": params.dt, "pairs": pairs}
    return try_fit(TimeSeries("cauchy_gap", t1s, vals, None, meta), window)


def divergence_witness(phi: WavePacket, params: EvolutionParams, t_grid,
                       reference_time: float | None = None, window=None,
                       model: str | None = None) -> TimeSeries:
    """``|(Omega(t) phi - Omega(t_1) phi, Omega(T) phi)|`` for ``t`` in ``t_grid``.

    ``(Omega(t) phi, chi) = (phi_t, exp(-itH) chi)``, so ``chi = Omega(T) phi``
    is computed once and then evolved forward alongside the free packet.
    ``model`` defaults to a log fit at ``gamma = 1`` and an increment-based
    growth fit otherwise.
    """
    t = _check_times(t_grid, positive=False)
    T = float(t[-1]) if reference_time is None else float(reference_time)
    if abs(T - t[-1]) > 1e-12 * max(1.0, T):
        raise ValueError("reference time must equal max(t_grid)")
    prop = StrangPropagator(phi.grid, params)
    phi_T = free_evolve(phi, params.symbol, T)
    _box_guard(phi_T, "divergence_witness")
    chi = prop.run(phi_T.values, -T)
    cell = phi.grid.cell
    overlaps = []
    t_prev = 0.0
    for tk in t:
        chi = prop.run(chi, tk - t_prev)
        t_prev = tk
        pt = free_evolve(phi, params.symbol, tk)
        overlaps.append(np.vdot(pt.values, chi) * cell)
    overlaps = np.array(overlaps)
    vals = np.abs(overlaps - overlaps[0])
    pot = params.potential
    if model is None:
        model = "log" if (pot is not None and pot.gamma == 1.0) else "increment"
    meta = {"symbol": params.symbol.to_dict(), "potential": _pot_dict(pot),
            "dt": params.dt, "T": T}
    s = TimeSeries("divergence_integral", t, vals, None, meta)
    return try_fit(s, window, model) if pot is not None else s


def divergence_witness_direct(phi: WavePacket, params: EvolutionParams, t_grid) -> np.ndarray:
    """Same quantity via independent ``omega`` calls (slow; for cross-checks)."""
    t = _check_times(t_grid, positive=False)
    chi = omega(phi, params, float(t[-1]))
    first = inner_product(omega(phi, params, float(t[0])), chi)
    return np.array([abs(inner_product(omega(phi, params, float(tk)), chi) - first) for tk in t])


def propagation_estimate_series(phi: WavePacket, symbol: Symbol, direction: str,
                                eps: float, R: float, times, threshold: float | None = None,
                                window=None) -> TimeSeries:
    """Square root of the free packet's mass inside ``|x| <= threshold * t``.

    ``threshold`` defaults to the cone speed for ``direction``
    (``"increasing"``, ``"decreasing"`` or ``"inf"``).
    """
    t = _check_times(times)
    speed = cone_threshold(symbol, eps, R, direction) if threshold is None else float(threshold)
    if speed * t[-1] >= phi.grid.half_length / 2:
        raise ConeExceedsBoxError(
            f"cone radius {speed * t[-1]:.6g} reaches half the box (L={phi.grid.half_length})")
    vals = [math.sqrt(radial_mass(p, speed * tk)[0]) for tk, p in _free_series(phi, symbol, t)]
    meta = {"symbol": symbol.to_dict(), "direction": direction, "eps": eps, "R": R,
            "threshold": speed}
    return try_fit(TimeSeries("cone_mass_inside", t, vals, None, meta), window)


# ---------------------------------------------------------------------------
# bound checks


@dataclass(frozen=True)
class BoundCheck:
    ok: bool
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    worst_margin: float  # min over t of (rhs - lhs) for upper bounds, (lhs - rhs) for lower
    worst_time: float

    def __bool__(self):
        return self.ok


def _check(times, lhs, rhs, lower: bool):
    lhs, rhs = np.asarray(lhs, float), np.asarray(rhs, float)
    margin = lhs - rhs if lower else rhs - lhs
    k = int(np.argmin(margin))
    return BoundCheck(bool(np.all(margin >= 0)), np.asarray(times, float), lhs, rhs,
                      float(margin[k]), float(times[k]))


def pairing_lower_check(phi: WavePacket, symbol: Symbol, potential: Potential, times,
                       consts: BoundConstants) -> BoundCheck:
    """``pairing(t) >= c1 t^-g ||phi||^2 - c2 t^(-2-g) ||x phi||^2`` at each ``t >= 1``."""
    s = pairing_series(phi, symbol, potential, times)
    g = potential.gamma
    n2 = phi.norm() ** 2
    x2 = position_moment_norm(phi) ** 2
    t = s.times
    rhs = consts.c1 * t ** (-g) * n2 - consts.c2 * t ** (-2.0 - g) * x2
    return _check(t, s.values, rhs, lower=True)


def outside_mass_check(phi: WavePacket, symbol: Symbol, times, consts: BoundConstants) -> BoundCheck:
    """Mass at ``|x| > Gamma t`` against ``2 ||x phi||^2 / (Gamma t)^2 + ||phi||^2 / 2``."""
    t = _check_times(times)
    G = consts.Gamma
    if G * t[-1] >= phi.grid.half_length:
        raise ConeExceedsBoxError(f"radius Gamma*t = {G * t[-1]:.6g} leaves the box")
    n2 = phi.norm() ** 2
    x2 = position_moment_norm(phi) ** 2
    lhs = [radial_mass(p, G * tk)[1] for tk, p in _free_series(phi, symbol, t)]
    rhs = 2.0 * x2 / (G * G * t * t) + 0.5 * n2
    return _check(t, lhs, rhs, lower=False)


def quadratic_bound_check(phi: WavePacket, symbol: Symbol, times, consts: BoundConstants) -> BoundCheck:
    """``||x phi_t||^2 <= 2||x phi||^2 + 8 n t^2 s^2 ||phi||^2`` with the band-edge speed ``s``."""
    t = _check_times(times, positive=False)
    if consts.direction == "increasing":
        s = float(group_speed_envelope(symbol, consts.R))
    else:
        s = float(group_speed_envelope(symbol, consts.eps))
    n2 = phi.norm() ** 2
    x2 = position_moment_norm(phi) ** 2
    lhs = [position_moment_norm(p) ** 2 for _, p in _free_series(phi, symbol, t)]
    rhs = 2.0 * x2 + 8.0 * consts.dim * t * t * s * s * n2
    return _check(t, lhs, rhs, lower=False)


@dataclass(frozen=True)
class Lemma2Result:
    check: BoundCheck
    c3: float
    c4: float
    calibration_window: tuple

    @property
    def ok(self):
        return self.check.ok


def lemma2_upper_check(phi: WavePacket, symbol: Symbol, potential: Potential, times,
                       N: int, consts: BoundConstants, c3: float | None = None,
                       calibration_window=(1.0, 5.0), c4: float | None = None) -> Lemma2Result:
    """``||V phi_t|| <= c3 t^-g ||phi|| + c4 t^-N ||<x>^N phi||`` at each sampled ``t``.

    ``c4`` is the smallest value that satisfies the inequality on the
    calibration window (unless given). ``c3`` overrides the explicit constant,
    e.g. for falsification runs.
    """
    _require_long_range(potential)
    if N < 2:
        raise ValueError("N must be at least 2")
    c3 = consts.c3 if c3 is None else float(c3)
    s = cook_integrand_series(phi, symbol, potential, times)
    t, lhs = s.times, s.values
    g = potential.gamma
    norm = phi.norm()
    try:
        wN = position_weighted_norm(phi, N)
    except OverflowError as exc:
        raise CalibrationError(f"<x>^{N} phi is not representable") from exc
    if c4 is None:
        m = _in_window(t, calibration_window)
        if not np.any(m):
            raise CalibrationError(f"no samples in calibration window {calibration_window}")
        if not (wN > 0 and math.isfinite(wN)):
            raise CalibrationError("weighted norm vanished; c4 cannot be calibrated")
        need = (lhs[m] - c3 * t[m] ** (-g) * norm) / (t[m] ** (-float(N)) * wN)
        c4 = max(0.0, float(np.max(need)))
        if not math.isfinite(c4):
            raise CalibrationError("calibrated c4 is not finite")
    rhs = c3 * t ** (-g) * norm + c4 * t ** (-float(N)) * wN
    return Lemma2Result(_check(t, lhs, rhs, lower=False), c3, c4,
                        tuple(map(float, calibration_window)))


def log_lower_bound_check(series: TimeSeries, kappa: float, c1: float, norm2: float,
                          window, factor: float = 0.5) -> BoundCheck:
    """``value(t) - value(t_1) >= factor |kappa| c1 ||phi||^2 log(t / t_1)`` on ``window``."""
    m = _in_window(series.times, window)
    t = series.times[m]
    v = series.values[m]
    t1 = series.times[0]
    lhs = v - series.values[0]
    rhs = factor * abs(kappa) * c1 * norm2 * np.log(t / t1)
    return _check(t, lhs, rhs, lower=True)


def drift(series: TimeSeries, window) -> float:
    """``sup |value - value(t_lo)|`` over ``window``."""
    m = _in_window(series.times, window)
    v = series.values[m]
    return float(np.max(np.abs(v - v[0])))


def _pot_dict(p):
    return None if p is None else p.to_dict()
