"""Dispersion symbols Psi, their class certification and cone thresholds.

A symbol defines the kinetic energy ``Psi(|xi|^2)`` as a Fourier multiplier.
All evaluation routines accept scalars or numpy arrays of ``sigma`` values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import minimize_scalar

from nlscatter.errors import (
    DegenerateThresholdWarning,
    DomainError,
    MonotonicityError,
)

#: evaluation point used for ``lim_{sigma -> +0}`` when no exact rule is known
ZERO_LIMIT_SIGMA = 1e-12
#: absolute tolerance on finite-difference signs in Bernstein certification
BERNSTEIN_TOL = 1e-8
#: relative tolerance for pairwise envelope comparisons
ENVELOPE_RTOL = 1e-10

Monotone = Literal["increasing", "decreasing", "neither"]


class Symbol:
    """Base class. Subclasses implement ``_value`` / ``_derivative`` on arrays of sigma >= 0."""

    kind: str = ""

    def _value(self, s):
        raise NotImplementedError

    def _derivative(self, s):
        raise NotImplementedError

    def limit_at_zero(self) -> float:
        return float(self._value(np.array([ZERO_LIMIT_SIGMA]))[0])

    def limit_at_infinity(self) -> float:
        return math.inf

    def value_finite_at_zero(self) -> bool:
        return True

    def derivative_finite_at_zero(self) -> bool:
        return True

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Fractional(Symbol):
    """``Psi(sigma) = sigma**rho``."""

    rho: float
    kind = "fractional"

    def __post_init__(self):
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ValueError(f"fractional exponent must be positive, got {self.rho}")

    def _value(self, s):
        return np.power(s, self.rho)

    def _derivative(self, s):
        if self.rho == 1.0:
            return np.ones_like(s)
        with np.errstate(divide="ignore"):
            return self.rho * np.power(s, self.rho - 1.0)

    def limit_at_zero(self):
        return 0.0

    def derivative_finite_at_zero(self):
        return self.rho >= 1.0

    def to_dict(self):
        return {"kind": self.kind, "rho": self.rho}


@dataclass(frozen=True)
class Relativistic(Symbol):
    """``Psi(sigma) = sqrt(sigma + m^2) - m``."""

    mass: float = 0.0
    kind = "relativistic"

    def __post_init__(self):
        if not (self.mass >= 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be non-negative, got {self.mass}")

    def _value(self, s):
        # cancellation-free form of sqrt(s + m^2) - m
        root = np.sqrt(s + self.mass**2)
        with np.errstate(invalid="ignore"):
            out = s / (root + self.mass)
        return np.where(s == 0, 0.0, out)

    def _derivative(self, s):
        with np.errstate(divide="ignore"):
            return 0.5 / np.sqrt(s + self.mass**2)

    def limit_at_zero(self):
        return 0.0

    def derivative_finite_at_zero(self):
        return self.mass > 0

    def to_dict(self):
        return {"kind": self.kind, "m": self.mass}


@dataclass(frozen=True)
class Logarithmic(Symbol):
    """``Psi(sigma) = log(1 + sigma)``."""

    kind = "logarithmic"

    def _value(self, s):
        return np.log1p(s)

    def _derivative(self, s):
        return 1.0 / (1.0 + s)

    def limit_at_zero(self):
        return 0.0

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class FlatBand(Symbol):
    """C^1 symbol that is constant (= ``level``) on ``[sigma_lo, sigma_hi]``.

    Below the band it rises as ``level * u * (2 - u)`` with ``u = sigma / sigma_lo``;
    above it grows as ``level + d^2 / (1 + d)`` with ``d = sigma - sigma_hi``.
    Both pieces have zero slope where they meet the band.
    """

    sigma_lo: float
    sigma_hi: float
    level: float
    kind = "flat_band"

    def __post_init__(self):
        if not (0 < self.sigma_lo < self.sigma_hi):
            raise ValueError("flat band needs 0 < sigma_lo < sigma_hi")
        if not self.level > 0:
            raise ValueError("flat band level must be positive")

    def _value(self, s):
        u = s / self.sigma_lo
        d = s - self.sigma_hi
        below = self.level * u * (2.0 - u)
        above = self.level + d * d / (1.0 + np.abs(d))
        return np.where(s < self.sigma_lo, below, np.where(s > self.sigma_hi, above, self.level))

    def _derivative(self, s):
        u = s / self.sigma_lo
        d = np.maximum(s - self.sigma_hi, 0.0)
        below = self.level * (2.0 - 2.0 * u) / self.sigma_lo
        above = (d * d + 2.0 * d) / (1.0 + d) ** 2
        return np.where(s < self.sigma_lo, below, np.where(s > self.sigma_hi, above, 0.0))

    def limit_at_zero(self):
        return 0.0

    def to_dict(self):
        return {
            "kind": self.kind,
            "sigma_lo": self.sigma_lo,
            "sigma_hi": self.sigma_hi,
            "level": self.level,
        }


@dataclass(frozen=True)
class Tabulated(Symbol):
    """Symbol interpolated through ``(sigma, Psi)`` knots.

    Without ``slopes`` a monotone (PCHIP) cubic is used, so monotone data give a
    monotone interpolant. With ``slopes`` the knots define a cubic Hermite spline.
    Outside the knot range the symbol is extended by constants.
    """

    knots: tuple
    slopes: tuple | None = None
    kind = "tabulated"

    def __post_init__(self):
        knots = tuple((float(a), float(b)) for a, b in self.knots)
        if len(knots) < 2:
            raise ValueError("tabulated symbol needs at least two knots")
        s = np.array([k[0] for k in knots])
        if s[0] < 0 or np.any(np.diff(s) <= 0):
            raise ValueError("knot sigmas must be non-negative and strictly increasing")
        object.__setattr__(self, "knots", knots)
        if self.slopes is not None:
            slopes = tuple(float(v) for v in self.slopes)
            if len(slopes) != len(knots):
                raise ValueError("need one slope per knot")
            object.__setattr__(self, "slopes", slopes)

    @cached_property
    def _spline(self):
        s = np.array([k[0] for k in self.knots])
        v = np.array([k[1] for k in self.knots])
        if self.slopes is None:
            return PchipInterpolator(s, v, extrapolate=False)
        return CubicHermiteSpline(s, v, np.array(self.slopes), extrapolate=False)

    def _value(self, s):
        lo, hi = self.knots[0], self.knots[-1]
        inside = np.clip(s, lo[0], hi[0])
        out = self._spline(inside)
        return np.where(s < lo[0], lo[1], np.where(s > hi[0], hi[1], out))

    def _derivative(self, s):
        lo, hi = self.knots[0][0], self.knots[-1][0]
        out = self._spline.derivative()(np.clip(s, lo, hi))
        return np.where((s < lo) | (s > hi), 0.0, out)

    def limit_at_zero(self):
        # constant extension below the first knot
        return self.knots[0][1] if self.knots[0][0] > 0 else float(self._value(np.array([0.0]))[0])

    def limit_at_infinity(self):
        return self.knots[-1][1]

    def to_dict(self):
        d = {"kind": self.kind, "knots": [list(k) for k in self.knots]}
        if self.slopes is not None:
            d["slopes"] = list(self.slopes)
        return d


_KINDS = {
    "fractional": (Fractional, {"rho": "rho"}),
    "relativistic": (Relativistic, {"m": "mass"}),
    "logarithmic": (Logarithmic, {}),
    "flat_band": (FlatBand, {"sigma_lo": "sigma_lo", "sigma_hi": "sigma_hi", "level": "level"}),
    "tabulated": (Tabulated, {"knots": "knots", "slopes": "slopes"}),
}


def symbol_from_dict(d: dict) -> Symbol:
    """Build a symbol from its config form, e.g. ``{"kind": "fractional", "rho": 0.5}``.

    Unknown kinds or keys raise ``KeyError``; bad values raise ``ValueError``.
    """
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _KINDS:
        raise KeyError(f"unknown symbol kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls, names = _KINDS[kind]
    unknown = set(d) - set(names)
    if unknown:
        raise KeyError(f"unknown keys for {kind} symbol: {sorted(unknown)}")
    return cls(**{names[k]: v for k, v in d.items()})


# ---------------------------------------------------------------------------
# evaluation


def _as_sigma(spec: Symbol, sigma, derivative: bool):
    s = np.asarray(sigma, dtype=float)
    if np.any(np.isnan(s)) or np.any(s < 0):
        raise DomainError(f"{spec.kind} symbol evaluated at negative or NaN sigma")
    finite0 = spec.derivative_finite_at_zero() if derivative else spec.value_finite_at_zero()
    if not finite0 and np.any(s == 0):
        what = "derivative" if derivative else "value"
        raise DomainError(f"{spec.kind} symbol {what} is singular at sigma = 0")
    return s


def _out(x, sigma):
    return float(x) if np.ndim(sigma) == 0 else x


def eval_psi(spec: Symbol, sigma):
    """Psi(sigma). ``sigma = 0`` is allowed when the value has a finite limit there."""
    s = _as_sigma(spec, sigma, derivative=False)
    return _out(spec._value(s), sigma)


def eval_psi_prime(spec: Symbol, sigma):
    """dPsi/dsigma. Raises ``DomainError`` at 0 for symbols whose slope blows up."""
    s = _as_sigma(spec, sigma, derivative=True)
    return _out(spec._derivative(s), sigma)


def group_speed_envelope(spec: Symbol, sigma):
    """``Psi'(sigma^2) * sigma``; twice this is the group speed at ``|xi| = sigma``."""
    s = np.asarray(sigma, dtype=float)
    return _out(np.asarray(eval_psi_prime(spec, s * s)) * s, sigma)


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class ClassReport:
    in_tilde_B: bool
    in_B_up_to_order: int
    psi_prime_sigma_monotone: Monotone
    envelope_constant: bool
    samples_used: int
    sigma_range: tuple
    limit_at_infinity: float = math.inf
    first_violation: str = ""

    @property
    def envelope_increasing(self) -> bool:
        return self.psi_prime_sigma_monotone == "increasing" or self.envelope_constant

    @property
    def envelope_decreasing(self) -> bool:
        return self.psi_prime_sigma_monotone == "decreasing" or self.envelope_constant

    def to_text(self, prefix: str = "class") -> str:
        rows = [
            ("in_tilde_B", self.in_tilde_B),
            ("in_B_up_to_order", self.in_B_up_to_order),
            ("psi_prime_sigma_monotone", self.psi_prime_sigma_monotone),
            ("envelope_constant", self.envelope_constant),
            ("samples_used", self.samples_used),
            ("sigma_range", f"{self.sigma_range[0]!r},{self.sigma_range[1]!r}"),
            ("limit_at_infinity", self.limit_at_infinity),
        ]
        if self.first_violation:
            rows.append(("first_violation", self.first_violation))
        return "\n".join(f"{prefix}.{k} = {_fmt(v)}" for k, v in rows)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _forward_difference(spec, s, h, k):
    """k-th forward difference of Psi with step h at every point of s."""
    acc = np.zeros_like(s)
    for j in range(k + 1):
        acc += (-1) ** (k - j) * math.comb(k, j) * spec._value(s + j * h)
    return acc


def certify_classes(spec: Symbol, sigma_range=(1e-2, 1e2), n_samples: int = 256,
                    k_max: int = 4, rel_step: float = 0.05) -> ClassReport:
    """Sample-based membership report for the classes B-tilde and B.

    Checks ``Psi >= 0`` and ``Psi' >= 0`` on a geometric grid over
    ``sigma_range``. For Bernstein order ``k`` the k-th forward difference of
    Psi (step ``rel_step * sigma``) must have sign ``(-1)**(k+1)`` within
    ``BERNSTEIN_TOL``. A reported failure is a certificate of non-membership;
    a pass is only evidence. The envelope ``Psi'(sigma^2) sigma`` is compared
    pairwise on the same grid to classify its monotonicity.
    """
    lo, hi = map(float, sigma_range)
    if n_samples < 16:
        raise ValueError("n_samples must be at least 16")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if not (0 < lo < hi):
        raise ValueError("need 0 < sigma_lo < sigma_hi")

    s = np.geomspace(lo, hi, n_samples)
    psi = spec._value(s)
    dpsi = spec._derivative(s)
    violation = ""
    in_tilde = bool(np.all(psi >= -BERNSTEIN_TOL) and np.all(dpsi >= -BERNSTEIN_TOL))
    if not in_tilde:
        bad = np.argmin(np.minimum(psi, dpsi))
        violation = f"negative value or slope at sigma={float(s[bad])!r}"

    order = 0
    if in_tilde:
        h = rel_step * s
        for k in range(1, k_max + 1):
            diff = _forward_difference(spec, s, h, k) * (-1) ** (k + 1)
            if np.all(diff >= -BERNSTEIN_TOL):
                order = k
            else:
                bad = int(np.argmin(diff))
                violation = f"order {k} difference has wrong sign at sigma={float(s[bad])!r}"
                break

    env = spec._derivative(s * s) * s
    d = np.diff(env)
    scale = max(float(np.max(np.abs(env))), 1e-300)
    inc = bool(np.all(d >= -ENVELOPE_RTOL * scale))
    dec = bool(np.all(d <= ENVELOPE_RTOL * scale))
    mono: Monotone = "increasing" if inc else ("decreasing" if dec else "neither")

    return ClassReport(
        in_tilde_B=in_tilde,
        in_B_up_to_order=order,
        psi_prime_sigma_monotone=mono,
        envelope_constant=inc and dec,
        samples_used=n_samples,
        sigma_range=(lo, hi),
        limit_at_infinity=float(spec.limit_at_infinity()),
        first_violation=violation,
    )


# ---------------------------------------------------------------------------
# cone thresholds


def _envelope_min(spec, eps, R, n):
    s = np.linspace(eps, R, n)
    env = spec._derivative(s * s) * s
    k = int(np.argmin(env))
    best = float(env[k])
    a, b = s[max(k - 1, 0)], s[min(k + 1, n - 1)]
    if b > a:
        res = minimize_scalar(lambda x: float(spec._derivative(np.array([x * x]))[0] * x),
                              bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return best


def _envelope_max(spec, eps, R, n):
    s = np.linspace(eps, R, n)
    env = spec._derivative(s * s) * s
    k = int(np.argmax(env))
    best = float(env[k])
    a, b = s[max(k - 1, 0)], s[min(k + 1, n - 1)]
    if b > a:
        res = minimize_scalar(lambda x: -float(spec._derivative(np.array([x * x]))[0] * x),
                              bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def cone_threshold(spec: Symbol, eps: float, R: float,
                   mode: Literal["increasing", "decreasing", "inf"],
                   report: ClassReport | None = None, n_samples: int = 2049) -> float:
    """Speed ``v`` of the slow cone ``|x| <= v t`` that a band-limited state leaves.

    ``increasing`` gives ``Psi'(eps^2) eps``, ``decreasing`` gives ``Psi'(R^2) R``,
    both only after the envelope monotonicity on ``[eps, R]`` is confirmed (from
    ``report`` or a fresh certification). ``inf`` minimises the envelope over the
    band and needs no monotonicity; a zero result emits
    :class:`DegenerateThresholdWarning`.
    """
    if not (0 < eps < R):
        raise ValueError("need 0 < eps < R")
    if mode == "inf":
        val = max(_envelope_min(spec, eps, R, n_samples), 0.0)
        if val <= 0.0:
            warnings.warn("envelope vanishes inside the band: cone threshold is zero",
                          DegenerateThresholdWarning, stacklevel=2)
        return val
    if mode not in ("increasing", "decreasing"):
        raise ValueError(f"unknown cone mode {mode!r}")
    if report is None:
        report = certify_classes(spec, (eps, R), n_samples=256, k_max=1)
    ok = report.envelope_increasing if mode == "increasing" else report.envelope_decreasing
    if not ok:
        raise MonotonicityError(
            f"mode {mode!r} requested but envelope is {report.psi_prime_sigma_monotone} "
            f"on {report.sigma_range}")
    at = eps if mode == "increasing" else R
    return float(group_speed_envelope(spec, at))


def envelope_range(spec: Symbol, eps: float, R: float, n_samples: int = 2049):
    """``(inf, sup)`` of ``Psi'(sigma^2) sigma`` over ``[eps, R]``."""
    return _envelope_min(spec, eps, R, n_samples), _envelope_max(spec, eps, R, n_samples)


def group_speed_range(spec: Symbol, eps: float, R: float, n_samples: int = 2049):
    """True minimal and maximal group speeds ``2 Psi'(|xi|^2)|xi|`` over the band."""
    lo, hi = envelope_range(spec, eps, R, n_samples)
    return 2.0 * lo, 2.0 * hi


def infer_direction(report: ClassReport) -> str:
    """``increasing`` / ``decreasing`` from a report, ``inf`` when neither holds."""
    if report.envelope_increasing:
        return "increasing"
    if report.envelope_decreasing:
        return "decreasing"
    return "inf"
