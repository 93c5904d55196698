"""Decaying real potentials sampled on a grid.

Two families: short range, bounded by ``C <x>^{-gamma}`` with ``gamma > 1``,
and the long-range family ``kappa <x>^{-gamma}`` with ``0 < gamma <= 1``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Literal

import numpy as np

from nlscatter.errors import ExponentRangeError
from nlscatter.lattice import GridSpec, _smoothstep


def japanese_bracket(r):
    """``<x> = sqrt(1 + |x|^2)``."""
    return np.sqrt(1.0 + np.asarray(r) ** 2)


class Potential:
    family: str = ""
    gamma: float

    @property
    def strength(self) -> float:
        raise NotImplementedError

    def profile(self, r):
        raise NotImplementedError

    def sup_norm(self) -> float:
        return abs(self.strength)

    @property
    def is_short_range(self) -> bool:
        return self.family == "short_range"


def _real(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
        raise TypeError(f"{name} must be a real number, got {type(v).__name__}")
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite")
    return v


@dataclass(frozen=True)
class ShortRange(Potential):
    """``V = C <x>^{-gamma}`` (``exact_power``) or that profile cut off smoothly
    to zero between ``cutoff / 2`` and ``cutoff`` (``compact_bump``)."""

    C: float
    gamma: float
    profile_kind: Literal["exact_power", "compact_bump"] = "exact_power"
    cutoff: float = 8.0
    family = "short_range"

    def __post_init__(self):
        object.__setattr__(self, "C", _real("C", self.C))
        object.__setattr__(self, "gamma", _real("gamma", self.gamma))
        if not self.C > 0:
            raise ValueError("short-range constant C must be positive")
        if not self.gamma > 1:
            raise ExponentRangeError(
                f"short-range decay assumption needs gamma > 1 strictly, got {self.gamma}")
        if self.profile_kind not in ("exact_power", "compact_bump"):
            raise ValueError(f"unknown short-range profile {self.profile_kind!r}")
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")

    @property
    def strength(self):
        return self.C

    def profile(self, r):
        v = self.C * japanese_bracket(r) ** (-self.gamma)
        if self.profile_kind == "compact_bump":
            half = 0.5 * self.cutoff
            v = v * (1.0 - _smoothstep((np.asarray(r) - half) / half))
        return v

    def to_dict(self):
        d = {"family": self.family, "C": self.C, "gamma": self.gamma}
        if self.profile_kind != "exact_power":
            d["profile"] = self.profile_kind
            d["cutoff"] = self.cutoff
        return d


@dataclass(frozen=True)
class LongRange(Potential):
    """``V = kappa <x>^{-gamma}`` with ``0 < gamma <= 1``."""

    kappa: float
    gamma: float
    family = "long_range"

    def __post_init__(self):
        object.__setattr__(self, "kappa", _real("kappa", self.kappa))
        object.__setattr__(self, "gamma", _real("gamma", self.gamma))
        if self.kappa == 0:
            raise ValueError("long-range coupling kappa must be non-zero")
        if not (0 < self.gamma <= 1):
            raise ExponentRangeError(
                f"long-range family needs 0 < gamma <= 1, got {self.gamma}")

    @property
    def strength(self):
        return self.kappa

    def profile(self, r):
        return self.kappa * japanese_bracket(r) ** (-self.gamma)

    def to_dict(self):
        return {"family": self.family, "kappa": self.kappa, "gamma": self.gamma}


def potential_from_dict(d: dict) -> Potential:
    """Config form, e.g. ``{"family": "long_range", "kappa": 1.0, "gamma": 0.5}``."""
    d = dict(d)
    fam = d.pop("family", None)
    if fam == "short_range":
        allowed = {"C", "gamma", "profile", "cutoff"}
        unknown = set(d) - allowed
        if unknown:
            raise KeyError(f"unknown keys for short_range potential: {sorted(unknown)}")
        kw = {"C": d["C"], "gamma": d["gamma"]}
        if "profile" in d:
            kw["profile_kind"] = d["profile"]
        if "cutoff" in d:
            kw["cutoff"] = _real("cutoff", d["cutoff"])
        return ShortRange(**kw)
    if fam == "long_range":
        unknown = set(d) - {"kappa", "gamma"}
        if unknown:
            raise KeyError(f"unknown keys for long_range potential: {sorted(unknown)}")
        return LongRange(d["kappa"], d["gamma"])
    raise KeyError(f"unknown potential family {fam!r}")


def potential_for_gamma(gamma: float, strength: float) -> Potential:
    """Exact-power potential of the family that ``gamma`` belongs to."""
    if gamma > 1:
        return ShortRange(strength, gamma)
    return LongRange(strength, gamma)


_sample_cache: dict = {}
_sample_lock = threading.Lock()


def sample_potential(spec: Potential, grid: GridSpec) -> np.ndarray:
    """Potential values on the grid (flat, read-only, cached per grid)."""
    key = (spec, grid)
    with _sample_lock:
        v = _sample_cache.get(key)
        if v is None:
            v = np.ascontiguousarray(spec.profile(grid.geometry().r), dtype=float)
            v.setflags(write=False)
            if len(_sample_cache) > 64:
                _sample_cache.clear()
            _sample_cache[key] = v
    return v


@dataclass(frozen=True)
class DecayCheck:
    ok: bool
    worst_index: int
    worst_x: tuple
    worst_ratio: float  # max |V| / (const <x>^{-gamma}); <= 1 when ok

    def __bool__(self):
        return self.ok


def decay_bound_check(spec: Potential, grid: GridSpec, samples=None,
                      const: float | None = None, gamma: float | None = None,
                      rtol: float = 1e-12) -> DecayCheck:
    """Verify ``|V(x)| <= const <x>^{-gamma}`` at every grid point.

    Defaults to the family's declared constant and exponent. ``samples`` may
    replace the sampled field (e.g. a corrupted copy).
    """
    const = abs(spec.strength) if const is None else const
    gamma = spec.gamma if gamma is None else gamma
    g = grid.geometry()
    v = sample_potential(spec, grid) if samples is None else np.asarray(samples, float).ravel()
    bound = const * japanese_bracket(g.r) ** (-gamma)
    ratio = np.abs(v) / bound
    k = int(np.argmax(ratio))
    x = tuple(float(a.ravel()[k]) for a in g.x)
    return DecayCheck(bool(ratio[k] <= 1.0 + rtol), k, x, float(ratio[k]))
