"""Free and interacting time evolution, and the Heisenberg position operator.

Free evolution multiplies Fourier coefficients by ``exp(-i t Psi(|xi|^2))``
and is exact up to transform round-off. The interacting propagator
``exp(-i t (Psi(|D|^2) + V))`` uses Strang splitting with an exact kinetic
factor; ``t`` may be negative, which conjugates every phase.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from nlscatter import kernels
from nlscatter.errors import StepSizeError, SymbolSingularityError
from nlscatter.lattice import GridSpec, WavePacket
from nlscatter.potentials import Potential, sample_potential
from nlscatter.symbols import Symbol, group_speed_envelope

#: bound on the potential phase accumulated in one splitting step
MAX_PHASE_PER_STEP = 0.1
#: Fourier mass tolerated where the symbol (or its slope) is undefined
SINGULAR_MASS_TOL = 1e-10


@dataclass(frozen=True)
class EvolutionParams:
    symbol: Symbol
    potential: Potential | None = None
    dt: float = 0.05
    splitting: str = "strang"

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise StepSizeError("dt must be positive")
        if self.splitting != "strang":
            raise ValueError(f"unsupported splitting {self.splitting!r}")
        if self.potential is not None and self.dt * self.potential.sup_norm() >= MAX_PHASE_PER_STEP:
            raise StepSizeError(
                f"dt * ||V||_inf = {self.dt * self.potential.sup_norm():.3g} "
                f"must stay below {MAX_PHASE_PER_STEP}")


# ---------------------------------------------------------------------------
# symbol arrays on the frequency grid

_cache: dict = {}
_cache_lock = threading.Lock()


def _cached(key, build):
    with _cache_lock:
        v = _cache.get(key)
        if v is None:
            if len(_cache) > 128:
                _cache.clear()
            v = _cache[key] = build()
    return v


def kinetic_energy(symbol: Symbol, grid: GridSpec) -> np.ndarray:
    """``Psi(|xi|^2)`` on the flat frequency grid (read-only)."""
    def build():
        xi2 = grid.geometry().xi2
        v = np.array(symbol._value(xi2), dtype=float)
        v.setflags(write=False)
        return v
    return _cached(("kin", symbol, grid), build)


def kinetic_slope(symbol: Symbol, grid: GridSpec):
    """``(Psi'(|xi|^2), singular_mask)``; singular entries are set to zero."""
    def build():
        xi2 = grid.geometry().xi2
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.array(symbol._derivative(xi2), dtype=float)
        bad = ~np.isfinite(d)
        d[bad] = 0.0
        d.setflags(write=False)
        bad.setflags(write=False)
        return d, bad
    return _cached(("slope", symbol, grid), build)


def _fft(a):
    return sfft.fftn(a)


def _ifft(a):
    return sfft.ifftn(a, overwrite_x=True)


def _free_array(values: np.ndarray, kin: np.ndarray, t: float) -> np.ndarray:
    F = _fft(values)
    kernels.phase_multiply(F.reshape(-1), kin, -float(t))
    return _ifft(F)


# ---------------------------------------------------------------------------
# free evolution


def free_evolve(phi: WavePacket, symbol: Symbol, t: float) -> WavePacket:
    """``exp(-i t Psi(|D|^2)) phi``."""
    p = phi.position()
    if t == 0:
        return p
    kin = kinetic_energy(symbol, p.grid)
    return p.with_values(_free_array(p.values, kin, t))


# ---------------------------------------------------------------------------
# interacting evolution


class StrangPropagator:
    """Strang-split ``exp(-i t H)`` on one grid, reusable across calls.

    ``t`` is cut into ``n = ceil(|t| / dt)`` equal steps of size ``t / n``.
    """

    def __init__(self, grid: GridSpec, params: EvolutionParams):
        self.grid = grid
        self.params = params
        self.kin = kinetic_energy(params.symbol, grid)
        self.V = (sample_potential(params.potential, grid)
                  if params.potential is not None else None)
        self._factors: dict = {}

    def steps_for(self, t: float) -> int:
        return max(1, math.ceil(abs(t) / self.params.dt - 1e-9))

    def _get_factors(self, h):
        f = self._factors.get(h)
        if f is None:
            shape = self.grid.shape
            half = np.exp(-0.5j * h * self.V).reshape(shape)
            full = half * half
            kin = np.exp(-1j * h * self.kin).reshape(shape)
            if len(self._factors) > 16:
                self._factors.clear()
            f = self._factors[h] = (half, full, kin)
        return f

    def run(self, values: np.ndarray, t: float) -> np.ndarray:
        """Return the evolved copy of a grid-shaped value array."""
        if t == 0:
            return np.array(values, dtype=np.complex128)
        if self.V is None:
            return _free_array(values, self.kin, t)
        n = self.steps_for(t)
        h = t / n
        half, full, kin = self._get_factors(h)
        psi = values * half
        for i in range(n):
            F = _fft(psi)
            F *= kin
            psi = _ifft(F)
            psi *= full if i < n - 1 else half
        return psi

    def evolve(self, phi: WavePacket, t: float) -> WavePacket:
        p = phi.position()
        return p.with_values(self.run(p.values, t))


def full_evolve(phi: WavePacket, params: EvolutionParams, t: float) -> WavePacket:
    """``exp(-i t (Psi(|D|^2) + V)) phi`` by Strang splitting (exact when V is absent)."""
    return StrangPropagator(phi.grid, params).evolve(phi, t)


def evolve_sampled(phi: WavePacket, params: EvolutionParams, times):
    """Yield ``(t, packet)`` at increasing ``times``, evolving incrementally from 0."""
    prop = StrangPropagator(phi.grid, params)
    cur = phi.position()
    t_prev = 0.0
    for t in times:
        if t < t_prev:
            raise ValueError("sample times must be non-decreasing")
        cur = prop.evolve(cur, t - t_prev)
        t_prev = t
        yield t, cur


# ---------------------------------------------------------------------------
# Heisenberg position


@dataclass(frozen=True)
class HeisenbergResult:
    components: tuple  # one WavePacket per axis
    norm: float


def heisenberg_position(phi: WavePacket, symbol: Symbol, t: float) -> HeisenbergResult:
    """``(x + 2 t Psi'(|D|^2) D) phi``, componentwise, with its aggregate norm.

    Its norm equals ``|| x exp(-i t H_0) phi ||`` while the evolved packet
    stays away from the box edge.
    """
    p = phi.position()
    grid = p.grid
    g = grid.geometry()
    F = _fft(p.values)
    slope, bad = kinetic_slope(symbol, grid)
    if np.any(bad):
        m = float(np.sum(np.abs(F.reshape(-1)[bad]) ** 2))
        tot = float(np.sum(np.abs(F) ** 2))
        if m > SINGULAR_MASS_TOL * tot:
            raise SymbolSingularityError(
                "packet has Fourier mass where Psi' is undefined (xi = 0)")
    mult = (2.0 * t * slope).reshape(grid.shape)
    comps = []
    total = 0.0
    for xj, xij in zip(g.x, g.xi):
        v = xj * p.values + sfft.ifftn(mult * xij * F)
        c = p.with_values(v)
        total += c.norm() ** 2
        comps.append(c)
    return HeisenbergResult(tuple(comps), math.sqrt(total))


def band_speed_bound(symbol: Symbol, eps: float, R: float, direction: str) -> float:
    """``sup |Psi'(|xi|^2) xi|`` over the band for a monotone envelope."""
    if direction == "increasing":
        return float(group_speed_envelope(symbol, R))
    if direction == "decreasing":
        return float(group_speed_envelope(symbol, eps))
    raise ValueError("direction must be 'increasing' or 'decreasing'")


def quadratic_position_bound(phi_x_norm: float, phi_norm: float, symbol: Symbol,
                             eps: float, R: float, direction: str, t: float, dim: int) -> float:
    """Upper bound ``2||x phi||^2 + 8 n t^2 s^2 ||phi||^2`` on ``||x exp(-itH_0) phi||^2``,
    with ``s`` the band speed bound for the given direction."""
    s = band_speed_bound(symbol, eps, R, direction)
    return 2.0 * phi_x_norm**2 + 8.0 * dim * t * t * s * s * phi_norm**2


__all__ = [
    "EvolutionParams",
    "StrangPropagator",
    "free_evolve",
    "full_evolve",
    "evolve_sampled",
    "heisenberg_position",
    "HeisenbergResult",
    "kinetic_energy",
    "kinetic_slope",
    "quadratic_position_bound",
    "band_speed_bound",
]
