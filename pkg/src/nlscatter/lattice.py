"""Periodic grids, wave packets and their measurements.

Positions live on ``[-L, L)`` per axis with spacing ``dx = 2L / N``. The
momentum representation approximates the unitary continuous transform
``(2 pi)^{-n/2} \\int phi(x) e^{-i x.xi} dx`` on the frequencies
``xi = 2 pi fftfreq(N, dx)`` (spacing ``pi / L``), so that Parseval holds with
the measure weights ``dx^n`` and ``dxi^n``.
"""

from __future__ import annotations

import math
import struct
import threading
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from nlscatter import kernels
from nlscatter.errors import (
    AnnulusError,
    AnnulusOutsideGridError,
    ConeExceedsBoxError,
    GridMismatchError,
    GridTooLargeError,
    PacketFormatError,
    TruncationWarning,
)

#: memory ceiling for one grid's working set (a handful of complex arrays)
MAX_GRID_BYTES = 2**30
#: relative packet amplitude allowed at |x| >= L/2
TAIL_TOLERANCE = 1e-12
#: Gaussian envelope level at the inner edge of the window transitions
ENVELOPE_EDGE_LEVEL = 1e-12

PACKET_MAGIC = b"NLSPKT01"


@dataclass(frozen=True)
class GridSpec:
    dim: int
    points: int
    half_length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = int(self.points)
        if n < 2 or n & (n - 1):
            raise ValueError(f"points per dimension must be a power of two, got {self.points}")
        if not (self.half_length > 0 and math.isfinite(self.half_length)):
            raise ValueError("half_length must be positive")
        # ~8 complex128 work arrays per grid
        if 8 * 16 * n**self.dim > MAX_GRID_BYTES:
            raise GridTooLargeError(f"{n}^{self.dim} grid exceeds the memory ceiling")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.points

    @property
    def dxi(self) -> float:
        return math.pi / self.half_length

    @property
    def xi_max(self) -> float:
        """Largest resolvable frequency ``pi N / (2L)``."""
        return math.pi * self.points / (2.0 * self.half_length)

    @property
    def cell(self) -> float:
        return self.dx**self.dim

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points**self.dim

    def axis(self) -> np.ndarray:
        return -self.half_length + self.dx * np.arange(self.points)

    def freq_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.points, self.dx)

    def geometry(self) -> "Geometry":
        return _geometry(self)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "points": self.points, "half_length": self.half_length}


@dataclass(frozen=True)
class Geometry:
    """Cached coordinate arrays of a grid (all read-only)."""

    x: tuple  # coordinate arrays, grid shape
    r: np.ndarray  # |x|, flat
    xi: tuple  # frequency arrays, grid shape
    xi2: np.ndarray  # |xi|^2, flat
    shift: np.ndarray  # e^{i xi . L}, grid shape


_geom_cache: dict = {}
_geom_lock = threading.Lock()


def _readonly(a):
    a.setflags(write=False)
    return a


def _geometry(grid: GridSpec) -> Geometry:
    with _geom_lock:
        g = _geom_cache.get(grid)
        if g is not None:
            return g
        ax = grid.axis()
        fx = grid.freq_axis()
        x = tuple(_readonly(a) for a in np.meshgrid(*([ax] * grid.dim), indexing="ij"))
        xi = tuple(_readonly(a) for a in np.meshgrid(*([fx] * grid.dim), indexing="ij"))
        r = np.sqrt(sum(a * a for a in x)).ravel()
        xi2 = sum(a * a for a in xi).ravel()
        shift = np.exp(1j * grid.half_length * sum(xi))
        g = Geometry(x=x, r=_readonly(r), xi=xi, xi2=_readonly(xi2), shift=_readonly(shift))
        _geom_cache[grid] = g
        return g


@dataclass(frozen=True, eq=False)
class WavePacket:
    """Complex field on a grid, in position or momentum representation.

    The value array is copied and frozen at construction.
    """

    grid: GridSpec
    values: np.ndarray
    space: Literal["position", "momentum"] = "position"
    band: tuple | None = None  # (eps, R) for annulus packets

    def __post_init__(self):
        if self.space not in ("position", "momentum"):
            raise ValueError(f"unknown representation {self.space!r}")
        v = np.array(self.values, dtype=np.complex128, order="C")
        if v.shape != self.grid.shape:
            v = v.reshape(self.grid.shape)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def weight(self) -> float:
        return self.grid.cell if self.space == "position" else self.grid.dxi**self.grid.dim

    def norm(self) -> float:
        return math.sqrt(kernels.weighted_mass(self.values.ravel(), _ones(self.grid)) * self.weight)

    def position(self) -> "WavePacket":
        return self if self.space == "position" else from_fourier(self)

    def momentum(self) -> "WavePacket":
        return self if self.space == "momentum" else to_fourier(self)

    def with_values(self, values, space=None) -> "WavePacket":
        return WavePacket(self.grid, values, space or self.space, self.band)


def _ones(grid):
    return _ones_cached(grid.size)


_ones_store: dict = {}


def _ones_cached(n):
    a = _ones_store.get(n)
    if a is None:
        a = _ones_store[n] = _readonly(np.ones(n))
    return a


# ---------------------------------------------------------------------------
# transforms


def _fourier_scale(grid):
    return (grid.dx / math.sqrt(2.0 * math.pi)) ** grid.dim


def to_fourier(phi: WavePacket) -> WavePacket:
    """Momentum representation (unitary up to round-off)."""
    if phi.space == "momentum":
        return phi
    g = phi.grid.geometry()
    F = np.fft.fftn(phi.values) * g.shift * _fourier_scale(phi.grid)
    return WavePacket(phi.grid, F, "momentum", phi.band)


def from_fourier(phi: WavePacket) -> WavePacket:
    """Inverse of :func:`to_fourier`."""
    if phi.space == "position":
        return phi
    g = phi.grid.geometry()
    v = np.fft.ifftn(phi.values * np.conj(g.shift)) / _fourier_scale(phi.grid)
    return WavePacket(phi.grid, v, "position", phi.band)


# ---------------------------------------------------------------------------
# packets


def _smoothstep(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def annulus_window(k, eps, R, width):
    """Smooth radial window: 1 on ``[eps + width, R - width]``, 0 outside ``[eps, R]``."""
    return _smoothstep((k - eps) / width) * _smoothstep((R - k) / width)


def make_annulus_packet(grid: GridSpec, eps: float, R: float, center_momentum,
                        smoothness: float = 0.2,
                        profile: Literal["gaussian", "window"] = "gaussian") -> WavePacket:
    """Unit-norm packet whose Fourier transform lives in ``eps <= |xi| <= R``.

    Both profiles use a C-infinity annulus window whose transitions have width
    ``smoothness * (R - eps)``.

    ``gaussian`` multiplies the window by a Gaussian centred at
    ``center_momentum``, as wide as possible while staying below
    ``ENVELOPE_EDGE_LEVEL`` where the window starts to bend. The spatial tails
    are then Gaussian.

    ``window`` uses the window itself, restricted smoothly to the half-space
    ``xi . center > 0`` (exactly one side in 1-D). Its spatial tails decay like
    ``exp(-c sqrt|x|)``, so slow-cone masses fall off faster than any power but
    without the Gaussian collapse to round-off.

    The position-space packet is centred at the origin.
    """
    if not (0 < eps < R):
        raise AnnulusError("need 0 < eps < R")
    if R >= grid.xi_max:
        raise AnnulusOutsideGridError(
            f"annulus radius R={R} reaches the grid limit xi_max={grid.xi_max:.6g}")
    if smoothness <= 0:
        raise AnnulusError("smoothness must be positive")
    c = np.atleast_1d(np.asarray(center_momentum, dtype=float))
    if c.shape != (grid.dim,):
        raise AnnulusError(f"center momentum must have {grid.dim} components")
    k0 = float(np.linalg.norm(c))
    width = smoothness * (R - eps)
    clearance = min(k0 - eps - width, R - width - k0)
    if not (eps < k0 < R):
        raise AnnulusError(f"|center momentum| = {k0} lies outside ({eps}, {R})")
    g = grid.geometry()
    k = np.sqrt(g.xi2).reshape(grid.shape)
    if profile == "gaussian":
        if clearance <= 0:
            raise AnnulusError(
                f"center momentum too close to the annulus edge for smoothness={smoothness}")
        s = clearance / math.sqrt(2.0 * math.log(1.0 / ENVELOPE_EDGE_LEVEL))
        d2 = sum((xi - ci) ** 2 for xi, ci in zip(g.xi, c))
        F = annulus_window(k, eps, R, width) * np.exp(-d2 / (2.0 * s * s))
    elif profile == "window":
        if smoothness > 0.5:
            raise AnnulusError("window profile needs smoothness <= 0.5")
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = sum(xi * ci for xi, ci in zip(g.xi, c)) / (k * k0)
        side = _smoothstep(np.nan_to_num(cos) / 0.5)
        F = annulus_window(k, eps, R, width) * side
    else:
        raise AnnulusError(f"unknown packet profile {profile!r}")
    phi = from_fourier(WavePacket(grid, F, "momentum", (eps, R)))
    phi = phi.with_values(phi.values / phi.norm())

    far = g.r >= grid.half_length / 2
    if np.any(far):
        a = np.abs(phi.values.ravel())
        tail = float(a[far].max() / a.max())
        if tail > TAIL_TOLERANCE:
            warnings.warn(
                f"packet tail {tail:.2e} at |x| >= L/2 exceeds {TAIL_TOLERANCE:g}; "
                "enlarge the box", TruncationWarning, stacklevel=2)
    return phi


def packet_tail(phi: WavePacket) -> float:
    """Largest amplitude at ``|x| >= L/2`` relative to the peak."""
    p = phi.position()
    a = np.abs(p.values.ravel())
    far = p.grid.geometry().r >= p.grid.half_length / 2
    return float(a[far].max() / a.max()) if np.any(far) else 0.0


# ---------------------------------------------------------------------------
# measurements


def position_weighted_norm(phi: WavePacket, N: float) -> float:
    """``|| <x>^N phi ||`` with ``<x> = sqrt(1 + |x|^2)``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    p = phi.position()
    g = p.grid.geometry()
    with np.errstate(over="raise"):
        try:
            w = (1.0 + g.r * g.r) ** N
            val = kernels.weighted_mass(p.values.ravel(), w) * p.grid.cell
        except FloatingPointError as exc:
            raise OverflowError("weighted norm exceeds the floating-point range") from exc
    if not math.isfinite(val):
        raise OverflowError("weighted norm exceeds the floating-point range")
    return math.sqrt(val)


def position_moment_norm(phi: WavePacket) -> float:
    """``|| x phi ||`` (box-centred coordinates)."""
    p = phi.position()
    g = p.grid.geometry()
    return math.sqrt(kernels.weighted_mass(p.values.ravel(), g.r * g.r) * p.grid.cell)


@dataclass(frozen=True)
class ConeMassResult:
    t: float
    threshold_speed: float
    inside_mass: float
    outside_mass: float

    @property
    def total(self) -> float:
        return self.inside_mass + self.outside_mass


def radial_mass(phi: WavePacket, radius: float) -> tuple[float, float]:
    """``(mass in |x| <= radius, mass outside)`` without any box guard."""
    p = phi.position()
    inside, total = kernels.masked_mass(p.values.ravel(), p.grid.geometry().r, float(radius))
    w = p.grid.cell
    return inside * w, max(total - inside, 0.0) * w


def cone_mass(phi: WavePacket, speed: float, t: float) -> ConeMassResult:
    """Mass inside and outside the ball ``|x| <= speed * t``."""
    if speed <= 0 or t <= 0:
        raise ValueError("speed and t must be positive")
    radius = speed * t
    if radius >= phi.grid.half_length:
        raise ConeExceedsBoxError(
            f"cone radius {radius:.6g} does not fit in the box (L={phi.grid.half_length})")
    inside, outside = radial_mass(phi, radius)
    return ConeMassResult(float(t), float(speed), inside, outside)


def inner_product(phi: WavePacket, psi: WavePacket) -> complex:
    """``(phi, psi)``, conjugate-linear in the first argument."""
    if phi.grid != psi.grid:
        raise GridMismatchError("packets live on different grids")
    a, b = phi.position(), psi.position()
    return complex(np.vdot(a.values, b.values) * a.grid.cell)


# ---------------------------------------------------------------------------
# export


def save_packet_csv(phi: WavePacket, path) -> None:
    """Columns ``x1..xn, re, im`` with 17 significant digits."""
    p = phi.position()
    g = p.grid.geometry()
    cols = [a.ravel() for a in g.x] + [p.values.real.ravel(), p.values.imag.ravel()]
    names = [f"x{i + 1}" for i in range(p.grid.dim)] if p.grid.dim > 1 else ["x"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names + ["re", "im"]) + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def save_packet_binary(phi: WavePacket, path) -> None:
    """32-byte header (magic, dim, points, L) followed by little-endian float64 pairs."""
    p = phi.position()
    header = PACKET_MAGIC + struct.pack("<qqd", p.grid.dim, p.grid.points, p.grid.half_length)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(p.values.astype("<c16").tobytes())


def load_packet_binary(path) -> WavePacket:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 32 or raw[:8] != PACKET_MAGIC:
        raise PacketFormatError("missing packet header")
    dim, points, L = struct.unpack("<qqd", raw[8:32])
    try:
        grid = GridSpec(int(dim), int(points), float(L))
    except (ValueError, MemoryError) as exc:
        raise PacketFormatError(f"invalid header: {exc}") from exc
    body = raw[32:]
    if len(body) != 16 * grid.size:
        raise PacketFormatError(
            f"payload has {len(body)} bytes, header implies {16 * grid.size}")
    vals = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    return WavePacket(grid, vals.reshape(grid.shape))
