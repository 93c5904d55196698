"""Spectral interval of ``Psi(-Delta)``, the zero set of ``Psi'`` and flat bands.

The zero-set classification is a finite-sample proxy: a run of at least three
consecutive sub-tolerance samples spanning ``INTERVAL_FRACTION`` of the scanned
range counts as an interval, anything shorter as isolated points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from nlscatter.errors import ShellTooThinError
from nlscatter.evolution import free_evolve
from nlscatter.lattice import GridSpec, WavePacket, inner_product
from nlscatter.symbols import FlatBand, Symbol

#: sub-tolerance level for Psi', relative to max(1, max sampled Psi')
ZERO_TOL = 1e-8
#: minimal span of an interval run, as a fraction of the scanned range
INTERVAL_FRACTION = 1e-3
#: minimal number of grid frequencies on a flat-band shell
MIN_SHELL_MODES = 10


def spectral_interval(symbol: Symbol) -> tuple[float, float]:
    """``[lim_{s->0+} Psi(s), lim_{s->inf} Psi(s)]``; the upper end may be ``inf``."""
    return float(symbol.limit_at_zero()), float(symbol.limit_at_infinity())


@dataclass(frozen=True)
class ZeroSet:
    kind: str  # "empty" | "discrete" | "contains_interval"
    intervals: tuple = ()  # ((lo, hi), ...)
    points: tuple = ()

    @property
    def interval(self):
        """Widest detected interval, or ``None``."""
        if not self.intervals:
            return None
        return max(self.intervals, key=lambda iv: iv[1] - iv[0])


def _bisect_edge(pred, inside, outside, tol):
    """Boundary of ``pred`` between ``inside`` (true) and ``outside`` (false)."""
    for _ in range(200):
        if abs(outside - inside) <= tol:
            break
        mid = 0.5 * (inside + outside)
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return inside


def detect_zero_set(symbol: Symbol, sigma_range=(1e-2, 1e2), n_samples: int = 1024,
                    tol: float = ZERO_TOL) -> ZeroSet:
    """Classify ``{s : Psi'(s) = 0}`` inside ``sigma_range`` by sampling.

    Samples are uniform in ``s``. Interval endpoints are refined by bisection;
    isolated sampled minima of ``Psi'`` are refined by bounded minimisation.
    """
    if n_samples < 64:
        raise ValueError("detect_zero_set needs at least 64 samples")
    lo, hi = map(float, sigma_range)
    if not (0 < lo < hi):
        raise ValueError("need 0 < sigma_lo < sigma_hi")
    s = np.linspace(lo, hi, n_samples)
    d = np.abs(np.asarray(symbol._derivative(s), dtype=float))
    thresh = tol * max(1.0, float(np.max(d)))

    def small(x):
        return abs(float(symbol._derivative(np.array([x]))[0])) <= thresh

    span = hi - lo
    xtol = 1e-12 * max(1.0, hi)
    intervals, points = [], []
    sub = d <= thresh
    i = 0
    while i < n_samples:
        if not sub[i]:
            i += 1
            continue
        j = i
        while j + 1 < n_samples and sub[j + 1]:
            j += 1
        a = s[i] if i == 0 else _bisect_edge(small, s[i], s[i - 1], xtol)
        b = s[j] if j == n_samples - 1 else _bisect_edge(small, s[j], s[j + 1], xtol)
        if j - i + 1 >= 3 and b - a >= INTERVAL_FRACTION * span:
            intervals.append((float(a), float(b)))
        else:
            points.append(float(0.5 * (a + b)))
        i = j + 1

    # zeros falling between samples show up as interior local minima
    for k in range(1, n_samples - 1):
        if sub[k] or sub[k - 1] or sub[k + 1]:
            continue
        if d[k] <= d[k - 1] and d[k] <= d[k + 1]:
            res = minimize_scalar(
                lambda x: abs(float(symbol._derivative(np.array([x]))[0])),
                bounds=(s[k - 1], s[k + 1]), method="bounded",
                options={"xatol": xtol})
            if res.fun <= thresh:
                points.append(float(res.x))

    points.sort()
    if intervals:
        kind = "contains_interval"
    elif points:
        kind = "discrete"
    else:
        kind = "empty"
    return ZeroSet(kind, tuple(intervals), tuple(points))


@dataclass(frozen=True)
class SpectrumReport:
    lower: float
    upper: float
    zero_set: ZeroSet
    verdict: str  # "absolutely_continuous" | "has_infinite_multiplicity_eigenvalue"
    eigenvalues: tuple = ()
    proxy: bool = field(default=True)  # verdict comes from the sampled classification

    @property
    def zero_set_kind(self) -> str:
        return self.zero_set.kind

    def to_text(self, prefix: str = "spectrum") -> str:
        lines = [
            f"{prefix}.lower = {self.lower!r}",
            f"{prefix}.upper = {self.upper!r}",
            f"{prefix}.zero_set_kind = {self.zero_set.kind}",
        ]
        for k, (a, b) in enumerate(self.zero_set.intervals):
            lines.append(f"{prefix}.zero_interval_{k} = [{a!r}, {b!r}]")
        if self.zero_set.points:
            lines.append(f"{prefix}.zero_points = {list(self.zero_set.points)!r}")
        if self.eigenvalues:
            lines.append(f"{prefix}.eigenvalues = {list(self.eigenvalues)!r}")
        lines.append(f"{prefix}.verdict = {self.verdict}")
        lines.append(f"{prefix}.verdict_is_sampling_proxy = {str(self.proxy).lower()}")
        return "\n".join(lines)


def spectrum_report(symbol: Symbol, sigma_range=(1e-2, 1e2), n_samples: int = 1024) -> SpectrumReport:
    lower, upper = spectral_interval(symbol)
    zs = detect_zero_set(symbol, sigma_range, n_samples)
    if zs.kind == "contains_interval":
        verdict = "has_infinite_multiplicity_eigenvalue"
        eig = tuple(float(symbol._value(np.array([0.5 * (a + b)]))[0]) for a, b in zs.intervals)
    else:
        verdict, eig = "absolutely_continuous", ()
    return SpectrumReport(lower, upper, zs, verdict, eig)


# ---------------------------------------------------------------------------
# flat-band eigenfunctions


@dataclass(frozen=True)
class FlatBandDemo:
    defect: float  # sup over times of ||e^{-itH0} u - e^{-it lam} u||
    defects: tuple  # per time
    times: tuple
    mode_count: int
    eigenvalue: float
    shell: tuple  # (sigma_lo, sigma_hi) in |xi|^2
    packet: WavePacket


def shell_packet(grid: GridSpec, shell) -> tuple[WavePacket, int]:
    """Unit packet with equal weight on every grid frequency in ``lo <= |xi|^2 <= hi``."""
    lo, hi = shell
    g = grid.geometry()
    mask = ((g.xi2 >= lo) & (g.xi2 <= hi)).reshape(grid.shape)
    count = int(mask.sum())
    if count < MIN_SHELL_MODES:
        raise ShellTooThinError(
            f"shell [{lo}, {hi}] holds {count} grid frequencies, need {MIN_SHELL_MODES}; "
            "enlarge the box")
    u = WavePacket(grid, mask.astype(complex), "momentum").position()
    return u.with_values(u.values / u.norm()), count


def flat_band_eigen_demo(symbol: Symbol, grid: GridSpec, shell=None,
                         times=(1.0, 10.0, 100.0)) -> FlatBandDemo:
    """Stationarity defect of a packet living on a Fourier shell.

    ``shell`` defaults to the flat band of a :class:`FlatBand` symbol. The
    reference eigenvalue is ``Psi`` at the shell midpoint.
    """
    if shell is None:
        if not isinstance(symbol, FlatBand):
            raise ValueError("shell is required for symbols without a flat band")
        shell = (symbol.sigma_lo, symbol.sigma_hi)
    shell = (float(shell[0]), float(shell[1]))
    if math.sqrt(shell[1]) >= grid.xi_max:
        raise ShellTooThinError("shell lies beyond the grid's largest frequency")
    u, count = shell_packet(grid, shell)
    lam = float(symbol._value(np.array([0.5 * (shell[0] + shell[1])]))[0])
    defects = []
    for t in times:
        ut = free_evolve(u, symbol, t)
        diff = ut.values - np.exp(-1j * t * lam) * u.values
        defects.append(float(np.sqrt(np.sum(np.abs(diff) ** 2) * grid.cell)))
    return FlatBandDemo(max(defects), tuple(defects), tuple(map(float, times)),
                        count, lam, shell, u)


def shell_defect_closed_form(symbol: Symbol, grid: GridSpec, shell, t: float) -> float:
    """``sqrt(sum |u_k|^2 4 sin^2(t (Psi_k - lam) / 2))`` for the shell packet."""
    lo, hi = shell
    g = grid.geometry()
    mask = (g.xi2 >= lo) & (g.xi2 <= hi)
    lam = float(symbol._value(np.array([0.5 * (lo + hi)]))[0])
    psi = np.asarray(symbol._value(g.xi2[mask]), dtype=float)
    w = 1.0 / mask.sum()
    return float(np.sqrt(np.sum(w * 4.0 * np.sin(0.5 * t * (psi - lam)) ** 2)))


def shells_orthogonal(grid: GridSpec, symbol: Symbol, shell_a, shell_b, t: float) -> complex:
    """Inner product of two shell packets after free evolution."""
    a, _ = shell_packet(grid, shell_a)
    b, _ = shell_packet(grid, shell_b)
    return inner_product(free_evolve(a, symbol, t), free_evolve(b, symbol, t))
