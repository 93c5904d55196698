import math

import numpy as np
import pytest

from nlscatter.errors import ShellTooThinError
from nlscatter.lattice import GridSpec
from nlscatter.spectrum import (
    detect_zero_set,
    flat_band_eigen_demo,
    shell_defect_closed_form,
    shell_packet,
    shells_orthogonal,
    spectral_interval,
    spectrum_report,
)
from nlscatter.symbols import FlatBand, Fractional, Logarithmic, Relativistic, Tabulated

GRID = GridSpec(1, 4096, 200.0)


@pytest.mark.parametrize("rho", [0.25, 0.5, 1.0, 1.5])
def test_fractional_interval_is_half_line(rho):
    lo, hi = spectral_interval(Fractional(rho))
    assert lo == 0.0 and math.isinf(hi)


def test_bounded_symbol_interval():
    assert spectral_interval(Relativistic(2.0)) == (0.0, math.inf)
    assert spectral_interval(Tabulated(((0.0, 0.5), (3.0, 2.0)))) == (0.5, 2.0)


@pytest.mark.parametrize("sym", [Fractional(0.5), Fractional(1.0), Relativistic(1.0), Logarithmic()])
def test_strictly_increasing_symbols_are_continuous(sym):
    rep = spectrum_report(sym)
    assert rep.zero_set_kind == "empty"
    assert rep.verdict == "absolutely_continuous"


def test_flat_band_interval_detected():
    zs = detect_zero_set(FlatBand(1.0, 2.0, 3.0), (0.1, 10.0))
    assert zs.kind == "contains_interval"
    a, b = zs.interval
    # C^1 edges: Psi' grows linearly, so the tolerance shifts each edge by ~tol / slope
    assert a == pytest.approx(1.0, abs=5e-8) and b == pytest.approx(2.0, abs=5e-8)
    rep = spectrum_report(FlatBand(1.0, 2.0, 3.0), (0.1, 10.0))
    assert rep.verdict == "has_infinite_multiplicity_eigenvalue"
    assert rep.eigenvalues == (pytest.approx(3.0),)
    assert "verdict_is_sampling_proxy = true" in rep.to_text()


def test_isolated_zero_is_discrete():
    sym = Tabulated(((0.0, 0.0), (1.0, 1.0), (2.0, 2.0)), slopes=(1.5, 0.0, 1.5))
    zs = detect_zero_set(sym, (0.05, 1.95))
    assert zs.kind == "discrete"
    assert zs.points[0] == pytest.approx(1.0, abs=1e-6)
    assert spectrum_report(sym, (0.05, 1.95)).verdict == "absolutely_continuous"


def test_zero_set_argument_checks():
    with pytest.raises(ValueError):
        detect_zero_set(Fractional(1.0), (1.0, 0.5))
    with pytest.raises(ValueError):
        detect_zero_set(Fractional(1.0), n_samples=10)


def test_flat_band_stationary():
    demo = flat_band_eigen_demo(FlatBand(1.0, 2.0, 3.0), GRID)
    assert demo.mode_count >= 10
    assert demo.defect <= 1e-10
    assert demo.eigenvalue == 3.0


def test_dispersive_control_matches_closed_form():
    sym = Fractional(1.0)
    demo = flat_band_eigen_demo(sym, GRID, shell=(1.0, 2.0))
    assert demo.defects[1] >= 0.1
    for t, d in zip(demo.times, demo.defects):
        assert d == pytest.approx(shell_defect_closed_form(sym, GRID, (1.0, 2.0), t), rel=1e-9)


def test_shell_errors():
    with pytest.raises(ShellTooThinError):
        shell_packet(GridSpec(1, 64, 5.0), (1.0, 1.2))
    with pytest.raises(ShellTooThinError):
        flat_band_eigen_demo(Fractional(1.0), GridSpec(1, 64, 5.0), shell=(1000.0, 2000.0))
    with pytest.raises(ValueError):
        flat_band_eigen_demo(Fractional(1.0), GRID)


def test_disjoint_shells_stay_orthogonal():
    ip = shells_orthogonal(GRID, Fractional(1.0), (1.0, 2.0), (3.0, 4.0), 25.0)
    assert abs(ip) < 1e-12


def test_shell_packet_is_unit():
    u, n = shell_packet(GRID, (1.0, 2.0))
    assert u.norm() == pytest.approx(1.0)
    assert n == int(np.sum((GRID.geometry().xi2 >= 1) & (GRID.geometry().xi2 <= 2)))
