import math
import warnings

import numpy as np
import pytest

from conftest import packet
from nlscatter.diagnostics import (
    BoundConstants,
    PowerFit,
    TimeSeries,
    cauchy_gap_series,
    cook_integrand_series,
    default_window,
    divergence_witness,
    divergence_witness_direct,
    drift,
    fit_exponent,
    fit_growth_exponent,
    fit_log,
    heisenberg_norm_series,
    pairing_lower_check,
    lemma2_upper_check,
    log_lower_bound_check,
    omega,
    outside_mass_check,
    pairing_series,
    propagation_estimate_series,
    quadratic_bound_check,
    read_series_csv,
    refit,
    tail_converges,
    trend_slope,
    write_series_csv,
)
from nlscatter.errors import (
    ConeExceedsBoxError,
    FamilyError,
    InsufficientSamplesError,
)
from nlscatter.evolution import EvolutionParams
from nlscatter.lattice import GridSpec
from nlscatter.potentials import LongRange, ShortRange
from nlscatter.symbols import Fractional

T = np.geomspace(10, 100, 30)


def series(vals, times=T, q="cook_integrand"):
    return TimeSeries(q, times, vals)


# ---------------------------------------------------------------------------
# fits


def test_exact_power_law():
    f = fit_exponent(series(3.0 * T**-2.0))
    assert f.exponent == pytest.approx(-2.0, abs=1e-12)
    assert f.prefactor == pytest.approx(3.0, rel=1e-10)
    assert f.r2 == pytest.approx(1.0)


def test_constant_series_has_zero_exponent():
    f = fit_exponent(series(np.full_like(T, 0.7)))
    assert f.exponent == pytest.approx(0.0, abs=1e-12) and f.r2 == 1.0


def test_noisy_power_law():
    rng = np.random.default_rng(7)
    v = 2.0 * T**-1.5 * (1 + 0.05 * rng.standard_normal(len(T)))
    assert fit_exponent(series(v)).exponent == pytest.approx(-1.5, abs=0.05)


def test_fit_rejections():
    with pytest.raises(InsufficientSamplesError):
        fit_exponent(series(T**-1.0, times=T), window=(10, 12))
    v = T**-1.0
    v[5] = 0.0
    with pytest.raises(InsufficientSamplesError):
        fit_exponent(series(v))
    rng = np.random.default_rng(0)
    assert fit_exponent(series(np.exp(rng.normal(size=len(T))))) is None


def test_default_window():
    t = np.linspace(1, 100, 100)
    assert default_window(t) == (10.0, 90.0)
    assert default_window(np.linspace(20, 38, 10)) == (20.0, 36.0)


def test_growth_exponent_ignores_offset():
    f = fit_growth_exponent(series(5.0 + 2.0 * T**0.5, q="divergence_integral"))
    assert f.exponent == pytest.approx(0.5, abs=1e-3) and f.model == "increment"
    assert fit_exponent(series(5.0 + 2.0 * T**0.5, q="divergence_integral")).exponent < 0.45


def test_log_fit():
    f = fit_log(series(0.3 + 0.2 * np.log(T), q="divergence_integral"))
    assert f.exponent == pytest.approx(0.2) and f.prefactor == pytest.approx(0.3)


def test_trend_slope_has_no_gate():
    rng = np.random.default_rng(1)
    v = np.exp(rng.normal(size=len(T)))
    assert fit_exponent(series(v)) is None
    assert math.isfinite(trend_slope(series(v)))


def test_tail_classification():
    fit = lambda a: PowerFit(a, 1.0, 1.0, (10, 100))  # noqa: E731
    assert tail_converges(fit(-1.5)) and not tail_converges(fit(-0.5))
    assert not tail_converges(fit(-1.0))
    assert not tail_converges(fit(-1.05), margin=0.1)
    assert tail_converges(fit(-1.2), margin=0.1)


def test_series_validation():
    with pytest.raises(ValueError):
        TimeSeries("bogus", T, T)
    with pytest.raises(ValueError):
        TimeSeries("pairing", T[::-1], T)
    with pytest.raises(ValueError):
        TimeSeries("pairing", T, np.full_like(T, np.nan))


def test_csv_roundtrip_bit_exact(tmp_path):
    s = TimeSeries("cook_integrand", T, np.pi * T**-1.3, None, {"a": 1})
    s = s.with_fit(fit_exponent(s))
    p = tmp_path / "s.csv"
    write_series_csv(s, p)
    back, h = read_series_csv(p)
    assert h == s.params_hash
    np.testing.assert_array_equal(back.times, s.times)
    np.testing.assert_array_equal(back.values, s.values)
    assert back.fit == s.fit
    assert refit(back).fit == s.fit


def test_params_hash_sensitivity():
    a = TimeSeries("pairing", T, T, None, {"x": 1, "y": 2})
    b = TimeSeries("pairing", T, T, None, {"y": 2, "x": 1})
    c = TimeSeries("pairing", T, T, None, {"x": 1, "y": 3})
    assert a.params_hash == b.params_hash != c.params_hash


def test_drift():
    s = series(np.concatenate([np.ones(10), 0.9 * np.ones(20)]), q="divergence_integral")
    assert drift(s, (10, 100)) == pytest.approx(0.1)


# ---------------------------------------------------------------------------
# constants


def test_constants_increasing():
    c = BoundConstants.from_symbol(Fractional(1.0), 1.0, 4.0, "increasing", 1, LongRange(0.1, 0.5))
    assert c.Gamma == 16.0
    assert c.c1 == pytest.approx(0.5 * 32.0**-0.5)
    assert c.c2 == pytest.approx(2.0 * 16.0**-2.5)
    assert c.threshold == 1.0
    assert c.c3 == pytest.approx(0.1)


def test_constants_decreasing():
    c = BoundConstants.from_symbol(Fractional(0.25), 1.0, 4.0, "decreasing", 1, LongRange(-0.2, 1.0))
    assert c.Gamma == 1.0  # 4 * 0.25 = 1
    assert c.threshold == pytest.approx(0.125)
    assert c.c3 == pytest.approx(0.2 / 0.125)
    with pytest.raises(ValueError):
        BoundConstants.from_symbol(Fractional(0.25), 1.0, 4.0, "inf")


def test_constants_text():
    c = BoundConstants.from_symbol(Fractional(1.0), 1.0, 4.0, "increasing", 1, ShortRange(0.5, 1.5))
    text = c.to_text()
    assert "constants.Gamma = 16.0" in text and "constants.C = 0.5" in text
    assert "c1" not in text


# ---------------------------------------------------------------------------
# simulated series (small grid)

GRID = GridSpec(1, 4096, 1024.0)


@pytest.fixture(scope="module")
def phi():
    return packet(GRID, 1.0, 4.0, [2.5], 0.1)


def test_cook_integrand_exponent(phi):
    s = cook_integrand_series(phi, Fractional(1.0), ShortRange(0.5, 1.5), np.geomspace(10, 60, 20))
    assert s.fit.exponent == pytest.approx(-1.5, abs=0.1)
    z = cook_integrand_series(phi, Fractional(1.0), None, [1.0, 2.0])
    assert np.all(z.values == 0)


def test_pairing_requirements(phi):
    with pytest.raises(FamilyError):
        pairing_series(phi, Fractional(1.0), ShortRange(0.5, 1.5), [1.0, 2.0])
    with pytest.raises(ValueError):
        pairing_series(phi, Fractional(1.0), LongRange(0.5, 0.5), [0.5, 2.0])
    s = pairing_series(phi, Fractional(1.0), LongRange(0.5, 0.5), np.geomspace(10, 60, 12))
    assert s.fit.exponent == pytest.approx(-0.5, abs=0.1)


def test_heisenberg_series(phi):
    s = heisenberg_norm_series(phi, Fractional(0.5), [0.0, 10.0, 20.0])
    # half-wave: rigid translation at unit speed
    assert s.values[1] ** 2 - s.values[0] ** 2 == pytest.approx(100.0, rel=0.02)


def test_omega_and_gap_agree(phi):
    params = EvolutionParams(Fractional(1.0), ShortRange(0.5, 1.5), 0.05)
    s = cauchy_gap_series(phi, params, [(5.0, 10.0)])
    a, b = omega(phi, params, 5.0), omega(phi, params, 10.0)
    direct = math.sqrt(np.sum(np.abs(a.values - b.values) ** 2) * GRID.cell)
    assert s.values[0] == pytest.approx(direct, rel=1e-10)
    with pytest.raises(ValueError):
        cauchy_gap_series(phi, params, [(5.0, 5.0)])


def test_gap_box_warning():
    g = GridSpec(1, 1024, 64.0)
    p = packet(g, 1.0, 4.0, [2.5], 0.1)
    params = EvolutionParams(Fractional(1.0), ShortRange(0.5, 1.5), 0.05)
    with pytest.warns(Warning, match="beyond half the box"):
        cauchy_gap_series(p, params, [(5.0, 10.0)])


def test_witness_routes_agree(phi):
    params = EvolutionParams(Fractional(1.0), LongRange(0.05, 0.5), 0.05)
    tg = [1.0, 2.0, 4.0, 6.0]
    fast = divergence_witness(phi, params, tg).values
    slow = divergence_witness_direct(phi, params, tg)
    np.testing.assert_allclose(fast, slow, atol=1e-12)
    with pytest.raises(ValueError):
        divergence_witness(phi, params, tg, reference_time=3.0)


def test_propagation_guard(phi):
    with pytest.raises(ConeExceedsBoxError):
        propagation_estimate_series(phi, Fractional(1.0), "increasing", 1.0, 4.0, [10.0, 600.0])


def test_falsification_control_keeps_mass(phi):
    # max group speed on the band is 2 * 4 = 8
    s = propagation_estimate_series(phi, Fractional(1.0), "increasing", 1.0, 4.0,
                                    np.linspace(10, 50, 10), threshold=8.5)
    assert np.all(s.values**2 >= 0.99)


def test_pairing_and_mass_bounds(phi):
    pot = LongRange(0.1, 0.5)
    sym = Fractional(1.0)
    c = BoundConstants.from_symbol(sym, 1.0, 4.0, "increasing", 1, pot)
    times = np.geomspace(1, 30, 12)
    assert pairing_lower_check(phi, sym, pot, times, c)
    assert outside_mass_check(phi, sym, times, c)
    assert quadratic_bound_check(phi, sym, times, c)


def test_upper_bound_calibration_and_falsification():
    g = GridSpec(1, 8192, 2048.0)
    p = packet(g, 1.0, 4.0, [2.5], 0.1)
    sym, pot = Fractional(0.5), LongRange(0.1, 0.5)
    c = BoundConstants.from_symbol(sym, 1.0, 4.0, "increasing", 1, pot)
    times = np.geomspace(1, 100, 30)
    res = lemma2_upper_check(p, sym, pot, times, 2, c)
    assert res.ok and res.c4 >= 0
    bad = lemma2_upper_check(p, sym, pot, times, 2, c, c3=0.5 * c.c3)
    assert not bad.ok and bad.check.worst_time > 5


def test_log_lower_bound():
    t = np.geomspace(1, 100, 20)
    s = TimeSeries("divergence_integral", t, 0.1 * np.log(t))
    assert log_lower_bound_check(s, 1.0, 0.1, 1.0, (1, 100), factor=0.5)
    assert not log_lower_bound_check(s, 1.0, 0.3, 1.0, (1, 100), factor=0.5)


def test_warning_free_default_run(phi):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cook_integrand_series(phi, Fractional(1.0), ShortRange(0.5, 1.5), [1.0, 2.0, 3.0])
