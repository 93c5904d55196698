import math

import numpy as np
import pytest

from nlscatter.errors import DegenerateThresholdWarning, DomainError, MonotonicityError
from nlscatter.symbols import (
    FlatBand,
    Fractional,
    Logarithmic,
    Relativistic,
    Tabulated,
    certify_classes,
    cone_threshold,
    eval_psi,
    eval_psi_prime,
    group_speed_envelope,
    group_speed_range,
    symbol_from_dict,
)

ALL_SYMBOLS = [
    Fractional(0.25), Fractional(0.5), Fractional(1.0), Fractional(1.5),
    Relativistic(0.0), Relativistic(1.0), Logarithmic(),
    FlatBand(1.0, 2.0, 3.0),
    Tabulated(((0.0, 0.0), (1.0, 3.0), (4.0, 4.6), (10.0, 5.0))),
]


def test_fractional_values():
    assert eval_psi(Fractional(1.0), 4.0) == 4.0
    assert eval_psi(Fractional(0.5), 4.0) == 2.0
    assert eval_psi_prime(Fractional(1.0), 7.3) == 1.0


def test_massless_relativistic_is_square_root():
    assert eval_psi(Relativistic(0.0), 9.0) == pytest.approx(3.0, rel=1e-15)


def test_relativistic_no_cancellation():
    # sqrt(s + m^2) - m loses all digits at tiny s; the library must not
    s = 1e-14
    assert eval_psi(Relativistic(1.0), s) == pytest.approx(s / 2, rel=1e-10)


def test_half_power_envelope_constant():
    env = group_speed_envelope(Fractional(0.5), np.geomspace(0.01, 100, 50))
    np.testing.assert_allclose(env, 0.5, rtol=1e-14)


def test_envelope_quarter_power():
    s = Fractional(0.25)
    assert group_speed_envelope(s, 1.0) == pytest.approx(0.25, rel=1e-14)
    assert group_speed_envelope(s, 4.0) == pytest.approx(0.125, rel=1e-14)
    assert group_speed_envelope(Fractional(1.0), 3.0) == 3.0


@pytest.mark.parametrize("sym", ALL_SYMBOLS, ids=lambda s: s.kind)
def test_derivative_matches_centered_difference(sym):
    for sigma in np.geomspace(0.05, 50, 37):
        if isinstance(sym, FlatBand) and min(abs(sigma - 1), abs(sigma - 2)) < 1e-3:
            continue
        if isinstance(sym, Tabulated) and np.min(np.abs(sigma - np.array([1, 4, 10]))) < 1e-3:
            continue
        h = 1e-5 * sigma
        fd = (eval_psi(sym, sigma + h) - eval_psi(sym, sigma - h)) / (2 * h)
        d = eval_psi_prime(sym, sigma)
        assert abs(fd - d) <= 1e-6 * (1 + abs(d)), (sym, sigma)


@pytest.mark.parametrize("sym", ALL_SYMBOLS, ids=lambda s: s.kind)
def test_envelope_is_definition(sym):
    s = np.geomspace(0.1, 10, 20)
    np.testing.assert_array_equal(group_speed_envelope(sym, s), eval_psi_prime(sym, s * s) * s)


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_psi(Fractional(0.5), -1.0)
    with pytest.raises(DomainError):
        eval_psi(Fractional(0.5), float("nan"))
    with pytest.raises(DomainError):
        eval_psi_prime(Fractional(0.5), 0.0)  # rho < 1: slope blows up at 0
    assert eval_psi(Fractional(0.5), 0.0) == 0.0
    assert eval_psi(Logarithmic(), 0.0) == 0.0


def test_flat_band_exact_zero_slope():
    fb = FlatBand(1.0, 2.0, 3.0)
    assert eval_psi_prime(fb, 1.5) == 0.0
    np.testing.assert_array_equal(eval_psi(fb, np.linspace(1, 2, 11)), 3.0)


def test_tabulated_monotone_interpolant():
    tb = Tabulated(((0.0, 0.0), (1.0, 3.0), (4.0, 4.6), (10.0, 5.0)))
    s = np.linspace(0, 10, 2001)
    assert np.all(np.diff(eval_psi(tb, s)) >= 0)
    assert eval_psi(tb, 1.0) == pytest.approx(3.0)


@pytest.mark.parametrize("rho", [0.25, 0.5, 1.0])
def test_bernstein_to_order_four(rho):
    rep = certify_classes(Fractional(rho), k_max=4)
    assert rep.in_tilde_B and rep.in_B_up_to_order >= 4


def test_rho_three_halves_fails_at_order_two():
    rep = certify_classes(Fractional(1.5), k_max=4)
    assert rep.in_tilde_B and rep.in_B_up_to_order == 1
    assert "order 2" in rep.first_violation


@pytest.mark.parametrize("rho", [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 1.0, 1.5])
def test_envelope_monotonicity_rule(rho):
    rep = certify_classes(Fractional(rho))
    assert rep.envelope_increasing == (rho >= 0.5)
    assert rep.envelope_decreasing == (rho <= 0.5)
    assert rep.envelope_constant == (rho == 0.5)


def test_relativistic_increasing():
    rep = certify_classes(Relativistic(1.0), (0.01, 100))
    assert rep.in_tilde_B and rep.psi_prime_sigma_monotone == "increasing"


def test_order_implies_tilde_class():
    for sym in ALL_SYMBOLS:
        rep = certify_classes(sym, (0.05, 20))
        if rep.in_B_up_to_order >= 1:
            assert rep.in_tilde_B


def test_report_text_is_flat():
    text = certify_classes(Fractional(0.5)).to_text()
    assert all(" = " in ln for ln in text.splitlines())
    assert "class.envelope_constant = true" in text


def test_cone_thresholds():
    assert cone_threshold(Fractional(1.0), 1, 2, "increasing") == 1.0
    assert cone_threshold(Fractional(0.25), 1, 4, "decreasing") == pytest.approx(0.125, rel=1e-14)
    with pytest.raises(MonotonicityError):
        cone_threshold(Fractional(1.0), 1, 2, "decreasing")
    with pytest.raises(MonotonicityError):
        cone_threshold(Logarithmic(), 0.5, 3, "increasing")


def test_flat_band_inf_threshold_warns():
    with pytest.warns(DegenerateThresholdWarning):
        assert cone_threshold(FlatBand(1.0, 2.0, 3.0), 0.5, 2.0, "inf") == 0.0


@pytest.mark.parametrize("rho", [0.25, 0.5, 0.75, 1.0])
def test_inf_threshold_below_monotone_modes(rho):
    sym = Fractional(rho)
    inf = cone_threshold(sym, 0.7, 3.0, "inf")
    for mode in ("increasing", "decreasing"):
        try:
            assert inf <= cone_threshold(sym, 0.7, 3.0, mode) * (1 + 1e-12)
        except MonotonicityError:
            pass


def test_group_speed_range_is_twice_envelope():
    lo, hi = group_speed_range(Fractional(1.0), 1.0, 4.0)
    assert (lo, hi) == pytest.approx((2.0, 8.0))


def test_symbol_from_dict_roundtrip():
    for sym in ALL_SYMBOLS:
        assert symbol_from_dict(sym.to_dict()) == sym
    with pytest.raises(KeyError):
        symbol_from_dict({"kind": "fractional", "rho": 1, "extra": 2})
    with pytest.raises(KeyError):
        symbol_from_dict({"kind": "nope"})


def test_limits():
    assert Fractional(0.5).limit_at_zero() == 0.0
    assert math.isinf(Fractional(0.5).limit_at_infinity())
    assert Tabulated(((0.0, 1.0), (2.0, 5.0))).limit_at_infinity() == 5.0


def test_concurrent_evaluation_is_consistent():
    from concurrent.futures import ThreadPoolExecutor
    sym = Tabulated(((0.0, 0.0), (1.0, 3.0), (4.0, 4.6)))
    s = np.linspace(0, 4, 1001)
    want = eval_psi(sym, s)
    with ThreadPoolExecutor(8) as ex:
        outs = list(ex.map(lambda _: eval_psi(sym, s), range(32)))
    for o in outs:
        np.testing.assert_array_equal(o, want)
