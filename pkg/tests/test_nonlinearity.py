import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmlab.errors import DomainError, HypothesisError, RangeError
from pmlab.nonlinearity import (
    ConcretePM,
    Tabulated,
    check_hypotheses,
    coeff_g,
    coeff_g_array,
    constants,
    eval_phi,
    h_inverse,
    truncated_flux_h,
)

PM = ConcretePM()


def central_diff(f, x, order, h=None):
    """Finite-difference oracle for derivatives up to order 3."""
    if h is None:
        h = {1: 1e-5, 2: 1e-4, 3: 1e-3}[order]  # h^-k amplifies roundoff
    if order == 1:
        return (f(x + h) - f(x - h)) / (2 * h)
    if order == 2:
        return (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    if order == 3:
        return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h**3)
    raise ValueError(order)


def closed_form_g(sigma):
    """The concrete-profile diffusivity, independent of the flux inverse."""
    p = sigma - sigma**2
    return np.sqrt(p) + 2.0 * p


# ---------------------------------------------------------------------------
# eval_phi


def test_phi_even_implies_zero_slope_at_origin():
    assert eval_phi(PM, 0.0, 1) == 0.0


@pytest.mark.parametrize(
    "order,expected",
    [(1, 0.5), (2, 0.0), (3, -0.5)],
)
def test_phi_derivatives_at_critical_slope(order, expected):
    assert eval_phi(PM, 1.0, order) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3])
@pytest.mark.parametrize("sigma", [0.3, 1.0, 1.7])
def test_phi_derivatives_match_finite_differences(order, sigma):
    fd = central_diff(lambda s: eval_phi(PM, s, 0), sigma, order)
    tol = 1e-6 if order < 3 else 1e-5
    assert eval_phi(PM, sigma, order) == pytest.approx(fd, abs=tol)


def test_phi_critical_derivatives_against_fd_oracle():
    # the acceptance-grade check: oracle within 1e-6 at the critical slope
    for order in (1, 2, 3):
        fd = central_diff(lambda s: eval_phi(PM, s, 0), 1.0, order)
        assert eval_phi(PM, 1.0, order) == pytest.approx(fd, abs=1e-6)


def test_phi_rejects_bad_order():
    with pytest.raises(DomainError):
        eval_phi(PM, 0.5, 4)


def test_tabulated_range_error():
    sig = np.linspace(0.0, 2.0, 257)
    prof = Tabulated(sig, np.asarray(PM.phi(sig)))
    with pytest.raises(RangeError):
        prof.phi(5.0, 0)


def test_tabulated_matches_concrete_derivatives():
    sig = np.linspace(0.0, 3.0, 2049)
    prof = Tabulated(sig, np.asarray(PM.phi(sig)))
    for order in (1, 2, 3):
        for s in (0.25, 1.0, 1.5):
            assert prof.phi(s, order) == pytest.approx(
                eval_phi(PM, s, order), abs=5e-6
            )


# ---------------------------------------------------------------------------
# check_hypotheses


def test_concrete_profile_satisfies_all_hypotheses():
    report = check_hypotheses(PM, 256)
    assert report.all_hold
    assert report.convex_below.margin > 0
    assert report.strict_inflection.margin == pytest.approx(0.5, abs=1e-12)


def test_heat_like_profile_fails_flatness_check():
    sig = np.linspace(0.0, 2.0, 257)
    prof = Tabulated(sig, 0.5 * sig**2, name="heat")
    report = check_hypotheses(prof, 64)
    assert not report.flat_at_critical.holds
    assert report.flat_at_critical.margin == pytest.approx(1.0, abs=1e-6)
    assert not report.all_hold


def test_degenerate_inflection_fails_strictness_check():
    # phi'' = (1 - s^2)^2 vanishes to second order at 1, so phi'''(1) = 0
    sig = np.linspace(0.0, 2.0, 2049)
    phi = sig**2 / 2 - sig**4 / 6 + sig**6 / 30
    report = check_hypotheses(Tabulated(sig, phi, name="degenerate"), 64)
    assert report.flat_at_critical.holds
    assert not report.strict_inflection.holds


def test_sample_count_floor():
    with pytest.raises(DomainError):
        check_hypotheses(PM, 8)


# ---------------------------------------------------------------------------
# truncated_flux_h


def test_flux_plateau_above_critical():
    assert truncated_flux_h(PM, 2.0) == pytest.approx(0.5, abs=1e-15)


def test_flux_equals_phi_prime_inside():
    # phi'(0.5) = 0.5/1.25
    assert truncated_flux_h(PM, 0.5) == pytest.approx(0.4, abs=1e-15)


def test_flux_constant_below_minus_half():
    # joiner value at -1/2 is -phi''(0)/4 with phi''(0) = 1
    assert truncated_flux_h(PM, -1.0) == pytest.approx(-0.25, abs=1e-15)
    assert truncated_flux_h(PM, -7.0) == truncated_flux_h(PM, -0.5)


def test_flux_monotone_and_c1_at_critical():
    # nondecreasing on a dense sample; one-sided slopes agree at 1
    s = np.linspace(-2.0, 3.0, 4001)
    vals = truncated_flux_h(PM, s)
    assert np.all(np.diff(vals) >= -1e-15)
    eps = 1e-6
    left = (truncated_flux_h(PM, 1.0) - truncated_flux_h(PM, 1.0 - eps)) / eps
    right = (truncated_flux_h(PM, 1.0 + eps) - truncated_flux_h(PM, 1.0)) / eps
    assert abs(left - right) < 1e-5


def test_flux_c1_at_zero_and_joiner_knee():
    eps = 1e-7
    for point in (0.0, -0.5):
        left = (
            truncated_flux_h(PM, point) - truncated_flux_h(PM, point - eps)
        ) / eps
        right = (
            truncated_flux_h(PM, point + eps) - truncated_flux_h(PM, point)
        ) / eps
        assert abs(left - right) < 1e-5


# ---------------------------------------------------------------------------
# h_inverse


def test_inverse_recovers_exact_algebraic_root():
    # s/(1+s^2) = 0.4  =>  s in {1/2, 2}; the branch in (0,1) is 1/2
    assert h_inverse(PM, 0.4) == pytest.approx(0.5, abs=1e-9)


def test_inverse_approaches_one_near_plateau():
    assert h_inverse(PM, 0.5 - 1e-8) > 0.999


def test_inverse_rejects_endpoints():
    for y in (0.0, 0.5, 0.7):
        with pytest.raises(DomainError):
            h_inverse(PM, y)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=0.5 - 1e-6))
def test_inverse_round_trip(y):
    # h(h^-1(y)) = y within twice the root tolerance
    sigma = h_inverse(PM, y)
    assert 0.0 < sigma < 1.0
    assert abs(truncated_flux_h(PM, sigma) - y) <= 2e-12


# ---------------------------------------------------------------------------
# coeff_g


def test_diffusivity_hand_value():
    # closed form at 1/4: sqrt(3/16) + 3/8
    expected = math.sqrt(3.0 / 16.0) + 0.375
    assert coeff_g(PM, 0.25) == pytest.approx(expected, abs=1e-10)
    assert expected == pytest.approx(0.8080127, abs=1e-7)


def test_generic_route_matches_closed_form():
    # I3 on a dense sample of (0, 1/2)
    sig = np.linspace(1e-6, 0.5 - 1e-6, 1000)
    generic = np.array([coeff_g(PM, s) for s in sig])
    assert np.abs(generic - closed_form_g(sig)).max() <= 1e-8


def test_diffusivity_square_root_limit():
    # g(s)/sqrt(s) -> sqrt(2 |phi'''(1)|) = 1
    s = 1e-8
    assert coeff_g(PM, s) / math.sqrt(s) == pytest.approx(1.0, abs=1e-3)


def test_diffusivity_domain_errors():
    for s in (0.0, 0.5, -0.1, 1.0):
        with pytest.raises(DomainError):
            coeff_g(PM, s)


def test_vectorised_diffusivity_matches_scalar():
    sig = np.linspace(0.01, 0.49, 97)
    fast = coeff_g_array(PM, sig)
    slow = np.array([coeff_g(PM, s) for s in sig])
    assert np.abs(fast - slow).max() <= 1e-8


def test_vectorised_diffusivity_tabulated_profile():
    grid = np.linspace(0.0, 2.0, 8193)
    prof = Tabulated(grid, np.asarray(PM.phi(grid)))
    sig = np.linspace(0.02, 0.45, 33)
    fast = coeff_g_array(prof, sig)
    assert np.abs(fast - closed_form_g(sig)).max() < 5e-4


# ---------------------------------------------------------------------------
# constants


def test_constants_unit_outer_radius():
    c = constants(PM, 1.0)
    assert c.G == pytest.approx(1.0, abs=1e-15)
    assert c.A == pytest.approx(0.5, abs=1e-15)
    assert c.k0 == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_constants_scaling_with_outer_radius():
    # k0 = sqrt(2 phi'(1) |phi'''(1)|)/r2 to machine precision
    c = constants(PM, 1.5)
    assert c.k0 == pytest.approx(math.sqrt(2 * 0.5 * 0.5) / 1.5, abs=1e-15)
    assert c.k0 == pytest.approx(0.47140, abs=1e-5)
    big = constants(PM, 1e9)
    assert big.k0 < 1e-9


def test_constants_require_strict_inflection():
    sig = np.linspace(0.0, 2.0, 2049)
    degenerate = Tabulated(sig, sig**2 / 2 - sig**4 / 6 + sig**6 / 30)
    with pytest.raises(HypothesisError):
        constants(degenerate, 1.0)


def test_constants_reject_bad_radius():
    with pytest.raises(DomainError):
        constants(PM, 0.0)
