import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmlab.counterexample import (
    TaylorDatum,
    convexity_margin,
    crosscheck_fd,
    datum_from_n,
    dini_condition,
    find_min_n,
    vt_origin,
)
from pmlab.errors import ConfigError
from pmlab.nonlinearity import ConcretePM

PM = ConcretePM()
SQRT2 = math.sqrt(2.0)

#: regression constant: smallest n making all three conditions hold for the
#: concrete log profile, frozen after the first exhaustive scan
FROZEN_MIN_N = 4


# ---------------------------------------------------------------------------
# datum family


@pytest.mark.parametrize(
    "n,expected",
    [
        (1, (1.0, 1.0, 1.0, -1.0)),
        (2, (2.0, 1.0, 8.0, -4.0)),
        (10, (10.0, 1.0, 1000.0, -100.0)),
    ],
)
def test_datum_family(n, expected):
    d = datum_from_n(n)
    assert (d.k1, d.k2, d.h1, d.h2) == expected


def test_datum_rejects_nonpositive_n():
    with pytest.raises(ConfigError):
        datum_from_n(0)


def test_unit_gradient_at_origin():
    # |grad u0(0,0)| = 1 to machine precision for every datum
    for n in (1, 4, 17):
        ux, uy = datum_from_n(n).gradient(0.0, 0.0)
        assert float(ux * ux + uy * uy) == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------------------
# closed-form conditions


def test_dini_condition_values():
    assert dini_condition(datum_from_n(5)) == pytest.approx(2 * SQRT2, abs=1e-14)
    assert dini_condition(TaylorDatum(1.0, 0.0, 1.0, 1.0)) == 0.0
    assert dini_condition(TaylorDatum(1.0, -1.0, 1.0, 1.0)) < 0.0


def test_convexity_margin_values():
    # n = 10: 800 - 27000 sqrt2
    assert convexity_margin(datum_from_n(10)) == pytest.approx(
        800.0 - 27000.0 * SQRT2, rel=1e-14
    )
    assert convexity_margin(datum_from_n(10)) == pytest.approx(-3.738e4, rel=1e-3)
    # n = 1: the cubic terms cancel, leaving 8
    assert convexity_margin(datum_from_n(1)) == pytest.approx(8.0, abs=1e-12)
    # k1 = k2, h1 = -h2: cancellation leaves 8 k1^4 > 0
    assert convexity_margin(TaylorDatum(3.0, 3.0, 5.0, -5.0)) == pytest.approx(
        8 * 3.0**4, abs=1e-9
    )


def test_vt_origin_values():
    # n = 10 with phi'(1) = 1/2, phi'''(1) = -1/2
    expected = 0.5 * (3 * SQRT2 * 900.0 + 40.0 - 600.0 - 6.0) - 121.0
    assert vt_origin(datum_from_n(10), PM) == pytest.approx(expected, rel=1e-14)
    assert vt_origin(datum_from_n(10), PM) == pytest.approx(1.505e3, rel=1e-3)
    assert vt_origin(TaylorDatum(0.0, 0.0, 0.0, 0.0), PM) == 0.0
    assert vt_origin(datum_from_n(1), PM) == pytest.approx(-8.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=-20, max_value=20),
    st.floats(min_value=-20, max_value=20),
    st.floats(min_value=-100, max_value=100),
    st.floats(min_value=-100, max_value=100),
)
def test_vt_origin_symmetric_under_pair_exchange(k1, k2, h1, h2):
    # exchanging (k1, h1) <-> (k2, h2) leaves the formula unchanged
    a = vt_origin(TaylorDatum(k1, k2, h1, h2), PM)
    b = vt_origin(TaylorDatum(k2, k1, h2, h1), PM)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# minimal n scan


def test_find_min_n_frozen_value():
    assert find_min_n(PM, 50) == FROZEN_MIN_N


def test_find_min_n_below_threshold_returns_none():
    assert find_min_n(PM, 1) is None
    assert find_min_n(PM, FROZEN_MIN_N - 1) is None


def test_conditions_monotone_beyond_minimum():
    # once both closed forms flip, they stay flipped up to the scan cap
    for n in range(FROZEN_MIN_N, 51):
        d = datum_from_n(n)
        assert convexity_margin(d) < 0.0
        assert vt_origin(d, PM) > 0.0
        assert dini_condition(d) > 0.0


def test_smaller_n_suffices_without_third_derivative_penalty():
    # dropping the negative phi'''(1) contribution can only help the sign
    class FlatThird(ConcretePM):
        def phi(self, sigma, order=0):
            if order == 3:
                return 0.0 * np.asarray(sigma, dtype=float) if np.ndim(sigma) else 0.0
            return super().phi(sigma, order)

    n_flat = find_min_n(FlatThird(), 50)
    assert n_flat is not None
    assert n_flat <= FROZEN_MIN_N


# ---------------------------------------------------------------------------
# finite-difference cross-check


def test_crosscheck_at_frozen_n():
    datum = datum_from_n(FROZEN_MIN_N)
    result = crosscheck_fd(datum, PM, patch_half_width=1e-3, patch_n=64)
    assert result.closed_form > 0.0
    assert result.rel_err <= 1e-2
    assert result.fd_value == pytest.approx(result.closed_form, rel=1e-2)


def test_crosscheck_flat_perturbation():
    result = crosscheck_fd(TaylorDatum(0.0, 0.0, 0.0, 0.0), PM)
    assert result.closed_form == 0.0
    # double divided differences amplify rounding on the pure ramp
    assert result.fd_value == pytest.approx(0.0, abs=1e-6)
    assert result.rel_err <= 1e-6


def test_crosscheck_refinement_order():
    # observed convergence order >= 1.5 under patch refinement
    datum = datum_from_n(FROZEN_MIN_N)
    errs = [
        crosscheck_fd(datum, PM, patch_half_width=1e-3, patch_n=n).rel_err
        for n in (16, 32, 64)
    ]
    assert errs[0] > errs[1] > errs[2]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 1.5


def test_crosscheck_rejects_wide_patch():
    with pytest.raises(ConfigError):
        crosscheck_fd(datum_from_n(4), PM, patch_half_width=0.5)
