from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetabound.precision import (
    LOG_TABLE,
    frac_rounding_bound,
    frac_turns,
    get_dps,
    set_dps,
    to_dd,
    two_prod,
    two_sum,
    workdps,
)

# error-free transforms are exact only away from overflow and underflow
finite = st.floats(min_value=-1e100, max_value=1e100).filter(lambda x: x == 0 or abs(x) > 1e-100)


@given(finite, finite)
def test_two_prod_is_exact(a, b):
    p, e = two_prod(a, b)
    assert Fraction(float(p)) + Fraction(float(e)) == Fraction(a) * Fraction(b)


@given(finite, finite)
def test_two_sum_is_exact(a, b):
    s, e = two_sum(a, b)
    assert Fraction(float(s)) + Fraction(float(e)) == Fraction(a) + Fraction(b)


def test_to_dd_keeps_about_32_digits():
    with workdps(50):
        x = mpmath.pi * 10**7
        hi, lo = to_dd(x)
        assert abs(mpmath.mpf(hi) + lo - x) < mpmath.mpf(10) ** -24


def test_workdps_rejects_low_precision():
    with pytest.raises(ValueError):
        with workdps(20):
            pass
    with pytest.raises(ValueError):
        set_dps(29)


def test_set_dps_changes_default():
    old = get_dps()
    try:
        set_dps(45)
        with workdps():
            assert mpmath.mp.dps == 45
    finally:
        set_dps(old)


def test_log_table_matches_mpmath():
    n = np.array([1, 2, 3, 1000, 123457])
    hi, lo = LOG_TABLE.lookup(n)
    with workdps(50):
        for k, h, l in zip(n, hi, lo):
            assert abs(mpmath.mpf(h) + l - mpmath.log(int(k))) < mpmath.mpf(10) ** -30


def test_log_table_rejects_zero():
    with pytest.raises(ValueError):
        LOG_TABLE.lookup(np.array([0, 1]))


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e3, max_value=1e12), st.integers(min_value=1, max_value=10**5))
def test_frac_turns_at_large_height(t, n):
    with workdps(60):
        tau = mpmath.mpf(t) / (2 * mpmath.pi)
        exact = tau * mpmath.log(n)
        want = float(exact - mpmath.floor(exact))
        hi, lo = LOG_TABLE.lookup(np.array([n]))
        got = float(frac_turns(to_dd(tau), hi, lo)[0])
    d = abs(got - want)
    d = min(d, 1 - d)
    assert d <= frac_rounding_bound(float(exact))
