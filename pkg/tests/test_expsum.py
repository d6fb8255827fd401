import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from zetabound.errors import DomainError, HypothesisError, RefusalError
from zetabound.expsum import (
    LOG_TABLE_LIMIT,
    DiffLogPhase,
    LogPhase,
    PhaseSpec,
    differenced_sums,
    eval_exp_sum,
    exp_terms,
    kusmin_landau_bound,
    kusmin_landau_parameters,
    nearest_int_dist,
    weyl_difference_bound,
)
from zetabound.precision import workdps


def geometric(theta: float, lo: int, hi: int) -> complex:
    return sum(cmath.exp(2j * math.pi * theta * n) for n in range(lo, hi))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(t=-1.0, r=1, K=10),
        dict(t=float("inf"), r=1, K=10),
        dict(t=1e6, r=0, K=10),
        dict(t=1e6, r=1, K=1),
        dict(t=1e6, r=1, K=10, L=11),
        dict(t=1e6, r=1, K=10, m=10),
    ],
)
def test_phase_spec_rejects_bad_parameters(kwargs):
    with pytest.raises(DomainError):
        PhaseSpec(**kwargs)


def test_linear_phase_matches_geometric_series():
    s = eval_exp_sum(lambda n: 0.1234 * n, 3, 500)
    assert abs(s.value - geometric(0.1234, 3, 500)) < 1e-11
    assert s.terms == 497


def test_sum_range_is_half_open_with_real_endpoints():
    s = eval_exp_sum(lambda n: Fraction(1, 3) * n, 0.5, 3.0)
    assert s.terms == 2  # n = 1, 2
    assert abs(s.value - geometric(1 / 3, 1, 3)) < 1e-14


def test_empty_range_is_zero():
    s = eval_exp_sum(lambda n: n / 7, 5, 5)
    assert (s.re, s.im, s.terms) == (0.0, 0.0, 0)


def test_integer_phase_sums_to_count():
    s = eval_exp_sum(lambda n: 10**30 * n, 0, 1000)
    assert s.re == 1000 and s.im == 0


def test_oracle_cap_is_enforced():
    with pytest.raises(RefusalError):
        eval_exp_sum(lambda n: 0.5 * n, 0, 101, cap=100)
    with pytest.raises(RefusalError):
        exp_terms(lambda n: 0.5 * n, 0, 101, cap=100)


def test_non_finite_phase_is_rejected():
    with pytest.raises(DomainError):
        eval_exp_sum(lambda n: float("nan"), 0, 3)


def test_log_phase_matches_mpmath_at_large_height():
    t, shift = 1e11, 4000
    phase = LogPhase(t, shift)
    s = eval_exp_sum(phase, 0, 300)
    with workdps(50):
        tau = mpmath.mpf(t) / (2 * mpmath.pi)
        want = mpmath.fsum(mpmath.expjpi(2 * tau * mpmath.log(shift + n)) for n in range(300))
    assert abs(s.value - complex(want)) <= s.err + 1e-12


def test_log_phase_far_from_table_uses_direct_reduction():
    shift = LOG_TABLE_LIMIT + 17
    phase = LogPhase(3e9, shift)
    fr = phase.frac(np.arange(5))
    with workdps(50):
        for k, f in enumerate(fr):
            v = phase(k)
            assert abs(f - float(v - mpmath.floor(v))) < 1e-14


def test_difference_phase_is_difference_of_logs():
    g = DiffLogPhase(1e8, 500, 7)
    with workdps():
        assert abs(g(3) - (g.base(10) - g.base(3))) < mpmath.mpf(10) ** -30
        h = mpmath.mpf(10) ** -12
        numeric = (g.derivative(3 + h) - g.derivative(3 - h)) / (2 * h)
        assert abs(numeric - g.second_derivative(3)) < 1e-6 * abs(numeric)


def test_nearest_int_dist_handles_all_number_types():
    assert nearest_int_dist(2.25) == 0.25
    assert nearest_int_dist(Fraction(7, 3)) == Fraction(1, 3)
    with workdps():
        assert nearest_int_dist(mpmath.mpf("-1.75")) == mpmath.mpf("0.25")
    with pytest.raises(DomainError):
        nearest_int_dist(float("inf"))


def test_kusmin_landau_rejects_invalid_parameters():
    with pytest.raises(DomainError):
        kusmin_landau_bound(1, 5)
    with pytest.raises(DomainError):
        kusmin_landau_bound(5, 0.5)
    with pytest.raises(HypothesisError):
        kusmin_landau_bound(1.5, 1.5)


def test_kusmin_landau_parameters_reject_integer_crossing():
    with pytest.raises(HypothesisError):
        kusmin_landau_parameters(lambda x: mpmath.mpf(x) / 10, 5, 15)
    with pytest.raises(HypothesisError):
        kusmin_landau_parameters(lambda x: mpmath.mpf(2), 0, 10)


def test_constant_derivative_is_accepted():
    ell, U, V = kusmin_landau_parameters(lambda x: mpmath.mpf("0.3"), 0, 10)
    assert ell == 0
    kusmin_landau_bound(U, V)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(-3, 3),
    st.floats(0.01, 0.49),
    st.floats(0.01, 0.49),
    st.integers(1, 1500),
    st.booleans(),
)
def test_kusmin_landau_dominates_quadratic_phases(ell, th1, th2, L, increasing):
    lo, hi = ell + th1, ell + 1 - th2
    da, db = (lo, hi) if increasing else (hi, lo)

    def f(x):
        return da * x + (db - da) * x * x / (2 * L)

    def fp(x):
        return mpmath.mpf(da) + (mpmath.mpf(db) - da) * x / L

    _, U, V = kusmin_landau_parameters(fp, 0, L)
    s = eval_exp_sum(f, 0, L)
    assert abs(s) <= kusmin_landau_bound(U, V) + s.err


def test_weyl_bound_with_one_difference_is_trivial():
    assert weyl_difference_bound(10, 1, [0.0]) == 100


def test_weyl_bound_validates_inputs():
    with pytest.raises(DomainError):
        weyl_difference_bound(10, 2, [1.0])
    with pytest.raises(DomainError):
        weyl_difference_bound(0, 1, [1.0])
    with pytest.raises(DomainError):
        weyl_difference_bound(5, 1, [-1.0])


def test_differenced_sums_match_direct_evaluation():
    def f(x):
        return 0.37 * x * x + 0.11 * x

    out = differenced_sums(f, 4, 30, 5)
    for m, v in enumerate(out, 1):
        direct = eval_exp_sum(lambda n: f(n + m) - f(n), 5, 5 + 30 - m)
        assert abs(v - abs(direct)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(2, 120), st.data())
def test_weyl_inequality_dominates_the_sum(alpha, beta, L, data):
    M = data.draw(st.integers(1, L))

    def f(x):
        return alpha * x * x + beta * x

    s = eval_exp_sum(f, 1, L + 1)
    bound = weyl_difference_bound(L, M, differenced_sums(f, 0, L, M))
    assume(bound > 0)
    assert abs(s) ** 2 <= bound * (1 + 1e-12)
