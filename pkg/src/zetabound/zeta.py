"""Zeta on the critical line: Riemann-Siegel main sum, explicit remainder, reference values.

``reference_zeta`` is an independent oracle.  Up to ``EM_LIMIT`` it uses
Euler-Maclaurin summation with a rigorous tail bound; between ``EM_LIMIT``
and ``REFERENCE_CAP`` it falls back to mpmath's zeta (Riemann-Siegel for
large heights) with an error estimate from two working precisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np
from mpmath import mpc, mpf

from .errors import DomainError, PrecisionError, RefusalError
from .expsum import ComplexSum
from .precision import EPS, LOG_TABLE, frac_rounding_bound, frac_turns, get_dps, to_dd, to_mpf, workdps

RS_MIN_T = 200
REFERENCE_CAP = 1e9
EM_LIMIT = 1e6
ACCEPT_ERROR = 1e-6
# main sums with at most this many terms are evaluated entirely in mpmath
MP_TERMS = 2000
EM_MAX_CORRECTIONS = 60


class Method(str, Enum):
    EULER_MACLAURIN = "euler_maclaurin"
    RIEMANN_SIEGEL = "riemann_siegel"


@dataclass(frozen=True)
class ZetaPoint:
    t: float
    value: mpc
    abs_value: mpf
    method: Method
    est_error: float


def n1_of(t) -> int:
    """floor(sqrt(t / 2pi)), the Riemann-Siegel main sum length."""
    with workdps():
        return int(mpmath.floor(mpmath.sqrt(to_mpf(t) / (2 * mpmath.pi))))


def _check_rs_domain(t) -> None:
    if not t >= RS_MIN_T:
        raise DomainError(f"t must be >= {RS_MIN_T}, got {t}")


def _dirichlet_block(t, n_max: int, sign: int, dps: int | None = None) -> ComplexSum:
    """sum_{n=1}^{n_max} n^{-1/2} e^{sign * i t log n} with a rounding-error bound."""
    if n_max <= 0:
        return ComplexSum(0.0, 0.0, 0)
    with workdps(dps):
        t_mp = to_mpf(t)
        if n_max <= MP_TERMS:
            total = mpmath.fsum(
                mpmath.expjpi(sign * t_mp * mpmath.log(n) / mpmath.pi) / mpmath.sqrt(n)
                for n in range(1, n_max + 1)
            )
            tol = float(mpf(10) ** (3 - mpmath.mp.dps)) * n_max
            return ComplexSum(float(total.real), float(total.imag), n_max, tol)
        tau_mp = t_mp / (2 * mpmath.pi)
        tau = to_dd(tau_mp)
    n = np.arange(1, n_max + 1, dtype=np.int64)
    hi, lo = LOG_TABLE.lookup(n)
    ang = 2.0 * np.pi * frac_turns(tau, hi, lo)
    amp = 1.0 / np.sqrt(n.astype(np.float64))
    re = math.fsum(amp * np.cos(ang))
    im = sign * math.fsum(amp * np.sin(ang))
    phase_err = 2.0 * np.pi * frac_rounding_bound(float(tau_mp) * math.log(n_max))
    # sum of n^{-1/2} <= 2 sqrt(n_max); each term carries phase + trig + amplitude rounding
    err = 2.0 * math.sqrt(n_max) * (phase_err + 6 * EPS) + n_max * EPS
    return ComplexSum(re, im, n_max, err)


def rs_main_sum(t, dps: int | None = None) -> ComplexSum:
    """sum_{n=1}^{n1} n^{-1/2 + it} with n1 = floor(sqrt(t / 2pi))."""
    _check_rs_domain(t)
    return _dirichlet_block(t, n1_of(t), +1, dps)


def gabcke_remainder_bound(t) -> mpf:
    _check_rs_domain(t)
    with workdps():
        t = to_mpf(t)
        return mpf("1.48") * t ** mpf(-0.25) + mpf("0.127") * t ** mpf(-0.75)


def rs_zeta_upper(t, dps: int | None = None) -> mpf:
    """2 |main sum| + R(t), plus the tracked rounding error of the main sum."""
    s = rs_main_sum(t, dps)
    with workdps(dps):
        return 2 * (to_mpf(abs(s)) + to_mpf(s.err)) + gabcke_remainder_bound(t)


def rsl_bound(t) -> mpf:
    _check_rs_domain(t)
    with workdps():
        t = to_mpf(t)
        return 4 * t ** mpf(0.25) / (2 * mpmath.pi) ** mpf(0.25) - mpf("2.08")


def theorem_rhs(t, c="0.618") -> mpf:
    """c * t^{1/6} * log t."""
    with workdps():
        t = to_mpf(t)
        return mpf(c) * mpmath.root(t, 6) * mpmath.log(t)


def _em_tail(s: mpc, N: int, target: float) -> tuple[mpc, mpf]:
    """N^{1-s}/(s-1) + N^{-s}/2 + Bernoulli corrections, and the bound on what is left."""
    Nm = to_mpf(N)
    Ns = mpmath.power(Nm, -s)
    total = Nm * Ns / (s - 1) + Ns / 2
    sigma = s.real
    # T_k = B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{1-s-2k}
    poch = s
    npow = Ns / Nm
    k = 1
    while True:
        term = mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * poch * npow
        # remainder after k-1 corrections is bounded by |s+2k-1| / (sigma+2k-1) * |T_k|
        rem = abs(s + 2 * k - 1) / (sigma + 2 * k - 1) * abs(term)
        if rem < target or k > EM_MAX_CORRECTIONS:
            return total, rem
        total += term
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        npow /= Nm * Nm
        k += 1


def _em_cutoff(t: float) -> int:
    return max(10, math.ceil(t / 2))


def _em_zeta(t, dps: int | None) -> tuple[mpc, float]:
    with workdps(dps):
        s = mpc(mpf(1) / 2, to_mpf(t))
        N = _em_cutoff(float(t))
        head = _dirichlet_block(t, N - 1, -1, dps)
        tail, rem = _em_tail(s, N, 1e-15)
        value = mpc(head.re, head.im) + tail
        return value, float(rem) + head.err


def reference_zeta(t, dps: int | None = None) -> ZetaPoint:
    """zeta(1/2 + it) from an evaluator independent of the bounds being checked."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if t > REFERENCE_CAP:
        raise RefusalError(f"t = {t} is above the reference cap {REFERENCE_CAP:g}")
    if t <= EM_LIMIT:
        value, err = _em_zeta(t, dps)
        method = Method.EULER_MACLAURIN
    else:
        base = dps or get_dps()
        with workdps(base):
            value = mpmath.zeta(mpc(mpf(1) / 2, to_mpf(t)))
        with workdps(base + 20):
            check = mpmath.zeta(mpc(mpf(1) / 2, to_mpf(t)))
            err = float(abs(check - value)) + 1e-20
        method = Method.RIEMANN_SIEGEL
    if not err < ACCEPT_ERROR:
        raise PrecisionError(f"reference zeta at t={t} has error estimate {err:g}")
    with workdps(dps):
        return ZetaPoint(float(t), value, abs(value), method, err)


def inv_sqrt_sum_jensen_bound(a: int, b: int) -> mpf:
    """Integral of x^{-1/2} over [a - 1/2, b + 1/2], which dominates sum_{n=a}^b n^{-1/2}."""
    if not 1 <= a <= b:
        raise DomainError(f"need 1 <= a <= b, got a={a}, b={b}")
    with workdps():
        return 2 * (mpmath.sqrt(mpf(b) + mpf(1) / 2) - mpmath.sqrt(mpf(a) - mpf(1) / 2))


def rs_partial_sum_bound(t) -> mpf:
    """2 t^{1/4} / (2pi)^{1/4} - 1.417, the consolidated bound on sum_{n<=n1} n^{-1/2} for t >= 1e7."""
    with workdps():
        t = to_mpf(t)
        return 2 * t ** mpf(0.25) / (2 * mpmath.pi) ** mpf(0.25) - mpf("1.417")
