"""Exponential sums: phases, the brute-force oracle, Kusmin-Landau and Weyl bounds."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import mpmath
import numpy as np
from mpmath import mpf

from .errors import DomainError, HypothesisError, RefusalError
from .precision import (
    EPS,
    LOG_TABLE,
    frac_rounding_bound,
    frac_turns,
    to_dd,
    to_mpf,
    workdps,
)

DEFAULT_ORACLE_CAP = 10**7
CHUNK = 1 << 16
TWO_PI = 2.0 * math.pi
# largest argument served from the shared log table (16 bytes per entry)
LOG_TABLE_LIMIT = 1 << 21


@dataclass(frozen=True)
class PhaseSpec:
    """Parameters of the block phases f(x) = (t/2pi) log(rK + x) and g(x) = f(x+m) - f(x)."""

    t: float
    r: int
    K: int
    m: int = 1
    N: int = 0
    L: int = 1

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise DomainError(f"t must be positive and finite, got {self.t}")
        if self.r < 1:
            raise DomainError(f"r must be >= 1, got {self.r}")
        if self.K < 2:
            raise DomainError(f"K must be >= 2, got {self.K}")
        if not 1 <= self.L <= self.K:
            raise DomainError(f"need 1 <= L <= K, got L={self.L}, K={self.K}")
        if not 1 <= self.m < self.K:
            raise DomainError(f"need 1 <= m < K, got m={self.m}, K={self.K}")

    @property
    def block_start(self) -> int:
        return self.r * self.K

    def f(self) -> "LogPhase":
        return LogPhase(self.t, self.block_start)

    def g(self) -> "DiffLogPhase":
        return DiffLogPhase(self.t, self.block_start, self.m)


@dataclass(frozen=True)
class ComplexSum:
    re: float
    im: float
    terms: int
    err: float = 0.0

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def abs(self) -> float:
        return abs(self)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


class LogPhase:
    """f(x) = (t / 2pi) * log(shift + x), with vectorized high-precision reduction mod 1."""

    def __init__(self, t, shift: int):
        self.t = t
        self.shift = int(shift)
        with workdps():
            self._tau_mp = to_mpf(t) / (2 * mpmath.pi)
            self._tau = to_dd(self._tau_mp)

    def __call__(self, x):
        with workdps():
            return self._tau_mp * mpmath.log(self.shift + to_mpf(x))

    def frac(self, n: np.ndarray) -> np.ndarray:
        arg = np.asarray(n, dtype=np.int64) + self.shift
        if arg.size and int(arg.max()) >= LOG_TABLE_LIMIT:
            # short ranges far out: reduce term by term instead of growing the shared table
            with workdps():
                tau, log, floor = self._tau_mp, mpmath.log, mpmath.floor
                out = np.empty(arg.shape)
                for i, k in enumerate(arg.flat):
                    v = tau * log(int(k))
                    out.flat[i] = float(v - floor(v))
                return out - np.floor(out)
        hi, lo = LOG_TABLE.lookup(arg)
        return frac_turns(self._tau, hi, lo)

    def max_turns(self, n_max: int) -> float:
        return float(self._tau_mp) * math.log(max(self.shift + n_max, 2))

    def derivative(self, x):
        with workdps():
            return self._tau_mp / (self.shift + to_mpf(x))

    def third_derivative(self, x):
        # f'''(x) = t / (pi (shift + x)^3)
        with workdps():
            return 2 * self._tau_mp / (self.shift + to_mpf(x)) ** 3


class DiffLogPhase:
    """g(x) = f(x + m) - f(x) = (t / 2pi) * log(1 + m / (shift + x))."""

    def __init__(self, t, shift: int, m: int):
        self.base = LogPhase(t, shift)
        self.m = int(m)

    def __call__(self, x):
        b = self.base
        with workdps():
            return b._tau_mp * mpmath.log1p(self.m / (b.shift + to_mpf(x)))

    def frac(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        d = self.base.frac(n + self.m) - self.base.frac(n)
        return d - np.floor(d)

    def max_turns(self, n_max: int) -> float:
        return self.base.max_turns(n_max + self.m)

    def derivative(self, x):
        b = self.base
        with workdps():
            x = to_mpf(x)
            return b._tau_mp * (1 / (b.shift + x + self.m) - 1 / (b.shift + x))

    def second_derivative(self, x):
        b = self.base
        with workdps():
            x = to_mpf(x)
            return -b._tau_mp * (1 / (b.shift + x + self.m) ** 2 - 1 / (b.shift + x) ** 2)


def nearest_int_dist(x):
    """Distance from ``x`` to the nearest integer, in [0, 1/2]."""
    if isinstance(x, mpf):
        if not mpmath.isfinite(x):
            raise DomainError(f"non-finite input {x}")
        return abs(x - mpmath.nint(x))
    if isinstance(x, Fraction):
        return abs(x - round(x))
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite input {x}")
    return abs(x - round(x))


def _scalar_frac(v) -> float:
    if isinstance(v, mpf):
        return float(mpmath.frac(v))
    if isinstance(v, (int, Fraction)):
        return float(Fraction(v) - math.floor(Fraction(v)))
    v = float(v)
    if not math.isfinite(v):
        raise DomainError(f"phase is not finite: {v}")
    return v - math.floor(v)


def _integer_range(a, b) -> tuple[int, int]:
    lo = math.ceil(a)
    hi = math.ceil(b)  # first integer not in [a, b)
    return lo, max(lo, hi)


def _frac_chunks(phase, lo: int, hi: int) -> Iterator[np.ndarray]:
    vectorized = hasattr(phase, "frac")
    for start in range(lo, hi, CHUNK):
        n = np.arange(start, min(start + CHUNK, hi), dtype=np.int64)
        if vectorized:
            yield phase.frac(n)
        else:
            yield np.fromiter((_scalar_frac(phase(int(k))) for k in n), dtype=np.float64, count=len(n))


def eval_exp_sum(
    phase: Callable,
    a,
    b,
    cap: int | None = DEFAULT_ORACLE_CAP,
) -> ComplexSum:
    """Sum e(phase(n)) over integers a <= n < b, literally.

    ``phase`` is either a callable returning float / int / Fraction / mpf, or
    an object with a vectorized ``frac(n_array)`` method returning phases
    already reduced mod 1.  Reduction always happens before trig evaluation.
    Chunk size is fixed, and ``math.fsum`` rounds the total correctly, so the
    result does not depend on how the work is split.
    """
    lo, hi = _integer_range(a, b)
    terms = hi - lo
    if cap is not None and terms > cap:
        raise RefusalError(f"{terms} terms exceeds oracle cap {cap}")
    if terms == 0:
        return ComplexSum(0.0, 0.0, 0)
    re_parts: list[Iterator[float]] = []
    im_parts: list[Iterator[float]] = []
    for fr in _frac_chunks(phase, lo, hi):
        ang = TWO_PI * fr
        re_parts.append(np.cos(ang))
        im_parts.append(np.sin(ang))
    re = math.fsum(itertools.chain.from_iterable(re_parts))
    im = math.fsum(itertools.chain.from_iterable(im_parts))
    if hasattr(phase, "max_turns"):
        frac_err = frac_rounding_bound(phase.max_turns(hi))
    else:
        frac_err = 4 * EPS
    err = terms * (TWO_PI * frac_err + 4 * EPS)
    return ComplexSum(re, im, terms, err)


def exp_terms(phase, a, b, cap: int | None = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """The individual summands e(phase(n)), a <= n < b, as a complex array."""
    lo, hi = _integer_range(a, b)
    if cap is not None and hi - lo > cap:
        raise RefusalError(f"{hi - lo} terms exceeds oracle cap {cap}")
    if hi == lo:
        return np.zeros(0, dtype=np.complex128)
    fr = np.concatenate(list(_frac_chunks(phase, lo, hi)))
    return np.exp(2j * np.pi * fr)


def kusmin_landau_bound(U, V):
    """(U + V) / pi, valid when l + 1/U <= f' <= l + 1 - 1/V on [a, b) with f' monotone."""
    with workdps():
        U = to_mpf(U)
        V = to_mpf(V)
        if not U > 1:
            raise DomainError(f"U must exceed 1, got {U}")
        if not V > 1:
            raise DomainError(f"V must exceed 1, got {V}")
        # U, V usually come from reciprocals of the derivative range, so allow
        # for the rounding of that round trip (a constant derivative gives equality)
        if 1 / U > 1 - 1 / V + mpf(10) ** (5 - mpmath.mp.dps):
            raise HypothesisError(f"1/U = {1 / U} > 1 - 1/V = {1 - 1 / V}: no derivative fits")
        return (U + V) / mpmath.pi


def kusmin_landau_parameters(fprime: Callable, a, b) -> tuple[int, mpf, mpf]:
    """Find (l, U, V) for a monotone derivative from its values at the ends of [a, b].

    Raises ``HypothesisError`` when the derivative range touches or crosses
    an integer, in which case the lemma does not apply.
    """
    with workdps():
        lo, hi = sorted((to_mpf(fprime(a)), to_mpf(fprime(b))))
        ell = int(mpmath.floor(lo))
        if lo == ell or hi >= ell + 1:
            raise HypothesisError(f"derivative range [{lo}, {hi}] meets an integer")
        return ell, 1 / (lo - ell), 1 / (ell + 1 - hi)


def weyl_difference_bound(L: int, M: int, abs_s: Sequence) -> mpf:
    """Upper bound for |sum_{n=N+1}^{N+L} e(f(n))|^2 from bounds on the differenced sums."""
    if L < 1 or M < 1:
        raise DomainError(f"L and M must be positive, got L={L}, M={M}")
    if len(abs_s) != M:
        raise DomainError(f"expected {M} differenced-sum bounds, got {len(abs_s)}")
    with workdps():
        vals = [to_mpf(s) for s in abs_s]
        if any(v < 0 for v in vals):
            raise DomainError("differenced-sum bounds must be nonnegative")
        weighted = mpmath.fsum((1 - mpf(m) / M) * vals[m - 1] for m in range(1, M + 1))
        return (mpf(L + M - 1) / M) * (L + 2 * weighted)


def differenced_sums(phase, N: int, L: int, M: int) -> list[float]:
    """Oracle values |s'_m(L)| = |sum_{n=N+1}^{N+L-m} e(f(n+m) - f(n))| for m = 1..M."""
    z = exp_terms(phase, N + 1, N + L + 1)
    out = []
    for m in range(1, M + 1):
        out.append(float(abs(np.vdot(z[:-m], z[m:]))) if m < L else 0.0)
    return out
