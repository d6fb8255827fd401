"""Region-by-region assembly of the bound 0.618 t^{1/6} log t.

Heights 3 <= t < 200 are covered by a sampled check against the reference
evaluator, 200 <= t < 5.5e7 by the Riemann-Siegel-Lehman bound and a
partial-summation refinement, and t >= 5.5e7 by coefficient tuples built
from the third derivative test: three medium tuples with phi > 1/3 and one
large tuple with phi = 1/3.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np
from mpmath import mpf

from .derivative_tests import alpha_beta, mu_
from .errors import DomainError, InfeasibleError
from .precision import get_dps, workdps
from .zeta import gabcke_remainder_bound, rsl_bound, theorem_rhs

MEDIUM_T0_MIN = 5.5e7
LARGE_T0_MIN = 1e12
THEOREM_CONSTANT = "0.618"


def exact(x) -> mpf:
    """Interpret floats by their shortest decimal repr and 'p/q' strings as fractions."""
    if isinstance(x, mpf):
        return x
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, str) and "/" in x:
        num, den = x.split("/")
        return mpf(int(num)) / int(den)
    if isinstance(x, float):
        return mpf(repr(x))
    return mpf(x)


def is_one_third(phi) -> bool:
    if isinstance(phi, Fraction):
        return phi == Fraction(1, 3)
    if isinstance(phi, str) and "/" in phi:
        return Fraction(phi) == Fraction(1, 3)
    return False


@dataclass(frozen=True)
class RegionParams:
    """Tuning knobs of one region. ``phi`` is a float for medium tuples, Fraction(1, 3) for the large one."""

    phi: float | Fraction | str
    eta: float
    r0: int
    t0: float

    def __post_init__(self):
        if self.r0 < 2:
            raise DomainError(f"r0 must be >= 2, got {self.r0}")
        if not self.eta > 0:
            raise DomainError(f"eta must be positive, got {self.eta}")
        if not self.t0 >= MEDIUM_T0_MIN:
            raise DomainError(f"t0 must be >= {MEDIUM_T0_MIN:g}, got {self.t0}")

    @property
    def large(self) -> bool:
        return is_one_third(self.phi)

    def phi_mp(self) -> mpf:
        return exact(self.phi)

    def as_dict(self) -> dict:
        phi = str(self.phi) if isinstance(self.phi, Fraction) else self.phi
        return {"phi": phi, "eta": self.eta, "r0": self.r0, "t0": self.t0}


def ceil_power(t, phi) -> int:
    """ceil(t^phi), robust to t^phi landing on an integer (e.g. (1e12)^(1/3))."""
    with workdps(get_dps() + 20):
        v = exact(t) ** exact(phi)
        n = mpmath.nint(v)
        if abs(v - n) <= mpf(10) ** (-get_dps()) * v:
            return int(n)
        return int(mpmath.ceil(v))


def R0_of(t0, phi) -> int:
    with workdps():
        t0 = exact(t0)
        return int(mpmath.ceil((mpmath.sqrt(t0 / (2 * mpmath.pi)) - 1) / (t0 ** exact(phi) + 1) - 1))


def block_structure(t, phi) -> tuple[int, int, int]:
    """(K, n1, R) = (ceil(t^phi), floor(sqrt(t/2pi)), floor(n1/K))."""
    K = ceil_power(t, phi)
    with workdps():
        n1 = int(mpmath.floor(mpmath.sqrt(exact(t) / (2 * mpmath.pi))))
    return K, n1, n1 // K


class _PrefixSums:
    """Cached prefix sums sum_{k=1}^{n} term(k), one table per working precision."""

    def __init__(self, term: Callable):
        self._term = term
        self._tables: dict[int, list] = {}
        self._lock = threading.Lock()

    def __call__(self, n: int) -> mpf:
        if n < 0:
            raise DomainError(f"negative count {n}")
        dps = get_dps()
        with self._lock, workdps(dps):
            sums = self._tables.setdefault(dps, [mpf(0)])
            if n >= len(sums):
                s = sums[-1]
                for k in range(len(sums), n + 1):
                    s = s + self._term(k)
                    sums.append(s)
            return sums[n]


inv_sqrt_prefix = _PrefixSums(lambda k: 1 / mpmath.sqrt(k))
block_weight_prefix = _PrefixSums(lambda r: 1 / mpmath.sqrt(mpf(r) * (r + 1)))


def I_phi(r0: int, t0, phi) -> mpf:
    """2 sum_{n < ceil(r0 t0^phi)} n^{-1/2} - 4 sqrt(ceil(r0 t0^phi) - 1), by direct summation."""
    with workdps(get_dps() + 20):
        v = r0 * exact(t0) ** exact(phi)
        n = mpmath.nint(v)
        top = int(n) if abs(v - n) <= mpf(10) ** (-get_dps()) * v else int(mpmath.ceil(v))
    M = top - 1
    with workdps():
        return 2 * inv_sqrt_prefix(M) - 4 * mpmath.sqrt(M)


def J_of(R0: int) -> mpf:
    with workdps():
        R0 = mpf(R0)
        return mpmath.log(1 + 1 / (2 * R0)) + 2 * mpmath.log(1 + mpmath.sqrt(1 + 1 / (R0 + mpf(1) / 2)))


def rho_of(R) -> mpf:
    with workdps():
        return (1 + 1 / mpf(R)) / (mpmath.sqrt(2) * mpmath.cbrt(mpmath.sqrt(mpmath.pi)))


def omega0_of(r0: int) -> mpf:
    with workdps():
        return (
            -mpmath.log(mpmath.sqrt(2 * mpmath.pi))
            + mpf("1.412")
            - 2 * mpmath.asinh(mpmath.sqrt(r0 - mpf(1) / 2))
        )


def remainder_constant(t0) -> mpf:
    """1.48 t0^{-1/4} + 0.127 t0^{-3/4}."""
    return gabcke_remainder_bound(exact(t0))


@dataclass(frozen=True)
class DerivedRegionConstants:
    K0: mpf
    R0: int
    rho0: mpf
    J_R0: mpf
    I_phi: mpf
    W0: mpf
    mu0: mpf
    alpha0: mpf
    beta0: mpf
    kappa: mpf
    omega0: mpf | None = None
    alternatives: dict[str, mpf] = field(default_factory=dict)


class Region(str, Enum):
    SMALL = "small"
    RSL = "rsl"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True)
class CoefficientTuple:
    """sum_i coeffs[i] * t^exponents[i] * (log t if log_flags[i]), valid on [valid_from, valid_to)."""

    region: Region
    coeffs: tuple[mpf, ...]
    exponents: tuple[mpf, ...]
    log_flags: tuple[bool, ...]
    valid_from: float
    valid_to: float
    params: RegionParams
    constants: DerivedRegionConstants

    def bound_at(self, t) -> mpf:
        with workdps():
            t = exact(t)
            lt = mpmath.log(t)
            return mpmath.fsum(
                c * t**e * (lt if flag else 1)
                for c, e, flag in zip(self.coeffs, self.exponents, self.log_flags)
            )

    def __call__(self, t) -> mpf:
        return self.bound_at(t)

    @property
    def leading(self) -> mpf:
        return self.coeffs[0]


def _kappa_medium(alpha0, beta0, eta, rho0, t0, phi) -> mpf:
    sixth = mpf(1) / 6
    third = mpf(1) / 3
    q = 1 + t0 ** (-phi)
    return mpmath.sqrt(
        alpha0
        + eta * alpha0 * rho0 / t0 ** (phi - sixth)
        + beta0 * rho0**2 * q / t0 ** (phi - third)
        + eta * beta0 * rho0**3 * q**2 / t0 ** (2 * phi - mpf(1) / 2)
    )


def _kappa_large(alpha0, beta0, eta, rho0, t0) -> mpf:
    s = t0 ** (-mpf(1) / 6)
    return mpmath.sqrt(
        alpha0 + eta * alpha0 * s * rho0 + eta * beta0 * s * rho0**3 * (1 + t0 ** (-mpf(1) / 3)) ** 2
    )


def _check_feasible(params: RegionParams, R0: int) -> None:
    if params.r0 > R0:
        raise InfeasibleError(f"r0 = {params.r0} exceeds R0 = {R0} at t0 = {params.t0:g}, phi = {params.phi}")


def compute_medium_coefficients(params: RegionParams, valid_to: float = math.inf) -> CoefficientTuple:
    """(a1, a2, a3, a4) of the bound a1 t^{1/6} log t + a2 t^{1/6} + a3 t^{phi/2} + a4 for t >= t0."""
    if params.large:
        raise DomainError("phi = 1/3 belongs to the large-t pipeline")
    with workdps():
        phi = params.phi_mp()
        if not mpf(1) / 3 < phi < mpf(1) / 2:
            raise DomainError(f"phi must lie in (1/3, 1/2), got {params.phi}")
        t0 = exact(params.t0)
        eta = exact(params.eta)
        r0 = params.r0
        K0 = t0**phi
        R0 = R0_of(params.t0, params.phi)
        _check_feasible(params, R0)
        rho0 = rho_of(R0)
        J = J_of(R0)
        I = I_phi(r0, params.t0, params.phi)
        K0_ceil = ceil_power(params.t0, params.phi)
        W0 = mpmath.pi * (r0 + 1) ** 3 * mpf(K0_ceil) ** 3 / t0
        mu0 = mu_(r0, K0)
        alpha0, beta0 = alpha_beta(W0, eta, mu0)
        kappa = _kappa_medium(alpha0, beta0, eta, rho0, t0, phi)

        # readings of the two ambiguous simplifications, logged for comparison
        W0_plain = mpmath.pi * (r0 + 1) ** 3 * K0**3 / t0
        a_p, b_p = alpha_beta(W0_plain, eta, mu0)
        a_c, b_c = alpha_beta(W0, eta, mu_(r0, mpf(K0_ceil)))
        alternatives = {
            "kappa_W0_with_K0": _kappa_medium(a_p, b_p, eta, rho0, t0, phi),
            "kappa_mu_with_ceil_K0": _kappa_medium(a_c, b_c, eta, rho0, t0, phi),
        }

        c6 = mpmath.cbrt(mpmath.sqrt(mpmath.pi))  # pi^{1/6}
        a1 = (1 - 2 * phi) / c6 * kappa
        a2 = -2 / c6 * (mpmath.log(mpmath.sqrt(2 * mpmath.pi)) - J + 2 * mpmath.asinh(mpmath.sqrt(r0 - mpf(1) / 2))) * kappa
        a3 = 4 * mpmath.sqrt(r0 * (1 + t0 ** (-phi)))
        a4 = I + remainder_constant(t0)
        constants = DerivedRegionConstants(K0, R0, rho0, J, I, W0, mu0, alpha0, beta0, kappa,
                                           alternatives=alternatives)
        sixth = mpf(1) / 6
        return CoefficientTuple(
            Region.MEDIUM,
            (a1, a2, a3, a4),
            (sixth, sixth, phi / 2, mpf(0)),
            (True, False, False, False),
            float(params.t0),
            valid_to,
            params,
            constants,
        )


def compute_large_coefficients(params: RegionParams, valid_to: float = math.inf) -> CoefficientTuple:
    """(b1, b2, b3) of the bound b1 t^{1/6} log t + b2 t^{1/6} + b3 for t >= t0."""
    if not params.large:
        raise DomainError(f"the large-t pipeline needs phi = 1/3, got {params.phi}")
    if params.t0 < LARGE_T0_MIN:
        raise DomainError(f"t0 must be >= {LARGE_T0_MIN:g} for the large-t pipeline, got {params.t0:g}")
    with workdps():
        t0 = exact(params.t0)
        eta = exact(params.eta)
        r0 = params.r0
        third = mpf(1) / 3
        K0 = mpmath.cbrt(t0)
        R0 = R0_of(params.t0, Fraction(1, 3))
        _check_feasible(params, R0)
        rho0 = rho_of(R0)
        J = J_of(R0)
        I = I_phi(r0, params.t0, Fraction(1, 3))
        W0 = mpmath.pi * (r0 + 1) ** 3
        mu0 = mu_(r0, K0)
        alpha0, beta0 = alpha_beta(W0, eta, mu0)
        kappa = _kappa_large(alpha0, beta0, eta, rho0, t0)
        omega0 = omega0_of(r0)
        c6 = mpmath.cbrt(mpmath.sqrt(mpmath.pi))
        q = 1 + t0 ** (-third)
        b1 = kappa / (3 * c6)
        b2 = (
            4 * mpmath.sqrt(r0 * q)
            + 2 / c6 * omega0 * kappa
            + mpmath.sqrt(2) / c6**2 * mpmath.sqrt(beta0 * (1 + mpf(1) / r0) * q)
        )
        b3 = I + remainder_constant(t0)
        constants = DerivedRegionConstants(K0, R0, rho0, J, I, W0, mu0, alpha0, beta0, kappa, omega0)
        sixth = mpf(1) / 6
        return CoefficientTuple(
            Region.LARGE,
            (b1, b2, b3),
            (sixth, sixth, mpf(0)),
            (True, False, False),
            float(params.t0),
            valid_to,
            params,
            constants,
        )


def compute_coefficients(params: RegionParams, valid_to: float = math.inf) -> CoefficientTuple:
    if params.large:
        return compute_large_coefficients(params, valid_to)
    return compute_medium_coefficients(params, valid_to)


# ---------------------------------------------------------------- crossings


class Shape(str, Enum):
    UNIMODAL = "unimodal_difference"
    MONOTONE = "monotone_difference"


class CrossingStatus(str, Enum):
    PASS = "pass"
    CHECK_FAILED = "check_failed"
    SHAPE_FAILED = "shape_assumption_failed"


@dataclass(frozen=True)
class CrossingRecord:
    check_id: str
    t_lo: float
    t_hi: float
    shape: Shape
    margin_lo: mpf
    margin_hi: mpf
    min_grid_margin: mpf
    sign_changes: int
    status: CrossingStatus

    @property
    def margin(self) -> mpf:
        return min(self.margin_lo, self.margin_hi, self.min_grid_margin)

    @property
    def passed(self) -> bool:
        return self.status is CrossingStatus.PASS


GRID_POINTS = 10**4
DEAD_ZONE = 1e-12


def _sign_pattern(deriv: np.ndarray) -> list[int]:
    signs = np.sign(np.where(np.abs(deriv) < DEAD_ZONE, 0.0, deriv)).astype(int)
    pattern: list[int] = []
    for s in signs:
        if s != 0 and (not pattern or pattern[-1] != s):
            pattern.append(int(s))
    return pattern


def crossing_check(
    lhs: Callable,
    rhs: Callable,
    t_lo: float,
    t_hi: float,
    shape: Shape | str = Shape.UNIMODAL,
    check_id: str = "",
    grid: int = GRID_POINTS,
) -> CrossingRecord:
    """Check lhs < rhs on [t_lo, t_hi] from the endpoints plus a derivative-sign scan.

    The difference rhs - lhs is sampled on ``grid`` log-spaced points; its
    derivative (central differences in log t) may change sign at most once,
    from increasing to decreasing, for a unimodal shape, and never for a
    monotone one.
    """
    shape = Shape(shape)
    if not t_lo < t_hi:
        raise DomainError(f"need t_lo < t_hi, got [{t_lo}, {t_hi}]")
    with workdps():
        def diff(t):
            return rhs(t) - lhs(t)

        m_lo = diff(exact(t_lo))
        m_hi = diff(exact(t_hi))
        u = np.linspace(math.log(t_lo), math.log(t_hi), grid + 1)
        ts = [exact(t_lo)] + [mpmath.exp(mpf(x)) for x in u[1:-1]] + [exact(t_hi)]
        d = [diff(t) for t in ts]
        min_grid = min(d)
        dv = np.array([float(x) for x in d])
        deriv = (dv[2:] - dv[:-2]) / (u[2:] - u[:-2])
        pattern = _sign_pattern(deriv)
        changes = max(0, len(pattern) - 1)

    if shape is Shape.MONOTONE:
        shape_ok = changes == 0
    else:
        shape_ok = changes == 0 or pattern == [1, -1]
    if not (m_lo > 0 and m_hi > 0) or min_grid <= 0:
        status = CrossingStatus.CHECK_FAILED
    elif not shape_ok:
        status = CrossingStatus.SHAPE_FAILED
    else:
        status = CrossingStatus.PASS
    return CrossingRecord(check_id, float(t_lo), float(t_hi), shape, m_lo, m_hi, min_grid, changes, status)


# ---------------------------------------------------------------- published regions

PUBLISHED_MEDIUM = {
    5.5e7: ((0.3414, 1.8, 4), 1e8),
    1e8: ((0.3414, 1.8, 4), 8.5e10),
    8.5e10: ((0.3414, 1.8, 4), 1e12),
}
PUBLISHED_LARGE = (1.6, 4, 1e12)
LARGE_TAIL_END = 1e20


def published_medium_params(t0: float) -> RegionParams:
    (phi, eta, r0), _ = PUBLISHED_MEDIUM[t0]
    return RegionParams(phi, eta, r0, t0)


def published_large_params() -> RegionParams:
    eta, r0, t0 = PUBLISHED_LARGE
    return RegionParams(Fraction(1, 3), eta, r0, t0)


def published_tuples() -> dict[str, CoefficientTuple]:
    out = {}
    for t0, (_, hi) in PUBLISHED_MEDIUM.items():
        out[f"medium/t0={t0:g}"] = compute_medium_coefficients(published_medium_params(t0), hi)
    out[f"large/t0={PUBLISHED_LARGE[2]:g}"] = compute_large_coefficients(published_large_params())
    return out


def rs_chain_bound(t) -> mpf:
    """4 t^{1/4} / (2pi)^{1/4} - 2.807, the refined Riemann-Siegel bound for 1e7 <= t < 5.5e7."""
    with workdps():
        t = exact(t)
        return 4 * t ** mpf(0.25) / (2 * mpmath.pi) ** mpf(0.25) - mpf("2.807")


@dataclass(frozen=True)
class CrossingSpec:
    check_id: str
    lhs: Callable
    rhs: Callable
    t_lo: float
    t_hi: float
    shape: Shape

    def run(self, grid: int = GRID_POINTS) -> CrossingRecord:
        return crossing_check(self.lhs, self.rhs, self.t_lo, self.t_hi, self.shape, self.check_id, grid)


def _rhs(c: str) -> Callable:
    return lambda t: theorem_rhs(t, c)


def region_crossings() -> list[CrossingSpec]:
    specs = [
        CrossingSpec("crossing/rsl_vs_0.592", rsl_bound, _rhs("0.592"), 200, 1e7, Shape.UNIMODAL),
        CrossingSpec("crossing/rs_chain_vs_0.618", rs_chain_bound, _rhs(THEOREM_CONSTANT), 1e7, 5.5e7,
                     Shape.MONOTONE),
    ]
    for name, tup in published_tuples().items():
        hi = tup.valid_to if math.isfinite(tup.valid_to) else LARGE_TAIL_END
        shape = Shape.MONOTONE if tup.region is Region.LARGE else Shape.UNIMODAL
        specs.append(CrossingSpec(f"crossing/{name}", tup.bound_at, _rhs(THEOREM_CONSTANT), tup.valid_from,
                                  hi, shape))
    return specs


@dataclass(frozen=True)
class TheoremBound:
    bound: mpf
    region: Region
    window: tuple[float, float]
    certificate: tuple[str, ...]


_WINDOWS: list[tuple[float, float, Region, tuple[str, ...]]] = [
    (3, 200, Region.SMALL, ("regions/sample/small_t_0.595",)),
    (200, 1e7, Region.RSL, ("regions/crossing/rsl_vs_0.592",)),
    (1e7, 5.5e7, Region.RSL, ("regions/rs_partial_sum", "regions/crossing/rs_chain_vs_0.618")),
    (5.5e7, 1e8, Region.MEDIUM, ("regions/coeffs/medium/t0=5.5e+07", "regions/crossing/medium/t0=5.5e+07")),
    (1e8, 8.5e10, Region.MEDIUM, ("regions/coeffs/medium/t0=1e+08", "regions/crossing/medium/t0=1e+08")),
    (8.5e10, 1e12, Region.MEDIUM, ("regions/coeffs/medium/t0=8.5e+10", "regions/crossing/medium/t0=8.5e+10")),
    (1e12, math.inf, Region.LARGE, ("regions/coeffs/large/t0=1e+12", "regions/crossing/large/t0=1e+12")),
]


def theorem_bound(t) -> TheoremBound:
    """0.618 t^{1/6} log t together with the region covering t and the checks behind it."""
    if not t >= 3:
        raise DomainError(f"the theorem covers t >= 3, got {t}")
    for lo, hi, region, cert in _WINDOWS:
        if lo <= t < hi:
            return TheoremBound(theorem_rhs(exact(t), THEOREM_CONSTANT), region, (lo, hi), cert)
    raise DomainError(f"no region for t = {t}")  # unreachable for finite t >= 3


# ---------------------------------------------------------------- auxiliary inequalities


def inv_sqrt_block_sum(r0: int, R: int) -> mpf:
    """sum_{r=r0}^{R} 1 / sqrt(r (r + 1)), by direct (cached) summation."""
    if not 1 <= r0 <= R + 1:
        raise DomainError(f"need 1 <= r0 <= R + 1, got r0={r0}, R={R}")
    with workdps():
        return block_weight_prefix(R) - block_weight_prefix(r0 - 1)


def asinh_block_bound(r0: int, R: int) -> mpf:
    with workdps():
        return 2 * mpmath.asinh(mpmath.sqrt(R + mpf(1) / 2)) - 2 * mpmath.asinh(mpmath.sqrt(r0 - mpf(1) / 2))


def asinh_log_form(x) -> mpf:
    """log x + 2 log(1 + sqrt(1 + 1/x)), an algebraic rewriting of 2 asinh(sqrt x)."""
    with workdps():
        x = exact(x)
        return mpmath.log(x) + 2 * mpmath.log(1 + mpmath.sqrt(1 + 1 / x))


def envelope_margins(t, phi) -> dict[str, mpf]:
    """Margins of W^{1/3} <= rho t^{1/6} (1 + t^{-phi}) and W^{1/3}/K <= rho t^{1/6 - phi} at r = R."""
    K, n1, R = block_structure(t, phi)
    with workdps():
        t = exact(t)
        phi = exact(phi)
        w13 = mpmath.cbrt(mpmath.pi) * (R + 1) * K / mpmath.cbrt(t)
        rho = rho_of(R)
        sixth = mpf(1) / 6
        return {
            "W_bound": rho * t**sixth * (1 + t ** (-phi)) - w13,
            "WK_bound": rho * t ** (sixth - phi) - w13 / K,
        }
