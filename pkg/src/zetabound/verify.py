"""Verification suites, records and reports.

Every check is a named routine applied to a JSON-serializable ``inputs``
mapping.  Suites only generate inputs (from a counter-based Philox stream
keyed by the run seed and the routine name); running a record again from its
inputs reproduces it exactly, which is what ``replay`` does.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import mpmath
import numpy as np
from mpmath import mpf

from . import derivative_tests as dt
from . import pipeline as pl
from . import zeta as zt
from .errors import RefusalError
from .expsum import (
    DEFAULT_ORACLE_CAP,
    LogPhase,
    PhaseSpec,
    differenced_sums,
    eval_exp_sum,
    exp_terms,
    kusmin_landau_bound,
    kusmin_landau_parameters,
    weyl_difference_bound,
)
from .precision import EPS, DEFAULT_DPS, frac_rounding_bound, set_dps, workdps

KINDS = ("lemma_dominance", "coefficient_match", "crossing", "theorem_sample", "audit")
SUITES = ("lemmas", "regions", "theorem")

# Sized so that `verify all` stays within a few minutes on a laptop.
DEFAULT_SAMPLES = {
    "kusmin_landau": 200,
    "second_derivative": 500,
    "third_derivative": 200,
    "weyl": 100,
    "weyl_propagation": 50,
    "second_sandwich": 100,
    "third_sandwich": 100,
    "audit": 100,
    "rs_partial_sum": 1000,
    "jensen": 100,
    "block_sum": 100,
    "asinh_sum": 100,
    "envelope": 200,
    "block_relations": 200,
    "rs_upper_vs_reference": 1000,
    "rs_upper_vs_theorem": 1000,
    "rs_upper_vs_rsl": 200,
    "theorem": 1000,
}

PUBLISHED = {
    "medium/t0=5.5e+07": (0.59289, -8.0314, 8.0092, -2.8796),
    "medium/t0=1e+08": (0.58589, -8.0115, 8.0075, -2.8843),
    "medium/t0=8.5e+10": (0.55305, -7.8629, 8.0008, -2.9111),
    "large/t0=1e+12": (0.478013, 3.853165, -2.914229),
}
LEADING_TOL = 1e-3
OTHER_TOL = 1e-2


@dataclass
class RunConfig:
    precision_digits: int = DEFAULT_DPS
    oracle_cap: int = DEFAULT_ORACLE_CAP
    seed: int = 0
    sample_counts: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    output_format: str = "json"
    tmax: float = 1e6
    workers: int = 1

    def __post_init__(self):
        if self.precision_digits < 30:
            raise ValueError(f"precision_digits must be >= 30, got {self.precision_digits}")
        if self.output_format not in ("json", "csv", "text"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def samples(self, name: str) -> int:
        return int(self.sample_counts.get(name, DEFAULT_SAMPLES.get(name, 0)))

    def as_dict(self) -> dict:
        return {
            "precision_digits": self.precision_digits,
            "oracle_cap": self.oracle_cap,
            "seed": self.seed,
            "sample_counts": dict(sorted(self.sample_counts.items())),
            "output_format": self.output_format,
            "tmax": self.tmax,
        }


@dataclass
class VerificationRecord:
    check_id: str
    kind: str
    inputs: dict
    bound: float | None
    oracle: float | None
    margin: float
    passed: bool
    runtime_ms: int
    skipped: bool = False

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "kind": self.kind,
            "inputs": self.inputs,
            "bound": self.bound,
            "oracle": self.oracle,
            "margin": self.margin,
            "pass": self.passed,
            "skipped": self.skipped,
            "runtime_ms": self.runtime_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationRecord":
        return cls(d["check_id"], d["kind"], d["inputs"], d["bound"], d["oracle"], d["margin"], d["pass"],
                   d["runtime_ms"], d.get("skipped", False))


@dataclass
class Outcome:
    bound: float | None
    oracle: float | None
    margin: float
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = self.margin >= 0


def _f(x) -> float | None:
    return None if x is None else float(x)


# ---------------------------------------------------------------- routines

ROUTINES: dict[str, tuple[str, Callable[[dict, RunConfig], Outcome]]] = {}


def routine(name: str, kind: str):
    def register(fn):
        ROUTINES[name] = (kind, fn)
        return fn

    return register


def _polynomial_phase(inp: dict) -> tuple[Callable, Callable]:
    a, b = inp["a"], inp["b"]
    da, db, sign = inp["da"], inp["db"], inp["sign"]
    span = b - a
    if inp["family"] == "linear":
        return (lambda x: sign * da * (x - a)), (lambda x: sign * mpf(da))
    if inp["family"] == "quadratic":
        return (
            lambda x: sign * (da * (x - a) + (db - da) * (x - a) ** 2 / (2 * span)),
            lambda x: sign * (mpf(da) + (mpf(db) - da) * (mpf(x) - a) / span),
        )
    return (
        lambda x: sign * (da * (x - a) + (db - da) * (x - a) ** 3 / (3 * span**2)),
        lambda x: sign * (mpf(da) + (mpf(db) - da) * ((mpf(x) - a) / span) ** 2),
    )


@routine("kusmin_landau", "lemma_dominance")
def _kusmin_landau(inp: dict, cfg: RunConfig) -> Outcome:
    if inp["family"] == "logarithmic":
        phase = LogPhase(inp["t"], inp["shift"])
        fprime = phase.derivative
    else:
        phase, fprime = _polynomial_phase(inp)
    _, U, V = kusmin_landau_parameters(fprime, inp["a"], inp["b"])
    bound = kusmin_landau_bound(U, V)
    s = eval_exp_sum(phase, inp["a"], inp["b"], cap=cfg.oracle_cap)
    oracle = abs(s) + s.err
    return Outcome(_f(bound), oracle, float(bound - oracle))


def _prefix(z: np.ndarray) -> np.ndarray:
    return np.concatenate([[0j], np.cumsum(z)])


def _sum_err(count: int, max_turns: float) -> float:
    return count * (2 * math.pi * 2 * frac_rounding_bound(max_turns) + 4 * EPS) + count * count * EPS


@routine("second_derivative", "lemma_dominance")
def _second_derivative(inp: dict, cfg: RunConfig) -> Outcome:
    spec = PhaseSpec(inp["t"], inp["r"], inp["K"], m=inp["m"], L=inp["K"])
    bound = dt.second_derivative_test_bound(spec, inp["K0"])
    g = spec.g()
    P = _prefix(exp_terms(g, 0, spec.K - spec.m, cap=cfg.oracle_cap))
    worst = 0.0
    for L in inp["L_values"]:
        count = max(0, L - spec.m)
        worst = max(worst, abs(P[count]) + _sum_err(count, g.max_turns(spec.K)))
    return Outcome(_f(bound), worst, float(bound - worst))


@routine("third_derivative", "lemma_dominance")
def _third_derivative(inp: dict, cfg: RunConfig) -> Outcome:
    spec = PhaseSpec(inp["t"], inp["r"], inp["K"], L=inp["K"])
    bound = dt.third_derivative_test_bound(spec, inp["K0"], inp["eta"])
    f = spec.f()
    P = _prefix(exp_terms(f, 0, spec.K + 1, cap=cfg.oracle_cap))
    worst = 0.0
    for N, L in inp["windows"]:
        S = abs(P[N + L + 1] - P[N + 1]) + _sum_err(L, f.max_turns(spec.K))
        worst = max(worst, S * S)
    return Outcome(_f(bound), worst, float(bound - worst))


@routine("weyl", "lemma_dominance")
def _weyl(inp: dict, cfg: RunConfig) -> Outcome:
    if inp["family"] == "logarithmic":
        phase = LogPhase(inp["t"], inp["shift"])
    else:
        al, be = inp["alpha"], inp["beta"]
        phase = lambda x: al * x * x + be * x  # noqa: E731
    N, L, M = inp["N"], inp["L"], inp["M"]
    abs_s = differenced_sums(phase, N, L, M)
    bound = weyl_difference_bound(L, M, abs_s)
    S = abs(eval_exp_sum(phase, N + 1, N + L + 1, cap=cfg.oracle_cap))
    return Outcome(_f(bound), S * S, float(bound - S * S))


@routine("weyl_propagation", "lemma_dominance")
def _weyl_propagation(inp: dict, cfg: RunConfig) -> Outcome:
    t, r, K, K0, eta = inp["t"], inp["r"], inp["K"], inp["K0"], inp["eta"]
    with workdps():
        W = dt.block_W(t, r, K)
        M = int(mpmath.ceil(mpf(eta) * mpmath.cbrt(W)))
        abs_s = [
            dt.second_derivative_test_bound(PhaseSpec(t, r, K, m=m, L=K), K0) if m < K else mpf(0)
            for m in range(1, M + 1)
        ]
        weyl = weyl_difference_bound(K, M, abs_s)
        third = dt.third_derivative_test_bound(PhaseSpec(t, r, K, L=K), K0, eta)
        slack = mpf(10) ** -20 * third
        return Outcome(_f(third), _f(weyl), float(third + slack - weyl))


@routine("second_sandwich", "lemma_dominance")
def _second_sandwich(inp: dict, cfg: RunConfig) -> Outcome:
    spec = PhaseSpec(inp["t"], inp["r"], inp["K"], m=inp["m"], L=inp["K"])
    margins = dt.second_derivative_sandwich(spec)
    return Outcome(None, None, float(min(margins.values())))


@routine("third_sandwich", "lemma_dominance")
def _third_sandwich(inp: dict, cfg: RunConfig) -> Outcome:
    spec = PhaseSpec(inp["t"], inp["r"], inp["K"])
    margins = dt.third_derivative_sandwich(spec)
    return Outcome(None, None, float(min(margins.values())))


@routine("audit", "audit")
def _audit(inp: dict, cfg: RunConfig) -> Outcome:
    spec = PhaseSpec(inp["t"], inp["r"], inp["K"], m=inp["m"], L=inp["L"])
    a = dt.subdivision_audit(spec, inp["K0"])
    if a.skipped:
        return Outcome(None, None, 0.0, True)
    return Outcome(_f(a.H_limit), a.H_max, a.margin, a.passed)


@lru_cache(maxsize=None)
def _published_tuple(tuple_id: str, dps: int) -> pl.CoefficientTuple:
    return pl.published_tuples()[tuple_id]


@routine("coefficient_match", "coefficient_match")
def _coefficient_match(inp: dict, cfg: RunConfig) -> Outcome:
    tup = _published_tuple(inp["tuple"], cfg.precision_digits)
    computed = tup.coeffs[inp["index"]]
    delta = abs(float(computed) - inp["printed"])
    return Outcome(inp["printed"], _f(computed), inp["tol"] - delta)


@routine("crossing", "crossing")
def _crossing(inp: dict, cfg: RunConfig) -> Outcome:
    spec = {c.check_id: c for c in pl.region_crossings()}[inp["crossing"]]
    rec = spec.run()
    return Outcome(_f(min(rec.margin_lo, rec.margin_hi)), _f(rec.min_grid_margin), float(rec.margin), rec.passed)


def _decimal_grid(lo: str, hi: str, step: str) -> list[float]:
    lo_d, hi_d, st = Decimal(lo), Decimal(hi), Decimal(step)
    n = int((hi_d - lo_d) / st)
    return [float(lo_d + i * st) for i in range(n + 1)]


@routine("small_t_grid", "theorem_sample")
def _small_t_grid(inp: dict, cfg: RunConfig) -> Outcome:
    worst = None
    for t in _decimal_grid(inp["t_lo"], inp["t_hi"], inp["step"]):
        z = zt.reference_zeta(t)
        rhs = zt.theorem_rhs(t, inp["constant"])
        m = rhs - z.abs_value - z.est_error
        if worst is None or m < worst[0]:
            worst = (m, rhs, z.abs_value + z.est_error)
    m, rhs, val = worst
    return Outcome(_f(rhs), _f(val), float(m))


@routine("theorem", "theorem_sample")
def _theorem(inp: dict, cfg: RunConfig) -> Outcome:
    z = zt.reference_zeta(inp["t"])
    rhs = zt.theorem_rhs(inp["t"], pl.THEOREM_CONSTANT)
    val = z.abs_value + z.est_error
    return Outcome(_f(rhs), _f(val), float(rhs - val))


@routine("rs_upper_vs_reference", "theorem_sample")
def _rs_upper_vs_reference(inp: dict, cfg: RunConfig) -> Outcome:
    z = zt.reference_zeta(inp["t"])
    upper = zt.rs_zeta_upper(inp["t"])
    bound = upper + mpf("1e-6")
    return Outcome(_f(bound), _f(z.abs_value), float(bound - z.abs_value))


@routine("rs_upper_vs_theorem", "theorem_sample")
def _rs_upper_vs_theorem(inp: dict, cfg: RunConfig) -> Outcome:
    upper = zt.rs_zeta_upper(inp["t"])
    bound = pl.theorem_bound(inp["t"]).bound
    return Outcome(_f(bound), _f(upper), float(bound - upper))


@routine("rs_upper_vs_rsl", "lemma_dominance")
def _rs_upper_vs_rsl(inp: dict, cfg: RunConfig) -> Outcome:
    upper = zt.rs_zeta_upper(inp["t"])
    bound = zt.rsl_bound(inp["t"])
    return Outcome(_f(bound), _f(upper), float(bound - upper))


@routine("rs_partial_sum", "lemma_dominance")
def _rs_partial_sum(inp: dict, cfg: RunConfig) -> Outcome:
    n1 = zt.n1_of(inp["t"])
    oracle = pl.inv_sqrt_prefix(n1)
    bound = zt.rs_partial_sum_bound(inp["t"])
    return Outcome(_f(bound), _f(oracle), float(bound - oracle))


@routine("jensen", "lemma_dominance")
def _jensen(inp: dict, cfg: RunConfig) -> Outcome:
    a, b = inp["a"], inp["b"]
    with workdps():
        oracle = pl.inv_sqrt_prefix(b) - pl.inv_sqrt_prefix(a - 1)
        bound = zt.inv_sqrt_sum_jensen_bound(a, b)
        return Outcome(_f(bound), _f(oracle), float(bound - oracle))


@routine("block_sum", "lemma_dominance")
def _block_sum(inp: dict, cfg: RunConfig) -> Outcome:
    t, r0 = inp["t"], inp["r0"]
    _, _, R = pl.block_structure(t, Fraction(1, 3))
    with workdps():
        oracle = pl.inv_sqrt_block_sum(r0, R)
        bound = mpmath.log(pl.exact(t)) / 6 + pl.omega0_of(r0)
        return Outcome(_f(bound), _f(oracle), float(bound - oracle))


@routine("asinh_sum", "lemma_dominance")
def _asinh_sum(inp: dict, cfg: RunConfig) -> Outcome:
    r0, R = inp["r0"], inp["R"]
    with workdps():
        oracle = pl.inv_sqrt_block_sum(r0, R)
        bound = pl.asinh_block_bound(r0, R)
        return Outcome(_f(bound), _f(oracle), float(bound - oracle))


@routine("envelope", "lemma_dominance")
def _envelope(inp: dict, cfg: RunConfig) -> Outcome:
    margins = pl.envelope_margins(inp["t"], inp["phi"])
    return Outcome(None, None, float(min(margins.values())))


@routine("block_relations", "lemma_dominance")
def _block_relations(inp: dict, cfg: RunConfig) -> Outcome:
    t, phi, t0 = inp["t"], inp["phi"], inp["t0"]
    K, n1, R = pl.block_structure(t, phi)
    R0 = pl.R0_of(t0, phi)
    with workdps():
        tt, ph = pl.exact(t), pl.exact(phi)
        slacks = [
            mpf(n1 - R * K),
            mpf((R + 1) * K - n1),
            mpf(R - R0),
            tt ** (mpf(1) / 2 - ph) / mpmath.sqrt(2 * mpmath.pi) - R,
            tt**ph + 1 - K,
        ]
        return Outcome(None, None, float(min(slacks)))


@routine("fact", "lemma_dominance")
def _fact(inp: dict, cfg: RunConfig) -> Outcome:
    name = inp["fact"]
    with workdps():
        if name == "r0_feasible_medium":
            R0 = pl.R0_of(5.5e7, 0.3414)
            return Outcome(R0, 4, float(R0 - 4))
        if name == "large_R0_half":
            v = pl.R0_of(1e12, Fraction(1, 3)) + mpf(1) / 2
            return Outcome(_f(v), 39.5, float(v - mpf("39.5")))
        if name.startswith("a1_decreasing"):
            lo, hi = (float(x) for x in name.split(":")[1:])
            a_lo = _published_tuple(f"medium/t0={lo:g}", cfg.precision_digits).leading
            a_hi = _published_tuple(f"medium/t0={hi:g}", cfg.precision_digits).leading
            return Outcome(_f(a_lo), _f(a_hi), float(a_lo - a_hi))
        if name.startswith("asinh_identity"):
            x = pl.exact(name.split(":")[1])
            diff = abs(2 * mpmath.asinh(mpmath.sqrt(x)) - pl.asinh_log_form(x))
            return Outcome(1e-30, _f(diff), float(mpf("1e-30") - diff))
        if name == "remainder_at_1e7":
            r = zt.gabcke_remainder_bound(1e7)
            return Outcome(0.027, _f(r), float(mpf("0.027") - r))
        if name == "sum_to_1261":
            s = pl.inv_sqrt_prefix(1261)
            return Outcome(69.575, _f(s), float(mpf("69.575") - s))
        if name == "n1_at_1e7":
            n1 = zt.n1_of(1e7)
            return Outcome(1261, n1, 0.0 if n1 == 1261 else -1.0)
    raise KeyError(f"unknown fact {name!r}")


FACTS = (
    "r0_feasible_medium",
    "large_R0_half",
    "a1_decreasing:5.5e7:1e8",
    "a1_decreasing:1e8:8.5e10",
    "asinh_identity:1",
    "asinh_identity:39.5",
    "asinh_identity:1e6",
    "remainder_at_1e7",
    "sum_to_1261",
    "n1_at_1e7",
)


# ---------------------------------------------------------------- generation


def stream(seed: int, name: str) -> np.random.Generator:
    """Counter-based generator keyed by (seed, routine name)."""
    key = np.array([seed & (2**64 - 1), zlib.crc32(name.encode())], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _loguniform(rng, lo, hi) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def _gen_kusmin_landau(rng, n):
    out = []
    for _ in range(n):
        family = str(rng.choice(["linear", "quadratic", "cubic", "logarithmic"]))
        th1, th2 = (float(x) for x in rng.uniform(0.005, 0.5, size=2))
        if family == "logarithmic":
            ell = int(rng.integers(0, 5))
            t = _loguniform(rng, 1e3, 1e12)
            tau = t / (2 * math.pi)
            shift = math.ceil(tau / (ell + 1 - th2))
            room = math.floor(tau / (ell + th1)) - shift if ell + th1 > 0 else 5000
            L = max(1, min(int(rng.integers(1, 5001)), room))
            out.append({"family": family, "t": t, "shift": shift, "a": 0, "b": L})
        else:
            ell = int(rng.integers(-3, 4))
            lo, hi = ell + th1, ell + 1 - th2
            if rng.random() < 0.5:
                lo, hi = hi, lo
            a = int(rng.integers(0, 1000))
            L = int(rng.integers(1, 2001))
            out.append({"family": family, "a": a, "b": a + L, "da": lo, "db": hi,
                        "sign": int(rng.choice([-1, 1]))})
    return out


def _random_block(rng, t_lo, t_hi, K_lo, K_hi):
    t = _loguniform(rng, t_lo, t_hi)
    r = int(rng.integers(1, 9))
    K = int(rng.integers(K_lo, K_hi + 1))
    K0 = float(1 + (K - 1) * rng.uniform(0.01, 1.0))
    return t, r, K, K0


def _gen_second(rng, n):
    out = []
    for _ in range(n):
        t, r, K, K0 = _random_block(rng, 1e5, 1e9, 50, 2000)
        m = int(min(K - 1, max(1, round(_loguniform(rng, 1, K - 1)))))
        Ls = sorted([K, *(int(x) for x in rng.choice(np.arange(1, K), size=9, replace=False))])
        out.append({"t": t, "r": r, "K": K, "m": m, "K0": K0, "L_values": Ls})
    return out


def _gen_third(rng, n):
    out = []
    for _ in range(n):
        t = _loguniform(rng, 1e6, 1e12)
        r = int(rng.integers(1, 9))
        K = int(min(2000, max(2, round(t ** (1 / 3) * rng.uniform(0.2, 2.0)))))
        K0 = float(1 + (K - 1) * rng.uniform(0.01, 1.0))
        eta = float(rng.uniform(0.5, 3.0))
        windows = []
        for _ in range(10):
            L = int(rng.integers(1, K + 1))
            N = int(rng.integers(-1, K - L + 1))
            windows.append([N, L])
        windows.append([0, K])
        out.append({"t": t, "r": r, "K": K, "K0": K0, "eta": eta, "windows": windows})
    return out


def _gen_weyl(rng, n):
    out = []
    for _ in range(n):
        L = int(rng.integers(2, 201))
        M = int(rng.integers(1, L + 1))
        N = int(rng.integers(0, 1000))
        if rng.random() < 0.5:
            out.append({"family": "quadratic", "alpha": float(rng.random()), "beta": float(rng.random()),
                        "N": N, "L": L, "M": M})
        else:
            out.append({"family": "logarithmic", "t": _loguniform(rng, 1e4, 1e12),
                        "shift": int(rng.integers(1, 10**5)), "N": N, "L": L, "M": M})
    return out


def _gen_weyl_propagation(rng, n):
    out = []
    for _ in range(n):
        t = _loguniform(rng, 1e6, 1e12)
        r = int(rng.integers(1, 9))
        K = max(2, round(t ** (1 / 3) * rng.uniform(0.5, 2.0)))
        K0 = float(1 + (K - 1) * rng.uniform(0.01, 1.0))
        out.append({"t": t, "r": r, "K": K, "K0": K0, "eta": float(rng.uniform(0.5, 3.0))})
    return out


def _gen_sandwich(rng, n):
    out = []
    for _ in range(n):
        t, r, K, _ = _random_block(rng, 1e5, 1e12, 2, 5000)
        out.append({"t": t, "r": r, "K": K, "m": int(rng.integers(1, K))})
    return out


def _gen_third_sandwich(rng, n):
    return [{k: v for k, v in d.items() if k != "m"} for d in _gen_sandwich(rng, n)]


def _gen_audit(rng, n):
    out = []
    while len(out) < n:
        t, r, K, K0 = _random_block(rng, 1e5, 1e9, 50, 2000)
        m = int(rng.integers(1, K))
        W = math.pi * (r + 1) ** 3 * K**3 / t
        if math.sqrt(m / (math.pi * W)) >= 0.5:
            continue
        out.append({"t": t, "r": r, "K": K, "m": m, "L": int(rng.integers(1, K + 1)), "K0": K0})
    return out


def _gen_t(lo, hi):
    def gen(rng, n):
        return [{"t": _loguniform(rng, lo, hi)} for _ in range(n)]

    return gen


def _gen_uniform_t(lo, hi):
    def gen(rng, n):
        return [{"t": float(rng.uniform(lo, hi))} for _ in range(n)]

    return gen


def _gen_jensen(rng, n):
    out = []
    for _ in range(n):
        a = int(rng.integers(1, 5000))
        out.append({"a": a, "b": a + int(rng.integers(0, 5000))})
    return out


def _gen_block_sum(rng, n):
    return [{"t": _loguniform(rng, 1e12, 1e24), "r0": int(rng.integers(2, 9))} for _ in range(n)]


def _gen_asinh_sum(rng, n):
    out = []
    for _ in range(n):
        R = int(round(_loguniform(rng, 2, 1e5)))
        out.append({"r0": int(rng.integers(2, R + 1)), "R": R})
    return out


def _gen_envelope(rng, n):
    out = []
    for i in range(n):
        if i % 2 == 0:
            out.append({"t": _loguniform(rng, 5.5e7, 1e12), "phi": 0.3414})
        else:
            out.append({"t": _loguniform(rng, 1e12, 1e30), "phi": "1/3"})
    return out


def _gen_block_relations(rng, n):
    windows = [(5.5e7, 1e8, 0.3414), (1e8, 8.5e10, 0.3414), (8.5e10, 1e12, 0.3414), (1e12, 1e30, "1/3")]
    out = []
    for i in range(n):
        lo, hi, phi = windows[i % len(windows)]
        out.append({"t": _loguniform(rng, lo, hi), "phi": phi, "t0": lo})
    return out


GENERATORS: dict[str, Callable] = {
    "kusmin_landau": _gen_kusmin_landau,
    "second_derivative": _gen_second,
    "third_derivative": _gen_third,
    "weyl": _gen_weyl,
    "weyl_propagation": _gen_weyl_propagation,
    "second_sandwich": _gen_sandwich,
    "third_sandwich": _gen_third_sandwich,
    "audit": _gen_audit,
    "rs_partial_sum": _gen_uniform_t(1e7, 5.5e7),
    "jensen": _gen_jensen,
    "block_sum": _gen_block_sum,
    "asinh_sum": _gen_asinh_sum,
    "envelope": _gen_envelope,
    "block_relations": _gen_block_relations,
    "rs_upper_vs_reference": _gen_uniform_t(200, 1e6),
    "rs_upper_vs_theorem": _gen_uniform_t(200, 1e6),
    "rs_upper_vs_rsl": _gen_t(200, 1e7),
}

SUITE_ROUTINES = {
    "lemmas": ("kusmin_landau", "second_derivative", "third_derivative", "weyl", "weyl_propagation",
               "second_sandwich", "third_sandwich", "audit"),
    "regions": ("rs_partial_sum", "jensen", "block_sum", "asinh_sum", "envelope", "block_relations",
                "rs_upper_vs_reference", "rs_upper_vs_theorem", "rs_upper_vs_rsl"),
}


@dataclass(frozen=True)
class Task:
    check_id: str
    routine: str
    inputs: dict


def _task(check_id: str, name: str, inputs: dict) -> Task:
    return Task(check_id, name, {"routine": name, **inputs})


def log_spaced(lo: float, hi: float, n: int) -> list[float]:
    if n == 1:
        return [float(lo)]
    a, b = math.log(lo), math.log(hi)
    pts = [math.exp(a + i * (b - a) / (n - 1)) for i in range(n)]
    pts[0], pts[-1] = float(lo), float(hi)
    return pts


def build_tasks(suite: str, cfg: RunConfig) -> list[Task]:
    if suite == "all":
        return [t for s in SUITES for t in build_tasks(s, cfg)]
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    tasks: list[Task] = []
    if suite == "theorem":
        for i, t in enumerate(log_spaced(3, cfg.tmax, cfg.samples("theorem"))):
            tasks.append(_task(f"theorem/sample/{i:05d}", "theorem", {"t": t}))
        return tasks
    if suite == "regions":
        for tid, printed in PUBLISHED.items():
            for i, p in enumerate(printed):
                tol = LEADING_TOL if i == 0 else OTHER_TOL
                tasks.append(_task(f"regions/coeffs/{tid}/{i}", "coefficient_match",
                                   {"tuple": tid, "index": i, "printed": p, "tol": tol}))
        for c in pl.region_crossings():
            tasks.append(_task(f"regions/{c.check_id}", "crossing", {"crossing": c.check_id}))
        tasks.append(_task("regions/sample/small_t_0.595", "small_t_grid",
                           {"t_lo": "3", "t_hi": "200", "step": "0.1", "constant": "0.595"}))
        for name in FACTS:
            tasks.append(_task(f"regions/fact/{name}", "fact", {"fact": name}))
    for name in SUITE_ROUTINES[suite]:
        rng = stream(cfg.seed, name)
        for i, inputs in enumerate(GENERATORS[name](rng, cfg.samples(name))):
            tasks.append(_task(f"{suite}/{name}/{i:05d}", name, inputs))
    return tasks


def run_task(task: Task, cfg: RunConfig) -> VerificationRecord:
    kind, fn = ROUTINES[task.routine]
    start = time.perf_counter()
    with workdps(cfg.precision_digits):
        try:
            out = fn(task.inputs, cfg)
            skipped = False
        except RefusalError:
            out = Outcome(None, None, 0.0, False)
            skipped = True
    ms = int(round((time.perf_counter() - start) * 1000))
    return VerificationRecord(task.check_id, kind, task.inputs, out.bound, out.oracle, float(out.margin),
                              bool(out.passed), ms, skipped)


def _init_worker(dps: int) -> None:
    set_dps(dps)


def _run_in_worker(args) -> VerificationRecord:
    task, cfg = args
    return run_task(task, cfg)


@dataclass
class Report:
    config: RunConfig
    records: list[VerificationRecord]

    @property
    def summary(self) -> dict[str, int]:
        skip = sum(r.skipped for r in self.records)
        ok = sum(r.passed and not r.skipped for r in self.records)
        return {"pass": ok, "fail": len(self.records) - ok - skip, "skip": skip}

    @property
    def ok(self) -> bool:
        return self.summary["fail"] == 0

    def to_dict(self) -> dict:
        return {"config": self.config.as_dict(), "records": [r.to_dict() for r in self.records],
                "summary": self.summary}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check_id", "kind", "bound", "oracle", "margin", "pass"])
        for r in self.records:
            w.writerow([r.check_id, r.kind, r.bound, r.oracle, r.margin, r.passed])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        for r in self.records:
            status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
            lines.append(f"{status} {r.check_id} margin={r.margin:.6g}")
        s = self.summary
        lines.append(f"{s['pass']} passed, {s['fail']} failed, {s['skip']} skipped")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str | None = None) -> str:
        fmt = fmt or self.config.output_format
        return {"json": self.to_json, "csv": self.to_csv, "text": self.to_text}[fmt]()


def run_suite(suite: str, cfg: RunConfig) -> Report:
    """Run a suite (``lemmas``, ``regions``, ``theorem`` or ``all``); records come back ordered by check_id."""
    set_dps(cfg.precision_digits)
    tasks = build_tasks(suite, cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_init_worker,
                                 initargs=(cfg.precision_digits,)) as pool:
            records = list(pool.map(_run_in_worker, [(t, cfg) for t in tasks], chunksize=16))
    else:
        records = [run_task(t, cfg) for t in tasks]
    records.sort(key=lambda r: r.check_id)
    return Report(cfg, records)


def replay(record: dict, cfg: RunConfig) -> VerificationRecord:
    """Re-run one record from its stored inputs."""
    inputs = record["inputs"]
    return run_task(Task(record["check_id"], inputs["routine"], inputs), cfg)


def strip_timing(report: dict) -> dict:
    out = json.loads(json.dumps(report))
    for r in out["records"]:
        r.pop("runtime_ms", None)
    return out


def config_fields() -> list[str]:
    return [f.name for f in fields(RunConfig)]
