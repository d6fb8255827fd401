"""Exhaustive grid search over region parameters (phi, eta, r0) at a fixed t0."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction

from mpmath import mpf

from .errors import DomainError, InfeasibleError
from .pipeline import CoefficientTuple, RegionParams, compute_coefficients
from .precision import workdps


class Objective(str, Enum):
    MINIMIZE_A1 = "minimize_a1"
    MINIMIZE_BOUND_AT_T = "minimize_bound_at_t"


def decimal_grid(lo, hi, step) -> list[float]:
    """lo, lo + step, ..., up to hi inclusive, built in decimal so 0.3414-style points are exact."""
    lo, hi, step = Decimal(str(lo)), Decimal(str(hi)), Decimal(str(step))
    if step <= 0:
        raise DomainError(f"grid step must be positive, got {step}")
    if hi < lo:
        raise DomainError(f"empty range [{lo}, {hi}]")
    count = int((hi - lo) / step) + 1
    return [float(lo + i * step) for i in range(count)]


@dataclass(frozen=True)
class SearchSpace:
    """Grid over (phi, eta, r0). ``phi_range=None`` selects the large pipeline (phi = 1/3)."""

    phi_range: tuple[float, float, float] | None
    eta_range: tuple[float, float, float]
    r0_set: tuple[int, ...]
    t0: float
    objective: Objective = Objective.MINIMIZE_A1
    t_eval: float | None = None

    def __post_init__(self):
        if self.phi_range is not None:
            lo, hi, step = self.phi_range
            if not (1 / 3 < lo <= hi < 1 / 2):
                raise DomainError(f"phi range must lie inside (1/3, 1/2), got [{lo}, {hi}]")
            if step <= 0:
                raise DomainError("phi step must be positive")
        if self.eta_range[2] <= 0:
            raise DomainError("eta step must be positive")
        if not self.r0_set:
            raise DomainError("r0 set is empty")
        if Objective(self.objective) is Objective.MINIMIZE_BOUND_AT_T and self.t_eval is None:
            raise DomainError("minimize_bound_at_t needs t_eval")

    def phis(self) -> list:
        if self.phi_range is None:
            return [Fraction(1, 3)]
        return decimal_grid(*self.phi_range)

    def points(self) -> list[RegionParams]:
        out = []
        for phi in self.phis():
            for eta in decimal_grid(*self.eta_range):
                for r0 in sorted(self.r0_set):
                    out.append(RegionParams(phi, eta, r0, self.t0))
        return out


@dataclass(frozen=True)
class Candidate:
    params: RegionParams
    coefficients: CoefficientTuple
    objective: mpf

    def sort_key(self):
        return (self.objective, float(self.params.phi), self.params.eta, self.params.r0)


@dataclass
class SearchResult:
    candidates: list[Candidate]
    evaluated: int
    infeasible: int
    skipped: list[RegionParams] = field(default_factory=list)

    @property
    def best(self) -> Candidate | None:
        return self.candidates[0] if self.candidates else None


def objective_at(params: RegionParams, objective: Objective | str = Objective.MINIMIZE_A1, t_eval=None) -> mpf:
    """Leading coefficient, or the full bound at ``t_eval``. Raises InfeasibleError when r0 > R0."""
    objective = Objective(objective)
    tup = compute_coefficients(params)
    if objective is Objective.MINIMIZE_A1:
        return tup.leading
    if t_eval is None:
        raise DomainError("minimize_bound_at_t needs t_eval")
    return tup.bound_at(t_eval)


def _evaluate(args) -> tuple[RegionParams, CoefficientTuple | None, mpf | None]:
    params, objective, t_eval = args
    with workdps():
        try:
            tup = compute_coefficients(params)
        except InfeasibleError:
            return params, None, None
        value = tup.leading if objective is Objective.MINIMIZE_A1 else tup.bound_at(t_eval)
        return params, tup, value


def grid_search(space: SearchSpace, workers: int = 1) -> SearchResult:
    """Evaluate every grid point; rank by objective, ties broken by (phi, eta, r0).

    Infeasible points (r0 > R0) are skipped and counted. ``workers > 1`` uses
    a process pool; results are collected in grid order, so the ranking does
    not depend on the worker count.
    """
    objective = Objective(space.objective)
    jobs = [(p, objective, space.t_eval) for p in space.points()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate, jobs, chunksize=max(1, math.ceil(len(jobs) / (4 * workers)))))
    else:
        results = [_evaluate(j) for j in jobs]
    candidates = []
    skipped = []
    for params, tup, value in results:
        if tup is None:
            skipped.append(params)
        else:
            candidates.append(Candidate(params, tup, value))
    candidates.sort(key=Candidate.sort_key)
    return SearchResult(candidates, len(jobs), len(skipped), skipped)
