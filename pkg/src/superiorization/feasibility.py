"""Feasibility-seeking projection operators.

The general operator is dynamic string averaging: at iteration ``k`` a plan
(a fit set of index vectors plus positive weights summing to one) is chosen,
each index vector is turned into a string of successive projections, and the
string end-points are averaged with the plan weights. Kaczmarz (one string
through every set) and Cimmino (one singleton string per set, equal weights)
are the two extreme plans.

Index vectors are 0-based tuples of constraint indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import geometry
from .errors import PlanError
from .geometry import ConstraintFamily, as_vector
from .trace import IterateTrace, StopRule, TraceRecord

WEIGHT_SUM_TOL = 1e-12

STRATEGIES = ("kaczmarz", "cimmino", "fixed", "cyclic_rotation", "seeded_random")


@dataclass(frozen=True)
class StringPlan:
    """A fit set of index vectors with their averaging weights.

    Weights must be positive and sum to one within ``WEIGHT_SUM_TOL``; sums
    inside the tolerance are renormalized, anything else is rejected.
    """

    strings: tuple
    weights: tuple

    def __post_init__(self):
        strings = tuple(tuple(int(i) for i in t) for t in self.strings)
        weights = tuple(float(w) for w in self.weights)
        if not strings:
            raise PlanError("a plan needs at least one string")
        if len(strings) != len(weights):
            raise PlanError(f"{len(strings)} strings but {len(weights)} weights")
        if any(len(t) == 0 for t in strings):
            raise PlanError("index vectors must be non-empty")
        if any(i < 0 for t in strings for i in t):
            raise PlanError("constraint indices must be nonnegative")
        if any(not (w > 0 and np.isfinite(w)) for w in weights):
            raise PlanError(f"weights must be positive and finite, got {weights}")
        total = float(np.sum(weights))
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise PlanError(f"weights sum to {total!r}, not 1")
        if total != 1.0:
            weights = tuple(w / total for w in weights)
        object.__setattr__(self, "strings", strings)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.strings)

    def check_fit(self, m: int) -> None:
        """Raise ``PlanError`` unless every index is < m and all m appear."""
        seen = set()
        for t in self.strings:
            for i in t:
                if i >= m:
                    raise PlanError(f"index {i} out of range for {m} constraints")
                seen.add(i)
        if len(seen) != m:
            missing = sorted(set(range(m)) - seen)
            raise PlanError(f"plan is not fit: constraints {missing} never visited")


@dataclass(frozen=True)
class PlanBounds:
    """Admissible plans: every string length <= qbar, every weight >= delta."""

    delta: float
    qbar: int

    def validate_for(self, m: int) -> None:
        if not 0 < self.delta < 1.0 / m:
            raise PlanError(f"delta must lie in (0, 1/m) = (0, {1.0 / m}), got {self.delta}")
        if self.qbar < m:
            raise PlanError(f"qbar must be >= m = {m}, got {self.qbar}")

    def admits(self, plan: StringPlan) -> bool:
        return all(len(t) <= self.qbar for t in plan.strings) and all(
            w >= self.delta for w in plan.weights
        )


def kaczmarz_plan(m: int) -> StringPlan:
    return StringPlan((tuple(range(m)),), (1.0,))


def cimmino_plan(m: int) -> StringPlan:
    return StringPlan(tuple((i,) for i in range(m)), (1.0 / m,) * m)


def _rng(*key) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def random_plan(m: int, bounds: PlanBounds, seed: int, k: int) -> StringPlan:
    """A random partition of the constraint indices into strings.

    Deterministic in ``(seed, k)``. Weights are ``delta`` plus a Dirichlet
    share of the remaining mass, so they respect the lower bound.
    """
    rng = _rng(seed, k)
    perm = rng.permutation(m)
    s = int(rng.integers(1, m + 1))
    cuts = np.sort(rng.choice(np.arange(1, m), size=s - 1, replace=False)) if s > 1 else []
    strings = [tuple(int(i) for i in part) for part in np.split(perm, cuts)]
    w = bounds.delta + (1.0 - s * bounds.delta) * rng.dirichlet(np.ones(s))
    return StringPlan(tuple(strings), tuple(w / w.sum()))


@dataclass(frozen=True, eq=False)
class BasicAlgorithm:
    """A feasibility-seeking operator over ``family`` with a plan per iteration.

    ``strategy`` names how plans vary with the iteration counter:

    ``kaczmarz`` / ``cimmino``
        the classical fixed plans;
    ``fixed``
        ``plan`` at every iteration;
    ``cyclic_rotation``
        ``plan`` with every index shifted by ``k`` modulo ``m``;
    ``seeded_random``
        a fresh random partition per iteration, see :func:`random_plan`.
    """

    family: ConstraintFamily
    strategy: str = "kaczmarz"
    plan: Optional[StringPlan] = None
    bounds: Optional[PlanBounds] = None
    seed: int = 0

    def __post_init__(self):
        m = self.family.m
        if self.strategy not in STRATEGIES:
            raise PlanError(f"unknown plan strategy {self.strategy!r}")
        plan = self.plan
        if self.strategy == "kaczmarz":
            plan = kaczmarz_plan(m)
        elif self.strategy == "cimmino":
            plan = cimmino_plan(m)
        elif self.strategy in ("fixed", "cyclic_rotation") and plan is None:
            raise PlanError(f"strategy {self.strategy!r} requires an explicit plan")
        if plan is not None:
            plan.check_fit(m)
        object.__setattr__(self, "plan", plan)

        bounds = self.bounds
        if bounds is None:
            wmin = min(plan.weights) if plan is not None else 1.0
            qmax = max(len(t) for t in plan.strings) if plan is not None else m
            bounds = PlanBounds(min(wmin, 1.0 / m) / 2.0, max(m, qmax))
        bounds.validate_for(m)
        if plan is not None and not bounds.admits(plan):
            raise PlanError(f"plan violates bounds {bounds}")
        object.__setattr__(self, "bounds", bounds)

    @property
    def m(self) -> int:
        return self.family.m

    def plan_at(self, k: int) -> StringPlan:
        if self.strategy == "seeded_random":
            return random_plan(self.m, self.bounds, self.seed, k)
        if self.strategy == "cyclic_rotation":
            m = self.m
            return StringPlan(
                tuple(tuple((i + k) % m for i in t) for t in self.plan.strings),
                self.plan.weights,
            )
        return self.plan

    def __call__(self, x, k: int = 0) -> np.ndarray:
        return dsap_step(self, self.plan_at(k), x)


def kaczmarz(family: ConstraintFamily) -> BasicAlgorithm:
    return BasicAlgorithm(family, "kaczmarz")


def cimmino(family: ConstraintFamily) -> BasicAlgorithm:
    return BasicAlgorithm(family, "cimmino")


def apply_string(family: ConstraintFamily, t, x) -> np.ndarray:
    """Project successively onto ``family[t[0]]``, ..., ``family[t[-1]]``."""
    return _apply_string(family, t, as_vector(x, family.dim))


def _apply_string(family: ConstraintFamily, t, x: np.ndarray) -> np.ndarray:
    for i in t:
        if not 0 <= i < family.m:
            raise PlanError(f"index {i} out of range for {family.m} constraints")
        x = family.sets[i].project(x)
    return x


def dsap_step(algo: BasicAlgorithm, plan: StringPlan, x) -> np.ndarray:
    """One string-averaging step: the weighted mean of the string end-points."""
    plan.check_fit(algo.m)
    if not algo.bounds.admits(plan):
        raise PlanError(f"plan violates bounds {algo.bounds}")
    x = as_vector(x, algo.family.dim)
    ends = [_apply_string(algo.family, t, x) for t in plan.strings]
    first = ends[0]
    if all(e is first or np.array_equal(e, first) for e in ends[1:]):
        return first
    acc = plan.weights[0] * ends[0]
    for w, e in zip(plan.weights[1:], ends[1:]):
        acc = acc + w * e
    return acc


def _phi(objective, x) -> float:
    return float("nan") if objective is None else float(objective.value(x))


def run_basic(algo: BasicAlgorithm, x0, stop: StopRule, objective=None) -> IterateTrace:
    """Iterate the unperturbed operator from ``x0`` until ``stop`` fires.

    Inconsistent families are fine; a run that never reaches ``stop.epsilon``
    simply ends with ``StopReason.MAX_ITERS``.
    """
    x = as_vector(x0, algo.family.dim, "x0")
    trace = IterateTrace(meta={"mode": "basic", "strategy": algo.strategy, "seed": algo.seed})
    k = 0
    while True:
        prox = geometry.proximity(algo.family, x)
        trace.append(TraceRecord(k, x, prox, _phi(objective, x)))
        reason = stop.check(k, prox)
        if reason is not None:
            trace.stop_reason = reason
            return trace
        x = dsap_step(algo, algo.plan_at(k), x)
        k += 1
