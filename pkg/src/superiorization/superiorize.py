"""Superiorized versions of a basic feasibility-seeking algorithm.

Three step rules are provided, all of the form "perturb, then apply the basic
operator":

* :func:`weak_step` -- ``N`` perturbations along normalized negative
  subgradients (or derivative-free nonascending directions), step sizes taken
  from a summable schedule, no acceptance test;
* :func:`strong_step` -- the same, except each candidate is accepted only if
  its objective value does not exceed the value at the start of the outer
  iteration; rejected candidates shrink the step by advancing the schedule;
* :func:`generic_step` -- one perturbation along the normalized displacement
  of an arbitrary auxiliary operator ``B``.

A :class:`Schedule` is an immutable cursor into ``eta_l = a**l``. Each step
returns the advanced schedule, so a run threads one schedule through all its
steps and the step-size index only ever moves forward (or back, by a bounded
number of restarts).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from . import geometry
from .errors import InnerLoopBudgetError, ObjectiveError
from .feasibility import BasicAlgorithm, dsap_step
from .geometry import as_vector
from .objectives import Objective, derivative_free_direction, subgradient_direction
from .trace import InnerEvent, IterateTrace, StopRule, TraceRecord

DEFAULT_INNER_BUDGET = 50


@dataclass(frozen=True)
class RestartTo:
    """After every ``every`` emissions jump back to index ``to``, at most ``budget`` times."""

    to: int
    every: int
    budget: int

    def __post_init__(self):
        if self.to < 0 or self.every < 1 or self.budget < 0:
            raise ValueError(f"invalid restart policy {self}")


@dataclass(frozen=True)
class Schedule:
    a: float = 0.5
    cursor: int = -1
    restart: Optional[RestartTo] = None
    null: bool = False
    since_restart: int = 0
    restarts_used: int = 0

    def __post_init__(self):
        if not 0 < self.a < 1:
            raise ValueError(f"schedule base must lie in (0, 1), got {self.a}")
        if self.cursor < -1:
            raise ValueError("cursor must be >= -1")

    @classmethod
    def off(cls) -> "Schedule":
        """A schedule that always emits zero: the unperturbed control arm."""
        return cls(null=True)

    def total_bound(self) -> float:
        """Upper bound on the sum of everything this schedule can still emit."""
        if self.null:
            return 0.0
        first = self.a ** (self.cursor + 1) / (1 - self.a)
        if self.restart is None:
            return first
        left = self.restart.budget - self.restarts_used
        return first + left * self.a**self.restart.to / (1 - self.a)


def next_beta(schedule: Schedule) -> tuple[float, Schedule]:
    """Emit the next step size and return it with the advanced schedule."""
    if schedule.null:
        return 0.0, schedule
    ell = schedule.cursor + 1
    since = schedule.since_restart
    used = schedule.restarts_used
    r = schedule.restart
    if r is not None and since >= r.every and used < r.budget:
        ell, since, used = r.to, 0, used + 1
    beta = schedule.a**ell
    return beta, replace(schedule, cursor=ell, since_restart=since + 1, restarts_used=used)


@dataclass(frozen=True)
class Subgradient:
    def direction(self, obj: Objective, y, k: int, n: int) -> np.ndarray:
        return subgradient_direction(obj, y)


@dataclass(frozen=True)
class DerivativeFree:
    """Random direction search; each (k, n) draws from its own seeded stream."""

    probe_radius: float = 1e-3
    trials: int = 32
    seed: int = 0

    def direction(self, obj: Objective, y, k: int, n: int) -> np.ndarray:
        return derivative_free_direction(obj, y, self.probe_radius, self.trials, (self.seed, k, n))


@dataclass(frozen=True, eq=False)
class AuxiliaryAlgorithm:
    """An operator ``B`` whose displacement ``B(y) - y`` steers the perturbations."""

    operator: Callable
    description: str = ""

    def __call__(self, y):
        return self.operator(y)


def gradient_step_aux(obj: Objective, step: float) -> AuxiliaryAlgorithm:
    """``B(y) = y - step * s(y)``: plain (sub)gradient descent on ``obj``."""
    return AuxiliaryAlgorithm(lambda y: y - step * obj.subgradient(y), f"gradient step {step}")


@dataclass(frozen=True, eq=False)
class SuperiorizerConfig:
    """``mode`` is ``"weak"``, ``"strong"`` or an :class:`AuxiliaryAlgorithm`."""

    N: int = 1
    mode: Union[str, AuxiliaryAlgorithm] = "weak"
    schedule: Schedule = field(default_factory=Schedule)
    direction: Union[Subgradient, DerivativeFree] = field(default_factory=Subgradient)
    inner_budget: int = DEFAULT_INNER_BUDGET

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not (self.mode in ("weak", "strong") or isinstance(self.mode, AuxiliaryAlgorithm)):
            raise ValueError(f"unknown superiorization mode {self.mode!r}")
        if self.inner_budget < 1:
            raise ValueError("inner_budget must be >= 1")

    @property
    def mode_name(self) -> str:
        return self.mode if isinstance(self.mode, str) else "generic"

    def fingerprint(self) -> str:
        doc = {
            "N": self.N,
            "mode": self.mode_name,
            "schedule": asdict(self.schedule),
            "direction": {"type": type(self.direction).__name__, **asdict(self.direction)},
            "inner_budget": self.inner_budget,
        }
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


class Step(NamedTuple):
    point: np.ndarray
    schedule: Schedule
    events: tuple = ()


def _require_oracle(obj: Objective, cfg: SuperiorizerConfig) -> None:
    if isinstance(cfg.direction, Subgradient) and not obj.has_subgradient:
        raise ObjectiveError(
            f"{type(obj).__name__} is value-only; configure a derivative-free direction source"
        )


def weak_step(algo: BasicAlgorithm, obj: Objective, cfg: SuperiorizerConfig, y, schedule: Schedule, k: int = 0) -> Step:
    """``N`` unconditional perturbations ``y <- y + beta * v`` then one basic step."""
    _require_oracle(obj, cfg)
    y = as_vector(y, algo.family.dim)
    events = []
    for n in range(cfg.N):
        v = cfg.direction.direction(obj, y, k, n)
        beta, schedule = next_beta(schedule)
        if beta != 0.0 and v.any():
            y = y + beta * v
        events.append(InnerEvent(n, None if schedule.null else schedule.cursor, beta, True, obj.value(y)))
    return Step(dsap_step(algo, algo.plan_at(k), y), schedule, tuple(events))


def strong_step(algo: BasicAlgorithm, obj: Objective, cfg: SuperiorizerConfig, y, schedule: Schedule, k: int = 0) -> Step:
    """Perturbations with the acceptance test ``phi(z) <= phi(y^k)``.

    The direction is computed once per inner index ``n``; each rejection
    advances the schedule and retries with the smaller step. After
    ``cfg.inner_budget`` rejections for one ``n`` an
    :class:`InnerLoopBudgetError` is raised.
    """
    _require_oracle(obj, cfg)
    y = as_vector(y, algo.family.dim)
    ref = obj.value(y)
    events = []
    yn = y
    for n in range(cfg.N):
        v = cfg.direction.direction(obj, yn, k, n)
        for trial in range(1, cfg.inner_budget + 1):
            beta, schedule = next_beta(schedule)
            z = yn + beta * v if (beta != 0.0 and v.any()) else yn
            fz = obj.value(z)
            ok = fz <= ref
            events.append(InnerEvent(n, None if schedule.null else schedule.cursor, beta, ok, fz))
            if ok:
                yn = z
                break
        else:
            raise InnerLoopBudgetError(k, n, schedule.cursor, cfg.inner_budget)
    return Step(dsap_step(algo, algo.plan_at(k), yn), schedule, tuple(events))


def generic_step(algo: BasicAlgorithm, aux: AuxiliaryAlgorithm, schedule: Schedule, y, k: int = 0, obj: Optional[Objective] = None) -> Step:
    """``A(y + beta * v)`` with ``v`` the unit displacement ``B(y) - y`` (or 0)."""
    y = as_vector(y, algo.family.dim)
    dy = np.asarray(aux(y), dtype=np.float64) - y
    nd = float(np.linalg.norm(dy))
    v = dy / nd if nd != 0.0 else np.zeros_like(y)
    beta, schedule = next_beta(schedule)
    if beta != 0.0 and nd != 0.0:
        y = y + beta * v
    phi = obj.value(y) if obj is not None else math.nan
    ev = InnerEvent(0, None if schedule.null else schedule.cursor, beta, True, phi)
    return Step(dsap_step(algo, algo.plan_at(k), y), schedule, (ev,))


def run_superiorized(algo: BasicAlgorithm, obj: Objective, cfg: SuperiorizerConfig, x0, stop: StopRule) -> IterateTrace:
    """Drive the configured step rule from ``x0`` until ``stop`` fires.

    Each record carries the cumulative step size drawn from the schedule and
    the inner-loop events that produced it. With ``Schedule.off()`` the
    records coincide bitwise with :func:`~superiorization.feasibility.run_basic`.
    """
    if cfg.mode_name != "generic":
        _require_oracle(obj, cfg)
    y = as_vector(x0, algo.family.dim, "x0")
    schedule = cfg.schedule
    trace = IterateTrace(
        meta={
            "mode": cfg.mode_name,
            "strategy": algo.strategy,
            "seed": algo.seed,
            "config": cfg.fingerprint(),
        }
    )
    consumed = 0.0
    events: tuple = ()
    k = 0
    while True:
        prox = geometry.proximity(algo.family, y)
        descents = _count_descents(events, obj, trace)
        trace.append(TraceRecord(k, y, prox, obj.value(y), consumed, descents, events))
        reason = stop.check(k, prox)
        if reason is not None:
            trace.stop_reason = reason
            return trace
        if cfg.mode == "weak":
            step = weak_step(algo, obj, cfg, y, schedule, k)
        elif cfg.mode == "strong":
            step = strong_step(algo, obj, cfg, y, schedule, k)
        else:
            step = generic_step(algo, cfg.mode, schedule, y, k, obj)
        y, schedule, events = step
        consumed += sum(e.beta for e in events)
        k += 1


def _count_descents(events, obj, trace) -> int:
    """Accepted inner steps that strictly lowered the objective."""
    if not events:
        return 0
    prev = trace.final.phi
    count = 0
    for e in events:
        if e.accepted:
            if e.phi < prev:
                count += 1
            prev = e.phi
    return count
