"""JSON run configurations and their execution.

A run config is one JSON object::

    {"mode": "basic" | "weak" | "strong" | "generic",
     "N": 5,
     "schedule": {"a": 0.5, "restart": null | {"to": 0, "every": 10, "budget": 3}},
     "direction": {"source": "subgradient" | "dfs", "probe_radius": 1e-3, "trials": 32, "seed": 0},
     "plan": {"strategy": "kaczmarz" | "cimmino" | "fixed" | "cyclic_rotation" | "seeded_random",
              "delta": ..., "qbar": ..., "seed": 0, "strings": [[0, 1]], "weights": [1.0]},
     "objective": {"kind": "squared_norm" | "l1" | "quadratic", "Q": ..., "c": ...},
     "aux": {"kind": "gradient_step", "step": 0.1},
     "stop": {"max_iters": 1000, "epsilon": 1e-6}}

Only ``mode`` is required; everything else has a default. Errors are
reported as :class:`~superiorization.errors.ConfigError` naming the field.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional

from .errors import ConfigError, SuperiorizationError
from .feasibility import STRATEGIES, BasicAlgorithm, PlanBounds, StringPlan, run_basic
from .objectives import Objective, objective_from_dict
from .problems import Problem
from .superiorize import (
    DerivativeFree,
    RestartTo,
    Schedule,
    Subgradient,
    SuperiorizerConfig,
    gradient_step_aux,
    run_superiorized,
)
from .trace import IterateTrace, StopRule

MODES = ("basic", "weak", "strong", "generic")


@dataclass(frozen=True, eq=False)
class RunConfig:
    mode: str
    plan: dict
    objective: Objective
    stop: StopRule
    superiorizer: Optional[SuperiorizerConfig] = None
    raw: Optional[dict] = None

    def algorithm(self, problem: Problem, seed: Optional[int] = None) -> BasicAlgorithm:
        p = self.plan
        bounds = None
        if p.get("delta") is not None or p.get("qbar") is not None:
            m = problem.family.m
            bounds = PlanBounds(
                float(p.get("delta", 1.0 / (2 * m))),
                int(p.get("qbar", m)),
            )
        plan = None
        if p.get("strings") is not None:
            plan = StringPlan(p["strings"], p.get("weights", [1.0 / len(p["strings"])] * len(p["strings"])))
        return BasicAlgorithm(
            problem.family,
            p.get("strategy", "kaczmarz"),
            plan,
            bounds,
            int(p.get("seed", 0) if seed is None else seed),
        )

    def with_seeds(self, plan_seed: Optional[int] = None, direction_seed: Optional[int] = None) -> "RunConfig":
        plan = dict(self.plan)
        if plan_seed is not None:
            plan["seed"] = int(plan_seed)
        sup = self.superiorizer
        if sup is not None and direction_seed is not None and isinstance(sup.direction, DerivativeFree):
            sup = replace(sup, direction=replace(sup.direction, seed=int(direction_seed)))
        raw = dict(self.raw or {})
        raw["plan"] = plan
        if sup is not None and isinstance(sup.direction, DerivativeFree):
            raw["direction"] = dict(raw.get("direction") or {}, seed=sup.direction.seed)
        return replace(self, plan=plan, superiorizer=sup, raw=raw)


def _get(doc: dict, key: str, path: str, kind, default: Any = ...):
    if key not in doc or doc[key] is None:
        if default is ...:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
        return default
    val = doc[key]
    try:
        if kind is int and (isinstance(val, bool) or float(val) != int(val)):
            raise ValueError
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}" if path else key, f"expected {kind.__name__}, got {val!r}") from None


def _section(doc: dict, key: str) -> dict:
    sec = doc.get(key) or {}
    if not isinstance(sec, dict):
        raise ConfigError(key, "expected a JSON object")
    return sec


def parse_stop(doc: dict, path: str = "stop") -> StopRule:
    try:
        return StopRule(_get(doc, "max_iters", path, int, None), _get(doc, "epsilon", path, float, None))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_run_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "run config must be a JSON object")
    mode = _get(doc, "mode", "", str)
    if mode not in MODES:
        raise ConfigError("mode", f"expected one of {MODES}, got {mode!r}")

    plan = _section(doc, "plan")
    strategy = plan.get("strategy", "kaczmarz")
    if strategy not in STRATEGIES:
        raise ConfigError("plan.strategy", f"expected one of {STRATEGIES}, got {strategy!r}")

    try:
        objective = objective_from_dict(_section(doc, "objective") or {"kind": "squared_norm"})
    except (SuperiorizationError, KeyError) as exc:
        raise ConfigError("objective", str(exc)) from None

    stop = parse_stop(_section(doc, "stop") or {"max_iters": 1000})

    sup = None
    if mode != "basic":
        sched = _section(doc, "schedule")
        restart = sched.get("restart")
        try:
            rp = None
            if restart is not None:
                rp = RestartTo(
                    _get(restart, "to", "schedule.restart", int),
                    _get(restart, "every", "schedule.restart", int),
                    _get(restart, "budget", "schedule.restart", int),
                )
            schedule = Schedule(_get(sched, "a", "schedule", float, 0.5), restart=rp, null=bool(sched.get("null", False)))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("schedule", str(exc)) from None

        ddoc = _section(doc, "direction")
        source = ddoc.get("source", "subgradient")
        if source == "subgradient":
            direction = Subgradient()
        elif source == "dfs":
            direction = DerivativeFree(
                _get(ddoc, "probe_radius", "direction", float, 1e-3),
                _get(ddoc, "trials", "direction", int, 32),
                _get(ddoc, "seed", "direction", int, 0),
            )
        else:
            raise ConfigError("direction.source", f"expected 'subgradient' or 'dfs', got {source!r}")

        sup_mode: Any = mode
        if mode == "generic":
            aux = _section(doc, "aux") or {"kind": "gradient_step", "step": 1.0}
            if aux.get("kind", "gradient_step") != "gradient_step":
                raise ConfigError("aux.kind", f"unsupported auxiliary algorithm {aux.get('kind')!r}")
            if not objective.has_subgradient:
                raise ConfigError("objective", "gradient_step auxiliary needs a subgradient oracle")
            sup_mode = gradient_step_aux(objective, _get(aux, "step", "aux", float, 1.0))
        try:
            sup = SuperiorizerConfig(
                _get(doc, "N", "", int, 1),
                sup_mode,
                schedule,
                direction,
                _get(doc, "inner_budget", "", int, 50),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("N", str(exc)) from None
    return RunConfig(mode, dict(plan), objective, stop, sup, dict(doc))


def execute(problem: Problem, cfg: RunConfig, stop: Optional[StopRule] = None) -> IterateTrace:
    """Run ``cfg`` on ``problem`` from the problem's ``x0``."""
    stop = cfg.stop if stop is None else stop
    algo = cfg.algorithm(problem)
    if cfg.mode == "basic":
        return run_basic(algo, problem.x0, stop, cfg.objective)
    return run_superiorized(algo, cfg.objective, cfg.superiorizer, problem.x0, stop)
