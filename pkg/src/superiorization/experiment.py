"""Batch experiments: every arm on every replicate, same problem and ``x0``.

Seeding: replicate ``i`` gets ``seed_i = SeedSequence([master, i])``'s first
32-bit word. It seeds the problem generator and the plan sequence, which is
therefore shared by all arms. Derivative-free arms additionally mix in the
CRC32 of their own name, so adding an arm never changes another arm's stream.
"""

from __future__ import annotations

import json
import os
import tempfile
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .config import RunConfig, execute, parse_run_config, parse_stop
from .errors import ConfigError
from .evaluation import ProximityTargetCurve, better_targeted, epsilon_output
from .problems import generate

THREADS_ENV = "SUPERIOR_THREADS"


def replicate_seed(master: int, rep: int) -> int:
    return int(np.random.SeedSequence([int(master), int(rep)]).generate_state(1)[0])


def arm_seed(master: int, rep: int, arm: str) -> int:
    return int(np.random.SeedSequence([int(master), int(rep), zlib.crc32(arm.encode())]).generate_state(1)[0])


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    problem: dict
    arms: dict
    eps_grid: list
    replicates: int
    output_dir: Path
    baseline: str
    seed: int = 0
    stop: Optional[dict] = None
    curve_limit: Optional[int] = None
    samples: int = 101

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSpec":
        for key in ("problem", "arms", "eps_grid", "replicates", "output_dir"):
            if key not in doc:
                raise ConfigError(key, "missing required field")
        arms = doc["arms"]
        if isinstance(arms, list):
            arms = {a.get("name", f"arm{i}"): a for i, a in enumerate(arms)}
        if not isinstance(arms, dict) or not arms:
            raise ConfigError("arms", "expected a non-empty mapping of arm name to run config")
        for name, cfg in arms.items():
            try:
                parse_run_config(cfg)
            except ConfigError as exc:
                raise ConfigError(f"arms.{name}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
        baseline = doc.get("baseline")
        if baseline is None:
            basics = [n for n, c in arms.items() if c.get("mode") == "basic"]
            baseline = basics[0] if basics else next(iter(arms))
        if baseline not in arms:
            raise ConfigError("baseline", f"no arm named {baseline!r}")
        eps = doc["eps_grid"]
        if not isinstance(eps, list) or not eps or any(not float(e) > 0 for e in eps):
            raise ConfigError("eps_grid", "expected a non-empty list of positive numbers")
        reps = doc["replicates"]
        if not isinstance(reps, int) or reps < 1:
            raise ConfigError("replicates", "expected a positive integer")
        if doc.get("stop") is not None:
            parse_stop(doc["stop"])
        return cls(
            problem=doc["problem"],
            arms=arms,
            eps_grid=[float(e) for e in eps],
            replicates=reps,
            output_dir=Path(doc["output_dir"]),
            baseline=baseline,
            seed=int(doc.get("seed", 0)),
            stop=doc.get("stop"),
            curve_limit=doc.get("curve_limit"),
            samples=int(doc.get("samples", 101)),
        )


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _eps_key(eps: float) -> str:
    return repr(float(eps))


def _run_replicate(spec: ExperimentSpec, rep: int) -> dict:
    seed = replicate_seed(spec.seed, rep)
    pdoc = dict(spec.problem)
    if isinstance(pdoc.get("generator"), str):
        pdoc["seed"] = seed
    problem = generate(pdoc)
    out = spec.output_dir
    _write_atomic(out / "problems" / f"rep-{rep}.json", problem.to_json())
    shared_stop = parse_stop(spec.stop) if spec.stop is not None else None

    entry: dict = {"rep": rep, "seed": seed, "arms": {}, "comparisons": {}}
    traces = {}
    for name, raw in spec.arms.items():
        cfg: RunConfig = parse_run_config(raw).with_seeds(seed, arm_seed(spec.seed, rep, name))
        eff = dict(cfg.raw)
        if shared_stop is not None:
            eff["stop"] = shared_stop.to_dict()
        _write_atomic(out / "configs" / f"arm-{name}-rep-{rep}.json", json.dumps(eff, sort_keys=True))
        try:
            tr = execute(problem, cfg, shared_stop)
        except Exception as exc:  # arm failures are per-replicate data
            entry["arms"][name] = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
            continue
        traces[name] = tr
        _write_atomic(out / "traces" / f"arm-{name}-rep-{rep}.csv", tr.to_csv())
        outputs = {}
        for eps in spec.eps_grid:
            eo = epsilon_output(tr, eps)
            outputs[_eps_key(eps)] = None if eo is None else {"K": eo[0], "phi": tr.records[eo[0]].phi}
        entry["arms"][name] = {
            "status": "ok",
            "iterations": len(tr) - 1,
            "final_prox": tr.final.prox,
            "final_phi": tr.final.phi,
            "stop_reason": tr.stop_reason.value,
            "eps_outputs": outputs,
        }
        curve = ProximityTargetCurve.from_trace(tr, spec.curve_limit)
        _write_atomic(out / "curves" / f"arm-{name}-rep-{rep}.csv", curve.to_csv())

    base = traces.get(spec.baseline)
    if base is not None:
        base_curve = ProximityTargetCurve.from_trace(base, spec.curve_limit)
        for name, tr in traces.items():
            if name == spec.baseline:
                continue
            cmp = better_targeted(ProximityTargetCurve.from_trace(tr, spec.curve_limit), base_curve, spec.samples)
            entry["comparisons"][name] = cmp.to_dict()
            _write_atomic(out / "compare" / f"arm-{name}-vs-{spec.baseline}-rep-{rep}.json", cmp.to_json())
    return entry


def _superior(entry: dict, arm: str, baseline: str, key: str) -> bool:
    a, b = entry["arms"].get(arm, {}), entry["arms"].get(baseline, {})
    if a.get("status") != "ok" or b.get("status") != "ok":
        return False
    ea, eb = a["eps_outputs"][key], b["eps_outputs"][key]
    return ea is not None and eb is not None and ea["phi"] < eb["phi"]


def run_experiment(spec: ExperimentSpec, threads: Optional[int] = None) -> dict:
    """Run every arm on every replicate and write the report directory.

    Returns the summary, also written to ``output_dir/summary.json``.
    ``fractions[arm][eps]`` is the fraction of replicates in which the arm's
    ε-output has strictly lower objective value than the baseline's.
    """
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    threads = max(1, threads)
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    reps = range(spec.replicates)
    if threads == 1:
        ledger = [_run_replicate(spec, r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ledger = list(pool.map(lambda r: _run_replicate(spec, r), reps))

    fractions = {}
    for arm in spec.arms:
        fractions[arm] = {}
        for eps in spec.eps_grid:
            key = _eps_key(eps)
            wins = sum(_superior(e, arm, spec.baseline, key) for e in ledger)
            fractions[arm][key] = wins / spec.replicates
    summary = {
        "replicates": spec.replicates,
        "seed": spec.seed,
        "baseline": spec.baseline,
        "arms": list(spec.arms),
        "eps_grid": spec.eps_grid,
        "fractions": fractions,
        "ledger": ledger,
    }
    _write_atomic(spec.output_dir / "summary.json", json.dumps(summary, indent=2))
    return summary
