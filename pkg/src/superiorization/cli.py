"""Command-line harness.

Subcommands::

    superior gen        --generator random_halfspaces --n 50 --m 30 --seed 7 --out p.json
    superior run        --problem p.json --config weak.json --out trace.csv [--points pts.json]
    superior compare    --problem p.json --config-r weak.json --config-s basic.json --out-dir cmp/
    superior experiment --spec experiment.json
    superior fejer      --points pts.json --problem p.json [--out report.json]

Exit status: 0 on success, 1 on usage or configuration errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import execute, parse_run_config
from .errors import ConfigError, SuperiorizationError
from .evaluation import ProximityTargetCurve, better_targeted, fejer_monitor
from .experiment import ExperimentSpec, run_experiment
from .geometry import as_vector
from .problems import GENERATORS, Problem, generate
from .trace import IterateTrace, TraceRecord, read_points_json

log = logging.getLogger("superiorization")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _load_json(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path} is not valid JSON: {exc}") from None


def _load_problem(path: str) -> Problem:
    try:
        return Problem.from_dict(_load_json(path, "problem"))
    except (KeyError, SuperiorizationError) as exc:
        raise ConfigError("problem", str(exc)) from None


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def cmd_gen(args) -> int:
    if args.spec:
        spec = _load_json(args.spec, "generator spec")
    else:
        spec = {"generator": args.generator, "n": args.n, "m": args.m, "seed": args.seed}
        if args.generator == "random_halfspaces":
            spec["radius"] = args.radius
        elif args.generator == "random_hyperplanes":
            spec["consistent"] = not args.inconsistent
        elif args.generator == "sparse_system":
            spec["density"] = args.density
    try:
        problem = generate(spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError("generator", str(exc)) from None
    _write(args.out, problem.to_json() + "\n")
    return 0


def cmd_run(args) -> int:
    problem = _load_problem(args.problem)
    cfg = parse_run_config(_load_json(args.config, "config"))
    trace = execute(problem, cfg)
    _write(args.out, trace.to_csv())
    if args.points:
        _write(args.points, trace.points_json())
    log.info("%d iterations, final proximity %.3e (%s)", len(trace) - 1, trace.final.prox, trace.stop_reason.value)
    return 0


def cmd_compare(args) -> int:
    problem = _load_problem(args.problem)
    r = execute(problem, parse_run_config(_load_json(args.config_r, "config")))
    s = execute(problem, parse_run_config(_load_json(args.config_s, "config")))
    cr = ProximityTargetCurve.from_trace(r, args.limit)
    cs = ProximityTargetCurve.from_trace(s, args.limit)
    cmp = better_targeted(cr, cs, args.samples)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "curve-r.csv").write_text(cr.to_csv())
        (out / "curve-s.csv").write_text(cs.to_csv())
        (out / "compare.json").write_text(cmp.to_json() + "\n")
    sys.stdout.write(cmp.to_json() + "\n")
    return 0


def cmd_experiment(args) -> int:
    spec = ExperimentSpec.from_dict(_load_json(args.spec, "experiment spec"))
    if args.output_dir:
        spec = ExperimentSpec(**{**spec.__dict__, "output_dir": Path(args.output_dir)})
    summary = run_experiment(spec, args.threads)
    sys.stdout.write(json.dumps(summary["fractions"]) + "\n")
    return 0


def cmd_fejer(args) -> int:
    ks, pts = read_points_json(Path(args.points).read_text())
    if args.witness:
        ref = as_vector(_load_json(args.witness, "witness"), pts.shape[1], "witness")
    else:
        problem = _load_problem(args.problem)
        if problem.witness is None:
            raise UsageError("problem has no witness point; pass --witness")
        ref = problem.witness
    trace = IterateTrace([TraceRecord(int(k), p, 0.0, float("nan")) for k, p in zip(ks, pts)])
    report = fejer_monitor(trace, ref, args.tolerance)
    _write(args.out, report.to_json() + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="superior", description="Superiorized projection methods: runs, comparisons, experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="emit a problem JSON document")
    g.add_argument("--spec", help="generator spec JSON (overrides the flags below)")
    g.add_argument("--generator", choices=sorted(GENERATORS), default="random_halfspaces")
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--m", type=int, default=30)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--density", type=float, default=0.1)
    g.add_argument("--inconsistent", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="single run, trace CSV out")
    r.add_argument("--problem", required=True)
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--points", help="also write iterate vectors as JSON")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="proximity-target curves of two configs and their verdict")
    c.add_argument("--problem", required=True)
    c.add_argument("--config-r", required=True)
    c.add_argument("--config-s", required=True)
    c.add_argument("--out-dir")
    c.add_argument("--limit", type=int, default=None, help="use only the first LIMIT records")
    c.add_argument("--samples", type=int, default=101)
    c.set_defaults(func=cmd_compare)

    e = sub.add_parser("experiment", help="full batch experiment")
    e.add_argument("--spec", required=True)
    e.add_argument("--output-dir")
    e.add_argument("--threads", type=int, default=None)
    e.set_defaults(func=cmd_experiment)

    f = sub.add_parser("fejer", help="Fejér monitor over recorded iterates")
    f.add_argument("--points", required=True)
    src = f.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem")
    src.add_argument("--witness")
    f.add_argument("--tolerance", type=float, default=1e-10)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fejer)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except (SuperiorizationError, ValueError, ArithmeticError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
