"""Acceptance gate: one pass/fail line per criterion in the terminal summary."""

import time

import numpy as np
import pytest

from superiorization.evaluation import (
    ProximityTargetCurve,
    Verdict,
    better_targeted,
    epsilon_output,
    fejer_monitor,
)
from superiorization.feasibility import BasicAlgorithm, StringPlan, cimmino, kaczmarz, run_basic
from superiorization.geometry import ConstraintFamily, Halfspace, project
from superiorization.objectives import SquaredNorm
from superiorization.problems import random_halfspaces
from superiorization.superiorize import DerivativeFree, RestartTo, Schedule, SuperiorizerConfig, run_superiorized
from superiorization.trace import IterateTrace, StopRule

from conftest import KINDS, random_member, random_set

PHI = SquaredNorm()
SEEDS = range(100)
BUDGET = 20000


def _instance(seed):
    p = random_halfspaces(50, 30, 1.0, seed=seed)
    return p, BasicAlgorithm(p.family, "seeded_random", seed=seed)


def _weak(direction=None):
    kw = {} if direction is None else {"direction": direction}
    return SuperiorizerConfig(N=5, mode="weak", schedule=Schedule(0.5), **kw)


@pytest.fixture(scope="module")
def paired_runs():
    """Basic and weak-superiorized traces on the 100 seeded instances, run to 1e-6."""
    runs = []
    t0 = time.perf_counter()
    for seed in SEEDS:
        p, algo = _instance(seed)
        stop = StopRule(max_iters=BUDGET, epsilon=1e-6)
        runs.append((p, run_basic(algo, p.x0, stop, PHI), run_superiorized(algo, PHI, _weak(), p.x0, stop)))
    return runs, time.perf_counter() - t0


def test_c01_projection_correctness(report):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    bad = []
    for kind in KINDS:
        for _ in range(1000):
            n = int(rng.integers(1, 10))
            s = random_set(rng, kind, n)
            x, y = 5 * rng.standard_normal(n), 5 * rng.standard_normal(n)
            px, py = project(s, x), project(s, y)
            u = random_member(rng, s, n)
            if (
                np.linalg.norm(project(s, px) - px) > 1e-10
                or np.linalg.norm(px - py) > np.linalg.norm(x - y) + 1e-10
                or (x - px) @ (u - px) > 1e-10
            ):
                bad.append(kind)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 5.0
    report("C1 projection correctness", ok, f"{4000 - len(bad)}/4000 pairs pass, {elapsed:.2f}s")
    assert ok


def test_c02_specialization_equivalence(report):
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(50):
        p = random_halfspaces(20, 12, 1.0, seed=seed)
        fam = p.family
        full = BasicAlgorithm(fam, "fixed", StringPlan((tuple(range(fam.m)),), (1.0,)))
        single = BasicAlgorithm(fam, "fixed", StringPlan(tuple((i,) for i in range(fam.m)), (1.0 / fam.m,) * fam.m))
        for algo, ref_step in (
            (full, lambda x: _sequential(fam, x)),
            (single, lambda x: sum(s.project(x) for s in fam.sets) / fam.m),
        ):
            tr = run_basic(algo, p.x0, StopRule(max_iters=200))
            x = p.x0
            for rec in tr.records:
                worst = max(worst, float(np.max(np.abs(rec.point - x))))
                x = ref_step(x)
        # the named specializations are the same operators
        np.testing.assert_array_equal(kaczmarz(fam)(p.x0), full(p.x0))
        np.testing.assert_array_equal(cimmino(fam)(p.x0), single(p.x0))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10.0
    report("C2 specialization equivalence", ok, f"max deviation {worst:.1e} over 50 families x 200 iterations, {elapsed:.2f}s")
    assert ok


def _sequential(fam, x):
    for s in fam.sets:
        x = s.project(x)
    return x


def test_c03_perturbation_resilience(paired_runs, report):
    runs, elapsed = paired_runs
    fails = []
    for p, tb, ts in runs:
        kb, ks = len(tb) - 1, len(ts) - 1
        if not (tb.final.prox <= 1e-6 and ts.final.prox <= 1e-6 and ks <= 2 * kb):
            fails.append((p.meta.get("seed"), kb, ks))
    ok = not fails and elapsed < 60.0
    report("C3 perturbation resilience", ok, f"{100 - len(fails)}/100 within 2x basic iterations, {elapsed:.1f}s")
    assert ok, fails


def test_c04_guarantee_experiment(paired_runs, report):
    runs, elapsed = paired_runs
    better = worse = 0
    for p, tb, ts in runs:
        fb = PHI.value(epsilon_output(tb, 1e-4)[1])
        fs = PHI.value(epsilon_output(ts, 1e-4)[1])
        better += fs < fb
        worse += fs > fb + 1e-9
    ok = better >= 90 and worse == 0 and elapsed < 120.0
    report("C4 guarantee experiment", ok, f"superiorized phi lower in {better}/100, higher in {worse}, {elapsed:.1f}s")
    assert ok


def test_c05_fig1_analogue(report):
    p, algo = _instance(0)
    stop = StopRule(max_iters=29)
    tb = run_basic(algo, p.x0, stop, PHI)
    ts = run_superiorized(algo, PHI, _weak(), p.x0, stop)
    assert len(tb) == len(ts) == 30
    cmp = better_targeted(ProximityTargetCurve.from_trace(ts), ProximityTargetCurve.from_trace(tb))
    ok = cmp.verdict is Verdict.R_BETTER
    report("C5 proximity-target curves", ok, f"verdict {cmp.verdict.value} on [{cmp.t:.3e}, {cmp.u:.3e}]")
    assert ok


def test_c06_fejer_trend(paired_runs, report):
    runs, _ = paired_runs
    worst, fails = 0.0, 0
    for p, _, ts in runs:
        idx = fejer_monitor(ts, p.witness).first_monotone_index
        if idx is None or idx > 0.25 * len(ts):
            fails += 1
        else:
            worst = max(worst, idx / len(ts))
    ok = fails == 0
    report("C6 Fejer trend", ok, f"{100 - fails}/100 runs settle, worst onset at {worst:.0%} of trace")
    assert ok


def test_c07_strong_mode_hand_trace(report):
    # x2 >= 0.25; the hand trace uses only dyadic numbers, so comparisons are exact
    fam = ConstraintFamily((Halfspace([0.0, -1.0], -0.25),))
    cfg = SuperiorizerConfig(N=2, mode="strong", schedule=Schedule(0.5))
    tr = run_superiorized(kaczmarz(fam), PHI, cfg, [0.125, 0.0], StopRule(max_iters=3))
    expected_points = [[0.125, 0.0], [0.0, 0.25], [0.0, 0.25], [0.0, 0.25]]
    expected_events = [
        [(0, 1.0, False), (1, 0.5, False), (2, 0.25, True), (3, 0.125, True)],
        [(4, 0.0625, True), (5, 0.03125, True)],
        [(6, 0.015625, True), (7, 0.0078125, True)],
    ]
    expected_phi = [[0.015625, 0.0], [0.03515625, 0.0244140625], [0.054931640625, 0.05133056640625]]
    got_points = [r.point.tolist() for r in tr.records]
    got_events = [[(e.ell, e.beta, e.accepted) for e in r.events] for r in tr.records[1:]]
    got_phi = [[e.phi for e in r.events if e.accepted] for r in tr.records[1:]]
    ok = got_points == expected_points and got_events == expected_events and got_phi == expected_phi
    report("C7 strong-mode hand trace", ok, "3 outer iterations, 8 trials, ell 0..7 match exactly" if ok else f"{got_events}")
    assert ok


def test_c08_summability(report):
    p = random_halfspaces(5, 3, 1.0, seed=0)
    totals = {}
    for mode in ("weak", "strong"):
        for label, sched, bound in (
            ("plain", Schedule(0.5), 2.0),
            ("restart", Schedule(0.5, restart=RestartTo(0, 100, 3)), 8.0),
        ):
            cfg = SuperiorizerConfig(N=2, mode=mode, schedule=sched)
            tr = run_superiorized(kaczmarz(p.family), PHI, cfg, p.x0, StopRule(max_iters=10000))
            assert len(tr) == 10001
            totals[(mode, label)] = (tr.final.beta_consumed, bound)
    ok = all(t <= b for t, b in totals.values())
    detail = ", ".join(f"{m}/{l} {t:.6f}<={b:g}" for (m, l), (t, b) in totals.items())
    report("C8 summability", ok, detail)
    assert ok


def _scan_oracle(prox, eps):
    hits = [K for K in range(len(prox)) if prox[K] <= eps and all(prox[k] > eps for k in range(K))]
    assert len(hits) <= 1
    return hits[0] if hits else None


def test_c09_epsilon_output_law(report):
    rng = np.random.default_rng(99)
    discrepancies = 0
    for _ in range(10000):
        length = int(rng.integers(1, 25))
        # coarse grid values force ties with each other and with eps
        prox = rng.integers(0, 8, size=length) / 4.0
        eps = float(rng.choice([0.125, 0.25, 0.5, 1.0, 1.75, float(rng.uniform(0.01, 2.0))]))
        got = epsilon_output(IterateTrace.from_values(prox), eps)
        want = _scan_oracle(prox, eps)
        if (got is None) != (want is None) or (got is not None and got[0] != want):
            discrepancies += 1
    ok = discrepancies == 0
    report("C9 epsilon-output law", ok, f"{discrepancies} discrepancies in 10000 sequences")
    assert ok


def test_c10_derivative_free_parity(report):
    t0 = time.perf_counter()
    better = 0
    for seed in SEEDS:
        p, algo = _instance(seed)
        stop = StopRule(max_iters=BUDGET, epsilon=1e-4)
        tb = run_basic(algo, p.x0, stop, PHI)
        ts = run_superiorized(algo, PHI, _weak(DerivativeFree(1e-3, 32, seed)), p.x0, stop)
        better += PHI.value(epsilon_output(ts, 1e-4)[1]) < PHI.value(epsilon_output(tb, 1e-4)[1])
    ok = better >= 75
    report("C10 derivative-free parity", ok, f"superiority fraction {better}/100, {time.perf_counter() - t0:.1f}s")
    assert ok
