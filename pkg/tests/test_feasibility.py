import numpy as np
import pytest

from superiorization.errors import PlanError
from superiorization.feasibility import (
    BasicAlgorithm,
    PlanBounds,
    StringPlan,
    apply_string,
    cimmino,
    dsap_step,
    kaczmarz,
    random_plan,
    run_basic,
)
from superiorization.geometry import ConstraintFamily, Halfspace, Hyperplane, proximity
from superiorization.problems import random_halfspaces
from superiorization.trace import StopReason, StopRule

AXES = ConstraintFamily((Hyperplane([1, 0], 0), Hyperplane([0, 1], 0)))


def test_apply_string_sequential_axes():
    np.testing.assert_array_equal(apply_string(AXES, (0, 1), [1, 1]), [0, 0])


def test_apply_string_singleton_is_projection():
    x = np.array([3.0, -2.0])
    np.testing.assert_array_equal(apply_string(AXES, (1,), x), AXES[1].project(x))


def test_apply_string_matches_manual_composition():
    rng = np.random.default_rng(0)
    fam = ConstraintFamily(tuple(Halfspace(rng.standard_normal(4), rng.standard_normal()) for _ in range(3)))
    x = 5 * rng.standard_normal(4)
    manual = fam[2].project(fam[0].project(fam[1].project(x)))
    np.testing.assert_array_equal(apply_string(fam, (1, 0, 2), x), manual)


def test_apply_string_index_out_of_range():
    with pytest.raises(PlanError):
        apply_string(AXES, (0, 2), [1, 1])


def test_dsap_step_examples():
    algo = cimmino(AXES)
    plan = StringPlan(((0,), (1,)), (0.5, 0.5))
    np.testing.assert_array_equal(dsap_step(algo, plan, [1, 1]), [0.5, 0.5])
    single = BasicAlgorithm(AXES, "fixed", StringPlan(((0, 1),), (1.0,)))
    np.testing.assert_array_equal(dsap_step(single, single.plan, [1, 1]), [0, 0])
    x = np.array([0.0, 0.0])
    assert dsap_step(algo, plan, x) is x


def test_dsap_step_feasible_point_is_fixed_for_uneven_weights():
    fam = ConstraintFamily(tuple(Halfspace(v, 1.0) for v in np.eye(3)))
    algo = BasicAlgorithm(fam, "fixed", StringPlan(((0,), (1,), (2,)), (0.2, 0.3, 0.5)))
    x = np.array([0.1, 0.7, -3.0])
    np.testing.assert_array_equal(dsap_step(algo, algo.plan, x), x)


def test_plan_validation():
    with pytest.raises(PlanError):
        StringPlan(((0,), (1,)), (0.5, 0.6))
    with pytest.raises(PlanError):
        StringPlan(((0,), (1,)), (1.0, 0.0))
    with pytest.raises(PlanError):
        StringPlan(((),), (1.0,))
    with pytest.raises(PlanError):
        StringPlan(((0,),), (0.5, 0.5))
    algo = cimmino(AXES)
    with pytest.raises(PlanError, match="not fit"):
        dsap_step(algo, StringPlan(((0,),), (1.0,)), [1, 1])
    with pytest.raises(PlanError):
        BasicAlgorithm(AXES, "fixed", StringPlan(((0,),), (1.0,)))
    with pytest.raises(PlanError):
        BasicAlgorithm(AXES, "fixed")
    with pytest.raises(PlanError):
        BasicAlgorithm(AXES, "nonsense")


def test_weights_renormalized_within_tolerance():
    p = StringPlan(((0,), (1,)), (0.5, 0.5 + 5e-13))
    assert abs(sum(p.weights) - 1.0) < 1e-15


def test_plan_bounds():
    with pytest.raises(PlanError):
        PlanBounds(0.5, 2).validate_for(2)
    with pytest.raises(PlanError):
        PlanBounds(0.1, 1).validate_for(2)
    b = PlanBounds(0.1, 2)
    assert b.admits(StringPlan(((0, 1),), (1.0,)))
    assert not b.admits(StringPlan(((0, 1, 0),), (1.0,)))
    assert not b.admits(StringPlan(((0,), (1,)), (0.05, 0.95)))
    with pytest.raises(PlanError, match="bounds"):
        BasicAlgorithm(AXES, "fixed", StringPlan(((0,), (1,)), (0.05, 0.95)), PlanBounds(0.1, 2))


def test_kaczmarz_and_cimmino_plans():
    k = kaczmarz(AXES)
    assert k.plan_at(0).strings == ((0, 1),) and k.plan_at(7).weights == (1.0,)
    c = cimmino(AXES)
    assert c.plan_at(3).strings == ((0,), (1,)) and c.plan_at(3).weights == (0.5, 0.5)
    np.testing.assert_array_equal(k([1, 1]), apply_string(AXES, (0, 1), [1, 1]))
    np.testing.assert_array_equal(k([1, 1]), [0, 0])
    np.testing.assert_array_equal(c([1, 1]), [0.5, 0.5])
    one = ConstraintFamily((Halfspace([1, 1], 0),))
    x = np.array([3.0, 1.0])
    np.testing.assert_array_equal(kaczmarz(one)(x), cimmino(one)(x))


def test_cyclic_rotation_plan():
    fam = ConstraintFamily(tuple(Halfspace(v, 0.0) for v in np.eye(3)))
    algo = BasicAlgorithm(fam, "cyclic_rotation", StringPlan(((0, 1), (2,)), (0.5, 0.5)))
    assert algo.plan_at(1).strings == ((1, 2), (0,))
    assert algo.plan_at(3).strings == ((0, 1), (2,))


def test_random_plans_are_fit_bounded_and_reproducible():
    m = 9
    bounds = PlanBounds(0.5 / m, m)
    for k in range(200):
        p = random_plan(m, bounds, seed=3, k=k)
        p.check_fit(m)
        assert bounds.admits(p)
        assert p == random_plan(m, bounds, seed=3, k=k)
    assert random_plan(m, bounds, 3, 0) != random_plan(m, bounds, 4, 0)


def test_run_basic_reaches_epsilon():
    prob = random_halfspaces(10, 6, 1.0, seed=1)
    tr = run_basic(kaczmarz(prob.family), prob.x0, StopRule(max_iters=1000, epsilon=1e-8))
    assert tr.final.prox <= 1e-8 and tr.stop_reason is StopReason.EPSILON
    assert [r.k for r in tr.records] == list(range(len(tr)))


def test_run_basic_feasible_start():
    prob = random_halfspaces(5, 4, 1.0, seed=2)
    tr = run_basic(cimmino(prob.family), prob.witness, StopRule(max_iters=10, epsilon=1e-12))
    assert len(tr) == 1 and tr.stop_reason is StopReason.EPSILON


def test_run_basic_inconsistent_parallel_hyperplanes():
    fam = ConstraintFamily((Hyperplane([1, 0], 0), Hyperplane([1, 0], 1)))
    x0 = np.array([3.0, 2.0])
    tr = run_basic(kaczmarz(fam), x0, StopRule(max_iters=1000, epsilon=1e-6))
    assert tr.stop_reason is StopReason.MAX_ITERS and len(tr) == 1001
    # brute-force simulation of the alternation, independent of the library
    x1, sim = 3.0, []
    for _ in range(1000):
        for offset in (0.0, 1.0):
            x1 = x1 - (x1 - offset)
        sim.append(((x1 - 0.0) ** 2 + (x1 - 1.0) ** 2) / 2)
    np.testing.assert_array_equal(tr.prox[1:], sim)
    assert tr.prox.min() >= 0.125


def test_specialization_equivalence_small():
    prob = random_halfspaces(8, 5, 1.0, seed=4)
    fam = prob.family
    tk = run_basic(kaczmarz(fam), prob.x0, StopRule(max_iters=50))
    tc = run_basic(cimmino(fam), prob.x0, StopRule(max_iters=50))
    xk = xc = prob.x0
    for k in range(51):
        np.testing.assert_allclose(tk[k].point, xk, atol=1e-12, rtol=0)
        np.testing.assert_allclose(tc[k].point, xc, atol=1e-12, rtol=0)
        for s in fam.sets:
            xk = s.project(xk)
        xc = sum(s.project(xc) for s in fam.sets) / fam.m


@pytest.mark.parametrize("strategy", ["kaczmarz", "cimmino", "seeded_random"])
def test_unperturbed_fejer_monotone(strategy):
    for seed in range(5):
        prob = random_halfspaces(12, 8, 1.0, seed=seed)
        algo = BasicAlgorithm(prob.family, strategy, seed=seed)
        tr = run_basic(algo, prob.x0, StopRule(max_iters=300))
        d = np.linalg.norm(tr.points - prob.witness, axis=1)
        assert np.all(d[1:] <= d[:-1] + 1e-10)


def test_convergence_smoke():
    """100 consistent families, n=20, m=10: every strategy gets below 1e-6 in 5000 steps."""
    for seed in range(100):
        prob = random_halfspaces(20, 10, 1.0, seed=seed)
        for strategy in ("kaczmarz", "cimmino", "seeded_random"):
            algo = BasicAlgorithm(prob.family, strategy, seed=seed)
            tr = run_basic(algo, prob.x0, StopRule(max_iters=5000, epsilon=1e-6))
            assert tr.final.prox <= 1e-6, (seed, strategy)


def test_dsap_step_deterministic_order():
    prob = random_halfspaces(6, 5, 1.0, seed=9)
    algo = BasicAlgorithm(prob.family, "seeded_random", seed=1)
    a = [algo(prob.x0, k) for k in range(10)]
    b = [algo(prob.x0, k) for k in range(10)]
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)
    assert proximity(prob.family, a[0]) < proximity(prob.family, prob.x0)
