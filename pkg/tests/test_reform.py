import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import newsvendor_loss, random_instance, random_separable_instance, two_source_scenarios
from mrdro.errors import DimensionMismatch, InfeasibleDecision, SolveFailed, UnsupportedNorm
from mrdro.fusion import SupportPolytope, WeightedScenarioSet
from mrdro.lp import HighsSolver, LpStatus, SimplexSolver
from mrdro.reform import (
    DecisionSet,
    DroInstance,
    PiecewiseAffineLoss,
    SeparableAffineLoss,
    build_piecewise_lp,
    build_separable_lp,
    dump_instance,
    eval_worst_case_fixed_x,
    grid_transport_value,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    saa_value,
    solve_instance,
    solve_saa,
)


def newsvendor_instance(epsilon=0.01, support=None):
    return DroInstance(newsvendor_loss(), two_source_scenarios(),
                       support or SupportPolytope.box(0.0, 30.0, 1), epsilon, "L1", DecisionSet.box(0.0, np.inf, 1))


def test_saa_of_constant_pieces_and_point_mass():
    loss = PiecewiseAffineLoss.constant([[0.0], [0.0]], [3.0, 5.0])
    assert saa_value(loss, WeightedScenarioSet.uniform(np.zeros((1, 1))), []) == 5.0
    nv = newsvendor_loss()
    point = WeightedScenarioSet(np.array([[5.0], [11.0]]), np.array([1.0, 0.0]), np.array([0, 1]))
    assert saa_value(nv, point, [8.0]) == 3000.0


def test_saa_of_two_source_newsvendor():
    # 0.3*3000 + 0.3*3000 + 0.2*15000 + 0.2*0
    assert saa_value(newsvendor_loss(), two_source_scenarios(), [8.0]) == pytest.approx(4800.0, abs=1e-9)


def test_zero_radius_is_saa_at_the_lp_decision():
    inst = newsvendor_instance(epsilon=0.0)
    sol = solve_instance(inst)
    assert sol.value == pytest.approx(saa_value(inst.loss, inst.scenarios, sol.x), abs=1e-7)
    assert sol.value == pytest.approx(solve_saa(inst).value, abs=1e-7)


def test_newsvendor_quantile_at_zero_radius():
    # critical ratio 5/6: smallest demand with cumulative weight >= 5/6 is 11
    sol = solve_instance(newsvendor_instance(epsilon=0.0))
    assert sol.x[0] == pytest.approx(11.0)
    assert sol.value == pytest.approx(4200.0)


def test_fixed_decision_against_grid_transport():
    inst = newsvendor_instance(epsilon=0.01)
    lp = eval_worst_case_fixed_x(inst, [8.0])
    grid = grid_transport_value(inst.loss, inst.scenarios, [8.0], 0.0, 30.0, 0.01)
    assert lp == pytest.approx(4850.0, abs=1e-6)
    assert abs(lp - grid) <= 1e-4


def test_free_support_adds_lipschitz_term():
    inst = newsvendor_instance(epsilon=0.01, support=SupportPolytope.free(1))
    assert eval_worst_case_fixed_x(inst, [8.0]) == pytest.approx(4800.0 + 0.01 * 5000.0, abs=1e-8)


def test_radius_monotone():
    inst = newsvendor_instance()
    vals = [eval_worst_case_fixed_x(inst.replace(epsilon=e), [8.0]) for e in (0.0, 0.01, 0.1, 1.0)]
    assert vals[0] == pytest.approx(4800.0, abs=1e-9)
    assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


def test_infeasible_decision_rejected():
    with pytest.raises(InfeasibleDecision):
        eval_worst_case_fixed_x(newsvendor_instance(), [-1.0])


def test_unsupported_norm_and_dimension_checks():
    with pytest.raises(UnsupportedNorm):
        newsvendor_instance().replace(norm="L2")
    with pytest.raises(DimensionMismatch):
        DroInstance(newsvendor_loss(), WeightedScenarioSet.uniform(np.zeros((2, 2))),
                    SupportPolytope.free(2), 0.1)
    with pytest.raises(DimensionMismatch):
        PiecewiseAffineLoss(np.zeros((2, 1, 1)), np.zeros((3, 1)), np.zeros((2, 1)), np.zeros(2))


def test_support_exit_beyond_radius_is_reported_unbounded():
    # all mass 10 units outside the box: no distribution on the box is within 0.01
    scn = WeightedScenarioSet.uniform(np.array([[40.0]]))
    inst = DroInstance(newsvendor_loss(), scn, SupportPolytope.box(0.0, 30.0, 1), 0.01, "L1",
                       DecisionSet.box(0.0, 100.0, 1))
    with pytest.raises(SolveFailed) as info:
        solve_instance(inst)
    assert info.value.status is LpStatus.UNBOUNDED


def test_dual_norm_rows_hold_at_optimum():
    rng = np.random.default_rng(5)
    inst = random_instance(rng, M=2, J=2, K=2, H=2, I=3)
    p = build_piecewise_lp(inst)
    sol = SimplexSolver().solve(p)
    names = np.array(p.names)
    K = inst.loss.K
    x, lam = sol.values[:K], sol.values[K]
    gam = sol.values[np.char.startswith(names.astype(str), "gamma")].reshape(-1, inst.loss.J, inst.support.num_rows)
    a = inst.loss.A @ x + inst.loss.alpha  # (J, M)
    v = np.einsum("pjr,rm->pjm", gam, inst.support.C) - a[None]
    assert np.abs(v).max() <= lam + 1e-7


def test_linf_ground_norm_matches_l1_dual_oracle():
    # with free support the worst case adds epsilon times the largest L1 slope
    rng = np.random.default_rng(11)
    for _ in range(5):
        inst = random_instance(rng, support="free", norm="Linf", epsilon=0.3)
        x = rng.uniform(-5, 5, inst.loss.K)
        a, _ = inst.loss.coefficients(x)
        expect = saa_value(inst.loss, inst.scenarios, x) + 0.3 * np.abs(a).sum(axis=1).max()
        assert eval_worst_case_fixed_x(inst, x) == pytest.approx(expect, abs=1e-8)


def test_piecewise_lp_shape():
    inst = newsvendor_instance()
    p = build_piecewise_lp(inst)
    P, J, R, M = 4, 2, 2, 1
    assert p.num_vars == 1 + 1 + P + P * J * R
    assert p.num_rows == P * J + 2 * P * J * M


def test_zero_weight_points_do_not_change_value():
    scn = two_source_scenarios()
    padded = WeightedScenarioSet(np.vstack([scn.points, [[29.0]]]), np.r_[scn.weights, 0.0], np.r_[scn.sources, 2])
    a = eval_worst_case_fixed_x(newsvendor_instance(), [8.0])
    b = eval_worst_case_fixed_x(newsvendor_instance().replace(scenarios=padded), [8.0])
    assert a == pytest.approx(b, abs=1e-9)


def test_single_block_separable_equals_piecewise():
    rng = np.random.default_rng(2)
    for _ in range(5):
        inst = random_instance(rng)
        sep = inst.replace(loss=SeparableAffineLoss(((tuple(range(inst.loss.M)), inst.loss),)))
        a = SimplexSolver().solve(build_piecewise_lp(inst)).objective_value
        b = SimplexSolver().solve(build_separable_lp(sep)).objective_value
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


@pytest.mark.parametrize("seed", range(8))
def test_separable_matches_joint_product_loss(seed):
    inst = random_separable_instance(np.random.default_rng(seed))
    joint = inst.replace(loss=inst.loss.to_joint())
    assert joint.loss.J == 4
    assert solve_instance(inst).value == pytest.approx(solve_instance(joint).value, abs=1e-6)


def test_separable_per_block_trust_columns():
    rng = np.random.default_rng(4)
    inst = random_separable_instance(rng)
    P = inst.scenarios.size
    w = np.stack([inst.scenarios.weights, np.full(P, 1.0 / P)], axis=1)
    two = inst.replace(scenarios=WeightedScenarioSet(inst.scenarios.points, w, inst.scenarios.sources))
    # with zero radius the value splits into per-block expectations
    z = two.replace(epsilon=0.0)
    sol = solve_instance(z)
    assert sol.value == pytest.approx(saa_value(z.loss, z.scenarios, sol.x), abs=1e-7)


def test_separable_rejects_coupled_support():
    inst = random_separable_instance(np.random.default_rng(0))
    M = inst.loss.M
    coupled = SupportPolytope(np.vstack([np.eye(M), -np.eye(M), np.ones((1, M))]),
                              np.r_[np.full(2 * M, 10.0), 100.0])
    with pytest.raises(DimensionMismatch):
        build_separable_lp(inst.replace(support=coupled))


def test_indicator_trust_equals_single_source_uniform():
    rng = np.random.default_rng(9)
    pts = rng.uniform(0, 30, (6, 1))
    src = np.repeat([0, 1], 3)
    mixed = WeightedScenarioSet(pts, np.r_[np.full(3, 1 / 3), np.zeros(3)], src)
    alone = WeightedScenarioSet(pts[:3], np.full(3, 1 / 3), src[:3])
    base = newsvendor_instance()
    a = solve_instance(base.replace(scenarios=mixed)).value
    b = solve_instance(base.replace(scenarios=alone)).value
    assert a == b


def test_simplex_and_highs_agree_on_reformulations():
    rng = np.random.default_rng(21)
    for _ in range(5):
        inst = random_instance(rng)
        a = solve_instance(inst, SimplexSolver()).value
        b = solve_instance(inst, HighsSolver()).value
        assert a == pytest.approx(b, abs=1e-6 * max(1.0, abs(a)))


def test_instance_json_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(8)
    for inst in (random_instance(rng), random_separable_instance(rng), newsvendor_instance()):
        path = tmp_path / "inst.json"
        dump_instance(inst, path)
        back = load_instance(path)
        assert json.dumps(instance_to_dict(back)) == json.dumps(instance_to_dict(inst))
        assert solve_instance(back).value == solve_instance(inst).value
    keys = set(instance_to_dict(newsvendor_instance()))
    assert {"dims", "loss", "scenarios", "support", "epsilon", "norm"} <= keys
    with pytest.raises(KeyError):
        instance_from_dict({"dims": {"M": 1, "K": 1}})


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_property_zero_radius_equals_saa_optimum(seed):
    inst = random_instance(np.random.default_rng(seed), epsilon=0.0)
    assert abs(solve_instance(inst).value - solve_saa(inst).value) <= 1e-7


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_property_value_nondecreasing_in_radius(seed):
    inst = random_instance(np.random.default_rng(seed))
    vals = [solve_instance(inst.replace(epsilon=e), "highs").value for e in (0.0, 0.05, 0.2, 1.0)]
    assert all(b >= a - 1e-9 * max(1.0, abs(a)) for a, b in zip(vals, vals[1:]))
