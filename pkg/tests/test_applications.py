import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrdro.applications import (
    RESULTS_HEADER,
    Application,
    OosSample,
    PortfolioSpec,
    ResourceAllocationSpec,
    aggregate_portfolio_trust,
    discrete_cvar,
    load_returns_csv,
    oos_eval_portfolio,
    oos_eval_resource,
    portfolio_instance,
    resource_instance,
    write_results_csv,
)
from mrdro.errors import DimensionMismatch
from mrdro.fusion import WeightedScenarioSet
from mrdro.reform import solve_instance


def scenario_set(points, trust=None):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    P = points.shape[0]
    w = np.full(P, 1.0 / P) if trust is None else np.asarray(trust, dtype=float)
    return WeightedScenarioSet(points, w, np.zeros(P, dtype=int))


def grid_portfolio(returns, alpha, rho, step=0.001):
    best = (np.inf, None)
    for x0 in np.arange(0.0, 1.0 + step / 2, step):
        x = np.array([x0, 1.0 - x0])
        v = oos_eval_portfolio(x, OosSample(returns), alpha, rho)
        if v < best[0]:
            best = (v, x)
    return best


# resource allocation


def test_resource_spec_validation():
    for bad in (dict(underage=0.0), dict(overage=-1.0), dict(budget=0.0), dict(demand_lo=5.0, demand_hi=1.0)):
        with pytest.raises(ValueError):
            ResourceAllocationSpec(2, **bad)
    spec = ResourceAllocationSpec(3)
    assert spec.underage.tolist() == [5000.0] * 3
    assert spec.groups == [[0], [1], [2]]


def test_oos_resource_hand_values():
    spec = ResourceAllocationSpec(1)
    assert oos_eval_resource([8.0], OosSample([[5.0], [11.0]]), spec) == 9000.0
    assert oos_eval_resource([0.0], OosSample([[10.0]]), spec) == 50000.0
    assert oos_eval_resource([7.5], OosSample([[7.5]]), spec) == 0.0
    with pytest.raises(DimensionMismatch):
        oos_eval_resource([1.0, 2.0], OosSample([[1.0]]), spec)


def test_symmetric_costs_pick_the_median():
    spec = ResourceAllocationSpec(1, underage=1000.0, overage=1000.0, budget=100.0)
    sol = solve_instance(resource_instance(spec, scenario_set([[4.0], [6.0], [9.0], [14.0], [16.0]]), 0.0))
    assert sol.x[0] == pytest.approx(9.0)


def test_quantile_law_with_weights():
    # critical ratio 5/6: cumulative weight first reaches it at the third point
    spec = ResourceAllocationSpec(1, budget=100.0)
    scn = scenario_set([[3.0], [7.0], [12.0], [20.0]], [0.5, 0.3, 0.15, 0.05])
    sol = solve_instance(resource_instance(spec, scn, 0.0))
    assert sol.x[0] == pytest.approx(12.0)


def test_tight_budget_binds():
    spec = ResourceAllocationSpec(3, budget=12.0, demand_lo=10.0, demand_hi=20.0)
    scn = scenario_set([[11.0, 15.0, 18.0], [13.0, 12.0, 19.0]])
    sol = solve_instance(resource_instance(spec, scn, 0.01))
    assert sol.x.sum() == pytest.approx(12.0, abs=1e-7)


def test_baseline_size_resource_instance_solves():
    rng = np.random.default_rng(0)
    H, I, K = 3, 200, 4
    pts = rng.uniform(0.0, 30.0, (H * I, K))
    t = np.tile([0.5, 0.3, 0.2], (K, 1))
    spec = ResourceAllocationSpec(K)
    w = np.repeat(spec.scenario_trust(t) / I, I, axis=0)
    scn = WeightedScenarioSet(pts, w, np.repeat(np.arange(H), I))
    sol = solve_instance(resource_instance(spec, scn, 0.01), "highs")
    assert np.isfinite(sol.value) and sol.x.sum() <= 200.0 + 1e-7 and np.all(sol.x >= -1e-9)


def test_scenario_trust_shapes():
    spec = ResourceAllocationSpec(2)
    assert spec.scenario_trust([0.2, 0.8]).shape == (2, 2)
    with pytest.raises(DimensionMismatch):
        spec.scenario_trust(np.full((3, 2), 0.5))


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 20.0))
def test_property_cost_scaling_is_homogeneous(seed, c):
    rng = np.random.default_rng(seed)
    base = ResourceAllocationSpec(2, rng.uniform(500, 5000, 2), rng.uniform(500, 5000, 2), 25.0)
    scaled = ResourceAllocationSpec(2, c * base.underage, c * base.overage, 25.0)
    scn = scenario_set(rng.uniform(0, 30, (5, 2)))
    a = solve_instance(resource_instance(base, scn, 0.05))
    b = solve_instance(resource_instance(scaled, scn, 0.05))
    assert b.value == pytest.approx(c * a.value, rel=1e-7)
    sample = OosSample(rng.uniform(0, 30, (4, 2)))
    assert oos_eval_resource(a.x, sample, scaled) == pytest.approx(c * oos_eval_resource(a.x, sample, base), rel=1e-12)


# portfolio


def test_portfolio_spec_validation():
    for bad in (dict(alpha=0.0), dict(alpha=1.5), dict(rho=-1.0)):
        with pytest.raises(ValueError):
            PortfolioSpec(2, **bad)


def test_discrete_cvar_tail_average():
    assert discrete_cvar([1, 2, 3, 4], 0.5) == 3.5
    assert oos_eval_portfolio([1.0], OosSample([[-1.0], [-2.0], [-3.0], [-4.0]]), 0.5, 10.0) == 37.5
    # fractional boundary atom: worst 0.3 of {10, 0, 0, 0} at weight 1/4 each
    assert discrete_cvar([10, 0, 0, 0], 0.3) == pytest.approx((0.25 * 10) / 0.3)
    assert discrete_cvar([4.0, 1.0], 1.0) == 2.5


def test_cvar_alpha_one_is_the_mean_exactly():
    rng = np.random.default_rng(3)
    r = rng.normal(size=(37, 3))
    x = np.array([0.2, 0.5, 0.3])
    loss = -(r @ x)
    assert oos_eval_portfolio(x, OosSample(r), 1.0, 4.0) == loss.mean() + 4.0 * discrete_cvar(loss, 1.0)
    assert discrete_cvar(loss, 1.0) == pytest.approx(loss.mean(), abs=1e-15)


def test_identical_returns_degenerate():
    r = np.tile([0.05, -0.02], (5, 1))
    x = np.array([0.4, 0.6])
    l = -(r[0] @ x)
    assert oos_eval_portfolio(x, OosSample(r), 0.2, 3.0) == pytest.approx(l + 3.0 * l, abs=1e-15)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_property_portfolio_eval_monotone_in_rho(seed, r1, r2):
    rng = np.random.default_rng(seed)
    r = rng.normal(size=(9, 3))
    x = rng.dirichlet(np.ones(3))
    lo, hi = sorted((r1, r2))
    # CVaR of the loss is at least its mean, which may be negative; compare via the tail term
    a = oos_eval_portfolio(x, OosSample(r), 0.3, lo)
    b = oos_eval_portfolio(x, OosSample(r), 0.3, hi)
    cvar = discrete_cvar(-(r @ x), 0.3)
    assert b - a == pytest.approx((hi - lo) * cvar, abs=1e-9)


def test_two_asset_zero_radius_matches_grid_search():
    spec = PortfolioSpec(2, 0.2, 10.0)
    returns = np.array([[0.1, 0.0], [-0.1, 0.0]])
    sol = solve_instance(portfolio_instance(spec, scenario_set(returns), 0.0))
    gval, gx = grid_portfolio(returns, 0.2, 10.0)
    assert sol.value == pytest.approx(gval, abs=1e-6)
    assert np.abs(sol.x[:2] - gx).max() <= 1e-3 + 1e-9


def test_random_two_asset_zero_radius_matches_grid_search():
    rng = np.random.default_rng(12)
    spec = PortfolioSpec(2, 0.25, 2.0)
    returns = rng.normal(0.01, 0.05, (8, 2))
    sol = solve_instance(portfolio_instance(spec, scenario_set(returns), 0.0))
    gval, _ = grid_portfolio(returns, 0.25, 2.0)
    # the grid minimum can only miss by the objective's slope times half a step
    assert gval - 1e-3 * 20 <= sol.value <= gval + 1e-9


def test_portfolio_budget_and_no_shorting():
    rng = np.random.default_rng(1)
    for _ in range(5):
        spec = PortfolioSpec(4, 0.2, 5.0)
        scn = scenario_set(rng.normal(0.0, 0.05, (12, 4)))
        x = solve_instance(portfolio_instance(spec, scn, 0.02)).x[:4]
        assert abs(x.sum() - 1.0) <= 1e-8 and x.min() >= -1e-9


def test_single_asset_forced_and_rho_zero_is_mean():
    spec = PortfolioSpec(1, 0.2, 0.0)
    scn = scenario_set([[0.1], [-0.3]])
    sol = solve_instance(portfolio_instance(spec, scn, 0.0))
    assert sol.x[0] == pytest.approx(1.0)
    assert sol.value == pytest.approx(0.1, abs=1e-9)


def test_portfolio_trust_aggregation():
    assert aggregate_portfolio_trust([0.3, 0.7]).tolist() == [0.3, 0.7]
    w = aggregate_portfolio_trust([[0.2, 0.8], [0.6, 0.4]])
    assert w == pytest.approx([0.4, 0.6])


def test_application_evaluate_drops_cvar_threshold():
    app = Application.portfolio(PortfolioSpec(2, 1.0, 0.0))
    r = np.array([[0.1, -0.1]])
    assert app.evaluate([0.5, 0.5, 123.0], r) == pytest.approx(0.0, abs=1e-15)


def test_returns_csv_and_results_csv(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("A,B\n0.01,0.02\n-0.03,0.04\n")
    assert load_returns_csv(p).tolist() == [[0.01, 0.02], [-0.03, 0.04]]
    (tmp_path / "bad.csv").write_text("a,b\n")
    with pytest.raises(ValueError):
        load_returns_csv(tmp_path / "bad.csv")
    out = tmp_path / "res.csv"
    write_results_csv([{"trial": 1, "model": "m", "objective": 0.1, "avg_loss": 2.0, "solve_seconds": 0.5}], out)
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(RESULTS_HEADER)
    assert lines[1] == "1,m,0.1,2.0,0.5"
