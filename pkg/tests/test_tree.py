"""Scenario-tree construction and the rolling commitment loop."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fsuc.formulation import FormulationOptions, make_planner
from fsuc.system import FrequencyParams, SystemModel, ThermalClass
from fsuc.tree import (ErrorModel, InvalidQuantileError, WeightSumError,
                       build_tree, default_weights, initial_state,
                       rolling_plan)
from fsuc.validator import validate_schedule

from conftest import toy_model

Q3 = (0.25, 0.5, 0.75)


def _tree(horizon=8, quantiles=Q3, weights=None, sigma=0.05, cap=100.0):
    rng = np.random.default_rng(1)
    wind = rng.uniform(20.0, 80.0, horizon)
    demand = rng.uniform(150.0, 300.0, horizon)
    return build_tree(50.0, 200.0, wind, demand, quantiles,
                      weights or default_weights(quantiles), horizon,
                      error_model=ErrorModel(sigma=sigma), wind_capacity=cap)


class TestBuild:
    def test_node_count_comb_shape(self):
        assert len(_tree(horizon=8).nodes) == 1 + 3 * 8
        assert len(_tree(horizon=24).nodes) == 1 + 3 * 24

    def test_root_and_branch_probabilities(self):
        t = _tree()
        assert t.root.probability == 1.0
        leaf_probs = sorted(n.probability for n in t.leaves())
        assert leaf_probs == pytest.approx([0.25, 0.375, 0.375])
        # every depth-h slice carries the full probability mass
        for h in range(1, 9):
            mass = sum(n.probability for n in t.nodes if n.depth == h)
            assert mass == pytest.approx(1.0)

    def test_zero_sigma_collapses_branches(self):
        t = _tree(sigma=0.0)
        by_depth = {}
        for n in t.nodes:
            by_depth.setdefault(n.depth, []).append(n)
        for h in range(1, 9):
            winds = {n.wind_available for n in by_depth[h]}
            assert len(winds) == 1
        assert sum(n.probability for n in t.leaves()) == pytest.approx(1.0)

    def test_wind_clipped_to_capacity(self):
        t = _tree(cap=60.0)
        assert all(0.0 <= n.wind_available <= 60.0 for n in t.nodes)

    def test_path_to_root(self):
        t = _tree(horizon=4)
        leaf = t.leaves()[0]
        path = t.path_to_root(leaf.id)
        assert [n.depth for n in path] == [4, 3, 2, 1, 0]
        assert path[-1].id == t.root.id

    def test_quantile_validation(self):
        with pytest.raises(InvalidQuantileError):
            _tree(quantiles=(0.5, 0.5), weights=(0.5, 0.5))
        with pytest.raises(InvalidQuantileError):
            _tree(quantiles=(0.0, 0.5), weights=(0.5, 0.5))

    def test_weight_validation(self):
        with pytest.raises(WeightSumError):
            _tree(weights=(0.5, 0.5, 0.5))
        with pytest.raises(WeightSumError):
            _tree(weights=(1.0,))

    def test_horizon_and_forecast_validation(self):
        with pytest.raises(ValueError):
            build_tree(50.0, 200.0, [], [], (0.5,), (1.0,), 0)
        with pytest.raises(ValueError):
            build_tree(50.0, 200.0, [60.0], [200.0], (0.5,), (1.0,), 2)

    def test_csv_header(self):
        lines = _tree(horizon=2).to_csv().strip().splitlines()
        assert lines[0] == "node,parent,prob,hour,wind,demand"
        assert len(lines) == 1 + 7

    @given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=6,
                    unique=True))
    @settings(max_examples=50, deadline=None)
    def test_default_weights_sum_to_one(self, qs):
        ws = default_weights(sorted(qs))
        assert sum(ws) == pytest.approx(1.0)
        assert all(w > 0 for w in ws)


def _flat_model(demand=250.0, hours=40):
    gen = ThermalClass("gen", 3, 100.0, 40.0, 100.0, 20.0, 0.0,
                       0, 0, 0, 5.0, 10.0, 0.5)
    freq = FrequencyParams(50.0, 0.5, 0.8, 10.0, 1.0, 0.0)
    return SystemModel((gen,), (), freq, 0.0, 5000.0,
                       np.full(hours, demand), np.zeros(hours))


class TestRolling:
    def test_perfect_foresight_flat_demand(self):
        # Start-cost-free, lag-free fleet under flat demand: every committed
        # hour costs exactly the single-hour optimum.
        model = _flat_model()
        planner = make_planner(model, FormulationOptions())
        sched = rolling_plan(model, planner, 0, 6, model.demand_series,
                             model.wind_cf_series, horizon=6)
        per_hour = 3 * 100.0 + 250.0 * 20.0
        assert len(sched.hours) == 6
        for rec in sched.hours:
            assert rec.cost_total == pytest.approx(per_hour, rel=1e-6)
        assert sched.total_cost == pytest.approx(6 * per_hour, rel=1e-6)
        assert validate_schedule(model, sched.hours, model.demand_series,
                                 model.wind_cf_series) == []

    def test_trace_must_cover_window(self):
        model = _flat_model(hours=10)
        planner = make_planner(model, FormulationOptions())
        with pytest.raises(ValueError, match="cover"):
            rolling_plan(model, planner, 0, 6, model.demand_series,
                         model.wind_cf_series, horizon=6)

    def test_initial_state_shape(self):
        model = toy_model()
        st0 = initial_state(model)
        assert st0.n_up == {"base": 2, "flex": 0, "peak": 0}
        assert st0.soc["battery"] == pytest.approx(20.0)

    def test_stochastic_rolling_replay_is_consistent(self):
        model = toy_model()
        planner = make_planner(model, FormulationOptions(
            frequency_constraints=True))
        sched = rolling_plan(model, planner, 0, 4, model.demand_series,
                             model.wind_cf_series, horizon=4,
                             quantiles=Q3, weights=default_weights(Q3))
        assert len(sched.hours) == 4
        assert validate_schedule(model, sched.hours, model.demand_series,
                                 model.wind_cf_series) == []
