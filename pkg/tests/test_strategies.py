"""Procurement strategies on a desk-scale system plus requirement math."""
import pytest

from fsuc.decisions import CommittedHour
from fsuc.strategies import (ResponseRequirement, RunResult, TreeConfig,
                             compute_response_requirement,
                             cost_of_frequency_services, overprocurement_ratio,
                             run_cooptimized, run_energy_only, run_unlinked,
                             security_replay)
from fsuc.frequency import min_pfr_for_nadir
from fsuc.system import FrequencyParams

from conftest import fp_future

CFG = TreeConfig(horizon=4, steps_per_month=4)


def _stub_run(inertia):
    run = RunResult(label="stub")
    for h in inertia:
        run.hours.append(CommittedHour(hour=0, decision=None, cost_startup=0.0,
                                       cost_no_load=0.0, cost_marginal=0.0,
                                       cost_shed=0.0))
        run.month_of_hour.append(1)
        run.inertia.append(h)
        run.pfr.append(0.0)
        run.efr.append(0.0)
    return run


class TestRequirement:
    def test_rocof_floor_lower_bounds_inertia(self):
        fp = fp_future()
        req = compute_response_requirement(_stub_run([150000.0, 95000.0]),
                                           200.0, fp)
        assert req.inertia_floor == 95000.0
        assert req.pfr_volume == pytest.approx(
            min_pfr_for_nadir(95000.0, 200.0, fp))
        low = compute_response_requirement(_stub_run([40000.0]), 200.0, fp)
        assert low.inertia_floor == 90000.0

    def test_high_inertia_example(self):
        fp = fp_future()
        req = compute_response_requirement(_stub_run([230000.0]), 200.0, fp)
        assert req.pfr_volume == pytest.approx(1763.1, rel=1e-3)
        assert req.efr_volume == 200.0

    def test_qss_floor_binds_at_large_efr(self):
        fp = fp_future()
        req = compute_response_requirement(_stub_run([230000.0]), 1000.0, fp)
        assert req.pfr_volume == pytest.approx(800.0)

    def test_empty_run_rejected(self):
        with pytest.raises(ValueError):
            compute_response_requirement(RunResult(label="x"), 200.0,
                                         fp_future())

    def test_negative_component_rejected(self):
        with pytest.raises(ValueError):
            ResponseRequirement(-1.0, 0.0, 0.0)


class TestOverprocurement:
    def test_gb_style_ratio(self):
        run = _stub_run([230000.0])
        assert overprocurement_ratio(run, fp_future()) == \
            pytest.approx(230000.0 / 90000.0)

    def test_empty_run(self):
        with pytest.raises(ValueError):
            overprocurement_ratio(RunResult(label="x"), fp_future())

    def test_zero_floor(self):
        fp = FrequencyParams(50.0, 0.5, 0.8, 10.0, 1.0, 0.0)
        with pytest.raises(ZeroDivisionError):
            overprocurement_ratio(_stub_run([1000.0]), fp)


@pytest.fixture(scope="module")
def toy_runs(toy):
    eo = run_energy_only(toy, [1], CFG)
    un = run_unlinked(toy, [1], efr_volume=10.0, cfg=CFG, energy_only=eo)
    co = run_cooptimized(toy, [1], CFG)
    return eo, un, co


class TestRuns:
    def test_shapes_and_breakdown(self, toy_runs):
        for run in toy_runs:
            assert len(run.hours) == 4
            assert len(run.inertia) == len(run.pfr) == len(run.efr) == 4
            assert run.total_cost == pytest.approx(
                sum(run.breakdown().values()))
            assert run.monthly_cost() == {
                1: pytest.approx(run.total_cost)}

    def test_month_slice_round_trip(self, toy_runs):
        _, un, _ = toy_runs
        sub = un.month_slice(1)
        assert sub.total_cost == pytest.approx(un.total_cost)
        assert sub.requirements == un.requirements
        assert un.month_slice(2).hours == []

    def test_unlinked_run_honors_requirements(self, toy, toy_runs):
        _, un, _ = toy_runs
        req = un.requirements[1]
        assert req.efr_volume == 10.0
        for h, p, e in zip(un.inertia, un.pfr, un.efr):
            assert h >= req.inertia_floor - 1e-6
            assert p >= req.pfr_volume - 1e-6
            assert e == pytest.approx(req.efr_volume)

    def test_committed_hours_are_secure(self, toy, toy_runs):
        _, un, co = toy_runs
        for run in (un, co):
            nadirs, rocofs = security_replay(run, toy.freq)
            assert max(nadirs) <= toy.freq.delta_f_max + 2e-3
            assert max(rocofs) <= toy.freq.rocof_max + 1e-6

    def test_frequency_security_never_cheaper_than_none(self, toy, toy_runs):
        eo, un, co = toy_runs
        assert un.total_cost >= eo.total_cost - 1e-6
        assert co.total_cost >= eo.total_cost - 1e-6

    def test_service_cost_helper_matches_runs(self, toy, toy_runs):
        eo, un, co = toy_runs
        assert cost_of_frequency_services(
            toy, [1], "co-opt", CFG, energy_only=eo, strategy_run=co) == \
            pytest.approx(co.total_cost - eo.total_cost)
        assert cost_of_frequency_services(
            toy, [1], "unlinked", CFG, energy_only=eo, strategy_run=un) == \
            pytest.approx(un.total_cost - eo.total_cost)

    def test_unknown_strategy(self, toy):
        with pytest.raises(ValueError, match="unknown strategy"):
            cost_of_frequency_services(toy, [1], "both", CFG,
                                       energy_only=RunResult(label="x"))
