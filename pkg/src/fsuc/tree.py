"""Quantile scenario trees for wind uncertainty and the rolling-planning loop.

Tree shape: the root carries the current realization; branching happens at
the first future stage only, after which each branch runs as a deterministic
fan to the horizon (one node per hour, all leaves at the same depth).
"""
from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .decisions import CommittedHour, NodeDecision, Schedule
from .system import SystemModel


class InvalidQuantileError(ValueError):
    pass


class WeightSumError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioNode:
    id: int
    parent_id: int | None
    probability: float
    interval: float        # hours
    hour_index: int        # absolute hour
    wind_available: float  # MW
    demand: float          # MW
    depth: int             # 0 at the root


@dataclass(frozen=True)
class ErrorModel:
    """AR(1) forecast-error model on the wind capacity factor."""

    rho: float = 0.97
    sigma: float = 0.05

    def spread(self, lead: int) -> float:
        """Stationary error std-dev (cf units) at the given lead time."""
        if self.sigma == 0.0:
            return 0.0
        if self.rho >= 1.0:
            return self.sigma * np.sqrt(lead)
        return self.sigma * np.sqrt((1 - self.rho ** (2 * lead)) / (1 - self.rho ** 2))


@dataclass(frozen=True)
class ScenarioTree:
    nodes: tuple        # topologically ordered, root first
    horizon: int        # hours
    branching: tuple    # branch weights at the single branching stage

    @property
    def root(self) -> ScenarioNode:
        return self.nodes[0]

    def children(self, node_id: int) -> list:
        return [n for n in self.nodes if n.parent_id == node_id]

    def node(self, node_id: int) -> ScenarioNode:
        return self.nodes[node_id]

    def leaves(self) -> list:
        parents = {n.parent_id for n in self.nodes}
        return [n for n in self.nodes if n.id not in parents]

    def path_to_root(self, node_id: int) -> list:
        out = []
        n = self.nodes[node_id]
        while n is not None:
            out.append(n)
            n = self.nodes[n.parent_id] if n.parent_id is not None else None
        return out

    def to_csv(self) -> str:
        lines = ["node,parent,prob,hour,wind,demand"]
        for n in self.nodes:
            parent = "" if n.parent_id is None else str(n.parent_id)
            lines.append(f"{n.id},{parent},{n.probability:.9f},{n.hour_index},"
                         f"{n.wind_available:.6f},{n.demand:.6f}")
        return "\n".join(lines) + "\n"


def default_weights(quantiles) -> tuple:
    """Midpoint-interval weights for a sorted quantile list (sum to 1)."""
    qs = list(quantiles)
    edges = [0.0] + [(qs[i] + qs[i + 1]) / 2 for i in range(len(qs) - 1)] + [1.0]
    return tuple(edges[i + 1] - edges[i] for i in range(len(qs)))


def build_tree(root_wind: float, root_demand: float, wind_forecast, demand_forecast,
               quantiles, weights, horizon: int, hour0: int = 0,
               error_model: ErrorModel = ErrorModel(),
               wind_capacity: float = float("inf")) -> ScenarioTree:
    """Build a stage-1-branching scenario tree.

    ``wind_forecast``/``demand_forecast`` cover hours 1..horizon ahead (MW).
    Each branch follows the forecast shifted by its quantile of the AR error
    model, clipped to [0, wind_capacity].
    """
    qs = list(quantiles)
    ws = list(weights)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if len(wind_forecast) < horizon or len(demand_forecast) < horizon:
        raise ValueError("forecast series shorter than horizon")
    if not qs or any(not 0 < q < 1 for q in qs) or any(
            qs[i] >= qs[i + 1] for i in range(len(qs) - 1)):
        raise InvalidQuantileError("quantiles must be strictly increasing in (0, 1)")
    if len(ws) != len(qs):
        raise WeightSumError("weights must match quantiles in length")
    if abs(sum(ws) - 1.0) > 1e-9:
        raise WeightSumError(f"weights sum to {sum(ws)!r}, expected 1")

    cap = wind_capacity
    nodes = [ScenarioNode(id=0, parent_id=None, probability=1.0, interval=1.0,
                          hour_index=hour0, wind_available=float(root_wind),
                          demand=float(root_demand), depth=0)]
    z = norm.ppf(qs)
    nid = 1
    for b, w in enumerate(ws):
        parent = 0
        for h in range(1, horizon + 1):
            shift = z[b] * error_model.spread(h) * (cap if np.isfinite(cap) else 0.0)
            wind = float(np.clip(wind_forecast[h - 1] + shift, 0.0,
                                 cap if np.isfinite(cap) else np.inf))
            nodes.append(ScenarioNode(
                id=nid, parent_id=parent, probability=float(w), interval=1.0,
                hour_index=hour0 + h, wind_available=wind,
                demand=float(demand_forecast[h - 1]), depth=h))
            parent = nid
            nid += 1
    return ScenarioTree(nodes=tuple(nodes), horizon=horizon, branching=tuple(ws))


# ---------------------------------------------------------------------------
# Rolling planning
# ---------------------------------------------------------------------------

@dataclass
class RollingState:
    """Inter-temporal state carried between rolling steps."""

    n_up: dict            # class name -> units online in the previous hour
    hist_starts: dict     # class name -> deque of recent actual starts (old..new)
    hist_shuts: dict      # class name -> deque of recent shutdowns
    pending_starts: dict  # class name -> deque; [d] = starts allowed d hours ahead
    soc: dict             # storage name -> MWh

    def copy(self) -> "RollingState":
        return copy.deepcopy(self)


def initial_state(model: SystemModel) -> RollingState:
    """Monthly-run initial condition: must-run fleets online, flexible fleets
    off but free to start immediately, storage at half charge."""
    n_up, hs, hd, pend = {}, {}, {}, {}
    for tc in model.thermal_classes:
        n_up[tc.name] = tc.unit_count if tc.must_run else 0
        hs[tc.name] = deque([0] * max(tc.min_up - 1, 0), maxlen=max(tc.min_up - 1, 0))
        hd[tc.name] = deque([0] * max(tc.min_down - 1, 0), maxlen=max(tc.min_down - 1, 0))
        p = deque([0] * tc.startup_time, maxlen=tc.startup_time or None)
        if tc.startup_time > 0:
            p[0] = tc.unit_count  # free to start at hour 0
        pend[tc.name] = p
    soc = {su.name: 0.5 * su.energy_cap for su in model.storage}
    return RollingState(n_up=n_up, hist_starts=hs, hist_shuts=hd,
                        pending_starts=pend, soc=soc)


@dataclass(frozen=True)
class PlanOutcome:
    """What a per-step planner hands back to the rolling loop."""

    root: NodeDecision
    notifications: dict   # class name -> units notified to start `lag` hours out
    nodes: dict           # node id -> NodeDecision (whole tree, for replay)
    objective: float


def rolling_plan(model: SystemModel, planner, start_hour: int, n_steps: int,
                 actual_demand, actual_wind_cf, horizon: int = 24,
                 quantiles=(0.5,), weights=(1.0,),
                 error_model: ErrorModel = ErrorModel(),
                 state: RollingState | None = None) -> Schedule:
    """Re-solve on a fresh tree each hour and commit only the root decision.

    ``actual_demand``/``actual_wind_cf`` must cover hours
    [start_hour, start_hour + n_steps + horizon); the actual trace doubles
    as the central forecast.
    """
    need = start_hour + n_steps + horizon
    if len(actual_demand) < need or len(actual_wind_cf) < need:
        raise ValueError("actual trace does not cover the rolling window")
    if state is None:
        state = initial_state(model)
    schedule = Schedule()
    for step in range(n_steps):
        t = start_hour + step
        wind_now = float(actual_wind_cf[t]) * model.wind_capacity
        wind_fc = np.asarray(actual_wind_cf[t + 1:t + 1 + horizon]) * model.wind_capacity
        demand_fc = np.asarray(actual_demand[t + 1:t + 1 + horizon])
        tree = build_tree(wind_now, float(actual_demand[t]), wind_fc, demand_fc,
                          quantiles, weights, horizon, hour0=t,
                          error_model=error_model, wind_capacity=model.wind_capacity)
        outcome = planner(tree, state)
        schedule.append(_committed(model, t, outcome.root))
        _advance(model, state, outcome)
    return schedule


def _committed(model: SystemModel, hour: int, d: NodeDecision) -> CommittedHour:
    startup = no_load = marginal = 0.0
    for tc in model.thermal_classes:
        cd = d.thermal[tc.name]
        startup += tc.startup_cost * cd.n_sg
        no_load += tc.no_load_cost * cd.n_up
        marginal += tc.marginal_cost * cd.power
    return CommittedHour(hour=hour, decision=d,
                         cost_startup=startup, cost_no_load=no_load,
                         cost_marginal=marginal,
                         cost_shed=model.voll * d.load_shed)


def _advance(model: SystemModel, state: RollingState, outcome: PlanOutcome) -> None:
    for tc in model.thermal_classes:
        cd = outcome.root.thermal[tc.name]
        started, shut = cd.n_started, cd.n_shut
        state.n_up[tc.name] = cd.n_up
        if state.hist_starts[tc.name].maxlen:
            state.hist_starts[tc.name].append(started)
        if state.hist_shuts[tc.name].maxlen:
            state.hist_shuts[tc.name].append(shut)
        pend = state.pending_starts[tc.name]
        if tc.startup_time > 0:
            pend.popleft()
            pend.append(outcome.notifications.get(tc.name, 0))
    for su in model.storage:
        state.soc[su.name] = outcome.root.storage[su.name].soc
