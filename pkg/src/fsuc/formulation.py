"""Translate a system model plus scenario tree into a mixed-integer problem.

Commitment is clustered: each thermal class is represented by integer counts
of units online / starting / stopping.  Start-ups of classes with a notice
time are committed through notification variables whose cost is charged at
the notification node; the actual start is gated by the notification made
``startup_time`` hours earlier (pre-tree notifications come from the rolling
state).  Frequency security enters either as the RoCoF / nadir / q-s-s rows
(co-optimized mode) or as fixed volume rows (unlinked mode).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .decisions import ClassDecision, NodeDecision, StorageDecision
from .frequency import min_inertia_for_rocof
from .mip import LinExpr, MipProblem, Solution
from .system import FrequencyParams, SystemModel, ThermalClass
from .tree import PlanOutcome, RollingState, ScenarioTree, initial_state


class OptionConflictError(ValueError):
    pass


@dataclass(frozen=True)
class FormulationOptions:
    """Switches selecting co-optimized, unlinked or energy-only mode."""

    frequency_constraints: bool = False
    fixed_pfr_requirement: float | None = None  # MW, unlinked mode
    fixed_efr_volume: float | None = None       # MW, unlinked mode
    inertia_floor: float | None = None          # MW*s, unlinked mode
    terminal_soc_frac: float = 0.5              # leaf state-of-charge floor

    def __post_init__(self):
        if self.frequency_constraints and self.fixed_pfr_requirement is not None:
            raise OptionConflictError(
                "fixed_pfr_requirement conflicts with frequency_constraints")


def node_cost(tc: ThermalClass, d, dt: float) -> float:
    """Operating cost of one thermal class for one node/interval (GBP)."""
    cd = d.thermal[tc.name] if isinstance(d, NodeDecision) else d
    return (tc.startup_cost * cd.n_sg
            + dt * (tc.no_load_cost * cd.n_up + tc.marginal_cost * cd.power))


def inertia_exclusion(classes, fp: FrequencyParams, n_up=None) -> float:
    """Inertia of the lost unit itself (MW*s), excluded from post-fault H.

    The lost unit is one unit of the first class whose rating equals the
    largest loss; with ``n_up`` given the exclusion only applies while that
    class has a unit online.
    """
    for tc in classes:
        if tc.unit_count > 0 and math.isclose(tc.rated_power, fp.largest_loss,
                                              rel_tol=1e-9, abs_tol=1e-6):
            if n_up is None:
                return tc.inertia_const * tc.rated_power if tc.must_run else 0.0
            if n_up.get(tc.name, 0) >= 1:
                return tc.inertia_const * tc.rated_power
            return 0.0
    return 0.0


def system_inertia(n_up: dict, classes, fp: FrequencyParams) -> float:
    """Post-fault system inertia (MW*s) for given online counts."""
    total = sum(tc.inertia_const * tc.rated_power * n_up.get(tc.name, 0)
                for tc in classes)
    return total - inertia_exclusion(classes, fp, n_up)


# Variable name helpers; node id keeps names unique within a problem.
def _u(g, n): return f"u[{g},{n}]"        # units online
def _s(g, n): return f"s[{g},{n}]"        # units starting (coming online)
def _w(g, n): return f"w[{g},{n}]"        # units shutting down
def _ng(g, n): return f"ng[{g},{n}]"      # start notifications
def _p(g, n): return f"p[{g},{n}]"        # MW output
def _r(g, n): return f"r[{g},{n}]"        # MW of PFR
def _ch(s, n): return f"ch[{s},{n}]"
def _dis(s, n): return f"dis[{s},{n}]"
def _soc(s, n): return f"soc[{s},{n}]"
def _efr(s): return f"efr[{s}]"           # root-stage EFR provision
def _wu(n): return f"wu[{n}]"
def _wc(n): return f"wc[{n}]"
def _shed(n): return f"shed[{n}]"
def _spill(n): return f"spill[{n}]"


def build_suc(model: SystemModel, tree: ScenarioTree, opts: FormulationOptions,
              state: RollingState | None = None) -> MipProblem:
    """Build the stochastic unit-commitment problem for one rolling step."""
    if state is None:
        state = initial_state(model)
    fp = model.freq
    p = MipProblem()
    nodes = tree.nodes
    horizon = tree.horizon
    ancestors = {n.id: tree.path_to_root(n.id) for n in nodes}  # self first
    leaves = {n.id for n in tree.leaves()}

    efr_on = opts.frequency_constraints or opts.fixed_efr_volume is not None
    for su in model.storage:
        p.add_variable(_efr(su.name), 0.0, su.efr_capacity if efr_on else 0.0)

    for n in nodes:
        for tc in model.thermal_classes:
            g = tc.name
            if tc.must_run:
                p.add_variable(_u(g, n.id), tc.unit_count, tc.unit_count,
                               integer=True, priority=1)
                p.add_variable(_s(g, n.id), 0, 0, integer=True)
                p.add_variable(_w(g, n.id), 0, 0, integer=True)
            else:
                p.add_variable(_u(g, n.id), 0, tc.unit_count, integer=True,
                               priority=1)
                p.add_variable(_s(g, n.id), 0, tc.unit_count, integer=True)
                p.add_variable(_w(g, n.id), 0, tc.unit_count, integer=True)
            if tc.startup_time > 0 and n.depth + tc.startup_time <= horizon:
                ub = 0 if tc.must_run else tc.unit_count
                p.add_variable(_ng(g, n.id), 0, ub, integer=True)
            p.add_variable(_p(g, n.id), 0.0, tc.rated_power * tc.unit_count)
            p.add_variable(_r(g, n.id), 0.0, tc.max_response * tc.unit_count)
        for su in model.storage:
            p.add_variable(_ch(su.name, n.id), 0.0, su.power_cap)
            p.add_variable(_dis(su.name, n.id), 0.0, su.power_cap)
            p.add_variable(_soc(su.name, n.id), 0.0, su.energy_cap)
        p.add_variable(_wu(n.id), 0.0, max(n.wind_available, 0.0))
        p.add_variable(_wc(n.id), 0.0, max(n.wind_available, 0.0))
        p.add_variable(_shed(n.id), 0.0, max(n.demand, 0.0))
        p.add_variable(_spill(n.id))

    obj: dict[str, float] = {}

    def add_obj(var, coef):
        obj[var] = obj.get(var, 0.0) + coef

    for n in nodes:
        nid, dt, pi = n.id, n.interval, n.probability
        parent = n.parent_id

        for tc in model.thermal_classes:
            g = tc.name
            # Commitment balance: u(n) - u(parent) = s - w.
            coeffs = {_u(g, nid): 1.0, _s(g, nid): -1.0, _w(g, nid): 1.0}
            if parent is None:
                p.add_row(f"cmt[{g},{nid}]", coeffs, "=", state.n_up[g])
            else:
                coeffs[_u(g, parent)] = -1.0
                p.add_row(f"cmt[{g},{nid}]", coeffs, "=", 0.0)

            # Start gating by notification made startup_time hours earlier.
            lag = tc.startup_time
            if lag > 0 and not tc.must_run:
                if n.depth < lag:
                    allowed = state.pending_starts[g][n.depth] \
                        if n.depth < len(state.pending_starts[g]) else 0
                    p.add_row(f"gate[{g},{nid}]", {_s(g, nid): 1.0}, "<=", allowed)
                else:
                    anc = ancestors[nid][lag]
                    p.add_row(f"gate[{g},{nid}]",
                              {_s(g, nid): 1.0, _ng(g, anc.id): -1.0}, "<=", 0.0)

            # Min-up / min-down counting over the last hours (path + history).
            if tc.min_up >= 1 and not tc.must_run:
                coeffs = {}
                rhs = 0.0
                for i in range(tc.min_up):
                    if i <= n.depth:
                        coeffs[_s(g, ancestors[nid][i].id)] = 1.0
                    else:
                        hist = state.hist_starts[g]
                        k = i - n.depth  # k hours before the root
                        if k <= len(hist):
                            rhs -= hist[-k]
                coeffs[_u(g, nid)] = coeffs.get(_u(g, nid), 0.0) - 1.0
                p.add_row(f"minup[{g},{nid}]", coeffs, "<=", rhs)
            if tc.min_down >= 1 and not tc.must_run:
                coeffs = {}
                rhs = float(tc.unit_count)
                for i in range(tc.min_down):
                    if i <= n.depth:
                        coeffs[_w(g, ancestors[nid][i].id)] = 1.0
                    else:
                        hist = state.hist_shuts[g]
                        k = i - n.depth
                        if k <= len(hist):
                            rhs -= hist[-k]
                coeffs[_u(g, nid)] = coeffs.get(_u(g, nid), 0.0) + 1.0
                p.add_row(f"mindn[{g},{nid}]", coeffs, "<=", rhs)

            # Dispatch bounds and PFR capability.
            p.add_row(f"pmin[{g},{nid}]",
                      {_p(g, nid): 1.0, _u(g, nid): -tc.min_stable_gen}, ">=", 0.0)
            p.add_row(f"pmax[{g},{nid}]",
                      {_p(g, nid): 1.0, _u(g, nid): -tc.rated_power}, "<=", 0.0)
            p.add_row(f"rcap[{g},{nid}]",
                      {_r(g, nid): 1.0, _u(g, nid): -tc.max_response}, "<=", 0.0)
            if tc.response_slope > 0:
                p.add_row(f"rslope[{g},{nid}]",
                          {_r(g, nid): 1.0, _p(g, nid): tc.response_slope,
                           _u(g, nid): -tc.response_slope * tc.rated_power},
                          "<=", 0.0)
            else:
                p.add_row(f"rslope[{g},{nid}]", {_r(g, nid): 1.0}, "<=", 0.0)

            # Cost terms (start cost lands on the notification for lagged
            # classes, on the start itself otherwise).
            if tc.startup_cost:
                if tc.startup_time > 0:
                    if n.depth + tc.startup_time <= horizon and not tc.must_run:
                        add_obj(_ng(g, nid), pi * tc.startup_cost)
                else:
                    add_obj(_s(g, nid), pi * tc.startup_cost)
            if tc.no_load_cost:
                add_obj(_u(g, nid), pi * dt * tc.no_load_cost)
            if tc.marginal_cost:
                add_obj(_p(g, nid), pi * dt * tc.marginal_cost)

        # Storage continuity and EFR headroom.
        for su in model.storage:
            s = su.name
            sq = math.sqrt(su.round_trip_eff)
            coeffs = {_soc(s, nid): 1.0, _ch(s, nid): -sq * dt, _dis(s, nid): dt / sq}
            if parent is None:
                p.add_row(f"socc[{s},{nid}]", coeffs, "=", state.soc[s])
            else:
                coeffs[_soc(s, parent)] = -1.0
                p.add_row(f"socc[{s},{nid}]", coeffs, "=", 0.0)
            if nid in leaves and opts.terminal_soc_frac > 0:
                p.add_row(f"socend[{s},{nid}]", {_soc(s, nid): 1.0}, ">=",
                          opts.terminal_soc_frac * su.energy_cap)
            p.add_row(f"efrhr[{s},{nid}]",
                      {_efr(s): 1.0, _dis(s, nid): 1.0}, "<=", su.power_cap)

        # Wind split and power balance.
        p.add_row(f"wind[{nid}]", {_wu(nid): 1.0, _wc(nid): 1.0}, "=",
                  n.wind_available)
        balance = {_wu(nid): 1.0, _shed(nid): 1.0, _spill(nid): -1.0}
        for tc in model.thermal_classes:
            balance[_p(tc.name, nid)] = 1.0
        for su in model.storage:
            balance[_dis(su.name, nid)] = 1.0
            balance[_ch(su.name, nid)] = -1.0
        p.add_row(f"bal[{nid}]", balance, "=", n.demand)
        add_obj(_shed(nid), pi * dt * model.voll)

        # Frequency security rows.
        h_coeffs = {_u(tc.name, nid): tc.inertia_const * tc.rated_power
                    for tc in model.thermal_classes}
        excl = inertia_exclusion(model.thermal_classes, fp)
        pfr_coeffs = {_r(tc.name, nid): 1.0 for tc in model.thermal_classes}
        efr_coeffs = {_efr(su.name): 1.0 for su in model.storage}

        if opts.frequency_constraints:
            p.add_row(f"rocof[{nid}]", dict(h_coeffs), ">=",
                      min_inertia_for_rocof(fp) + excl)
            qss = dict(pfr_coeffs)
            qss.update(efr_coeffs)
            p.add_row(f"qss[{nid}]", qss, ">=", fp.largest_loss)
            k = math.sqrt(fp.t_pfr / (4.0 * fp.delta_f_max))
            x = LinExpr(
                {**{v: c / fp.f0 for v, c in h_coeffs.items()},
                 **{v: -fp.t_efr / (4.0 * fp.delta_f_max) for v in efr_coeffs}},
                const=-excl / fp.f0)
            y = LinExpr(dict(pfr_coeffs))
            z = LinExpr({v: -k for v in efr_coeffs}, const=k * fp.largest_loss)
            p.add_cone(f"nadir[{nid}]", x, y, z)
        else:
            if opts.fixed_pfr_requirement is not None:
                p.add_row(f"pfrreq[{nid}]", dict(pfr_coeffs), ">=",
                          opts.fixed_pfr_requirement)
            if opts.inertia_floor is not None:
                p.add_row(f"hfloor[{nid}]", dict(h_coeffs), ">=",
                          opts.inertia_floor + excl)

    if opts.fixed_efr_volume is not None and model.storage:
        p.add_row("efrvol", {_efr(su.name): 1.0 for su in model.storage},
                  "=", opts.fixed_efr_volume)

    p.set_objective(obj)
    return p


def decode_solution(model: SystemModel, tree: ScenarioTree,
                    sol: Solution) -> dict:
    """Map a solution back to one NodeDecision per tree node."""
    out = {}
    for n in tree.nodes:
        thermal = {}
        for tc in model.thermal_classes:
            g = tc.name
            if tc.startup_time > 0:
                name = _ng(g, n.id)
                n_sg = int(round(sol.values.get(name, 0.0)))
            else:
                n_sg = int(round(sol.values[_s(g, n.id)]))
            thermal[g] = ClassDecision(
                n_up=int(round(sol.values[_u(g, n.id)])),
                n_sg=n_sg,
                power=float(sol.values[_p(g, n.id)]),
                pfr=float(sol.values[_r(g, n.id)]),
                n_started=int(round(sol.values[_s(g, n.id)])),
                n_shut=int(round(sol.values[_w(g, n.id)])))
        storage = {}
        for su in model.storage:
            storage[su.name] = StorageDecision(
                charge=float(sol.values[_ch(su.name, n.id)]),
                discharge=float(sol.values[_dis(su.name, n.id)]),
                soc=float(sol.values[_soc(su.name, n.id)]),
                efr=float(sol.values[_efr(su.name)]))
        out[n.id] = NodeDecision(
            thermal=thermal, storage=storage,
            wind_used=float(sol.values[_wu(n.id)]),
            wind_curtailed=float(sol.values[_wc(n.id)]),
            load_shed=float(sol.values[_shed(n.id)]),
            overgen=float(sol.values[_spill(n.id)]))
    return out


def make_planner(model: SystemModel, opts: FormulationOptions,
                 gap_tol: float = 1e-3, feas_tol: float = 1e-6,
                 time_limit: float | None = None, solver=None):
    """Wrap build/solve/decode into a rolling-plan callback."""
    from . import mip

    solve = solver or mip.solve

    def planner(tree: ScenarioTree, state: RollingState) -> PlanOutcome:
        problem = build_suc(model, tree, opts, state)
        sol = solve(problem, gap_tol=gap_tol, feas_tol=feas_tol,
                    time_limit=time_limit)
        if sol.status not in ("optimal", "feasible-gap"):
            raise RuntimeError(f"planner solve failed: status={sol.status}")
        nodes = decode_solution(model, tree, sol)
        notifications = {}
        for tc in model.thermal_classes:
            if tc.startup_time > 0:
                name = _ng(tc.name, tree.root.id)
                notifications[tc.name] = int(round(sol.values.get(name, 0.0)))
        return PlanOutcome(root=nodes[tree.root.id], notifications=notifications,
                           nodes=nodes, objective=sol.objective)

    return planner


def expected_cost(model: SystemModel, tree: ScenarioTree, nodes: dict) -> float:
    """Recompute the SUC objective from decoded decisions (independent path)."""
    total = 0.0
    for n in tree.nodes:
        d = nodes[n.id]
        total += n.probability * (
            sum(node_cost(tc, d, n.interval) for tc in model.thermal_classes)
            + n.interval * model.voll * d.load_shed)
    return total
