"""Independent replay checker for committed schedules.

Re-implements the scheduling rules directly against decision records (no
shared code with the formulation) so solver output can be audited.
"""
from __future__ import annotations

from .system import SystemModel
from .tree import RollingState, initial_state

TOL = 1e-5


def validate_schedule(model: SystemModel, hours, demand, wind_cf,
                      state: RollingState | None = None) -> list:
    """Return a list of violation strings for a committed hourly schedule.

    ``hours`` is a sequence of CommittedHour; ``demand``/``wind_cf`` index by
    absolute hour.
    """
    errs: list[str] = []
    state = (state or initial_state(model)).copy()
    starts_hist = {tc.name: list(state.hist_starts[tc.name]) for tc in model.thermal_classes}
    shuts_hist = {tc.name: list(state.hist_shuts[tc.name]) for tc in model.thermal_classes}
    pending = {tc.name: list(state.pending_starts[tc.name]) for tc in model.thermal_classes}
    prev_up = dict(state.n_up)
    soc = dict(state.soc)

    for rec in hours:
        t, d = rec.hour, rec.decision
        dem = float(demand[t % len(demand)])
        wind = float(wind_cf[t % len(wind_cf)]) * model.wind_capacity

        gen = 0.0
        for tc in model.thermal_classes:
            cd = d.thermal[tc.name]
            g = tc.name
            if not 0 <= cd.n_up <= tc.unit_count:
                errs.append(f"h{t} {g}: n_up {cd.n_up} outside [0,{tc.unit_count}]")
            if cd.n_sg < 0 or cd.n_started < 0 or cd.n_shut < 0:
                errs.append(f"h{t} {g}: negative start/shut count")
            if cd.n_up != prev_up[g] + cd.n_started - cd.n_shut:
                errs.append(f"h{t} {g}: commitment continuity broken")
            if tc.startup_time > 0 and cd.n_started > pending[g][0] + 0:
                errs.append(f"h{t} {g}: {cd.n_started} starts exceed "
                            f"{pending[g][0]} notified")
            if cd.power < tc.min_stable_gen * cd.n_up - TOL or \
                    cd.power > tc.rated_power * cd.n_up + TOL:
                errs.append(f"h{t} {g}: power {cd.power:.3f} outside stable band")
            cap = min(tc.max_response * cd.n_up,
                      tc.response_slope * (tc.rated_power * cd.n_up - cd.power))
            if cd.pfr > cap + TOL:
                errs.append(f"h{t} {g}: pfr {cd.pfr:.3f} exceeds capability {cap:.3f}")
            # Min-up: everything started in the last min_up hours is still on.
            recent = (starts_hist[g] + [cd.n_started])[-max(tc.min_up, 1):]
            if sum(recent) > cd.n_up + TOL and not tc.must_run:
                errs.append(f"h{t} {g}: min-up violated")
            recent_dn = (shuts_hist[g] + [cd.n_shut])[-max(tc.min_down, 1):]
            if sum(recent_dn) > tc.unit_count - cd.n_up + TOL and not tc.must_run:
                errs.append(f"h{t} {g}: min-down violated")
            gen += cd.power

        sto_net = 0.0
        for su in model.storage:
            sd = d.storage[su.name]
            if not -TOL <= sd.soc <= su.energy_cap + TOL:
                errs.append(f"h{t} {su.name}: soc {sd.soc:.3f} out of bounds")
            if sd.charge < -TOL or sd.charge > su.power_cap + TOL or \
                    sd.discharge < -TOL or sd.discharge > su.power_cap + TOL:
                errs.append(f"h{t} {su.name}: charge/discharge out of bounds")
            if sd.efr < -TOL or sd.efr > su.efr_capacity + TOL:
                errs.append(f"h{t} {su.name}: efr out of bounds")
            if sd.efr + sd.discharge > su.power_cap + TOL:
                errs.append(f"h{t} {su.name}: efr plus discharge exceeds power cap")
            sq = su.round_trip_eff ** 0.5
            expect = soc[su.name] + sq * sd.charge - sd.discharge / sq
            if abs(sd.soc - expect) > TOL * max(1.0, su.energy_cap):
                errs.append(f"h{t} {su.name}: soc continuity broken "
                            f"({sd.soc:.4f} vs {expect:.4f})")
            sto_net += sd.discharge - sd.charge

        if d.wind_used < -TOL or d.wind_curtailed < -TOL or \
                abs(d.wind_used + d.wind_curtailed - wind) > TOL * max(1.0, wind):
            errs.append(f"h{t}: wind split {d.wind_used:.3f}+{d.wind_curtailed:.3f} "
                        f"!= available {wind:.3f}")
        if d.load_shed < -TOL or d.overgen < -TOL:
            errs.append(f"h{t}: negative shed/overgen")
        residual = gen + d.wind_used + sto_net + d.load_shed - d.overgen - dem
        if abs(residual) > TOL * max(1.0, dem):
            errs.append(f"h{t}: power balance off by {residual:.4f} MW")

        # Advance replay state.
        for tc in model.thermal_classes:
            cd = d.thermal[tc.name]
            g = tc.name
            starts_hist[g].append(cd.n_started)
            shuts_hist[g].append(cd.n_shut)
            prev_up[g] = cd.n_up
            if tc.startup_time > 0:
                pending[g] = pending[g][1:] + [cd.n_sg]
        for su in model.storage:
            soc[su.name] = d.storage[su.name].soc
    return errs
