"""Command-line harness for the GB-style procurement experiments.

Named scenarios pair a system configuration with a procurement strategy:
``unlink-1`` / ``co-opt-1`` use the current system (25 GW wind, 1.32 GW
largest loss), ``unlink-2`` / ``co-opt-2`` the future one (50 GW wind,
1.8 GW loss from the new large nuclear units).  ``custom`` frees wind
capacity and largest loss and runs the co-optimized strategy.

Every experiment writes, under ``<out>/<scenario>/``: an hourly cost CSV
for the strategy run and the shared energy-only baseline, a monthly summary
CSV, an annual summary JSON, one post-fault trajectory CSV per month at the
lowest-inertia committed hour, and (with ``--sensitivity-grid``) the
frequency-service cost table over the wind x loss grid.  Outputs are
byte-stable for a fixed spec and seed; partial files are removed on failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

from .frequency import ServicePoint, simulate_post_fault
from .strategies import (DEFAULT_EFR_VOLUME, RunResult, TreeConfig,
                         run_cooptimized, run_energy_only, run_unlinked)
from .system import (ConfigError, FrequencyParams, StorageUnit, SystemModel,
                     ThermalClass, month_hours, synth_profiles)

OUT_ENV_VAR = "FSUC_OUT"
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

# scenario -> (wind capacity MW, largest loss MW, strategy)
SCENARIOS = {
    "unlink-1": (25000.0, 1320.0, "unlinked"),
    "unlink-2": (50000.0, 1800.0, "unlinked"),
    "co-opt-1": (25000.0, 1320.0, "co-opt"),
    "co-opt-2": (50000.0, 1800.0, "co-opt"),
}
SENSITIVITY_GRID = ((25000.0, 1320.0), (25000.0, 1800.0),
                    (50000.0, 1320.0), (50000.0, 1800.0))
MEAN_DEMAND = 43000.0  # MW, GB-like annual average


class MismatchedCoverageError(ValueError):
    """The two run reports do not cover the same months/steps."""


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    months: tuple = tuple(range(1, 13))
    wind_capacity: float | None = None  # None = scenario default
    largest_loss: float | None = None
    efr_mode: str = "fixed-200"         # none | fixed-200 | optimized
    seed: int = 1
    out_dir: str = "."
    gap: float = 1e-3
    time_limit: float | None = None
    full_month: bool = False
    sensitivity_grid: bool = False

    def resolved(self) -> "ExperimentSpec":
        if self.scenario not in (*SCENARIOS, "custom"):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.scenario == "custom":
            if self.wind_capacity is None or self.largest_loss is None:
                raise ConfigError("custom scenario needs --wind-capacity-mw "
                                  "and --largest-loss-mw")
            return self
        wind, loss, _ = SCENARIOS[self.scenario]
        for given, pinned, flag in ((self.wind_capacity, wind, "wind capacity"),
                                    (self.largest_loss, loss, "largest loss")):
            if given is not None and given != pinned:
                raise ConfigError(f"{flag} is pinned to {pinned:g} MW by "
                                  f"scenario {self.scenario}")
        return replace(self, wind_capacity=wind, largest_loss=loss)

    @property
    def strategy(self) -> str:
        return SCENARIOS.get(self.scenario, (None, None, "co-opt"))[2]

    def validate(self):
        if not self.months or not set(self.months) <= set(range(1, 13)):
            raise ConfigError("months must be a non-empty subset of 1..12")
        if self.efr_mode not in ("none", "fixed-200", "optimized"):
            raise ConfigError(f"unknown efr mode {self.efr_mode!r}")
        if self.strategy == "unlinked" and self.efr_mode == "optimized":
            raise ConfigError("the unlinked strategy procures a fixed EFR "
                              "volume; use --efr none or fixed-200")
        if self.gap < 0:
            raise ConfigError("gap must be >= 0")


def build_model(wind_capacity: float, largest_loss: float,
                seed: int) -> SystemModel:
    """GB-like fleet; the nuclear class is sized so one unit is the loss."""
    n_nuclear = 4 if largest_loss >= 1500.0 else 1
    nuclear = ThermalClass("nuclear", n_nuclear, largest_loss, largest_loss,
                           0.0, 10.0, 0.0, 0, 0, 0, 5.0, 0.0, 0.0)
    ccgt = ThermalClass("ccgt", 100, 500.0, 250.0, 7809.0, 47.0, 10000.0,
                        4, 4, 1, 5.0, 50.0, 0.5)
    ocgt = ThermalClass("ocgt", 30, 100.0, 50.0, 8000.0, 200.0, 0.0,
                        0, 0, 0, 5.0, 20.0, 0.5)
    pump = StorageUnit("pump_hydro", 2600.0, 10000.0, 0.75, 0.0)
    battery = StorageUnit("battery", 250.0, 1000.0, 0.96, 200.0)
    freq = FrequencyParams(50.0, 0.5, 0.8, 10.0, 1.0, largest_loss)
    demand, wind_cf = synth_profiles(seed, list(range(1, 13)), MEAN_DEMAND,
                                     wind_capacity)
    return SystemModel((nuclear, ccgt, ocgt), (pump, battery), freq,
                       wind_capacity, 30000.0, demand, wind_cf)


def _efr_volume(mode: str) -> float | None:
    return {"none": 0.0, "fixed-200": DEFAULT_EFR_VOLUME,
            "optimized": None}[mode]


def _fmt(v: float) -> str:
    return f"{float(v):.10g}"


class _Reporter:
    """Tracks written files so a failed run leaves no partial outputs."""

    def __init__(self, directory: str):
        self.dir = directory
        self.written: list[str] = []

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def write(self, name: str, text: str) -> str:
        os.makedirs(self.dir, exist_ok=True)
        p = self.path(name)
        with open(p, "w") as fh:
            fh.write(text)
        self.written.append(p)
        return p

    def discard(self):
        for p in self.written:
            if os.path.exists(p):
                os.remove(p)
        if os.path.isdir(self.dir) and not os.listdir(self.dir):
            os.rmdir(self.dir)


def _hourly_csv(run: RunResult) -> str:
    lines = ["strategy,month,hour,cost_startup,cost_no_load,cost_marginal,"
             "cost_shed,cost_total,inertia_mws,pfr_mw,efr_mw"]
    for rec, month, h_sys, pfr, efr in zip(run.hours, run.month_of_hour,
                                           run.inertia, run.pfr, run.efr):
        lines.append(",".join([run.label, str(month), str(rec.hour),
                               _fmt(rec.cost_startup), _fmt(rec.cost_no_load),
                               _fmt(rec.cost_marginal), _fmt(rec.cost_shed),
                               _fmt(rec.cost_total), _fmt(h_sys), _fmt(pfr),
                               _fmt(efr)]))
    return "\n".join(lines) + "\n"


def _month_rows(spec: ExperimentSpec, run: RunResult, baseline: RunResult):
    rows = []
    for month in spec.months:
        cost = run.month_slice(month).total_cost
        base = baseline.month_slice(month).total_cost
        steps = len(run.month_slice(month).hours)
        scale = 1.0 if spec.full_month else month_hours(month) / steps
        req = run.requirements.get(month)
        rows.append({
            "month": month,
            "steps": steps,
            "scale": scale,
            "strategy_cost": cost,
            "energy_only_cost": base,
            "freq_service_cost": cost - base,
            "strategy_cost_scaled": cost * scale,
            "energy_only_cost_scaled": base * scale,
            "freq_service_cost_scaled": (cost - base) * scale,
            "inertia_floor_mws": req.inertia_floor if req else "",
            "pfr_volume_mw": req.pfr_volume if req else "",
            "efr_volume_mw": req.efr_volume if req else "",
        })
    return rows


def _monthly_csv(rows) -> str:
    cols = list(rows[0])
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) if isinstance(row[c], (int, float))
                              and c not in ("month", "steps") else str(row[c])
                              for c in cols))
    return "\n".join(lines) + "\n"


def _annual_json(spec: ExperimentSpec, rows) -> str:
    summary = {
        "scenario": spec.scenario,
        "strategy": "co-opt" if spec.strategy == "co-opt" else "unlinked",
        "wind_capacity_mw": spec.wind_capacity,
        "largest_loss_mw": spec.largest_loss,
        "efr_mode": spec.efr_mode,
        "seed": spec.seed,
        "gap": spec.gap,
        "months": list(spec.months),
        "full_month": spec.full_month,
        "annual_strategy_cost": sum(r["strategy_cost_scaled"] for r in rows),
        "annual_energy_only_cost": sum(r["energy_only_cost_scaled"]
                                       for r in rows),
        "annual_freq_service_cost": sum(r["freq_service_cost_scaled"]
                                        for r in rows),
    }
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def _trajectory_csvs(spec: ExperimentSpec, model: SystemModel, run: RunResult,
                     reporter: _Reporter):
    for month in spec.months:
        sub = run.month_slice(month)
        if not sub.hours:
            continue
        k = min(range(len(sub.inertia)), key=lambda i: sub.inertia[i])
        point = ServicePoint(sub.inertia[k], sub.efr[k], sub.pfr[k])
        traj = simulate_post_fault(point, model.freq)
        reporter.write(f"trajectory_m{month:02d}.csv", traj.to_csv())


def _sensitivity_csv(spec: ExperimentSpec, cfg: TreeConfig) -> str:
    lines = ["wind_capacity_mw,largest_loss_mw,strategy,"
             "annual_freq_service_cost"]
    efr = _efr_volume(spec.efr_mode if spec.efr_mode != "optimized"
                      else "fixed-200")
    for wind, loss in SENSITIVITY_GRID:
        model = build_model(wind, loss, spec.seed)
        base = run_energy_only(model, spec.months, cfg)
        runs = {
            "unlinked": run_unlinked(model, spec.months, efr_volume=efr,
                                     cfg=cfg, energy_only=base),
            "co-opt": run_cooptimized(model, spec.months, cfg,
                                      efr_volume=_efr_volume(spec.efr_mode)),
        }
        for strategy in ("unlinked", "co-opt"):
            total = 0.0
            for month in spec.months:
                cost = runs[strategy].month_slice(month).total_cost
                bases = base.month_slice(month)
                steps = len(bases.hours)
                scale = 1.0 if spec.full_month else month_hours(month) / steps
                total += (cost - bases.total_cost) * scale
            lines.append(",".join([_fmt(wind), _fmt(loss), strategy,
                                   _fmt(total)]))
    return "\n".join(lines) + "\n"


def run_experiment(spec: ExperimentSpec) -> list:
    """Run one experiment spec; returns the list of files written."""
    spec = spec.resolved()
    spec.validate()
    model = build_model(spec.wind_capacity, spec.largest_loss, spec.seed)
    cfg = TreeConfig(gap_tol=spec.gap, time_limit=spec.time_limit)
    if spec.full_month:
        cfg = replace(cfg, steps_per_month=None)
    reporter = _Reporter(os.path.join(spec.out_dir, spec.scenario))
    try:
        baseline = run_energy_only(model, spec.months, cfg)
        if spec.strategy == "unlinked":
            run = run_unlinked(model, spec.months,
                               efr_volume=_efr_volume(spec.efr_mode),
                               cfg=cfg, energy_only=baseline)
        else:
            run = run_cooptimized(model, spec.months, cfg,
                                  efr_volume=_efr_volume(spec.efr_mode))
        rows = _month_rows(spec, run, baseline)
        reporter.write("hourly.csv", _hourly_csv(run))
        reporter.write("energy_only_hourly.csv", _hourly_csv(baseline))
        reporter.write("monthly.csv", _monthly_csv(rows))
        reporter.write("annual.json", _annual_json(spec, rows))
        _trajectory_csvs(spec, model, run, reporter)
        if spec.sensitivity_grid:
            reporter.write("sensitivity.csv", _sensitivity_csv(spec, cfg))
    except Exception:
        reporter.discard()
        raise
    return reporter.written


def _read_monthly(path: str):
    p = os.path.join(path, "monthly.csv") if os.path.isdir(path) else path
    with open(p) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    cols = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        rows.append(dict(zip(cols, ln.split(","))))
    return rows


def compare_runs(path_a: str, path_b: str) -> dict:
    """Month-by-month and annual cost deltas between two run reports.

    Each path is a run output directory (or its monthly.csv).  Deltas are
    a minus b; the frequency-service change is relative to b.
    """
    a_rows = _read_monthly(path_a)
    b_rows = _read_monthly(path_b)
    a_by_month = {r["month"]: r for r in a_rows}
    b_by_month = {r["month"]: r for r in b_rows}
    if sorted(a_by_month) != sorted(b_by_month):
        raise MismatchedCoverageError(
            f"months differ: {sorted(a_by_month)} vs {sorted(b_by_month)}")
    months = sorted(a_by_month, key=int)
    per_month = []
    for m in months:
        a, b = a_by_month[m], b_by_month[m]
        if a["steps"] != b["steps"]:
            raise MismatchedCoverageError(
                f"month {m}: step counts differ ({a['steps']} vs {b['steps']})")
        fs_a = float(a["freq_service_cost_scaled"])
        fs_b = float(b["freq_service_cost_scaled"])
        per_month.append({
            "month": int(m),
            "strategy_cost_delta": float(a["strategy_cost_scaled"])
            - float(b["strategy_cost_scaled"]),
            "freq_service_cost_delta": fs_a - fs_b,
            "freq_service_cost_pct_change":
                (fs_a - fs_b) / abs(fs_b) * 100.0 if fs_b else float("inf")
                if fs_a else 0.0,
        })
    annual = {
        "strategy_cost_delta": sum(r["strategy_cost_delta"]
                                   for r in per_month),
        "freq_service_cost_delta": sum(r["freq_service_cost_delta"]
                                       for r in per_month),
    }
    return {"a": path_a, "b": path_b, "per_month": per_month,
            "annual": annual}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fsuc",
        description="Frequency-secured unit-commitment experiments "
                    "(GB current/future system, unlinked vs co-optimized "
                    "response procurement).")
    ap.add_argument("--scenario", choices=[*SCENARIOS, "custom"],
                    help="named scenario, or 'custom' with explicit "
                         "--wind-capacity-mw/--largest-loss-mw")
    ap.add_argument("--months", default="1-12",
                    help="months to run, e.g. '1', '1,2,7' or '1-3'")
    ap.add_argument("--wind-capacity-mw", type=float, default=None)
    ap.add_argument("--largest-loss-mw", type=float, default=None)
    ap.add_argument("--efr", default="fixed-200",
                    choices=["none", "fixed-200", "optimized"],
                    help="EFR procurement mode")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--sensitivity-grid", action="store_true",
                    help="also emit the wind x loss frequency-service "
                         "cost table")
    ap.add_argument("--full-month", action="store_true",
                    help="run full months instead of one representative "
                         "week per month")
    ap.add_argument("--out", default=None,
                    help=f"output directory (default ${OUT_ENV_VAR} or cwd)")
    ap.add_argument("--gap", type=float, default=1e-3,
                    help="MIP relative gap tolerance")
    ap.add_argument("--time-limit", type=float, default=None,
                    help="per-solve wall-clock limit in seconds")
    ap.add_argument("--compare", nargs=2, metavar=("RUN_A", "RUN_B"),
                    help="compare two run outputs instead of running")
    return ap


def _parse_months(text: str) -> tuple:
    months = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            months.extend(range(int(lo), int(hi) + 1))
        elif part:
            months.append(int(part))
    return tuple(dict.fromkeys(months))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.compare:
            report = compare_runs(*args.compare)
            print(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK
        if not args.scenario:
            raise ConfigError("--scenario is required (or use --compare)")
        out_dir = args.out or os.environ.get(OUT_ENV_VAR) or "."
        spec = ExperimentSpec(
            scenario=args.scenario, months=_parse_months(args.months),
            wind_capacity=args.wind_capacity_mw,
            largest_loss=args.largest_loss_mw, efr_mode=args.efr,
            seed=args.seed, out_dir=out_dir, gap=args.gap,
            time_limit=args.time_limit, full_month=args.full_month,
            sensitivity_grid=args.sensitivity_grid)
        written = run_experiment(spec)
    except (ConfigError, MismatchedCoverageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # solver or pipeline failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
