"""Static system data: thermal fleets, storage, frequency limits, time series.

Internal units are MW, MWh, hours, seconds and GBP throughout; system
inertia is carried as MW*s (display code may convert to GW*s).
"""
from __future__ import annotations

import calendar
import csv
import io
from dataclasses import dataclass, field, asdict

import numpy as np
import yaml

HOURS_PER_YEAR = 8760
MONTHS = tuple(range(1, 13))

# Relative demand level per month (January = 1.0); an artifact choice,
# loosely shaped like a northern-hemisphere winter-peaking system.
SEASONAL_DEMAND = {
    1: 1.00, 2: 0.97, 3: 0.92, 4: 0.85, 5: 0.80, 6: 0.76,
    7: 0.75, 8: 0.76, 9: 0.81, 10: 0.88, 11: 0.94, 12: 0.99,
}


class ConfigError(ValueError):
    """Malformed configuration text."""


class ValidationError(ValueError):
    """A model invariant is violated; message names the offending field."""


class MissingSeriesError(ConfigError):
    """A referenced time-series file does not exist or cannot be read."""


@dataclass(frozen=True)
class ThermalClass:
    """One aggregated generator technology (a fleet of identical units)."""

    name: str
    unit_count: int
    rated_power: float          # MW per unit
    min_stable_gen: float       # MW per unit
    no_load_cost: float         # GBP/h per online unit
    marginal_cost: float        # GBP/MWh
    startup_cost: float         # GBP per start
    startup_time: int           # hours of notice before a unit generates
    min_up: int                 # hours
    min_down: int               # hours
    inertia_const: float        # seconds
    max_response: float         # MW of PFR per online unit
    response_slope: float       # fraction of headroom deliverable as PFR

    @property
    def must_run(self) -> bool:
        # A class with no dispatch range (min stable == rated) is inflexible
        # and treated as always online, e.g. the nuclear fleet.
        return self.unit_count > 0 and self.min_stable_gen == self.rated_power

    def validate(self, where: str = "") -> None:
        p = where or self.name
        if self.unit_count < 0:
            raise ValidationError(f"{p}.unit_count: must be >= 0")
        if not self.rated_power > 0:
            raise ValidationError(f"{p}.rated_power: must be > 0")
        if not 0 < self.min_stable_gen <= self.rated_power:
            raise ValidationError(
                f"{p}.min_stable_gen: must satisfy 0 < min_stable_gen <= rated_power")
        for fld in ("no_load_cost", "marginal_cost", "startup_cost"):
            if getattr(self, fld) < 0:
                raise ValidationError(f"{p}.{fld}: must be >= 0")
        for fld in ("startup_time", "min_up", "min_down"):
            if getattr(self, fld) < 0:
                raise ValidationError(f"{p}.{fld}: must be >= 0")
        if self.inertia_const < 0:
            raise ValidationError(f"{p}.inertia_const: must be >= 0")
        if self.max_response > self.rated_power:
            raise ValidationError(f"{p}.max_response: must be <= rated_power")
        if not 0 <= self.response_slope <= 1:
            raise ValidationError(f"{p}.response_slope: must be in [0, 1]")


@dataclass(frozen=True)
class StorageUnit:
    name: str
    power_cap: float        # MW (charge and discharge limit)
    energy_cap: float       # MWh
    round_trip_eff: float   # fraction in (0, 1]
    efr_capacity: float     # MW reservable for EFR (0 if not a provider)

    def validate(self, where: str = "") -> None:
        p = where or self.name
        if not self.energy_cap > 0:
            raise ValidationError(f"{p}.energy_cap: must be > 0")
        if self.power_cap < 0:
            raise ValidationError(f"{p}.power_cap: must be >= 0")
        if not 0 < self.round_trip_eff <= 1:
            raise ValidationError(f"{p}.round_trip_eff: must be in (0, 1]")
        if not 0 <= self.efr_capacity <= self.power_cap:
            raise ValidationError(f"{p}.efr_capacity: must be in [0, power_cap]")


@dataclass(frozen=True)
class FrequencyParams:
    """Post-fault security parameters."""

    f0: float            # Hz, nominal frequency
    rocof_max: float     # Hz/s
    delta_f_max: float   # Hz, max admissible nadir deviation
    t_pfr: float         # s, PFR full-delivery time
    t_efr: float         # s, EFR full-delivery time
    largest_loss: float  # MW, biggest single infeed to secure against

    def validate(self, where: str = "frequency") -> None:
        p = where
        for fld in ("f0", "rocof_max", "delta_f_max", "t_pfr", "t_efr"):
            if not getattr(self, fld) > 0:
                raise ValidationError(f"{p}.{fld}: must be > 0")
        if self.largest_loss < 0:
            raise ValidationError(f"{p}.largest_loss: must be >= 0")
        if not self.t_efr < self.t_pfr:
            raise ValidationError(f"{p}.t_efr: must be < t_pfr")


@dataclass(frozen=True)
class SystemModel:
    """Immutable snapshot of all static system data plus hourly series."""

    thermal_classes: tuple[ThermalClass, ...]
    storage: tuple[StorageUnit, ...]
    freq: FrequencyParams
    wind_capacity: float                 # MW
    voll: float                          # GBP/MWh shed
    demand_series: np.ndarray            # MW, hourly
    wind_cf_series: np.ndarray           # capacity factor in [0, 1], hourly

    def validate(self) -> None:
        for i, tc in enumerate(self.thermal_classes):
            tc.validate(f"thermal_classes[{i}]")
        for i, su in enumerate(self.storage):
            su.validate(f"storage[{i}]")
        self.freq.validate()
        if self.wind_capacity < 0:
            raise ValidationError("wind_capacity: must be >= 0")
        if self.voll < 0:
            raise ValidationError("voll: must be >= 0")
        if len(self.demand_series) != len(self.wind_cf_series):
            raise ValidationError("series: demand and wind_cf lengths differ")
        if len(self.demand_series) and float(np.min(self.demand_series)) < 0:
            raise ValidationError("demand_series: values must be >= 0")
        if len(self.wind_cf_series):
            lo, hi = float(np.min(self.wind_cf_series)), float(np.max(self.wind_cf_series))
            if lo < 0 or hi > 1:
                raise ValidationError("wind_cf_series: values must be in [0, 1]")

    @property
    def horizon_hours(self) -> int:
        return len(self.demand_series)

    def demand_at(self, hour: int) -> float:
        return float(self.demand_series[hour % len(self.demand_series)])

    def wind_power_at(self, hour: int) -> float:
        return float(self.wind_cf_series[hour % len(self.wind_cf_series)]) * self.wind_capacity


def month_start_hour(month: int) -> int:
    """Hour-of-year at which a calendar month starts (non-leap year)."""
    return 24 * sum(calendar.monthrange(2001, m)[1] for m in range(1, month))


def month_hours(month: int) -> int:
    return 24 * calendar.monthrange(2001, month)[1]


# ---------------------------------------------------------------------------
# Synthetic profiles
# ---------------------------------------------------------------------------

def synth_profiles(seed: int, months, mean_demand: float, wind_capacity: float,
                   wind_cf_mean: float = 0.35, wind_ar_rho: float = 0.97,
                   wind_ar_sigma: float = 0.05, pad_hours: int = 0):
    """Deterministic synthetic demand (MW) and wind capacity-factor series.

    Demand is a daily sinusoid around ``mean_demand`` scaled by a monthly
    seasonal factor (January = 1.0) with small multiplicative noise, then
    renormalised so each month's mean hits its target exactly.  Wind capacity
    factors follow an AR(1) process clipped to [0, 1].  The same RNG stream
    is derived from (seed, month), so any subset of months reproduces the
    same values as a full-year run.
    """
    if not mean_demand > 0:
        raise ValueError("mean_demand must be > 0")
    demand_parts, cf_parts = [], []
    months = list(months)
    for k, month in enumerate(months):
        rng = np.random.default_rng([int(seed), int(month)])
        n = month_hours(month) + (pad_hours if k == len(months) - 1 else 0)
        hours = np.arange(n)
        daily = 1.0 + 0.18 * np.sin(2 * np.pi * (hours % 24 - 9) / 24.0)
        noise = 1.0 + 0.03 * rng.standard_normal(n)
        demand = mean_demand * SEASONAL_DEMAND[month] * daily * np.clip(noise, 0.8, 1.2)
        core = demand[:month_hours(month)]
        demand *= mean_demand * SEASONAL_DEMAND[month] / core.mean()
        demand_parts.append(np.maximum(demand, 0.0))

        if wind_capacity > 0:
            x = np.empty(n)
            x[0] = wind_ar_sigma * rng.standard_normal() / np.sqrt(1 - wind_ar_rho ** 2)
            eps = rng.standard_normal(n)
            for t in range(1, n):
                x[t] = wind_ar_rho * x[t - 1] + wind_ar_sigma * eps[t]
            cf = np.clip(wind_cf_mean + x, 0.0, 1.0)
        else:
            cf = np.zeros(n)
        cf_parts.append(cf)
    return np.concatenate(demand_parts) if demand_parts else np.array([]), \
        np.concatenate(cf_parts) if cf_parts else np.array([])


# ---------------------------------------------------------------------------
# Config loading / serialization
# ---------------------------------------------------------------------------

_THERMAL_FIELDS = [f for f in ThermalClass.__dataclass_fields__]
_STORAGE_FIELDS = [f for f in StorageUnit.__dataclass_fields__]
_FREQ_FIELDS = [f for f in FrequencyParams.__dataclass_fields__]

_INT_THERMAL = {"unit_count", "startup_time", "min_up", "min_down"}


def _build(cls, raw: dict, fields: list, where: str, int_fields=()):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    unknown = set(raw) - set(fields)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [f for f in fields if f not in raw]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    kwargs = {}
    for f in fields:
        v = raw[f]
        if f == "name":
            kwargs[f] = str(v)
        elif f in int_fields:
            kwargs[f] = int(v)
        else:
            try:
                kwargs[f] = float(v)
            except (TypeError, ValueError):
                raise ConfigError(f"{where}.{f}: not a number: {v!r}")
    return cls(**kwargs)


def _read_series_csv(path: str) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["hour", "value"]:
                raise ConfigError(f"{path}: expected CSV header 'hour,value'")
            values = [float(row[1]) for row in reader if row]
    except OSError as e:
        raise MissingSeriesError(f"{path}: {e.strerror or e}") from e
    return np.asarray(values)


def load_system(config_text: str) -> SystemModel:
    """Parse and validate a system configuration document (YAML)."""
    try:
        raw = yaml.safe_load(config_text)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config: {e}") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a mapping")

    thermal = tuple(
        _build(ThermalClass, tc, _THERMAL_FIELDS, f"thermal_classes[{i}]", _INT_THERMAL)
        for i, tc in enumerate(raw.get("thermal_classes", []) or []))
    storage = tuple(
        _build(StorageUnit, su, _STORAGE_FIELDS, f"storage[{i}]")
        for i, su in enumerate(raw.get("storage", []) or []))
    freq = _build(FrequencyParams, raw.get("frequency", {}), _FREQ_FIELDS, "frequency")
    wind_capacity = float(raw.get("wind_capacity", 0.0))
    voll = float(raw.get("voll", 30000.0))

    series = raw.get("series", {}) or {}
    source = series.get("source", "inline")
    if source == "inline":
        demand = np.asarray([float(v) for v in series.get("demand", [])])
        wind_cf = np.asarray([float(v) for v in series.get("wind_cf", [])])
    elif source == "files":
        demand = _read_series_csv(series["demand_file"])
        wind_cf = _read_series_csv(series["wind_cf_file"])
    elif source == "synthetic":
        demand, wind_cf = synth_profiles(
            seed=int(series.get("seed", 0)),
            months=series.get("months", MONTHS),
            mean_demand=float(series.get("mean_demand", 43000.0)),
            wind_capacity=wind_capacity)
    else:
        raise ConfigError(f"series.source: unknown source {source!r}")

    model = SystemModel(
        thermal_classes=thermal, storage=storage, freq=freq,
        wind_capacity=wind_capacity, voll=voll,
        demand_series=demand, wind_cf_series=wind_cf)
    model.validate()
    return model


def dump_system(model: SystemModel) -> str:
    """Serialize a SystemModel to config text; load_system round-trips it."""
    doc = {
        "thermal_classes": [asdict(tc) for tc in model.thermal_classes],
        "storage": [asdict(su) for su in model.storage],
        "frequency": asdict(model.freq),
        "wind_capacity": model.wind_capacity,
        "voll": model.voll,
        "series": {
            "source": "inline",
            "demand": [float(v) for v in model.demand_series],
            "wind_cf": [float(v) for v in model.wind_cf_series],
        },
    }
    out = io.StringIO()
    yaml.safe_dump(doc, out, sort_keys=True, default_flow_style=None)
    return out.getvalue()
