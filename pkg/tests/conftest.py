"""Shared fixtures and oracles for the test suite.

The tiny unit-commitment generator below builds small clustered-commitment
instances with binary online variables, dispatch limits, start-up costs and
a load-shed / overgeneration slack; ``brute_force_uc`` enumerates every
commitment pattern and dispatches each one analytically (merit order with
minimum-generation floors), providing a search-free optimum to compare the
solver against.
"""
import itertools
import math

import numpy as np
import pytest

from fsuc.mip import MipProblem
from fsuc.system import FrequencyParams


def fp_future() -> FrequencyParams:
    return FrequencyParams(f0=50.0, rocof_max=0.5, delta_f_max=0.8,
                           t_pfr=10.0, t_efr=1.0, largest_loss=1800.0)


def fp_current() -> FrequencyParams:
    return FrequencyParams(f0=50.0, rocof_max=0.5, delta_f_max=0.8,
                           t_pfr=10.0, t_efr=1.0, largest_loss=1320.0)


@pytest.fixture(scope="session")
def fp_gb_future():
    return fp_future()


@pytest.fixture(scope="session")
def fp_gb_current():
    return fp_current()


# ---------------------------------------------------------------------------
# Tiny unit-commitment instances with an enumeration oracle
# ---------------------------------------------------------------------------

SPILL_COST = 5.0


def make_tiny_uc(rng: np.random.Generator, max_ints: int = 12):
    """Random clustered-commitment instance with <= ``max_ints`` binaries.

    Returns (problem, data) where ``data`` carries everything the
    brute-force oracle needs.
    """
    while True:
        n_gen = int(rng.integers(2, 5))
        n_t = int(rng.integers(2, 4))
        if n_gen * n_t <= max_ints:
            break
    cmax = rng.uniform(50.0, 200.0, n_gen)
    cmin = rng.uniform(0.2, 0.6, n_gen) * cmax
    mc = rng.uniform(10.0, 100.0, n_gen)
    nl = rng.uniform(0.0, 500.0, n_gen)
    sc = rng.uniform(0.0, 1000.0, n_gen)
    u0 = rng.integers(0, 2, n_gen)
    demand = rng.uniform(0.3, 0.9, n_t) * float(np.sum(cmax))
    voll = 1000.0

    p = MipProblem()
    obj = {}
    for t in range(n_t):
        for g in range(n_gen):
            p.add_variable(f"u[{g},{t}]", 0, 1, integer=True)
            p.add_variable(f"s[{g},{t}]", 0.0, 1.0)
            p.add_variable(f"p[{g},{t}]", 0.0, float(cmax[g]))
            obj[f"u[{g},{t}]"] = float(nl[g])
            obj[f"s[{g},{t}]"] = float(sc[g])
            obj[f"p[{g},{t}]"] = float(mc[g])
        p.add_variable(f"shed[{t}]", 0.0, float(demand[t]))
        p.add_variable(f"spill[{t}]", 0.0, float(np.sum(cmin)))
        obj[f"shed[{t}]"] = voll
        obj[f"spill[{t}]"] = SPILL_COST
    for t in range(n_t):
        bal = {f"p[{g},{t}]": 1.0 for g in range(n_gen)}
        bal[f"shed[{t}]"] = 1.0
        bal[f"spill[{t}]"] = -1.0
        p.add_row(f"bal[{t}]", bal, "=", float(demand[t]))
        for g in range(n_gen):
            p.add_row(f"pmin[{g},{t}]",
                      {f"p[{g},{t}]": 1.0, f"u[{g},{t}]": -float(cmin[g])},
                      ">=", 0.0)
            p.add_row(f"pmax[{g},{t}]",
                      {f"p[{g},{t}]": 1.0, f"u[{g},{t}]": -float(cmax[g])},
                      "<=", 0.0)
            start = {f"s[{g},{t}]": 1.0, f"u[{g},{t}]": -1.0}
            if t == 0:
                p.add_row(f"start[{g},{t}]", start, ">=", -float(u0[g]))
            else:
                start[f"u[{g},{t - 1}]"] = 1.0
                p.add_row(f"start[{g},{t}]", start, ">=", 0.0)
    p.set_objective(obj)
    data = dict(n_gen=n_gen, n_t=n_t, cmax=cmax, cmin=cmin, mc=mc, nl=nl,
                sc=sc, u0=u0, demand=demand, voll=voll)
    return p, data


def _dispatch_cost(u, data, t):
    """Exact economic dispatch for one period at a fixed commitment."""
    on = [g for g in range(data["n_gen"]) if u[g]]
    base = sum(data["cmin"][g] for g in on)
    cost = sum(data["mc"][g] * data["cmin"][g] for g in on)
    residual = data["demand"][t] - base
    if residual < 0:
        return cost + SPILL_COST * (-residual)
    for g in sorted(on, key=lambda g: data["mc"][g]):
        take = min(residual, data["cmax"][g] - data["cmin"][g])
        cost += data["mc"][g] * take
        residual -= take
        if residual <= 1e-12:
            break
    return cost + data["voll"] * max(residual, 0.0)


def brute_force_uc(data) -> float:
    """Minimum cost over all commitment patterns (independent of the solver)."""
    n_gen, n_t = data["n_gen"], data["n_t"]
    best = math.inf
    for flat in itertools.product((0, 1), repeat=n_gen * n_t):
        u = np.asarray(flat).reshape(n_t, n_gen)
        cost = 0.0
        prev = data["u0"]
        for t in range(n_t):
            cost += sum(data["nl"][g] + 0.0 for g in range(n_gen) if u[t][g])
            cost += sum(data["sc"][g] for g in range(n_gen)
                        if u[t][g] and not prev[g])
            cost += _dispatch_cost(u[t], data, t)
            prev = u[t]
        best = min(best, cost)
    return best


# ---------------------------------------------------------------------------
# Toy system: desk-scale fleet with a full synthetic year
# ---------------------------------------------------------------------------

def toy_model():
    """Small fleet whose frequency constraints actually bite.

    Largest loss is one 30 MW must-run unit; the RoCoF floor (1500 MW*s)
    exceeds what the must-run base provides, so co-optimized runs must keep
    extra flexible units online.
    """
    from fsuc.system import StorageUnit, SystemModel, ThermalClass, synth_profiles

    base = ThermalClass("base", 2, 30.0, 30.0, 0.0, 5.0, 0.0,
                        0, 0, 0, 9.0, 0.0, 0.0)
    flex = ThermalClass("flex", 10, 40.0, 10.0, 50.0, 30.0, 200.0,
                        0, 1, 1, 5.0, 10.0, 0.5)
    peak = ThermalClass("peak", 4, 20.0, 5.0, 20.0, 90.0, 0.0,
                        0, 0, 0, 4.0, 5.0, 0.5)
    battery = StorageUnit("battery", 20.0, 40.0, 0.9, 15.0)
    freq = FrequencyParams(50.0, 0.5, 0.8, 10.0, 1.0, 30.0)
    demand, wind_cf = synth_profiles(5, range(1, 13), 250.0, 100.0)
    return SystemModel((base, flex, peak), (battery,), freq,
                       100.0, 5000.0, demand, wind_cf)


@pytest.fixture(scope="session")
def toy():
    return toy_model()
