"""Frequency-secured stochastic unit commitment and procurement experiments."""

from .system import (FrequencyParams, StorageUnit, SystemModel, ThermalClass,
                     load_system, dump_system, synth_profiles)
from .frequency import (ServicePoint, FrequencyTrajectory, analytic_nadir,
                        check_nadir, check_qss, min_inertia_for_rocof,
                        min_pfr_for_nadir, simulate_post_fault)
from .tree import ErrorModel, ScenarioNode, ScenarioTree, build_tree, rolling_plan
from .formulation import FormulationOptions, build_suc, decode_solution, \
    node_cost, system_inertia
from .mip import LinExpr, MipProblem, Solution, export_interchange, solve
from .strategies import (ResponseRequirement, RunResult, TreeConfig,
                         compute_response_requirement, cost_of_frequency_services,
                         overprocurement_ratio, run_cooptimized, run_energy_only,
                         run_unlinked)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
