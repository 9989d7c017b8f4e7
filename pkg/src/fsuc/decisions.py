"""Decision records shared by the scenario-tree loop and the formulation."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ClassDecision:
    """Commitment and dispatch of one thermal class at one node."""

    n_up: int        # units online
    n_sg: int        # cost-bearing starts (notifications for lagged classes)
    power: float     # MW
    pfr: float       # MW of primary response
    n_started: int = 0  # units actually coming online at this node
    n_shut: int = 0     # units shutting down at this node


@dataclass(frozen=True)
class StorageDecision:
    charge: float     # MW
    discharge: float  # MW
    soc: float        # MWh at end of interval
    efr: float        # MW of fast response


@dataclass(frozen=True)
class NodeDecision:
    thermal: dict          # class name -> ClassDecision
    storage: dict          # unit name -> StorageDecision
    wind_used: float       # MW
    wind_curtailed: float  # MW
    load_shed: float       # MW
    overgen: float = 0.0   # MW spilled from must-run excess


@dataclass(frozen=True)
class CommittedHour:
    hour: int
    decision: NodeDecision
    cost_startup: float
    cost_no_load: float
    cost_marginal: float
    cost_shed: float

    @property
    def cost_total(self) -> float:
        return (self.cost_startup + self.cost_no_load
                + self.cost_marginal + self.cost_shed)


@dataclass
class Schedule:
    """Committed root decisions from a rolling-planning run."""

    hours: list = field(default_factory=list)  # list[CommittedHour]

    def append(self, hour: CommittedHour) -> None:
        self.hours.append(hour)

    @property
    def total_cost(self) -> float:
        return sum(h.cost_total for h in self.hours)

    def breakdown(self) -> dict:
        return {
            "startup": sum(h.cost_startup for h in self.hours),
            "no_load": sum(h.cost_no_load for h in self.hours),
            "marginal": sum(h.cost_marginal for h in self.hours),
            "shed_penalty": sum(h.cost_shed for h in self.hours),
        }
