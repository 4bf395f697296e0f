"""Start-time selection under a price forecast and the joint orchestrate entry point.

Pricing model for a deployment started at ``s`` on a node with timing
``(t_net, t_proc)``: the transfer energy is drawn uniformly over
``[s, s + t_net)`` and the processing power over
``[s + t_net, s + t_total)``. Cost is therefore continuous and piecewise
linear in ``s``, with breakpoints where ``s``, ``s + t_net`` or
``s + t_total`` cross a slot boundary; evaluating those breakpoints plus
the window ends finds the exact minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

from orchsim.energy import EnergyPriceForecast, PowerProfile, execution_cost
from orchsim.errors import HorizonExceeded, Infeasible, NoFeasibleNode
from orchsim.model import NanoService, NodeState, TimingEstimate
from orchsim.placement import PlacementDecision, energy_key, feasible_decisions
from orchsim.slicing import NetworkSlice, SliceClass, SliceThresholds

__all__ = [
    "Objective",
    "DeploymentPlan",
    "latest_start",
    "deployment_cost",
    "candidate_starts",
    "select_start",
    "orchestrate",
]


class Objective(Enum):
    ENERGY = "energy"
    COST = "cost"


@dataclass(frozen=True, slots=True)
class DeploymentPlan:
    decision: PlacementDecision
    start: float
    predicted_finish: float
    predicted_cost: float

    @property
    def node_id(self) -> str:
        return self.decision.node_id

    def value(self, objective: Objective) -> float:
        if objective is Objective.ENERGY:
            return self.decision.predicted_energy
        return self.predicted_cost


def latest_start(task: NanoService, timing: TimingEstimate) -> float:
    ls = task.deadline - timing.t_total
    if ls < task.arrival:
        raise Infeasible(f"task {task.id!r} needs {timing.t_total}s but has {task.deadline - task.arrival}s")
    return ls


def deployment_cost(
    forecast: EnergyPriceForecast, start: float, timing: TimingEstimate, power: float, transfer_energy: float
) -> float:
    cost = execution_cost(forecast, start + timing.t_net, timing.t_proc, power)
    if transfer_energy > 0:
        cost += execution_cost(forecast, start, timing.t_net, transfer_energy / timing.t_net)
    return cost


def _by_deadline(start: float, timing: TimingEstimate, deadline: float) -> bool:
    return start + timing.t_total <= deadline


def _in_horizon(start: float, timing: TimingEstimate, horizon_end: float) -> bool:
    # the processing interval is priced from start + t_net, so check that form too
    return start + timing.t_total <= horizon_end and (start + timing.t_net) + timing.t_proc <= horizon_end


def _last_start_before(limit: float, timing: TimingEstimate, ok) -> float:
    # limit - t_total can round up; step down until the finish really fits
    s = limit - timing.t_total
    while not ok(s, timing, limit):
        s = math.nextafter(s, -math.inf)
    return s


def _window(task: NanoService, timing: TimingEstimate, forecast: EnergyPriceForecast, now: float) -> float:
    """Last admissible start, bounded by both deadline and forecast horizon."""
    if not _by_deadline(now, timing, task.deadline):
        raise Infeasible(f"task {task.id!r} can no longer meet its deadline at t={now}")
    if not _in_horizon(now, timing, forecast.horizon_end):
        raise HorizonExceeded(f"task {task.id!r} started at t={now} would finish after the forecast horizon")
    last = max(_last_start_before(task.deadline, timing, _by_deadline), now)
    end = max(_last_start_before(forecast.horizon_end, timing, _in_horizon), now)
    return min(last, end)


def candidate_starts(timing: TimingEstimate, forecast: EnergyPriceForecast, now: float, last: float) -> list[float]:
    """Sorted start times where the deployment cost can change slope."""
    found = {now, last}
    for b in forecast.starts[1:]:
        for c in (b, b - timing.t_net, b - timing.t_total):
            if now <= c <= last:
                found.add(c)
    return sorted(found)


def _best_start(
    task: NanoService, decision: PlacementDecision, forecast: EnergyPriceForecast, now: float
) -> tuple[float, float]:
    timing = decision.timing
    last = _window(task, timing, forecast, now)
    best = None
    for s in candidate_starts(timing, forecast, now, last):
        c = deployment_cost(forecast, s, timing, decision.power, decision.transfer_energy)
        if best is None or c < best[1]:  # strict: earliest start wins ties
            best = (s, c)
    return best


def select_start(task: NanoService, decision: PlacementDecision, forecast: EnergyPriceForecast, now: float) -> float:
    """Cheapest start in ``[now, latest_start]`` for a delay-tolerant task."""
    return _best_start(task, decision, forecast, now)[0]


def _plan_at_now(task: NanoService, decision: PlacementDecision, forecast: EnergyPriceForecast, now: float) -> DeploymentPlan:
    timing = decision.timing
    finish = now + timing.t_total
    if not _in_horizon(now, timing, forecast.horizon_end):
        raise HorizonExceeded(f"task {task.id!r} on {decision.node_id!r} would finish after the forecast horizon")
    cost = deployment_cost(forecast, now, timing, decision.power, decision.transfer_energy)
    return DeploymentPlan(decision, now, finish, cost)


def orchestrate(
    task: NanoService,
    nodes: Sequence[NodeState],
    slices: Mapping[SliceClass, NetworkSlice],
    thresholds: SliceThresholds,
    forecast: EnergyPriceForecast,
    now: float,
    objective: Objective = Objective.ENERGY,
    profiles: Optional[Mapping[str, PowerProfile]] = None,
) -> DeploymentPlan:
    """Place ``task`` and pick its start time.

    ENERGY starts at ``now`` on the minimum-energy node. COST searches
    every feasible (node, start) pair, deferring only delay-tolerant tasks,
    and breaks ties by earlier start, lower energy, tier, then node id.
    """
    candidates = feasible_decisions(task, nodes, slices, thresholds, now, profiles)
    if not candidates:
        raise NoFeasibleNode(f"no node can host task {task.id!r} at t={now}")

    if objective is Objective.ENERGY:
        return _plan_at_now(task, min(candidates, key=energy_key), forecast, now)

    best: Optional[tuple[tuple, DeploymentPlan]] = None
    horizon_hit = None
    for d in candidates:
        try:
            if task.comm.delay_tolerant:
                start, cost = _best_start(task, d, forecast, now)
                plan = DeploymentPlan(d, start, start + d.timing.t_total, cost)
            else:
                plan = _plan_at_now(task, d, forecast, now)
        except HorizonExceeded as exc:
            horizon_hit = exc
            continue
        key = (plan.predicted_cost, plan.start, d.predicted_energy, d.tier.rank, d.node_id)
        if best is None or key < best[0]:
            best = (key, plan)
    if best is None:
        raise horizon_hit
    return best[1]
