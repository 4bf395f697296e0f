"""Deterministic discrete-event simulation of a scenario.

Each arrival is orchestrated greedily against the current residual state.
An accepted task holds its node resources and slice bandwidth from the
moment it is committed until it completes; a deferred task therefore keeps
its reservation while it waits for its start.
"""

from __future__ import annotations

import heapq
import logging
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional

from orchsim.energy import PowerProfile, update_profile
from orchsim.errors import Infeasible, NoFeasibleNode
from orchsim.model import NanoService, NodeState, admit, release
from orchsim.oracle import OracleDecision, compare, exhaustive_best
from orchsim.scenario import Scenario
from orchsim.scheduling import DeploymentPlan, Objective, deployment_cost, orchestrate
from orchsim.slicing import NetworkSlice, SliceClass, admit_bandwidth, classify_slice

__all__ = [
    "EventKind",
    "Event",
    "TaskRecord",
    "OracleRecord",
    "SimulationReport",
    "Observation",
    "observe_and_update",
    "run",
]

log = logging.getLogger(__name__)


class EventKind(Enum):
    TASK_ARRIVAL = "TaskArrival"
    DEFERRED_START = "DeferredStart"
    TRANSFER_COMPLETE = "TransferComplete"
    TASK_COMPLETE = "TaskComplete"


@dataclass(frozen=True, order=True)
class Event:
    time: float
    seq: int
    kind: EventKind = field(compare=False)
    task_id: str = field(compare=False)


@dataclass(frozen=True)
class TaskRecord:
    task_id: str
    node_id: Optional[str]
    slice_class: SliceClass
    start: Optional[float]
    finish: Optional[float]
    energy_j: float
    cost_units: float
    deadline_met: bool
    rejected: bool
    predicted_energy_j: float = 0.0
    predicted_cost_units: float = 0.0


@dataclass(frozen=True)
class OracleRecord:
    task_id: str
    time: float
    plan: Optional[DeploymentPlan]
    oracle: OracleDecision
    match: bool


@dataclass
class SimulationReport:
    objective: Objective
    seed: int
    records: list[TaskRecord]
    total_task_energy_j: float
    total_predicted_task_energy_j: float
    total_idle_energy_j: float
    total_cost_units: float
    deadline_miss_count: int
    rejection_count: int
    utilization: dict[str, float]
    peak_bandwidth: dict[SliceClass, float]
    oracle_records: list[OracleRecord] = field(default_factory=list)

    def record(self, task_id: str) -> TaskRecord:
        for r in self.records:
            if r.task_id == task_id:
                return r
        raise KeyError(task_id)


@dataclass(frozen=True, slots=True)
class Observation:
    """A measured peak-power sample for one node, taken at a task completion."""

    node_id: str
    p_max: float


def observe_and_update(
    observations: Iterable[Observation], profiles: Mapping[str, PowerProfile], alpha: float
) -> dict[str, PowerProfile]:
    """Fold observations into the profiles, in the order given."""
    out = dict(profiles)
    for obs in observations:
        prof = out[obs.node_id]
        out[obs.node_id] = update_profile(prof, max(obs.p_max, prof.p_idle_hat), alpha)
    return out


@dataclass
class _SliceLedger:
    """Slice bandwidth with per-task grants, kept as a left fold like NodeState."""

    slice: NetworkSlice
    grants: dict[str, float] = field(default_factory=dict)
    peak: float = 0.0

    def admit(self, task_id: str, bw: float) -> None:
        self.slice = admit_bandwidth(self.slice, bw)
        self.grants[task_id] = bw
        self.peak = max(self.peak, self.slice.allocated_bw)

    def release(self, task_id: str) -> None:
        del self.grants[task_id]
        total = self._base
        for bw in self.grants.values():
            total += bw
        self.slice = replace(self.slice, allocated_bw=total)

    def __post_init__(self) -> None:
        # bandwidth already allocated in the scenario is never released
        self._base = self.slice.allocated_bw
        self.peak = self._base


@dataclass
class _Active:
    task: NanoService
    plan: DeploymentPlan
    slice_class: SliceClass


AuditHook = Callable[[float, Mapping[str, NodeState], Mapping[SliceClass, NetworkSlice]], None]


def _busy_time(intervals: list[tuple[float, float]]) -> float:
    busy = 0.0
    cur_start = cur_end = None
    for s, e in sorted(intervals):
        if cur_end is None or s > cur_end:
            if cur_end is not None:
                busy += cur_end - cur_start
            cur_start, cur_end = s, e
        else:
            cur_end = max(cur_end, e)
    if cur_end is not None:
        busy += cur_end - cur_start
    return busy


def run(
    scenario: Scenario,
    seed: int = 0,
    objective: Objective = Objective.ENERGY,
    *,
    oracle: bool = False,
    audit: Optional[AuditHook] = None,
) -> SimulationReport:
    """Simulate ``scenario`` to completion.

    ``seed`` only drives the optional power-observation noise; identical
    inputs give identical reports. With ``oracle`` set, every arrival is
    also solved by exhaustive search on the same residual state and the
    comparison is recorded. ``audit`` is called after every event with the
    current node and slice states.
    """
    rng = random.Random(seed)
    forecast = scenario.forecast
    thresholds = scenario.thresholds
    tasks = {t.id: t for t in scenario.tasks}
    node_ids = [n.id for n in scenario.nodes]
    states: dict[str, NodeState] = {n.id: NodeState.empty(n) for n in scenario.nodes}
    ledgers = {s.slice_class: _SliceLedger(s) for s in scenario.slices}
    profiles = {n.id: PowerProfile.of(n) for n in scenario.nodes}
    nodes = {n.id: n for n in scenario.nodes}

    queue: list[Event] = []
    seq = 0

    def push(time: float, kind: EventKind, task_id: str) -> None:
        nonlocal seq
        heapq.heappush(queue, Event(time, seq, kind, task_id))
        seq += 1

    for t in sorted(scenario.tasks, key=lambda t: t.arrival):
        push(t.arrival, EventKind.TASK_ARRIVAL, t.id)

    records: dict[str, TaskRecord] = {}
    active: dict[str, _Active] = {}
    intervals: dict[str, list[tuple[float, float]]] = {nid: [] for nid in node_ids}
    oracle_records: list[OracleRecord] = []

    while queue:
        ev = heapq.heappop(queue)
        now = ev.time
        task = tasks[ev.task_id]

        if ev.kind is EventKind.TASK_ARRIVAL:
            cls = classify_slice(task.comm, thresholds)
            state_list = [states[nid] for nid in node_ids]
            slice_map = {c: led.slice for c, led in ledgers.items()}
            try:
                plan: Optional[DeploymentPlan] = orchestrate(
                    task, state_list, slice_map, thresholds, forecast, now, objective, profiles
                )
            except (NoFeasibleNode, Infeasible) as exc:
                log.info("t=%s reject %s: %s", now, task.id, exc)
                plan = None
            if oracle:
                ref = exhaustive_best(task, state_list, slice_map, thresholds, forecast, now, objective, profiles)
                oracle_records.append(OracleRecord(task.id, now, plan, ref, compare(plan, ref)))
            if plan is None:
                records[task.id] = TaskRecord(task.id, None, cls, None, None, 0.0, 0.0, False, True)
            else:
                d = plan.decision
                states[d.node_id] = admit(task, states[d.node_id])
                ledgers[cls].admit(task.id, d.granted_bw)
                active[task.id] = _Active(task, plan, cls)
                log.debug("t=%s commit %s -> %s start=%s", now, task.id, d.node_id, plan.start)
                if plan.start > now:
                    push(plan.start, EventKind.DEFERRED_START, task.id)
                else:
                    push(plan.start + d.timing.t_net, EventKind.TRANSFER_COMPLETE, task.id)
                    push(plan.predicted_finish, EventKind.TASK_COMPLETE, task.id)

        elif ev.kind is EventKind.DEFERRED_START:
            a = active[task.id]
            push(now + a.plan.decision.timing.t_net, EventKind.TRANSFER_COMPLETE, task.id)
            push(a.plan.predicted_finish, EventKind.TASK_COMPLETE, task.id)

        elif ev.kind is EventKind.TRANSFER_COMPLETE:
            pass  # processing begins; nothing to reallocate without contention

        else:
            a = active.pop(task.id)
            d = a.plan.decision
            node = nodes[d.node_id]
            states[d.node_id] = release(task.id, states[d.node_id])
            ledgers[a.slice_class].release(task.id)
            intervals[d.node_id].append((a.plan.start, now))

            # ground-truth power for accounting; predictions used the profile
            true_power = (node.p_max - node.p_idle) * (task.demand.cpu / node.capacity.cpu) if node.capacity.cpu else 0.0
            energy = true_power * d.timing.t_proc + d.transfer_energy
            cost = deployment_cost(forecast, a.plan.start, d.timing, true_power, d.transfer_energy)
            records[task.id] = TaskRecord(
                task.id,
                d.node_id,
                a.slice_class,
                a.plan.start,
                now,
                energy,
                cost,
                now <= task.deadline,
                False,
                d.predicted_energy,
                a.plan.predicted_cost,
            )

            observed = node.p_max
            if scenario.observation_noise > 0:
                observed *= 1.0 + scenario.observation_noise * rng.uniform(-1.0, 1.0)
            profiles = observe_and_update([Observation(node.id, observed)], profiles, scenario.profile_alpha)

        if audit is not None:
            audit(now, states, {c: led.slice for c, led in ledgers.items()})

    ordered = [records[t.id] for t in scenario.tasks]
    horizon = forecast.horizon_end - forecast.origin
    return SimulationReport(
        objective=objective,
        seed=seed,
        records=ordered,
        total_task_energy_j=math.fsum(r.energy_j for r in ordered),
        total_predicted_task_energy_j=math.fsum(r.predicted_energy_j for r in ordered),
        total_idle_energy_j=math.fsum(n.p_idle * horizon for n in scenario.nodes),
        total_cost_units=math.fsum(r.cost_units for r in ordered),
        deadline_miss_count=sum(1 for r in ordered if not r.rejected and not r.deadline_met),
        rejection_count=sum(1 for r in ordered if r.rejected),
        utilization={nid: _busy_time(intervals[nid]) / horizon for nid in node_ids},
        peak_bandwidth={c: ledgers[c].peak for c in SliceClass},
        oracle_records=oracle_records,
    )
