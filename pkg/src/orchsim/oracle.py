"""Exhaustive reference optimizer for small single-task instances.

Deliberately written as straight-line enumeration with its own feasibility
and candidate-start logic, sharing only the price integral with the
orchestrator, so the two can check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from orchsim.energy import EnergyPriceForecast, PowerProfile, execution_cost
from orchsim.errors import InstanceTooLarge
from orchsim.model import NanoService, NodeState
from orchsim.scheduling import DeploymentPlan, Objective
from orchsim.slicing import NetworkSlice, SliceClass, SliceThresholds

__all__ = ["OracleDecision", "exhaustive_best", "compare", "MAX_NODES", "MAX_SLOTS"]

MAX_NODES = 16
MAX_SLOTS = 64


@dataclass(frozen=True)
class OracleDecision:
    objective: Objective
    best_node_id: Optional[str]
    best_start: Optional[float]
    best_value: Optional[float]
    evaluated_count: int


def _step_down_until(s, ok):
    while not ok(s):
        s = math.nextafter(s, -math.inf)
    return s


def exhaustive_best(
    task: NanoService,
    nodes: Sequence[NodeState],
    slices: Mapping[SliceClass, NetworkSlice],
    thresholds: SliceThresholds,
    forecast: EnergyPriceForecast,
    now: float,
    objective: Objective,
    profiles: Optional[Mapping[str, PowerProfile]] = None,
) -> OracleDecision:
    if len(nodes) > MAX_NODES or len(forecast.slots) > MAX_SLOTS:
        raise InstanceTooLarge(
            f"{len(nodes)} nodes x {len(forecast.slots)} slots exceeds {MAX_NODES} x {MAX_SLOTS}"
        )

    comm = task.comm
    if comm.latency_req <= thresholds.urllc_latency_max:
        sl = slices[SliceClass.URLLC]
    elif comm.bandwidth_req >= thresholds.embb_bw_min:
        sl = slices[SliceClass.EMBB]
    else:
        sl = slices[SliceClass.MMTC]

    best_key = None
    best = (None, None, None)
    count = 0
    for st in nodes:
        node = st.node
        a, d, c = st.allocated, task.demand, node.capacity
        if not (
            a.cpu + d.cpu <= c.cpu
            and a.gpu + d.gpu <= c.gpu
            and a.memory + d.memory <= c.memory
            and a.storage + d.storage <= c.storage
        ):
            continue

        req = comm.bandwidth_req
        if sl.allocated_bw + req > sl.capacity_bw:
            continue
        bw = req
        if node.link_bw is not None:
            bw = min(bw, node.link_bw)
        if task.data_size > 0:
            if bw <= 0:
                continue
            t_net = node.rtt_to_end + task.data_size / bw
        else:
            t_net = node.rtt_to_end
        t_proc = task.workload / node.service_rate
        t_total = t_net + t_proc
        if now + t_total > task.deadline:
            continue
        if not comm.delay_tolerant and t_net > comm.latency_req:
            continue

        prof = profiles.get(node.id) if profiles else None
        if node.capacity.cpu == 0:
            power = 0.0
        elif prof is None:
            power = (node.p_max - node.p_idle) * (d.cpu / node.capacity.cpu)
        else:
            power = (prof.p_max_hat - prof.p_idle_hat) * (d.cpu / node.capacity.cpu)
        transfer = node.net_energy_coeff * task.data_size
        energy = power * t_proc + transfer

        if objective is Objective.ENERGY:
            count += 1
            key = (energy, t_total, node.tier.rank, node.id)
            if best_key is None or key < best_key:
                best_key, best = key, (node.id, now, energy)
            continue

        def fits_horizon(s):
            return s + t_total <= forecast.horizon_end and (s + t_net) + t_proc <= forecast.horizon_end

        if not fits_horizon(now):
            continue
        starts = {now}
        if comm.delay_tolerant:
            hi = min(
                max(_step_down_until(task.deadline - t_total, lambda s: s + t_total <= task.deadline), now),
                max(_step_down_until(forecast.horizon_end - t_total, fits_horizon), now),
            )
            starts.add(hi)
            for b in forecast.starts:
                for s in (b, b - t_net, b - t_total):
                    if now <= s <= hi:
                        starts.add(s)

        for s in starts:
            count += 1
            cost = execution_cost(forecast, s + t_net, t_proc, power)
            if transfer > 0:
                cost += execution_cost(forecast, s, t_net, transfer / t_net)
            key = (cost, s, energy, node.tier.rank, node.id)
            if best_key is None or key < best_key:
                best_key, best = key, (node.id, s, cost)

    return OracleDecision(objective, best[0], best[1], best[2], count)


def compare(plan: Optional[DeploymentPlan], oracle: OracleDecision) -> bool:
    """True iff the orchestrator's plan is exactly the oracle's choice.

    ``plan`` is None when the orchestrator found no feasible placement.
    """
    if plan is None or oracle.best_node_id is None:
        return plan is None and oracle.best_node_id is None
    return (
        plan.node_id == oracle.best_node_id
        and plan.start == oracle.best_start
        and plan.value(oracle.objective) == oracle.best_value
    )
