"""Node selection: filter by resources, slice and timing, then take minimum energy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from orchsim.energy import PowerProfile, task_power
from orchsim.errors import NoFeasibleNode
from orchsim.model import NanoService, Node, NodeState, Tier, TimingEstimate, check_fit, estimate_timing
from orchsim.slicing import NetworkSlice, SliceClass, SliceThresholds, classify_slice

__all__ = [
    "FeasibilityReport",
    "PlacementDecision",
    "grant_bandwidth",
    "feasible_nodes",
    "feasible_decisions",
    "select_node",
    "energy_key",
]

Profiles = Optional[Mapping[str, PowerProfile]]
Slices = Mapping[SliceClass, NetworkSlice]


@dataclass(frozen=True, slots=True)
class PlacementDecision:
    task_id: str
    node_id: str
    tier: Tier
    slice_class: SliceClass
    granted_bw: float
    timing: TimingEstimate
    power: float  # predicted dynamic power while processing
    transfer_energy: float
    predicted_energy: float


@dataclass(frozen=True, slots=True)
class FeasibilityReport:
    node_id: str
    fits_resources: bool
    fits_slice: bool
    meets_deadline: bool
    predicted_energy: Optional[float] = None
    granted_bw: float = 0.0
    timing: Optional[TimingEstimate] = None

    @property
    def feasible(self) -> bool:
        return self.fits_resources and self.fits_slice and self.meets_deadline


def grant_bandwidth(task: NanoService, node: Node, slice_: NetworkSlice) -> tuple[float, bool]:
    """Bandwidth granted to ``task`` on ``node`` through ``slice_``, and whether the slice admits it.

    The slice must have room for the full ``bandwidth_req``; the grant is
    then capped by the node's link. Moving data with a zero grant never fits.
    """
    req = task.comm.bandwidth_req
    fits = slice_.allocated_bw + req <= slice_.capacity_bw
    granted = req if fits else min(req, max(slice_.capacity_bw - slice_.allocated_bw, 0.0))
    if node.link_bw is not None and node.link_bw < granted:
        granted = node.link_bw
    if task.data_size > 0 and granted <= 0:
        fits = False
    return granted, fits


def _assess(
    task: NanoService,
    state: NodeState,
    slice_: NetworkSlice,
    profile: Optional[PowerProfile],
    now: float,
) -> tuple[FeasibilityReport, Optional[PlacementDecision]]:
    node = state.node
    fits_resources = check_fit(task.demand, state)
    granted, fits_slice = grant_bandwidth(task, node, slice_)
    if task.data_size > 0 and granted <= 0:
        return FeasibilityReport(node.id, fits_resources, False, False, None, granted), None

    timing = estimate_timing(task, node, granted)
    meets_deadline = now + timing.t_total <= task.deadline and (
        task.comm.delay_tolerant or timing.t_net <= task.comm.latency_req
    )
    if not (fits_resources and fits_slice and meets_deadline):
        return FeasibilityReport(node.id, fits_resources, fits_slice, meets_deadline, None, granted, timing), None

    power = task_power(task, node, profile)
    transfer = node.net_energy_coeff * task.data_size
    energy = power * timing.t_proc + transfer
    decision = PlacementDecision(
        task.id, node.id, node.tier, slice_.slice_class, granted, timing, power, transfer, energy
    )
    return FeasibilityReport(node.id, True, True, True, energy, granted, timing), decision


def _check_now(task: NanoService, now: float) -> None:
    if now < task.arrival:
        raise ValueError(f"task {task.id!r} cannot be orchestrated at {now} before its arrival {task.arrival}")


def feasible_nodes(
    task: NanoService,
    nodes: Sequence[NodeState],
    slices: Slices,
    thresholds: SliceThresholds,
    now: float,
    profiles: Profiles = None,
) -> list[FeasibilityReport]:
    """One report per node, in input order."""
    _check_now(task, now)
    slice_ = slices[classify_slice(task.comm, thresholds)]
    return [
        _assess(task, st, slice_, profiles.get(st.node.id) if profiles else None, now)[0] for st in nodes
    ]


def feasible_decisions(
    task: NanoService,
    nodes: Sequence[NodeState],
    slices: Slices,
    thresholds: SliceThresholds,
    now: float,
    profiles: Profiles = None,
) -> list[PlacementDecision]:
    """Placement decisions for every feasible node, in input order."""
    _check_now(task, now)
    slice_ = slices[classify_slice(task.comm, thresholds)]
    # same predicates as _assess, minus report construction (hot path of the simulator)
    req = task.comm.bandwidth_req
    if slice_.allocated_bw + req > slice_.capacity_bw:
        return []
    out = []
    for st in nodes:
        if not check_fit(task.demand, st):
            continue
        node = st.node
        granted = req if node.link_bw is None or node.link_bw >= req else node.link_bw
        if task.data_size > 0 and granted <= 0:
            continue
        timing = estimate_timing(task, node, granted)
        if now + timing.t_total > task.deadline:
            continue
        if not task.comm.delay_tolerant and timing.t_net > task.comm.latency_req:
            continue
        power = task_power(task, node, profiles.get(node.id) if profiles else None)
        transfer = node.net_energy_coeff * task.data_size
        out.append(
            PlacementDecision(
                task.id, node.id, node.tier, slice_.slice_class, granted, timing, power, transfer,
                power * timing.t_proc + transfer,
            )
        )
    return out


def energy_key(d: PlacementDecision) -> tuple:
    return (d.predicted_energy, d.timing.t_total, d.tier.rank, d.node_id)


def select_node(
    task: NanoService,
    nodes: Sequence[NodeState],
    slices: Slices,
    thresholds: SliceThresholds,
    now: float,
    profiles: Profiles = None,
) -> PlacementDecision:
    """The feasible node with the least predicted energy.

    Ties go to lower total time, then Local < Edge < Cloud, then node id.
    """
    candidates = feasible_decisions(task, nodes, slices, thresholds, now, profiles)
    if not candidates:
        raise NoFeasibleNode(f"no node can host task {task.id!r} at t={now}")
    return min(candidates, key=energy_key)
