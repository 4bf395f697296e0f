"""Domain types for nodes and nanoservices, capacity accounting and timing.

Units throughout: CPU in abstract compute units (CU), memory and storage in
MB, data in megabits, bandwidth in Mbps, time in seconds, power in watts,
energy in joules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from orchsim.errors import CapacityExceeded, DuplicateTask, InvariantError, UnknownTask, ZeroBandwidth

__all__ = [
    "Tier",
    "ResourceVector",
    "Node",
    "NodeState",
    "CommRequirement",
    "NanoService",
    "TimingEstimate",
    "check_fit",
    "admit",
    "release",
    "estimate_timing",
]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvariantError(msg)


def _nonneg(value: float) -> bool:
    return math.isfinite(value) and value >= 0


class Tier(Enum):
    LOCAL = "local"
    EDGE = "edge"
    CLOUD = "cloud"

    @property
    def rank(self) -> int:
        """Position in the Local < Edge < Cloud order (tie-breaking only)."""
        return _TIER_RANK[self]


_TIER_RANK = {Tier.LOCAL: 0, Tier.EDGE: 1, Tier.CLOUD: 2}


@dataclass(frozen=True, slots=True)
class ResourceVector:
    cpu: float = 0.0
    gpu: float = 0.0
    memory: float = 0.0
    storage: float = 0.0

    def __post_init__(self) -> None:
        for name in ("cpu", "gpu", "memory", "storage"):
            _require(_nonneg(getattr(self, name)), f"{name} must be finite and >= 0")

    def __add__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(
            self.cpu + other.cpu,
            self.gpu + other.gpu,
            self.memory + other.memory,
            self.storage + other.storage,
        )

    def __le__(self, other: ResourceVector) -> bool:
        # componentwise partial order
        return (
            self.cpu <= other.cpu
            and self.gpu <= other.gpu
            and self.memory <= other.memory
            and self.storage <= other.storage
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cpu, self.gpu, self.memory, self.storage)


ZERO = ResourceVector()


@dataclass(frozen=True, slots=True)
class Node:
    """A compute host in one tier of the continuum.

    ``link_bw`` caps the bandwidth any transfer to this node can get
    (e.g. a thin cloud backhaul); ``None`` means the link is not a
    bottleneck and only the slice limits the grant.
    """

    id: str
    tier: Tier
    capacity: ResourceVector
    service_rate: float
    p_idle: float
    p_max: float
    rtt_to_end: float
    net_energy_coeff: float = 0.0
    link_bw: Optional[float] = None

    def __post_init__(self) -> None:
        _require(math.isfinite(self.service_rate) and self.service_rate > 0, f"node {self.id}: service_rate must be > 0")
        _require(_nonneg(self.p_idle), f"node {self.id}: p_idle must be >= 0")
        _require(math.isfinite(self.p_max) and self.p_max >= self.p_idle, f"node {self.id}: p_max must be >= p_idle")
        _require(_nonneg(self.rtt_to_end), f"node {self.id}: rtt_to_end must be >= 0")
        _require(_nonneg(self.net_energy_coeff), f"node {self.id}: net_energy_coeff must be >= 0")
        if self.link_bw is not None:
            _require(math.isfinite(self.link_bw) and self.link_bw > 0, f"node {self.id}: link_bw must be > 0")


@dataclass(frozen=True, slots=True)
class CommRequirement:
    latency_req: float
    bandwidth_req: float
    delay_tolerant: bool = False

    def __post_init__(self) -> None:
        _require(math.isfinite(self.latency_req) and self.latency_req > 0, "latency_req must be > 0")
        _require(_nonneg(self.bandwidth_req), "bandwidth_req must be >= 0")


@dataclass(frozen=True, slots=True)
class NanoService:
    id: str
    demand: ResourceVector
    workload: float
    data_size: float
    comm: CommRequirement
    arrival: float
    deadline: float

    def __post_init__(self) -> None:
        _require(_nonneg(self.workload), f"task {self.id}: workload must be >= 0")
        _require(_nonneg(self.data_size), f"task {self.id}: data_size must be >= 0")
        _require(_nonneg(self.arrival), f"task {self.id}: arrival must be >= 0")
        _require(math.isfinite(self.deadline) and self.deadline > self.arrival, f"task {self.id}: deadline must be > arrival")


@dataclass(frozen=True, slots=True)
class NodeState:
    """Allocation snapshot of one node.

    ``running`` maps each admitted task id to its demand, in admission
    order. ``allocated`` is always the left fold of those demands in that
    order, so ``check_fit`` tests exactly the value ``admit`` will store.
    """

    node: Node
    allocated: ResourceVector = ZERO
    running: Mapping[str, ResourceVector] = field(default_factory=dict)

    @classmethod
    def empty(cls, node: Node) -> NodeState:
        return cls(node, ZERO, {})

    @property
    def remaining(self) -> ResourceVector:
        cap, alloc = self.node.capacity, self.allocated
        return ResourceVector(
            max(cap.cpu - alloc.cpu, 0.0),
            max(cap.gpu - alloc.gpu, 0.0),
            max(cap.memory - alloc.memory, 0.0),
            max(cap.storage - alloc.storage, 0.0),
        )


def _fold(demands) -> ResourceVector:
    total = ZERO
    for d in demands:
        total = total + d
    return total


@dataclass(frozen=True, slots=True)
class TimingEstimate:
    t_net: float
    t_proc: float
    t_total: float


def check_fit(demand: ResourceVector, state: NodeState) -> bool:
    """True iff ``demand`` fits in the node's remaining capacity (exact fit admits)."""
    alloc, cap = state.allocated, state.node.capacity
    return (
        alloc.cpu + demand.cpu <= cap.cpu
        and alloc.gpu + demand.gpu <= cap.gpu
        and alloc.memory + demand.memory <= cap.memory
        and alloc.storage + demand.storage <= cap.storage
    )


def admit(task: NanoService, state: NodeState) -> NodeState:
    if task.id in state.running:
        raise DuplicateTask(f"task {task.id!r} already running on {state.node.id!r}")
    if not check_fit(task.demand, state):
        raise CapacityExceeded(f"task {task.id!r} does not fit on node {state.node.id!r}")
    running = dict(state.running)
    running[task.id] = task.demand
    return NodeState(state.node, state.allocated + task.demand, running)


def release(task_id: str, state: NodeState) -> NodeState:
    if task_id not in state.running:
        raise UnknownTask(f"task {task_id!r} is not running on {state.node.id!r}")
    running = {k: v for k, v in state.running.items() if k != task_id}
    return NodeState(state.node, _fold(running.values()), running)


def estimate_timing(task: NanoService, node: Node, granted_bandwidth: float) -> TimingEstimate:
    """Network and processing time of ``task`` on ``node``; no contention slowdown."""
    if task.data_size > 0:
        if granted_bandwidth <= 0:
            raise ZeroBandwidth(f"task {task.id!r} moves {task.data_size} Mb but was granted no bandwidth")
        t_net = node.rtt_to_end + task.data_size / granted_bandwidth
    else:
        t_net = node.rtt_to_end
    t_proc = task.workload / node.service_rate
    return TimingEstimate(t_net, t_proc, t_net + t_proc)
