"""Seeded random scenarios for stress, property and scale testing."""

from __future__ import annotations

import random
from typing import Optional

from orchsim.energy import EnergyPriceForecast
from orchsim.model import CommRequirement, NanoService, Node, ResourceVector, Tier
from orchsim.scenario import Scenario
from orchsim.slicing import NetworkSlice, SliceClass, SliceThresholds

__all__ = ["random_node", "random_task", "random_forecast", "random_scenario"]

# (cpu cap, service rate, rtt, p_idle, dynamic power, link Mbps)
_TIER_RANGES = {
    Tier.LOCAL: ((1, 4), (0.5, 2), (0.001, 0.005), (1, 3), (2, 10), (500, 1000)),
    Tier.EDGE: ((8, 32), (5, 20), (0.005, 0.02), (20, 50), (50, 200), (100, 500)),
    Tier.CLOUD: ((64, 256), (50, 200), (0.04, 0.1), (100, 300), (300, 1000), (10, 100)),
}


def _u(rng: random.Random, lo: float, hi: float, nd: int = 3) -> float:
    return round(rng.uniform(lo, hi), nd)


def random_node(rng: random.Random, node_id: str, tier: Optional[Tier] = None) -> Node:
    tier = tier or rng.choice(list(Tier))
    cap, rate, rtt, idle, dyn, link = _TIER_RANGES[tier]
    p_idle = _u(rng, *idle)
    cpu = float(rng.randint(*cap))
    return Node(
        id=node_id,
        tier=tier,
        capacity=ResourceVector(cpu, float(rng.randint(0, 4)), cpu * 1024, cpu * 8192),
        service_rate=_u(rng, *rate),
        p_idle=p_idle,
        p_max=round(p_idle + _u(rng, *dyn), 3),
        rtt_to_end=_u(rng, *rtt, nd=4),
        net_energy_coeff=rng.choice([0.0, 0.0, _u(rng, 0.001, 0.05)]),
        link_bw=float(rng.randint(*link)),
    )


def random_task(rng: random.Random, task_id: str, arrival: float) -> NanoService:
    kind = rng.choice(list(SliceClass))
    if kind is SliceClass.URLLC:
        comm = CommRequirement(_u(rng, 0.002, 0.01, 4), _u(rng, 1, 20), False)
        data = _u(rng, 0.001, 0.02, 4)
        workload = _u(rng, 0.01, 0.5)
        slack = _u(rng, 0.05, 2)
    elif kind is SliceClass.EMBB:
        comm = CommRequirement(_u(rng, 0.5, 5), _u(rng, 50, 300), rng.random() < 0.3)
        data = _u(rng, 1, 200)
        workload = _u(rng, 1, 50)
        slack = _u(rng, 5, 120)
    else:
        comm = CommRequirement(_u(rng, 5, 60), _u(rng, 0.01, 5), True)
        data = _u(rng, 0, 5)
        workload = _u(rng, 1, 100)
        slack = _u(rng, 30, 600)
    cpu = rng.choice([0.5, 1.0, 1.0, 2.0, 4.0])
    demand = ResourceVector(cpu, float(rng.random() < 0.1), _u(rng, 64, 2048, 0), _u(rng, 0, 4096, 0))
    return NanoService(task_id, demand, workload, data, comm, arrival, round(arrival + slack, 3))


def random_forecast(rng: random.Random, n_slots: int, horizon_end: float, origin: float = 0.0) -> EnergyPriceForecast:
    cuts = sorted(rng.sample(range(1, 1000), n_slots - 1)) if n_slots > 1 else []
    span = horizon_end - origin
    starts = [origin] + [round(origin + span * c / 1000, 3) for c in cuts]
    return EnergyPriceForecast(tuple((s, _u(rng, 0.1, 3)) for s in starts), horizon_end)


def random_scenario(
    seed: int,
    n_tasks: int = 100,
    n_nodes: int = 6,
    n_slots: int = 8,
    *,
    duration: float = 3600.0,
    observation_noise: float = 0.0,
    slice_bw: tuple[float, float, float] = (200.0, 2000.0, 100.0),
) -> Scenario:
    """A continuum with roughly even tier mix and tasks arriving over ``duration`` seconds."""
    rng = random.Random(seed)
    tiers = [list(Tier)[i % 3] for i in range(n_nodes)]
    nodes = tuple(random_node(rng, f"{t.value}-{i:03d}", t) for i, t in enumerate(tiers))
    arrivals = sorted(_u(rng, 0, duration) for _ in range(n_tasks))
    tasks = tuple(random_task(rng, f"t{i:05d}", a) for i, a in enumerate(arrivals))
    horizon = max([t.deadline for t in tasks], default=duration) + 1.0
    slices = tuple(
        NetworkSlice(c, lat, bw)
        for c, lat, bw in zip(SliceClass, (0.01, 0.1, 10.0), slice_bw)
    )
    return Scenario(
        nodes=nodes,
        slices=slices,
        tasks=tasks,
        forecast=random_forecast(rng, n_slots, horizon),
        thresholds=SliceThresholds(),
        observation_noise=observation_noise,
    )
