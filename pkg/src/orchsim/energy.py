"""Task power/energy, piecewise-constant price forecasts and profile estimation."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional

from orchsim.errors import InvalidAlpha, InvariantError, OutOfHorizon
from orchsim.model import NanoService, Node, TimingEstimate

__all__ = [
    "EnergyPriceForecast",
    "PowerProfile",
    "task_power",
    "task_energy",
    "price_at",
    "execution_cost",
    "update_profile",
    "DEFAULT_ALPHA",
]

DEFAULT_ALPHA = 0.3


@dataclass(frozen=True)
class EnergyPriceForecast:
    """Price per joule, constant on each ``[start, next_start)`` slot.

    The last slot extends to ``horizon_end``.
    """

    slots: tuple[tuple[float, float], ...]
    horizon_end: float
    starts: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        slots = tuple((float(s), float(p)) for s, p in self.slots)
        if not slots:
            raise InvariantError("forecast needs at least one slot")
        for i, (start, price) in enumerate(slots):
            if not (math.isfinite(start) and math.isfinite(price)) or price < 0:
                raise InvariantError(f"slot {i}: price must be finite and >= 0")
            if i and start <= slots[i - 1][0]:
                raise InvariantError(f"slot {i}: starts must be strictly increasing")
        if not (math.isfinite(self.horizon_end) and self.horizon_end > slots[-1][0]):
            raise InvariantError("horizon_end must be after the last slot start")
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "starts", tuple(s for s, _ in slots))

    @classmethod
    def constant(cls, price: float, horizon_end: float, start: float = 0.0) -> EnergyPriceForecast:
        return cls(((start, price),), horizon_end)

    @property
    def origin(self) -> float:
        return self.starts[0]

    def slot_end(self, i: int) -> float:
        return self.starts[i + 1] if i + 1 < len(self.starts) else self.horizon_end


@dataclass(frozen=True, slots=True)
class PowerProfile:
    node_id: str
    p_idle_hat: float
    p_max_hat: float

    def __post_init__(self) -> None:
        if not (0 <= self.p_idle_hat <= self.p_max_hat):
            raise InvariantError(f"profile {self.node_id}: need 0 <= p_idle_hat <= p_max_hat")

    @classmethod
    def of(cls, node: Node) -> PowerProfile:
        return cls(node.id, node.p_idle, node.p_max)


def task_power(task: NanoService, node: Node, profile: Optional[PowerProfile] = None) -> float:
    """Dynamic power attributed to ``task``: the CPU share of (p_max - p_idle).

    Idle draw is never charged to tasks. When ``profile`` is given, its
    estimates replace the node's nominal power figures.
    """
    cap = node.capacity.cpu
    if cap == 0:
        return 0.0
    if profile is None:
        dyn = node.p_max - node.p_idle
    else:
        dyn = profile.p_max_hat - profile.p_idle_hat
    return dyn * (task.demand.cpu / cap)


def task_energy(
    task: NanoService, node: Node, timing: TimingEstimate, profile: Optional[PowerProfile] = None
) -> float:
    return task_power(task, node, profile) * timing.t_proc + node.net_energy_coeff * task.data_size


def price_at(forecast: EnergyPriceForecast, t: float) -> float:
    if not (forecast.origin <= t < forecast.horizon_end):
        raise OutOfHorizon(f"t={t} outside forecast [{forecast.origin}, {forecast.horizon_end})")
    return forecast.slots[bisect_right(forecast.starts, t) - 1][1]


def execution_cost(forecast: EnergyPriceForecast, start: float, duration: float, power: float) -> float:
    """Exact integral of ``power * price(t)`` over ``[start, start + duration)``."""
    if duration < 0 or power < 0:
        raise ValueError("duration and power must be >= 0")
    end = start + duration
    if start < forecast.origin or end > forecast.horizon_end:
        raise OutOfHorizon(f"interval [{start}, {end}) outside forecast [{forecast.origin}, {forecast.horizon_end})")
    if duration == 0:
        return 0.0
    i = bisect_right(forecast.starts, start) - 1
    slot_end = forecast.slot_end(i)
    if end <= slot_end:
        # single slot: use duration itself so constant prices are exact
        return power * duration * forecast.slots[i][1]
    total = power * (slot_end - start) * forecast.slots[i][1]
    i += 1
    while True:
        slot_start, price = forecast.slots[i]
        slot_end = forecast.slot_end(i)
        if end <= slot_end:
            return total + power * (end - slot_start) * price
        total += power * (slot_end - slot_start) * price
        i += 1


def update_profile(profile: PowerProfile, observed_p_max: float, alpha: float = DEFAULT_ALPHA) -> PowerProfile:
    """Exponential moving average of the node's peak power."""
    if not (0.0 <= alpha <= 1.0):
        raise InvalidAlpha(f"alpha must be in [0, 1], got {alpha}")
    if observed_p_max < profile.p_idle_hat:
        raise ValueError("observed_p_max below p_idle_hat")
    p_max_hat = alpha * observed_p_max + (1 - alpha) * profile.p_max_hat
    # clamp rounding residue so the estimate stays between old and observed
    lo, hi = sorted((profile.p_max_hat, observed_p_max))
    return PowerProfile(profile.node_id, profile.p_idle_hat, min(max(p_max_hat, lo), hi))

