"""Slice classification (URLLC / eMBB / mMTC) and slice bandwidth admission."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from orchsim.errors import InvariantError, SliceSaturated, Underflow
from orchsim.model import CommRequirement

__all__ = [
    "SliceClass",
    "NetworkSlice",
    "SliceThresholds",
    "classify_slice",
    "admit_bandwidth",
    "release_bandwidth",
]


class SliceClass(Enum):
    URLLC = "URLLC"
    EMBB = "EMBB"
    MMTC = "MMTC"


@dataclass(frozen=True, slots=True)
class NetworkSlice:
    slice_class: SliceClass
    latency_bound: float
    capacity_bw: float
    allocated_bw: float = 0.0

    def __post_init__(self) -> None:
        name = self.slice_class.value
        if not (math.isfinite(self.latency_bound) and self.latency_bound > 0):
            raise InvariantError(f"slice {name}: latency_bound must be > 0")
        if not (math.isfinite(self.capacity_bw) and self.capacity_bw > 0):
            raise InvariantError(f"slice {name}: capacity_bw must be > 0")
        if not (0 <= self.allocated_bw <= self.capacity_bw):
            raise InvariantError(f"slice {name}: need 0 <= allocated_bw <= capacity_bw")

    @property
    def remaining_bw(self) -> float:
        return self.capacity_bw - self.allocated_bw


@dataclass(frozen=True, slots=True)
class SliceThresholds:
    urllc_latency_max: float = 0.010
    embb_bw_min: float = 50.0

    def __post_init__(self) -> None:
        if not (self.urllc_latency_max > 0 and self.embb_bw_min > 0):
            raise InvariantError("slice thresholds must be > 0")


def classify_slice(comm: CommRequirement, th: SliceThresholds = SliceThresholds()) -> SliceClass:
    # latency first: URLLC wins when both predicates hold
    if comm.latency_req <= th.urllc_latency_max:
        return SliceClass.URLLC
    if comm.bandwidth_req >= th.embb_bw_min:
        return SliceClass.EMBB
    return SliceClass.MMTC


def admit_bandwidth(slice_: NetworkSlice, demand: float) -> NetworkSlice:
    if demand < 0:
        raise ValueError("bandwidth demand must be >= 0")
    allocated = slice_.allocated_bw + demand
    if allocated > slice_.capacity_bw:
        raise SliceSaturated(
            f"slice {slice_.slice_class.value}: {demand} Mbps requested, {slice_.remaining_bw} available"
        )
    return replace(slice_, allocated_bw=allocated)


def release_bandwidth(slice_: NetworkSlice, demand: float) -> NetworkSlice:
    if demand < 0:
        raise ValueError("bandwidth demand must be >= 0")
    if demand > slice_.allocated_bw:
        raise Underflow(f"slice {slice_.slice_class.value}: releasing {demand} of {slice_.allocated_bw} Mbps")
    return replace(slice_, allocated_bw=slice_.allocated_bw - demand)
