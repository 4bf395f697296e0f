"""Scenario documents: strict JSON parsing, validation and serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import jsonschema

from orchsim.energy import DEFAULT_ALPHA, EnergyPriceForecast
from orchsim.errors import DuplicateId, InvariantError, SchemaError
from orchsim.model import CommRequirement, NanoService, Node, ResourceVector, Tier
from orchsim.slicing import NetworkSlice, SliceClass, SliceThresholds

__all__ = ["Scenario", "SCHEMA", "parse_scenario", "serialize_scenario", "load_scenario", "dump_scenario"]

_NUM = {"type": "number"}
_RESOURCES = {
    "type": "object",
    "properties": {k: _NUM for k in ("cpu", "gpu", "memory", "storage")},
    "required": ["cpu", "gpu", "memory", "storage"],
    "additionalProperties": False,
}


def _obj(required: dict, optional: dict | None = None) -> dict:
    return {
        "type": "object",
        "properties": {**required, **(optional or {})},
        "required": list(required),
        "additionalProperties": False,
    }


SCHEMA = _obj(
    {
        "nodes": {
            "type": "array",
            "items": _obj(
                {
                    "id": {"type": "string"},
                    "tier": {"enum": [t.value for t in Tier]},
                    "capacity": _RESOURCES,
                    "service_rate": _NUM,
                    "p_idle": _NUM,
                    "p_max": _NUM,
                    "rtt_to_end": _NUM,
                },
                {"net_energy_coeff": _NUM, "link_bw": {"type": ["number", "null"]}},
            ),
        },
        "slices": {
            "type": "array",
            "items": _obj(
                {"class": {"enum": [c.value for c in SliceClass]}, "latency_bound": _NUM, "capacity_bw": _NUM},
                {"allocated_bw": _NUM},
            ),
        },
        "tasks": {
            "type": "array",
            "items": _obj(
                {
                    "id": {"type": "string"},
                    "demand": _RESOURCES,
                    "workload": _NUM,
                    "data_size": _NUM,
                    "comm": _obj(
                        {"latency_req": _NUM, "bandwidth_req": _NUM},
                        {"delay_tolerant": {"type": "boolean"}},
                    ),
                    "arrival": _NUM,
                    "deadline": _NUM,
                }
            ),
        },
        "forecast": _obj(
            {
                "slots": {
                    "type": "array",
                    "minItems": 1,
                    "items": _obj({"start": _NUM, "price": _NUM}),
                },
                "horizon_end": _NUM,
            }
        ),
    },
    {
        "thresholds": _obj({}, {"urllc_latency_max": _NUM, "embb_bw_min": _NUM}),
        "profile_alpha": _NUM,
        "observation_noise": _NUM,
    },
)

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[Node, ...]
    slices: tuple[NetworkSlice, ...]
    tasks: tuple[NanoService, ...]
    forecast: EnergyPriceForecast
    thresholds: SliceThresholds = field(default_factory=SliceThresholds)
    profile_alpha: float = DEFAULT_ALPHA
    observation_noise: float = 0.0

    def __post_init__(self) -> None:
        _validate(self)

    def slice_map(self) -> dict[SliceClass, NetworkSlice]:
        return {s.slice_class: s for s in self.slices}


def _validate(sc: Scenario) -> None:
    for kind, items in (("node", sc.nodes), ("task", sc.tasks)):
        seen = set()
        for i, item in enumerate(items):
            if item.id in seen:
                raise DuplicateId(f"{kind}s[{i}]: duplicate {kind} id {item.id!r}")
            seen.add(item.id)
    classes = sorted(s.slice_class.value for s in sc.slices)
    if classes != sorted(c.value for c in SliceClass):
        raise InvariantError(f"slices: need exactly one slice per class, got {classes}")
    if not (0.0 <= sc.profile_alpha <= 1.0):
        raise InvariantError("profile_alpha: must be in [0, 1]")
    if not sc.observation_noise >= 0:
        raise InvariantError("observation_noise: must be >= 0")
    if sc.tasks:
        first = min(t.arrival for t in sc.tasks)
        if sc.forecast.origin > first:
            raise InvariantError(
                f"forecast.slots[0].start: {sc.forecast.origin} is after the earliest arrival {first}"
            )


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<document>"


def _resources(d: dict) -> ResourceVector:
    return ResourceVector(float(d["cpu"]), float(d["gpu"]), float(d["memory"]), float(d["storage"]))


def _build(path: str, ctor, *args, **kwargs):
    try:
        return ctor(*args, **kwargs)
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from None


def parse_scenario(document: Union[str, bytes, dict]) -> Scenario:
    """Parse and fully validate a scenario document (JSON text or decoded object)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"<document>: not valid JSON: {exc}") from None
    errors = sorted(_VALIDATOR.iter_errors(document), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise SchemaError(f"{_path(err.absolute_path)}: {err.message}")

    nodes = []
    for i, n in enumerate(document["nodes"]):
        link = n.get("link_bw")
        nodes.append(
            _build(
                f"nodes[{i}]",
                Node,
                n["id"],
                Tier(n["tier"]),
                _build(f"nodes[{i}].capacity", _resources, n["capacity"]),
                float(n["service_rate"]),
                float(n["p_idle"]),
                float(n["p_max"]),
                float(n["rtt_to_end"]),
                float(n.get("net_energy_coeff", 0.0)),
                None if link is None else float(link),
            )
        )
    slices = [
        _build(
            f"slices[{i}]",
            NetworkSlice,
            SliceClass(s["class"]),
            float(s["latency_bound"]),
            float(s["capacity_bw"]),
            float(s.get("allocated_bw", 0.0)),
        )
        for i, s in enumerate(document["slices"])
    ]
    tasks = []
    for i, t in enumerate(document["tasks"]):
        c = t["comm"]
        comm = _build(
            f"tasks[{i}].comm",
            CommRequirement,
            float(c["latency_req"]),
            float(c["bandwidth_req"]),
            bool(c.get("delay_tolerant", False)),
        )
        tasks.append(
            _build(
                f"tasks[{i}]",
                NanoService,
                t["id"],
                _build(f"tasks[{i}].demand", _resources, t["demand"]),
                float(t["workload"]),
                float(t["data_size"]),
                comm,
                float(t["arrival"]),
                float(t["deadline"]),
            )
        )
    f = document["forecast"]
    forecast = _build(
        "forecast",
        EnergyPriceForecast,
        tuple((float(s["start"]), float(s["price"])) for s in f["slots"]),
        float(f["horizon_end"]),
    )
    th = document.get("thresholds", {})
    thresholds = _build(
        "thresholds",
        SliceThresholds,
        float(th.get("urllc_latency_max", 0.010)),
        float(th.get("embb_bw_min", 50.0)),
    )
    return Scenario(
        tuple(nodes),
        tuple(slices),
        tuple(tasks),
        forecast,
        thresholds,
        float(document.get("profile_alpha", DEFAULT_ALPHA)),
        float(document.get("observation_noise", 0.0)),
    )


def _res_doc(r: ResourceVector) -> dict:
    return {"cpu": r.cpu, "gpu": r.gpu, "memory": r.memory, "storage": r.storage}


def serialize_scenario(sc: Scenario) -> dict[str, Any]:
    """Inverse of :func:`parse_scenario`; every optional field is written out."""
    return {
        "nodes": [
            {
                "id": n.id,
                "tier": n.tier.value,
                "capacity": _res_doc(n.capacity),
                "service_rate": n.service_rate,
                "p_idle": n.p_idle,
                "p_max": n.p_max,
                "rtt_to_end": n.rtt_to_end,
                "net_energy_coeff": n.net_energy_coeff,
                "link_bw": n.link_bw,
            }
            for n in sc.nodes
        ],
        "slices": [
            {
                "class": s.slice_class.value,
                "latency_bound": s.latency_bound,
                "capacity_bw": s.capacity_bw,
                "allocated_bw": s.allocated_bw,
            }
            for s in sc.slices
        ],
        "thresholds": {
            "urllc_latency_max": sc.thresholds.urllc_latency_max,
            "embb_bw_min": sc.thresholds.embb_bw_min,
        },
        "tasks": [
            {
                "id": t.id,
                "demand": _res_doc(t.demand),
                "workload": t.workload,
                "data_size": t.data_size,
                "comm": {
                    "latency_req": t.comm.latency_req,
                    "bandwidth_req": t.comm.bandwidth_req,
                    "delay_tolerant": t.comm.delay_tolerant,
                },
                "arrival": t.arrival,
                "deadline": t.deadline,
            }
            for t in sc.tasks
        ],
        "forecast": {
            "slots": [{"start": s, "price": p} for s, p in sc.forecast.slots],
            "horizon_end": sc.forecast.horizon_end,
        },
        "profile_alpha": sc.profile_alpha,
        "observation_noise": sc.observation_noise,
    }


def dump_scenario(sc: Scenario) -> str:
    return json.dumps(serialize_scenario(sc), indent=2) + "\n"


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text)
