"""Simulation configuration, loadable from JSON/YAML files."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

FAULT_KINDS = ("kill_pod", "agent_offline", "artifact_unreachable")


@dataclass(frozen=True)
class FaultSpec:
    at: int
    kind: str
    cluster: str | None = None
    key: dict | None = None
    until: int | None = None

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise ValueError(f"unknown fault kind {self.kind!r}")
        if self.at < 0:
            raise ValueError("fault time must be >= 0")
        if self.kind in ("agent_offline", "artifact_unreachable") and self.until is None:
            raise ValueError(f"{self.kind} requires until")
        if self.kind in ("kill_pod", "agent_offline") and not self.cluster:
            raise ValueError(f"{self.kind} requires cluster")

    def to_dict(self) -> dict:
        out = {"at": self.at, "kind": self.kind}
        if self.cluster is not None:
            out["cluster"] = self.cluster
        if self.key is not None:
            out["key"] = self.key
        if self.until is not None:
            out["until"] = self.until
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FaultSpec":
        return cls(
            at=int(data["at"]),
            kind=data["kind"],
            cluster=data.get("cluster"),
            key=data.get("key"),
            until=data.get("until"),
        )


@dataclass
class SimConfig:
    num_clusters: int = 3
    default_tags: tuple[str, ...] = ("demo",)
    cluster_tags: dict[str, list[str]] = field(default_factory=dict)
    poll_interval: int = 30
    report_interval: int = 60
    watch_debounce: int = 5
    seed: int = 0
    faults: list[FaultSpec] = field(default_factory=list)
    push_parallelism: int = 10
    per_cluster_push_cost: int = 5
    instances_per_cluster: int = 1
    flip_at: int | None = None
    horizon: int | None = None
    sweep: tuple[int, ...] = (1, 10, 100, 1000)
    channel: str = "nginx-operator"
    subscription: str = "nginx-test"
    subscription_tag: str = "demo"
    versions: tuple[str, str] = ("1.0", "2.0")

    def __post_init__(self):
        if self.num_clusters < 0:
            raise ValueError("num_clusters must be >= 0")
        if self.push_parallelism < 1:
            raise ValueError("push_parallelism must be >= 1")
        for name in ("poll_interval", "report_interval", "per_cluster_push_cost"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    def cluster_id(self, index: int) -> str:
        return f"cluster-{index:04d}"

    def tags_for(self, cluster_id: str) -> frozenset[str]:
        override = self.cluster_tags.get(cluster_id)
        return frozenset(override) if override is not None else frozenset(self.default_tags)

    def effective_flip_at(self) -> int:
        return self.flip_at if self.flip_at is not None else 2 * self.poll_interval

    def effective_horizon(self) -> int:
        if self.horizon is not None:
            return self.horizon
        bound = self.effective_flip_at() + 10 * self.poll_interval
        for fault in self.faults:
            if fault.until is not None:
                bound = max(bound, fault.until + 4 * self.poll_interval)
        return bound

    def to_dict(self) -> dict:
        return {
            "num_clusters": self.num_clusters,
            "default_tags": list(self.default_tags),
            "cluster_tags": dict(self.cluster_tags),
            "poll_interval": self.poll_interval,
            "report_interval": self.report_interval,
            "watch_debounce": self.watch_debounce,
            "seed": self.seed,
            "faults": [f.to_dict() for f in self.faults],
            "push_parallelism": self.push_parallelism,
            "per_cluster_push_cost": self.per_cluster_push_cost,
            "instances_per_cluster": self.instances_per_cluster,
            "flip_at": self.flip_at,
            "horizon": self.horizon,
            "sweep": list(self.sweep),
            "channel": self.channel,
            "subscription": self.subscription,
            "subscription_tag": self.subscription_tag,
            "versions": list(self.versions),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        kwargs = dict(data)
        if "faults" in kwargs:
            kwargs["faults"] = [FaultSpec.from_dict(f) for f in kwargs["faults"]]
        for tuple_field in ("default_tags", "sweep", "versions"):
            if tuple_field in kwargs and kwargs[tuple_field] is not None:
                kwargs[tuple_field] = tuple(kwargs[tuple_field])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(kwargs) - known
        if unknown:
            raise ValueError(f"unknown sim config fields: {sorted(unknown)}")
        return cls(**kwargs)


def load_sim_config(path: str | os.PathLike) -> SimConfig:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if data is None:
        return SimConfig()
    if not isinstance(data, dict):
        raise ValueError(f"sim config {path} must contain a mapping")
    return SimConfig.from_dict(data)
