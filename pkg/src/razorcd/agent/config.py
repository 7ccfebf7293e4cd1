"""Agent configuration: file plus environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

ENV_URL = "RAZORCD_URL"
ENV_ORG_KEY = "RAZORCD_ORG_KEY"

DEFAULT_POLL_INTERVAL = 30
DEFAULT_REPORT_INTERVAL = 60
DEFAULT_WATCH_DEBOUNCE = 5


@dataclass
class AgentConfig:
    cluster_id: str
    org_key: str
    control_plane_url: str = ""
    tags: frozenset[str] = field(default_factory=frozenset)
    poll_interval: float = DEFAULT_POLL_INTERVAL
    report_interval: float = DEFAULT_REPORT_INTERVAL
    watch_debounce: float = DEFAULT_WATCH_DEBOUNCE

    def __post_init__(self):
        if not self.cluster_id:
            raise ValueError("cluster_id must be non-empty")
        for name in ("poll_interval", "report_interval", "watch_debounce"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        self.tags = frozenset(self.tags)


def load_agent_config(path: str | os.PathLike, env: dict | None = None) -> AgentConfig:
    env = os.environ if env is None else env
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"agent config {path} must contain a mapping")
    cfg = AgentConfig(
        cluster_id=data.get("cluster_id", ""),
        org_key=data.get("org_key", ""),
        control_plane_url=data.get("control_plane_url", ""),
        tags=frozenset(data.get("tags") or []),
        poll_interval=data.get("poll_interval", DEFAULT_POLL_INTERVAL),
        report_interval=data.get("report_interval", DEFAULT_REPORT_INTERVAL),
        watch_debounce=data.get("watch_debounce", DEFAULT_WATCH_DEBOUNCE),
    )
    if env.get(ENV_URL):
        cfg.control_plane_url = env[ENV_URL]
    if env.get(ENV_ORG_KEY):
        cfg.org_key = env[ENV_ORG_KEY]
    return cfg
