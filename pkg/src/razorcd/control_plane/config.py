"""Server configuration: file plus environment-variable overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import yaml

DEFAULT_LISTEN = "127.0.0.1:8080"
DEFAULT_STORE_DIR = "razorcd-artifacts"

ENV_LISTEN = "RAZORCD_LISTEN"
ENV_ORG_KEY = "RAZORCD_ORG_KEY"
ENV_API_KEY = "RAZORCD_API_KEY"
ENV_USER_ID = "RAZORCD_USER_ID"
ENV_STORE_DIR = "RAZORCD_STORE_DIR"


@dataclass
class ServerConfig:
    listen: str = DEFAULT_LISTEN
    org_key: str = "org-key-dev"
    api_key: str = "api-key-dev"
    user_id: str = "admin"
    store_dir: str = DEFAULT_STORE_DIR

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def load_server_config(path: str | os.PathLike | None = None, env: dict | None = None) -> ServerConfig:
    """Load config from a YAML/JSON file, then apply env overrides."""
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        loaded = yaml.safe_load(text)
        if loaded is not None:
            if not isinstance(loaded, dict):
                raise ValueError(f"config file {path} must contain a mapping")
            data = loaded
    cfg = ServerConfig(
        listen=data.get("listen", DEFAULT_LISTEN),
        org_key=data.get("org_key", ServerConfig.org_key),
        api_key=data.get("api_key", ServerConfig.api_key),
        user_id=data.get("user_id", ServerConfig.user_id),
        store_dir=data.get("store_dir", DEFAULT_STORE_DIR),
    )
    if env.get(ENV_LISTEN):
        cfg.listen = env[ENV_LISTEN]
    if env.get(ENV_ORG_KEY):
        cfg.org_key = env[ENV_ORG_KEY]
    if env.get(ENV_API_KEY):
        cfg.api_key = env[ENV_API_KEY]
    if env.get(ENV_USER_ID):
        cfg.user_id = env[ENV_USER_ID]
    if env.get(ENV_STORE_DIR):
        cfg.store_dir = env[ENV_STORE_DIR]
    return cfg
