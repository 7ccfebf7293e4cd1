from .config import AgentConfig, load_agent_config
from .core import Agent, SyncResult, TickSummary
from .node import ClusterNode

__all__ = ["Agent", "AgentConfig", "ClusterNode", "SyncResult", "TickSummary", "load_agent_config"]
