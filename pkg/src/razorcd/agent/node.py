"""Composition root for one cluster: store, controllers, operator host, agent."""

from __future__ import annotations

from ..cluster.store import ClusterStore
from ..operators.deployment import make_deployment_controller
from ..operators.nginx import OperatorHost
from ..operators.runtime import ControllerRuntime
from .client import ControlPlaneClient
from .config import AgentConfig
from .core import Agent, TickSummary

# Bundle applies can install the operator, whose first reconciles emit more
# events; a handful of pump/host rounds always reaches quiescence.
MAX_SETTLE_ROUNDS = 50


class ClusterNode:
    def __init__(
        self,
        config: AgentConfig,
        client: ControlPlaneClient,
        store: ClusterStore | None = None,
    ):
        self.config = config
        self.store = store if store is not None else ClusterStore(config.cluster_id)
        self.runtime = ControllerRuntime(self.store)
        self.runtime.register(make_deployment_controller(self.store))
        self.host = OperatorHost(self.store, self.runtime)
        self.agent = Agent(config, self.store, self.runtime, client)

    def settle(self, now: float) -> int:
        """Pump controllers at `now` until nothing is due and no events remain."""
        emitted = 0
        for _ in range(MAX_SETTLE_ROUNDS):
            stats = self.runtime.pump(now)
            host_changed = self.host.sync()
            emitted += self.agent.keeper.process_events(now)
            if not host_changed and stats.reconciles == 0 and stats.events == 0:
                return emitted
        raise RuntimeError(f"cluster {self.config.cluster_id} failed to settle")

    def step(self, now: float) -> TickSummary:
        summary = self.agent.run_tick(now)
        summary.events_reported += self.settle(now)
        return summary

    def next_due(self) -> float | None:
        candidates = [t for t in (self.agent.next_due(), self.runtime.next_due()) if t is not None]
        return min(candidates) if candidates else None
