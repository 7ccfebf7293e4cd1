"""Deterministic discrete-event simulation of pull and push rollouts.

One logical integer clock drives everything: control plane, N cluster
stores, their agents, and their controllers. The loop pops (time, seq)
ordered events from a heap; each event handler runs its cluster to
quiescence at that instant, so reconciliation is instantaneous in logical
time and rollout latency is governed by poll cadence alone. Equal configs
(seed included) produce byte-identical traces.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from typing import Callable

from ..agent.client import RouterClient
from ..agent.config import AgentConfig
from ..agent.node import ClusterNode
from ..control_plane.api import ApiRouter
from ..control_plane.core import ControlPlane, Credentials
from ..conventions import (
    AGENT_NAMESPACE,
    HEADER_API_KEY,
    HEADER_ORG_KEY,
    HEADER_RESOURCE_NAME,
    HEADER_USER_ID,
    RR_KIND,
)
from ..errors import HorizonExceeded
from ..operators.nginx import NGINX_API_VERSION, NGINX_KIND, build_operator_bundle
from .config import SimConfig
from .reporting import ComparisonTable, SimReport, trace_digest

ORG_KEY = "sim-org-key"
API_KEY = "sim-api-key"
USER_ID = "sim-admin"

INSTANCE_NAMESPACE = "apps"


@dataclass
class SimNode:
    index: int
    cluster_id: str
    tags: frozenset[str]
    client: RouterClient
    node: ClusterNode
    offset: int
    converged_at: dict[str, int] = field(default_factory=dict)
    instances_created: bool = False
    pending_tick: int | None = None


class SimWorld:
    """Control plane plus N agent-driven clusters under one logical clock."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.now = 0
        self.events_processed = 0
        self.trace: list[dict] = []
        self.cp = ControlPlane(
            Credentials(ORG_KEY, API_KEY, USER_ID), clock=lambda: self.now
        )
        self.router = ApiRouter(self.cp)
        self.version_hash: dict[str, str] = {}
        self.receipts: dict[str, dict] = {}
        self.alert_firings: set[tuple] = set()
        self._heap: list[tuple[int, int, Callable[[], None]]] = []
        self._seq = 0

        rng = random.Random(cfg.seed)
        self.nodes: list[SimNode] = []
        for i in range(cfg.num_clusters):
            cluster_id = cfg.cluster_id(i)
            tags = cfg.tags_for(cluster_id)
            client = RouterClient(self.router, ORG_KEY)
            agent_cfg = AgentConfig(
                cluster_id=cluster_id,
                org_key=ORG_KEY,
                tags=tags,
                poll_interval=cfg.poll_interval,
                report_interval=cfg.report_interval,
                watch_debounce=cfg.watch_debounce,
            )
            self.nodes.append(
                SimNode(
                    index=i,
                    cluster_id=cluster_id,
                    tags=tags,
                    client=client,
                    node=ClusterNode(agent_cfg, client),
                    offset=rng.randrange(cfg.poll_interval),
                )
            )

    # -- admin actions through the API router --------------------------------

    def _admin_headers(self) -> dict:
        return {HEADER_API_KEY: API_KEY, HEADER_USER_ID: USER_ID}

    def admin(self, method: str, path: str, payload: dict | None = None, headers=None, body=None):
        all_headers = self._admin_headers()
        if headers:
            all_headers.update(headers)
        data = body if body is not None else (
            json.dumps(payload).encode() if payload is not None else b""
        )
        response = self.router.handle(method, path, all_headers, {}, data)
        if response.status >= 400:
            raise RuntimeError(f"admin call {method} {path} failed: {response.body!r}")
        return response.json()

    def upload_version(self, version_name: str) -> dict:
        bundle = build_operator_bundle(version_name)
        receipt = self.admin(
            "POST",
            f"/api/v1/channels/{self.cfg.channel}/version",
            headers={
                "content-type": "text/yaml",
                HEADER_ORG_KEY: ORG_KEY,
                HEADER_RESOURCE_NAME: version_name,
            },
            body=bundle,
        )
        self.receipts[version_name] = receipt
        version = self.cp.get_version(self.cfg.channel, version_name)
        self.version_hash[version_name] = version.content_hash
        self.t({"ev": "upload", "channel": self.cfg.channel, "version": version_name,
                "uid": receipt["version"]["uid"]})
        return receipt

    def publish_initial(self) -> None:
        v1 = self.cfg.versions[0]
        self.admin("POST", "/api/v1/channels", {"name": self.cfg.channel})
        self.t({"ev": "create_channel", "channel": self.cfg.channel})
        self.upload_version(v1)
        sub = self.admin(
            "POST",
            "/api/v1/subscriptions",
            {
                "name": self.cfg.subscription,
                "channel": self.cfg.channel,
                "version": v1,
                "tags": [self.cfg.subscription_tag],
            },
        )["subscription"]
        self.sub_id = sub["id"]
        self.t({"ev": "subscribe", "sub_id": self.sub_id, "version": v1,
                "tag": self.cfg.subscription_tag})
        rule = self.admin(
            "POST",
            "/api/v1/alerts",
            {
                "name": "stale-clusters",
                "condition": {"type": "cluster_stale", "max_silence": 3 * self.cfg.poll_interval},
            },
        )["rule"]
        self.stale_rule_id = rule["id"]

    def flip(self, version_name: str) -> None:
        self.admin(
            "PATCH",
            f"/api/v1/subscriptions/{self.sub_id}/version",
            {"version": version_name},
        )
        self.t({"ev": "flip", "sub_id": self.sub_id, "version": version_name})

    # -- event loop ----------------------------------------------------------

    def t(self, entry: dict) -> None:
        self.trace.append({"t": self.now, **entry})

    def schedule(self, at: int, fn: Callable[[], None]) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (at, self._seq, fn))

    def schedule_node_tick(self, sim_node: SimNode, at: int) -> None:
        if sim_node.pending_tick is not None and sim_node.pending_tick <= at:
            return
        sim_node.pending_tick = at
        self.schedule(at, lambda: self._node_tick(sim_node))

    def _node_tick(self, sim_node: SimNode) -> None:
        sim_node.pending_tick = None
        sim_node.node.step(self.now)
        self._after_node_activity(sim_node)
        self._reschedule(sim_node)

    def _reschedule(self, sim_node: SimNode) -> None:
        due = sim_node.node.next_due()
        if due is not None:
            self.schedule_node_tick(sim_node, max(int(due), self.now + 1))

    def _after_node_activity(self, sim_node: SimNode) -> None:
        store = sim_node.node.store
        applied = {
            rr.status.get("applied_hash")
            for rr in store.list(RR_KIND, namespace=AGENT_NAMESPACE)
            if rr.status.get("phase") == "Applied"
        }
        for version_name, digest in self.version_hash.items():
            if version_name in sim_node.converged_at or digest not in applied:
                continue
            if self.cfg.instances_per_cluster and not self._workload_at_version(sim_node, version_name):
                continue
            sim_node.converged_at[version_name] = self.now
            self.t({"ev": "converged", "cluster": sim_node.cluster_id, "version": version_name})
            if not sim_node.instances_created and self.cfg.instances_per_cluster:
                self._create_instances(sim_node)

    def _workload_at_version(self, sim_node: SimNode, version_name: str) -> bool:
        crs = sim_node.node.store.list(NGINX_KIND)
        if not sim_node.instances_created:
            return True  # nothing deployed yet; the operator itself is the workload
        return all(cr.status.get("servedVersion") == version_name for cr in crs)

    def _create_instances(self, sim_node: SimNode) -> None:
        """Admin creates application CRs directly against the cluster API."""
        sim_node.instances_created = True
        for j in range(self.cfg.instances_per_cluster):
            doc = {
                "apiVersion": NGINX_API_VERSION,
                "kind": NGINX_KIND,
                "metadata": {"namespace": INSTANCE_NAMESPACE, "name": f"web-{j}"},
                "spec": {"replicaCount": 1, "ingress": {"enabled": True}},
            }
            sim_node.node.store.apply(doc)
            self.t({"ev": "cluster_admin", "action": "create_cr",
                    "cluster": sim_node.cluster_id, "name": f"web-{j}"})
        sim_node.node.settle(self.now)

    def _alert_sweep(self, horizon: int, stop_check: Callable[[], bool]) -> None:
        firings = self.cp.evaluate_alerts(self.now)
        for firing in firings:
            entry = (firing["rule_id"], firing["subject"], firing["since"])
            if entry not in self.alert_firings:
                self.alert_firings.add(entry)
                self.t({"ev": "alert", "rule": firing["rule_id"], "subject": firing["subject"]})
        if self.now + self.cfg.poll_interval <= horizon and not stop_check():
            self.schedule(
                self.now + self.cfg.poll_interval,
                lambda: self._alert_sweep(horizon, stop_check),
            )

    def install_faults(self) -> None:
        by_id = {n.cluster_id: n for n in self.nodes}
        for fault in self.cfg.faults:
            if fault.kind == "agent_offline":
                sim_node = by_id[fault.cluster]
                self.schedule(fault.at, lambda n=sim_node: self._set_offline(n, True))
                self.schedule(fault.until, lambda n=sim_node: self._set_offline(n, False))
            elif fault.kind == "artifact_unreachable":
                self.schedule(fault.at, lambda: self._set_artifacts_offline(True))
                self.schedule(fault.until, lambda: self._set_artifacts_offline(False))
            elif fault.kind == "kill_pod":
                sim_node = by_id[fault.cluster]
                self.schedule(fault.at, lambda n=sim_node, f=fault: self._kill_pod(n, f.key))

    def _set_offline(self, sim_node: SimNode, offline: bool) -> None:
        sim_node.client.offline = offline
        self.t({"ev": "fault", "kind": "agent_offline" if offline else "agent_online",
                "cluster": sim_node.cluster_id})

    def _set_artifacts_offline(self, offline: bool) -> None:
        for sim_node in self.nodes:
            sim_node.client.artifacts_offline = offline
        self.t({"ev": "fault", "kind": "artifact_unreachable" if offline else "artifact_reachable"})
        if not offline:
            # Waking agents retry failed fetches at their next backoff slot.
            for sim_node in self.nodes:
                self._reschedule(sim_node)

    def _kill_pod(self, sim_node: SimNode, key_dict: dict | None) -> None:
        from ..cluster.store import ResourceKey

        store = sim_node.node.store
        if key_dict is not None:
            key = ResourceKey.from_dict(key_dict)
        else:
            pods = store.list("Pod")
            if not pods:
                return
            key = pods[0].key
        if store.get_optional(key) is None:
            return
        store.delete(key)
        self.t({"ev": "fault", "kind": "kill_pod", "cluster": sim_node.cluster_id,
                "pod": key.name})
        sim_node.node.settle(self.now)
        self._after_node_activity(sim_node)

    def matching_nodes(self) -> list[SimNode]:
        sub_tags = frozenset({self.cfg.subscription_tag})
        return [n for n in self.nodes if sub_tags <= n.tags]

    def run(self, stop_when: Callable[[], bool], horizon: int) -> bool:
        while self._heap:
            if stop_when():
                return True
            at, _, fn = heapq.heappop(self._heap)
            if at > horizon:
                return stop_when()
            self.now = at
            fn()
            self.events_processed += 1
        return stop_when()


def run_pull_rollout(cfg: SimConfig) -> SimReport:
    """Publish 1.0, wait for fleet convergence, flip to 2.0, measure again."""
    world = SimWorld(cfg)
    world.publish_initial()
    v1, v2 = cfg.versions
    flip_at = cfg.effective_flip_at()
    horizon = cfg.effective_horizon()

    for sim_node in world.nodes:
        world.schedule_node_tick(sim_node, sim_node.offset)
    world.schedule(flip_at, lambda: (world.upload_version(v2), world.flip(v2)))
    world.install_faults()
    matching = world.matching_nodes()

    def stopped() -> bool:
        return world.now >= flip_at and all(v2 in n.converged_at for n in matching)

    world.schedule(cfg.poll_interval, lambda: world._alert_sweep(horizon, stopped))
    finished = world.run(stopped, horizon)

    per_cluster = [n.converged_at.get(v2, -1) - flip_at for n in matching]
    report = SimReport(
        model="pull",
        num_clusters=cfg.num_clusters,
        convergence_time=max(per_cluster, default=0),
        per_cluster_times=per_cluster,
        events_processed=world.events_processed,
        alerts_fired=len(world.alert_firings),
        trace_digest=trace_digest(world.trace),
        converged_clusters=sum(1 for n in matching if v2 in n.converged_at),
        matching_clusters=len(matching),
        poll_interval=cfg.poll_interval,
    )
    report.trace = world.trace  # type: ignore[attr-defined]
    report.world = world  # type: ignore[attr-defined]
    if not finished:
        raise HorizonExceeded(
            f"pull rollout did not converge by t={horizon} "
            f"({report.converged_clusters}/{report.matching_clusters} clusters)",
            report=report,
        )
    return report


def run_push_rollout(cfg: SimConfig) -> SimReport:
    """Central pusher baseline: N jobs, bounded parallelism, fixed per-job cost."""
    trace: list[dict] = []
    parallelism = cfg.push_parallelism
    cost = cfg.per_cluster_push_cost
    offline: dict[str, tuple[int, int]] = {}
    global_block: tuple[int, int] | None = None
    for fault in cfg.faults:
        if fault.kind == "agent_offline":
            offline[fault.cluster] = (fault.at, fault.until)
        elif fault.kind == "artifact_unreachable":
            global_block = (fault.at, fault.until)

    workers = [0] * parallelism
    per_cluster: list[int] = []
    events = 0
    for i in range(cfg.num_clusters):
        cluster_id = cfg.cluster_id(i)
        worker = min(range(parallelism), key=lambda w: (workers[w], w))
        begin = workers[worker]
        window = offline.get(cluster_id)
        if window and window[0] <= begin < window[1]:
            begin = window[1]
        if global_block and global_block[0] <= begin < global_block[1]:
            begin = global_block[1]
        done = begin + cost
        workers[worker] = done
        per_cluster.append(done)
        trace.append({"t": begin, "ev": "push_job", "cluster": cluster_id, "done": done})
        events += 1

    convergence = max(per_cluster, default=0)
    report = SimReport(
        model="push",
        num_clusters=cfg.num_clusters,
        convergence_time=convergence,
        per_cluster_times=per_cluster,
        events_processed=events,
        alerts_fired=0,
        trace_digest=trace_digest(trace),
        converged_clusters=cfg.num_clusters,
        matching_clusters=cfg.num_clusters,
        push_parallelism=parallelism,
        per_cluster_push_cost=cost,
    )
    report.trace = trace  # type: ignore[attr-defined]
    if cfg.horizon is not None and convergence > cfg.horizon:
        raise HorizonExceeded(
            f"push rollout needs t={convergence}, beyond horizon {cfg.horizon}", report=report
        )
    return report


def compare_models(cfg: SimConfig) -> ComparisonTable:
    """Pull vs push convergence across the cluster-count sweep."""
    rows = []
    for n in cfg.sweep:
        sub = SimConfig.from_dict({**cfg.to_dict(), "num_clusters": n})
        pull = run_pull_rollout(sub)
        push = run_push_rollout(sub)
        rows.append(
            {
                "num_clusters": n,
                "pull_time": pull.convergence_time,
                "push_time": push.convergence_time,
            }
        )
    return ComparisonTable(
        rows=rows,
        poll_interval=cfg.poll_interval,
        push_parallelism=cfg.push_parallelism,
        per_cluster_push_cost=cfg.per_cluster_push_cost,
    )
