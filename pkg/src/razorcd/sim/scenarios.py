"""Scripted end-to-end scenarios reproducing the core deployment flows."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..cluster.facade import ClusterApiFacade
from ..cluster.store import ResourceKey
from ..errors import HorizonExceeded
from ..operators.deployment import reconcile_deployment
from ..operators.nginx import (
    NGINX_API_VERSION,
    NGINX_GROUP,
    NGINX_KIND,
    NGINX_PLURAL,
    OPERATOR_VERSION_ANNOTATION,
    operator_deployment_key,
)
from .config import SimConfig
from .harness import SimWorld, run_pull_rollout

SCENARIO_NAMES = (
    "operator_deploy",
    "instance_lifecycle",
    "pod_heal",
    "operator_upgrade",
    "cascade_delete",
)


@dataclass
class ScenarioResult:
    name: str
    passed: bool = True
    failures: list[str] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def check(self, condition: bool, message: str) -> None:
        if not condition:
            self.passed = False
            self.failures.append(message)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "failures": list(self.failures),
            "details": self.details,
        }


def run_e2e_scenario(name: str, cfg: SimConfig | None = None) -> ScenarioResult:
    if name not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIO_NAMES}")
    runner = globals()[f"_scenario_{name}"]
    return runner(cfg)


def _run_until_initial(world: SimWorld, cfg: SimConfig, result: ScenarioResult) -> bool:
    v1 = cfg.versions[0]
    matching = world.matching_nodes()
    for sim_node in world.nodes:
        world.schedule_node_tick(sim_node, sim_node.offset)

    def stopped() -> bool:
        return all(v1 in n.converged_at for n in matching)

    finished = world.run(stopped, cfg.effective_horizon())
    result.check(finished, f"initial rollout of {v1} did not converge")
    return finished


def _scenario_operator_deploy(cfg: SimConfig | None) -> ScenarioResult:
    result = ScenarioResult("operator_deploy")
    cfg = cfg or SimConfig(
        num_clusters=4,
        instances_per_cluster=0,
        cluster_tags={"cluster-0003": ["other"]},
    )
    world = SimWorld(cfg)
    world.publish_initial()
    receipt = world.receipts[cfg.versions[0]]
    result.check(set(receipt) == {"status", "version"}, f"receipt fields: {sorted(receipt)}")
    result.check(receipt.get("status") == "success", f"receipt status: {receipt.get('status')}")
    version = receipt.get("version", {})
    result.check(
        set(version) == {"uid", "name", "location"},
        f"receipt version fields: {sorted(version)}",
    )
    result.check(version.get("name") == cfg.versions[0], f"receipt version name: {version.get('name')}")

    if _run_until_initial(world, cfg, result):
        op_key = operator_deployment_key()
        for sim_node in world.matching_nodes():
            store = sim_node.node.store
            result.check(
                store.get_optional(op_key) is not None,
                f"{sim_node.cluster_id}: operator deployment missing",
            )
            result.check(
                store.has_crd(NGINX_GROUP, NGINX_KIND),
                f"{sim_node.cluster_id}: application CRD missing",
            )
        outsiders = [n for n in world.nodes if n not in world.matching_nodes()]
        result.check(len(outsiders) == 1, f"expected 1 non-matching cluster, got {len(outsiders)}")
        for sim_node in outsiders:
            store = sim_node.node.store
            result.check(
                store.get_optional(op_key) is None,
                f"{sim_node.cluster_id}: operator deployed to non-matching cluster",
            )
            result.check(
                not store.has_crd(NGINX_GROUP, NGINX_KIND),
                f"{sim_node.cluster_id}: CRD registered on non-matching cluster",
            )
            result.check(
                not store.all_objects() or all(
                    o.key.namespace == "razeedeploy" for o in store.all_objects()
                ),
                f"{sim_node.cluster_id}: workload objects present",
            )
    result.details["receipt"] = receipt
    result.trace = world.trace
    return result


def _instance_world(cfg: SimConfig | None, result: ScenarioResult):
    cfg = cfg or SimConfig(num_clusters=1, instances_per_cluster=0)
    world = SimWorld(cfg)
    world.publish_initial()
    ok = _run_until_initial(world, cfg, result)
    return world, cfg, ok


def _scenario_instance_lifecycle(cfg: SimConfig | None) -> ScenarioResult:
    result = ScenarioResult("instance_lifecycle")
    world, cfg, ok = _instance_world(cfg, result)
    if not ok:
        result.trace = world.trace
        return result
    sim_node = world.nodes[0]
    store = sim_node.node.store
    store.bearer_token = "scenario-token"
    facade = ClusterApiFacade(store)
    headers = {"Authorization": "Bearer scenario-token"}
    ns = "saran-nginx"
    cr_body = json.dumps(
        {
            "apiVersion": NGINX_API_VERSION,
            "kind": NGINX_KIND,
            "metadata": {"name": "example-nginx"},
            "spec": {"replicaCount": 1, "ingress": {"enabled": True}},
        }
    ).encode()
    path = f"/apis/{NGINX_GROUP}/v1alpha1/namespaces/{ns}/{NGINX_PLURAL}"
    status, _ = facade.handle("POST", path, headers, cr_body)
    result.check(status == 201, f"CR create returned {status}")
    sim_node.node.settle(world.now)

    cr_key = ResourceKey(NGINX_API_VERSION, NGINX_KIND, ns, "example-nginx")
    owned = store.owned_by(cr_key)
    kinds = sorted(o.key.kind for o in owned)
    result.check(kinds == ["Deployment", "Pod", "Route", "Service"], f"owned kinds: {kinds}")
    dep = store.get_optional(ResourceKey("apps/v1", "Deployment", ns, "example-nginx"))
    result.check(dep is not None and dep.status.get("readyReplicas") == 1, "deployment not ready")
    cr = store.get_optional(cr_key)
    result.check(cr is not None and cr.status.get("phase") == "Running", "CR not Running")

    status, _ = facade.handle("DELETE", f"{path}/example-nginx", headers)
    result.check(status == 200, f"CR delete returned {status}")
    sim_node.node.settle(world.now)
    result.check(store.get_optional(cr_key) is None, "CR still present after delete")
    leftovers = [o.key for o in store.owned_by(cr_key)]
    result.check(not leftovers, f"objects still owned by deleted CR: {leftovers}")
    in_ns = [o.key for o in store.all_objects() if o.key.namespace == ns]
    result.check(not in_ns, f"objects left in instance namespace: {in_ns}")
    result.trace = world.trace
    return result


def _scenario_pod_heal(cfg: SimConfig | None) -> ScenarioResult:
    result = ScenarioResult("pod_heal")
    world, cfg, ok = _instance_world(cfg, result)
    if not ok:
        result.trace = world.trace
        return result
    sim_node = world.nodes[0]
    store = sim_node.node.store
    store.apply(
        {
            "apiVersion": NGINX_API_VERSION,
            "kind": NGINX_KIND,
            "metadata": {"namespace": "apps", "name": "heal-me"},
            "spec": {"replicaCount": 3, "ingress": {"enabled": False}},
        }
    )
    sim_node.node.settle(world.now)
    dep_key = ResourceKey("apps/v1", "Deployment", "apps", "heal-me")
    result.check(store.get(dep_key).status.get("readyReplicas") == 3, "3 replicas not ready")

    store.delete(ResourceKey("v1", "Pod", "apps", "heal-me-1"))
    passes = 0
    while passes < 10:
        reconcile_deployment(store, dep_key)
        passes += 1
        if store.get(dep_key).status.get("readyReplicas") == 3:
            break
    result.check(passes <= 3, f"healing took {passes} passes")
    result.details["passes"] = passes
    pods = store.list("Pod", namespace="apps")
    result.check(len(pods) == 3, f"expected 3 pods, found {len(pods)}")
    result.trace = world.trace
    return result


def _scenario_operator_upgrade(cfg: SimConfig | None) -> ScenarioResult:
    result = ScenarioResult("operator_upgrade")
    cfg = cfg or SimConfig(num_clusters=3, instances_per_cluster=1)
    try:
        report = run_pull_rollout(cfg)
    except HorizonExceeded as exc:
        result.check(False, str(exc))
        if exc.report is not None:
            result.trace = getattr(exc.report, "trace", [])
        return result
    world = report.world
    v2 = cfg.versions[1]
    flip_at = cfg.effective_flip_at()
    result.check(
        all(t <= 2 * cfg.poll_interval for t in report.per_cluster_times),
        f"per-cluster convergence over 2 poll intervals: {report.per_cluster_times}",
    )
    for sim_node in world.matching_nodes():
        store = sim_node.node.store
        op = store.get_optional(operator_deployment_key())
        version = op.annotations.get(OPERATOR_VERSION_ANNOTATION) if op else None
        result.check(version == v2, f"{sim_node.cluster_id}: operator at {version}")
        for cr in store.list(NGINX_KIND):
            result.check(
                cr.status.get("servedVersion") == v2,
                f"{sim_node.cluster_id}/{cr.key.name}: servedVersion {cr.status.get('servedVersion')}",
            )
    late_admin = [e for e in world.trace if e["ev"] == "cluster_admin" and e["t"] > flip_at]
    result.check(not late_admin, f"cluster-side admin actions after flip: {late_admin}")
    result.details["per_cluster_times"] = report.per_cluster_times
    result.trace = world.trace
    return result


def _scenario_cascade_delete(cfg: SimConfig | None) -> ScenarioResult:
    result = ScenarioResult("cascade_delete")
    world, cfg, ok = _instance_world(cfg, result)
    if not ok:
        result.trace = world.trace
        return result
    sim_node = world.nodes[0]
    store = sim_node.node.store
    cr_key = ResourceKey(NGINX_API_VERSION, NGINX_KIND, "apps", "web")
    store.apply(
        {
            "apiVersion": NGINX_API_VERSION,
            "kind": NGINX_KIND,
            "metadata": {"namespace": "apps", "name": "web"},
            "spec": {"replicaCount": 2, "ingress": {"enabled": True}},
        }
    )
    sim_node.node.settle(world.now)
    owned_before = store.owned_by(cr_key)
    result.check(len(owned_before) == 5, f"expected 5 owned objects, got {len(owned_before)}")

    before = {o.key for o in store.all_objects()}
    store.delete(cr_key)
    sim_node.node.settle(world.now)
    after = {o.key for o in store.all_objects()}
    gone = before - after
    result.check(cr_key in gone, "CR survived delete")
    result.check(not store.owned_by(cr_key), "objects still owned by deleted CR")
    for obj in store.all_objects():
        for ref in obj.owner_refs:
            result.check(
                store.get_optional(ref) is not None,
                f"{obj.key} has dangling owner {ref}",
            )
    survivors = {k for k in gone if k.namespace != "apps"}
    result.check(not survivors, f"cascade removed objects outside the CR subtree: {survivors}")
    result.trace = world.trace
    return result
