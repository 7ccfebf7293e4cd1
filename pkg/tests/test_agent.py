from __future__ import annotations

import pytest

from razorcd.agent.client import RouterClient
from razorcd.agent.config import AgentConfig
from razorcd.agent.node import ClusterNode
from razorcd.bundles import dump_bundle, hash_bundle_bytes
from razorcd.cluster.store import ClusterStore, ResourceKey, spec_hash
from razorcd.conventions import (
    AGENT_NAMESPACE,
    ANNOTATION_SUB_ID,
    ANNOTATION_VERSION_UID,
    RR_API_VERSION,
    RR_KIND,
    WATCH_LABEL,
)
from razorcd.operators.nginx import NGINX_GROUP, NGINX_KIND, build_operator_bundle

from conftest import ORG_KEY, make_bundle, upload


def agent_config(cluster_id="cluster-1", tags=("demo",), poll=30, report=60, debounce=5):
    return AgentConfig(
        cluster_id=cluster_id,
        org_key=ORG_KEY,
        tags=frozenset(tags),
        poll_interval=poll,
        report_interval=report,
        watch_debounce=debounce,
    )


@pytest.fixture
def world(cp, router):
    """Control plane with the operator channel published, plus one agent node."""
    cp.create_channel("nginx-operator")
    upload(cp, "nginx-operator", "1.0", build_operator_bundle("1.0"))
    cp.create_subscription("nginx-test", "nginx-operator", "1.0", {"demo"})
    client = RouterClient(router, ORG_KEY)
    node = ClusterNode(agent_config(), client)
    return cp, client, node


def store_digest(store: ClusterStore) -> tuple:
    return tuple(
        (o.key, spec_hash(o.spec), spec_hash(o.status), o.generation, o.resource_version)
        for o in store.all_objects()
    )


def rr_objects(store: ClusterStore):
    return store.list(RR_KIND, namespace=AGENT_NAMESPACE)


# -- sync_subscriptions ----------------------------------------------------------


def test_sync_creates_remote_resource(world):
    cp, client, node = world
    result = node.agent.sync_subscriptions(0)
    assert (result.created, result.updated, result.pruned) == (1, 0, 0)
    rrs = rr_objects(node.store)
    assert len(rrs) == 1
    assert rrs[0].key.namespace == AGENT_NAMESPACE
    assert rrs[0].spec["sub_revision"] == 1
    assert rrs[0].spec["artifact_url"].startswith("/api/v1/artifacts/")


def test_sync_prunes_vanished_subscription(world):
    """Diff oracle: RR set always mirrors the current handout sub_id set."""
    cp, client, node = world
    node.step(0)
    assert len(rr_objects(node.store)) == 1
    applied = rr_objects(node.store)[0].status["applied_keys"]
    assert applied  # bundle objects installed

    sub_id = cp.list_subscriptions()[0]["id"]
    cp.delete_subscription(sub_id)
    result = node.agent.sync_subscriptions(30)
    assert result.pruned == 1
    assert rr_objects(node.store) == []
    # Cascade removed everything the RR had applied.
    for key_dict in applied:
        assert node.store.get_optional(ResourceKey.from_dict(key_dict)) is None


def test_sync_fail_static_on_outage(world):
    cp, client, node = world
    node.step(0)
    before = store_digest(node.store)
    client.offline = True
    result = node.agent.sync_subscriptions(30)
    assert (result.created, result.updated, result.pruned) == (0, 0, 0)
    assert result.error_code == "control_plane_unreachable"
    assert store_digest(node.store) == before  # workloads untouched


def test_sync_handout_revision_updates_rr(world):
    cp, client, node = world
    node.step(0)
    upload(cp, "nginx-operator", "2.0", build_operator_bundle("2.0"))
    sub_id = cp.list_subscriptions()[0]["id"]
    cp.set_subscription_version(sub_id, "2.0")
    result = node.agent.sync_subscriptions(30)
    assert result.updated == 1
    assert rr_objects(node.store)[0].spec["sub_revision"] == 2


# -- reconcile_remote_resource ------------------------------------------------------


def test_reconcile_applies_operator_bundle(world):
    cp, client, node = world
    node.step(0)
    store = node.store
    rr = rr_objects(store)[0]
    assert rr.status["phase"] == "Applied"
    assert rr.status["applied_hash"] == hash_bundle_bytes(build_operator_bundle("1.0"))
    kinds = {ResourceKey.from_dict(k).kind for k in rr.status["applied_keys"]}
    assert kinds == {"ServiceAccount", "Role", "RoleBinding", "Deployment"}
    assert store.has_crd(NGINX_GROUP, NGINX_KIND)
    operator = store.get(ResourceKey("apps/v1", "Deployment", "nginx-operator", "nginx-operator"))
    assert operator.annotations[ANNOTATION_SUB_ID] == rr.spec["sub_id"]
    assert operator.annotations[ANNOTATION_VERSION_UID] == rr.spec["version_uid"]
    assert rr.key in operator.owner_refs


def test_reconcile_idempotent_zero_mutations(world):
    cp, client, node = world
    node.step(0)
    store = node.store
    rr_key = rr_objects(store)[0].key
    before = store_digest(store)
    outcome = node.agent.reconcile_remote_resource(rr_key)
    assert outcome.result == "done"
    assert outcome.actions_taken == 0
    assert store_digest(store) == before


def test_reconcile_prunes_renamed_documents(cp, router):
    """Set-difference oracle: keys in old bundle but not the new one get deleted."""
    cp.create_channel("c")
    upload(cp, "c", "1.0", make_bundle("alpha", "beta"))
    upload(cp, "c", "2.0", make_bundle("alpha", "gamma"))
    sub = cp.create_subscription("s", "c", "1.0", {"demo"})
    client = RouterClient(router, ORG_KEY)
    node = ClusterNode(agent_config(), client)
    node.step(0)
    store = node.store
    names = {o.key.name for o in store.list("ConfigMap")}
    assert names == {"alpha", "beta"}

    cp.set_subscription_version(sub.id, "2.0")
    node.step(30)
    names = {o.key.name for o in store.list("ConfigMap")}
    old = {"alpha", "beta"}
    new = {"alpha", "gamma"}
    assert names == new
    for gone in old - new:
        assert store.get_optional(ResourceKey("v1", "ConfigMap", "demo", gone)) is None


def test_reconcile_fetch_failure_marks_failed(world):
    cp, client, node = world
    node.step(0)
    store = node.store
    before_workload = {o.key for o in store.all_objects() if o.key.kind != RR_KIND}

    upload(cp, "nginx-operator", "2.0", build_operator_bundle("2.0"))
    sub_id = cp.list_subscriptions()[0]["id"]
    cp.set_subscription_version(sub_id, "2.0")
    client.artifacts_offline = True
    node.step(30)
    rr = rr_objects(store)[0]
    assert rr.status["phase"] == "Failed"
    assert "fetch_failed" in rr.status["last_error"]
    after_workload = {o.key for o in store.all_objects() if o.key.kind != RR_KIND}
    assert after_workload == before_workload  # fail static

    client.artifacts_offline = False
    due = node.runtime.next_due()
    node.step(int(due))
    rr = rr_objects(store)[0]
    assert rr.status["phase"] == "Applied"
    assert rr.status["applied_hash"] == hash_bundle_bytes(build_operator_bundle("2.0"))


def test_reconcile_hash_mismatch(cp, router, monkeypatch):
    cp.create_channel("c")
    upload(cp, "c", "1.0", make_bundle("a"))
    cp.create_subscription("s", "c", "1.0", {"demo"})
    client = RouterClient(router, ORG_KEY)
    real_fetch = client.fetch_artifact
    monkeypatch.setattr(
        client, "fetch_artifact", lambda uid: (real_fetch(uid)[0], "0" * 64)
    )
    node = ClusterNode(agent_config(), client)
    node.step(0)
    rr = rr_objects(node.store)[0]
    assert rr.status["phase"] == "Failed"
    assert "hash_mismatch" in rr.status["last_error"]
    assert node.store.list("ConfigMap") == []


def test_reconcile_malformed_bundle(cp, router, monkeypatch):
    cp.create_channel("c")
    upload(cp, "c", "1.0", make_bundle("a"))
    cp.create_subscription("s", "c", "1.0", {"demo"})
    client = RouterClient(router, ORG_KEY)
    monkeypatch.setattr(client, "fetch_artifact", lambda uid: (b"{not yaml", ""))
    node = ClusterNode(agent_config(), client)
    node.step(0)
    rr = rr_objects(node.store)[0]
    assert rr.status["phase"] == "Failed"
    assert "malformed_bundle" in rr.status["last_error"]


def test_conflict_smaller_sub_id_wins(cp, router):
    """Two subscriptions shipping the same ResourceKey: the lexicographically
    smaller sub id keeps the object, the loser's RR reports a conflict."""
    shared = make_bundle("shared")
    cp.create_channel("c")
    upload(cp, "c", "1.0", shared)
    cp.create_subscription("a-sub", "c", "1.0", {"demo"})   # sub-0001
    cp.create_subscription("b-sub", "c", "1.0", {"demo"})   # sub-0002
    client = RouterClient(router, ORG_KEY)
    node = ClusterNode(agent_config(), client)
    node.step(0)
    store = node.store
    rrs = {rr.spec["sub_id"]: rr for rr in rr_objects(store)}
    assert rrs["sub-0001"].status["phase"] == "Applied"
    assert rrs["sub-0002"].status["phase"] == "Failed"
    assert "conflict" in rrs["sub-0002"].status["last_error"]
    obj = store.get(ResourceKey("v1", "ConfigMap", "demo", "shared"))
    assert obj.annotations[ANNOTATION_SUB_ID] == "sub-0001"


def test_conflict_takeover_by_smaller_sub_id(cp, router):
    cp.create_channel("c")
    receipt = upload(cp, "c", "1.0", make_bundle("shared"))
    uid = receipt["version"]["uid"]
    client = RouterClient(router, ORG_KEY)
    node = ClusterNode(agent_config(), client)
    store = node.store

    def rr_doc(sub_id):
        return {
            "apiVersion": RR_API_VERSION,
            "kind": RR_KIND,
            "metadata": {"namespace": AGENT_NAMESPACE, "name": f"rr-{sub_id}"},
            "spec": {"artifact_url": f"/api/v1/artifacts/{uid}", "version_uid": uid,
                     "sub_id": sub_id, "sub_revision": 1},
        }

    store.apply(rr_doc("zzz"))
    zzz_key = ResourceKey(RR_API_VERSION, RR_KIND, AGENT_NAMESPACE, "rr-zzz")
    assert node.agent.reconcile_remote_resource(zzz_key).result == "done"
    assert store.get(ResourceKey("v1", "ConfigMap", "demo", "shared")).annotations[ANNOTATION_SUB_ID] == "zzz"

    store.apply(rr_doc("aaa"))
    aaa_key = ResourceKey(RR_API_VERSION, RR_KIND, AGENT_NAMESPACE, "rr-aaa")
    assert node.agent.reconcile_remote_resource(aaa_key).result == "done"
    assert store.get(ResourceKey("v1", "ConfigMap", "demo", "shared")).annotations[ANNOTATION_SUB_ID] == "aaa"
    # The displaced subscription now loses its reconcile.
    outcome = node.agent.reconcile_remote_resource(zzz_key)
    assert outcome.result == "error"
    assert store.get(zzz_key).status["phase"] == "Failed"


# -- watch keeper ---------------------------------------------------------------------


@pytest.fixture
def keeper_world(cp, router):
    cp.register_cluster(ORG_KEY, "cluster-1", {"demo"})
    client = RouterClient(router, ORG_KEY)
    node = ClusterNode(agent_config(), client)
    node.agent._registered_upstream = True
    return cp, client, node


def labeled_doc(name, level, kind="ConfigMap"):
    return {
        "apiVersion": "v1",
        "kind": kind,
        "metadata": {"namespace": "demo", "name": name, "labels": {WATCH_LABEL: level}},
        "spec": {"data": name},
    }


def test_scan_levels_and_label_gate(keeper_world):
    cp, client, node = keeper_world
    store = node.store
    store.apply(labeled_doc("lite-cm", "lite"))
    store.apply(labeled_doc("detail-cm", "detail"))
    store.apply(labeled_doc("debug-cm", "debug"))
    store.apply({"apiVersion": "v1", "kind": "ConfigMap",
                 "metadata": {"namespace": "demo", "name": "unlabeled"}, "spec": {}})
    store.apply(labeled_doc("bogus-cm", "verbose"))  # unknown level: excluded
    sent = node.agent.keeper.scan(now=5)
    assert sent == 3

    by_name = {r["resource_key"]["name"]: r for r in cp.query_resources("cluster-1")}
    assert set(by_name) == {"lite-cm", "detail-cm", "debug-cm"}
    assert "spec" not in by_name["lite-cm"]["payload"]
    assert by_name["detail-cm"]["payload"]["spec"] == {"data": "detail-cm"}
    assert all(r["trigger"] == "interval" for r in by_name.values())

    # Debug reports round-trip the full object snapshot.
    from razorcd.bundles import canonical_json
    from razorcd.cluster.store import ResourceKey

    debug_obj = store.get(ResourceKey("v1", "ConfigMap", "demo", "debug-cm"))
    assert canonical_json(by_name["debug-cm"]["payload"]["object"]) == canonical_json(
        debug_obj.to_doc()
    )


def test_scan_deterministic_payloads(keeper_world):
    cp, client, node = keeper_world
    node.store.apply(labeled_doc("cm", "lite"))
    node.agent.keeper.scan(now=5)
    node.agent.keeper.scan(now=65)
    history = cp.report_history(
        "cluster-1", {"apiVersion": "v1", "kind": "ConfigMap", "namespace": "demo", "name": "cm"}
    )
    assert len(history) == 2
    assert history[0]["payload"] == history[1]["payload"]
    assert history[0]["observed_at"] != history[1]["observed_at"]


def test_event_reports_debounced(keeper_world):
    """Oracle: a burst of 10 edits within the debounce window emits 1 report."""
    cp, client, node = keeper_world
    store = node.store
    keeper = node.agent.keeper
    keeper.process_events(0)  # drain install noise
    for i in range(10):
        store.apply({**labeled_doc("cm", "lite"), "spec": {"rev": i}})
    emitted = keeper.process_events(now=3)
    assert emitted == 1
    reports = cp.query_resources("cluster-1")
    assert len(reports) == 1
    assert reports[0]["trigger"] == "event"

    # Past the debounce window a new edit reports again.
    store.apply({**labeled_doc("cm", "lite"), "spec": {"rev": 99}})
    assert keeper.process_events(now=3 + node.config.watch_debounce) == 1


def test_event_on_unlabeled_object_ignored(keeper_world):
    cp, client, node = keeper_world
    keeper = node.agent.keeper
    keeper.process_events(0)
    node.store.apply({"apiVersion": "v1", "kind": "ConfigMap",
                      "metadata": {"namespace": "demo", "name": "plain"}, "spec": {}})
    assert keeper.process_events(1) == 0
    assert cp.query_resources("cluster-1") == []


def test_reports_buffered_during_outage(keeper_world):
    cp, client, node = keeper_world
    node.store.apply(labeled_doc("cm", "lite"))
    client.offline = True
    node.agent.keeper.scan(now=5)
    assert node.agent.keeper.buffered_batches == 1
    assert cp.query_resources("cluster-1") == []
    client.offline = False
    node.agent.keeper.scan(now=65)
    assert node.agent.keeper.buffered_batches == 0
    history = cp.report_history(
        "cluster-1", {"apiVersion": "v1", "kind": "ConfigMap", "namespace": "demo", "name": "cm"}
    )
    assert len(history) == 2  # buffered batch plus the fresh one


# -- tick scheduling ---------------------------------------------------------------------


def test_first_tick_runs_sync_and_scan(world):
    cp, client, node = world
    summary = node.agent.run_tick(0)
    assert summary.synced and summary.scanned


def test_tick_before_interval_no_sync(world):
    cp, client, node = world
    node.agent.run_tick(0)
    summary = node.agent.run_tick(10)
    assert not summary.synced and not summary.scanned


def test_tick_interval_arithmetic_oracle(world):
    """Oracle: syncs == number of tick times t with t >= next boundary, where
    each sync moves the boundary to t + poll_interval."""
    cp, client, node = world
    tick_times = [0, 30, 45]

    boundary = None
    expected = 0
    for t in tick_times:
        if boundary is None or t >= boundary:
            expected += 1
            boundary = t + node.config.poll_interval
    assert expected == 2

    synced = sum(1 for t in tick_times if node.agent.run_tick(t).synced)
    assert synced == expected
