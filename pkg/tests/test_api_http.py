from __future__ import annotations

import json

import pytest
import requests

from razorcd.agent.client import HttpClient
from razorcd.agent.config import AgentConfig
from razorcd.agent.node import ClusterNode
from razorcd.bundles import hash_bundle_bytes
from razorcd.control_plane.api import ApiRouter
from razorcd.control_plane.config import load_server_config
from razorcd.control_plane.core import ControlPlane
from razorcd.control_plane.server import ControlPlaneServer
from razorcd.operators.nginx import build_operator_bundle

from conftest import API_KEY, CREDS, ORG_KEY, USER_ID, make_bundle

ADMIN = {"x-api-key": API_KEY, "x-user-id": USER_ID}
ORG = {"razeedash-org-key": ORG_KEY}


def post_json(router, path, payload, headers=ADMIN):
    return router.handle("POST", path, headers, {}, json.dumps(payload).encode())


# -- router ---------------------------------------------------------------------


def test_upload_wire_format(router):
    post_json(router, "/api/v1/channels", {"name": "nginx-operator"})
    bundle = b"apiVersion: v1\nkind: ConfigMap\nmetadata: {name: a, namespace: ns}\n"
    response = router.handle(
        "POST",
        "/api/v1/channels/nginx-operator/version",
        {
            "content-type": "text/yaml",
            "razeedash-org-key": ORG_KEY,
            "resource-name": "1.0",
            "x-api-key": API_KEY,
            "x-user-id": USER_ID,
        },
        {},
        bundle,
    )
    assert response.status == 200
    receipt = response.json()
    assert receipt["status"] == "success"
    assert set(receipt["version"]) == {"uid", "name", "location"}
    assert receipt["version"]["name"] == "1.0"


def test_upload_missing_org_key_unauthorized(router):
    post_json(router, "/api/v1/channels", {"name": "c"})
    response = router.handle(
        "POST", "/api/v1/channels/c/version",
        {"resource-name": "1.0", **ADMIN}, {}, make_bundle("a"),
    )
    assert response.status == 401
    err = response.json()
    assert err["status"] == "error"
    assert err["code"] == "unauthorized"
    assert set(err) == {"status", "code", "message"}


def test_error_body_shape_and_codes(router):
    response = post_json(router, "/api/v1/channels", {"name": ""})
    assert response.status == 400
    assert response.json()["code"] == "invalid_name"

    post_json(router, "/api/v1/channels", {"name": "c"})
    response = post_json(router, "/api/v1/channels", {"name": "c"})
    assert response.status == 409
    assert response.json()["code"] == "duplicate_channel"

    response = router.handle("GET", "/api/v1/channels", {"x-api-key": "nope", "x-user-id": "n"})
    assert response.status == 401
    response = router.handle("GET", "/api/v1/nothing", ADMIN)
    assert response.status == 404


def test_subscription_endpoints(router, cp):
    post_json(router, "/api/v1/channels", {"name": "c"})
    router.handle(
        "POST", "/api/v1/channels/c/version",
        {"resource-name": "1.0", "razeedash-org-key": ORG_KEY, **ADMIN}, {}, make_bundle("a"),
    )
    response = post_json(
        router, "/api/v1/subscriptions",
        {"name": "s", "channel": "c", "version": "1.0", "tags": ["demo"]},
    )
    assert response.status == 201
    sub = response.json()["subscription"]
    assert sub["tags"] == ["demo"]

    response = router.handle(
        "PATCH", f"/api/v1/subscriptions/{sub['id']}/version",
        ADMIN, {}, json.dumps({"version": "9.9"}).encode(),
    )
    assert response.status == 404
    assert response.json()["code"] == "version_not_found"

    listing = router.handle("GET", "/api/v1/subscriptions", ADMIN).json()
    assert [s["id"] for s in listing["subscriptions"]] == [sub["id"]]

    assert router.handle("DELETE", f"/api/v1/subscriptions/{sub['id']}", ADMIN).status == 200
    assert router.handle("GET", "/api/v1/subscriptions", ADMIN).json()["subscriptions"] == []


def test_cluster_poll_and_artifact_endpoints(router):
    post_json(router, "/api/v1/channels", {"name": "c"})
    upload_response = router.handle(
        "POST", "/api/v1/channels/c/version",
        {"resource-name": "1.0", "razeedash-org-key": ORG_KEY, **ADMIN}, {}, make_bundle("a"),
    )
    uid = upload_response.json()["version"]["uid"]
    post_json(router, "/api/v1/subscriptions",
              {"name": "s", "channel": "c", "version": "1.0", "tags": ["demo"]})
    response = post_json(router, "/api/v1/clusters/register",
                         {"cluster_id": "cl-1", "tags": ["demo"]}, headers=ORG)
    assert response.status == 200

    poll = router.handle("GET", "/api/v1/clusters/cl-1/subscriptions", ORG, {"tags": "demo"})
    handouts = poll.json()["subscriptions"]
    assert len(handouts) == 1
    assert handouts[0]["version_uid"] == uid

    artifact = router.handle("GET", f"/api/v1/artifacts/{uid}", ORG)
    assert artifact.status == 200
    assert artifact.body == make_bundle("a")
    assert artifact.headers["x-content-hash"] == hash_bundle_bytes(artifact.body)
    assert artifact.headers["content-type"] == "text/yaml"

    # Wrong credentials on every cluster-facing endpoint.
    bad = {"razeedash-org-key": "nope"}
    assert router.handle("GET", f"/api/v1/artifacts/{uid}", bad).status == 401
    assert router.handle("GET", "/api/v1/clusters/cl-1/subscriptions", bad).status == 401
    assert post_json(router, "/api/v1/clusters/register",
                     {"cluster_id": "x", "tags": []}, headers=bad).status == 401


def test_reports_and_resources_endpoints(router):
    post_json(router, "/api/v1/clusters/register", {"cluster_id": "cl-1", "tags": []}, headers=ORG)
    report = {
        "resource_key": {"apiVersion": "apps/v1", "kind": "Deployment",
                         "namespace": "d", "name": "w"},
        "level": "lite",
        "payload": {"metadata": {"name": "w", "labels": {}}, "status": {"phase": "Running"}},
        "observed_at": 1.0,
        "trigger": "interval",
    }
    response = router.handle(
        "POST", "/api/v1/clusters/cl-1/reports", ORG, {},
        json.dumps({"reports": [report], "sent_at": 1.0}).encode(),
    )
    assert response.status == 200
    assert response.json()["ack"] == {"stored": 1}

    resources = router.handle("GET", "/api/v1/clusters/cl-1/resources", ADMIN, {"kind": "Deployment"})
    assert len(resources.json()["resources"]) == 1
    clusters = router.handle("GET", "/api/v1/clusters", ADMIN).json()["clusters"]
    assert clusters[0]["resource_count"] == 1


def test_alert_endpoints_with_injected_clock(router, cp, clock):
    clock.now = 0.0
    post_json(router, "/api/v1/clusters/register", {"cluster_id": "cl-1", "tags": []}, headers=ORG)
    response = post_json(router, "/api/v1/alerts",
                         {"name": "stale", "condition": {"type": "cluster_stale", "max_silence": 30}})
    assert response.status == 201
    rule_id = response.json()["rule"]["id"]

    quiet = router.handle("GET", "/api/v1/alerts/firings", ADMIN, {"now": "10"}).json()
    assert quiet["firings"] == []
    firing = router.handle("GET", "/api/v1/alerts/firings", ADMIN, {"now": "100"}).json()
    assert firing["firings"] == [{"rule_id": rule_id, "subject": "cl-1", "since": 30.0}]

    listing = router.handle("GET", "/api/v1/alerts", ADMIN).json()["rules"]
    assert len(listing) == 1
    assert router.handle("DELETE", f"/api/v1/alerts/{rule_id}", ADMIN).status == 200
    assert router.handle("GET", "/api/v1/alerts", ADMIN).json()["rules"] == []


def test_responses_are_canonical_json(router):
    post_json(router, "/api/v1/channels", {"name": "zeta"})
    post_json(router, "/api/v1/channels", {"name": "alpha"})
    body = router.handle("GET", "/api/v1/channels", ADMIN).body.decode()
    assert body == json.dumps(json.loads(body), sort_keys=True, separators=(",", ":"))


# -- real server ---------------------------------------------------------------------


@pytest.fixture
def live_server(cp):
    server = ControlPlaneServer(ApiRouter(cp), "127.0.0.1", 0)
    server.start_background()
    yield server
    server.shutdown()


def test_http_round_trip(live_server, cp):
    url = live_server.url
    response = requests.post(f"{url}/api/v1/channels", json={"name": "nginx-operator"},
                             headers=ADMIN, timeout=5)
    assert response.status_code == 201
    bundle = build_operator_bundle("1.0")
    response = requests.post(
        f"{url}/api/v1/channels/nginx-operator/version",
        data=bundle,
        headers={"content-type": "text/yaml", "razeedash-org-key": ORG_KEY,
                 "resource-name": "1.0", **ADMIN},
        timeout=5,
    )
    assert response.status_code == 200
    assert response.json()["status"] == "success"
    assert response.headers["access-control-allow-origin"] == "*"

    preflight = requests.options(f"{url}/api/v1/channels", timeout=5)
    assert preflight.status_code == 204
    assert "x-api-key" in preflight.headers["access-control-allow-headers"]


def test_agent_over_real_http(live_server, cp):
    cp.create_channel("c")
    cp.upload_version("c", "1.0", make_bundle("cm-1"),
                      org_key=ORG_KEY, api_key=API_KEY, user_id=USER_ID)
    cp.create_subscription("s", "c", "1.0", {"demo"})
    client = HttpClient(live_server.url, ORG_KEY)
    node = ClusterNode(
        AgentConfig(cluster_id="http-cluster", org_key=ORG_KEY, tags=frozenset({"demo"})),
        client,
    )
    summary = node.step(0)
    assert summary.synced
    assert summary.sync_result.created == 1
    names = {o.key.name for o in node.store.list("ConfigMap")}
    assert names == {"cm-1"}
    inventory = cp.query_inventory()
    assert [c["cluster_id"] for c in inventory] == ["http-cluster"]


def test_http_error_passthrough(live_server):
    response = requests.post(f"{live_server.url}/api/v1/channels", json={"name": "x"},
                             headers={"x-api-key": "bad", "x-user-id": "bad"}, timeout=5)
    assert response.status_code == 401
    assert response.json() == {
        "status": "error", "code": "unauthorized", "message": "invalid api key or user id"
    }


# -- server config ---------------------------------------------------------------------


def test_server_config_env_overrides(tmp_path):
    config_file = tmp_path / "server.yaml"
    config_file.write_text("listen: 127.0.0.1:9000\norg_key: from-file\n")
    cfg = load_server_config(config_file, env={})
    assert cfg.port == 9000
    assert cfg.org_key == "from-file"

    cfg = load_server_config(
        config_file,
        env={"RAZORCD_LISTEN": "0.0.0.0:7777", "RAZORCD_ORG_KEY": "from-env",
             "RAZORCD_STORE_DIR": "/tmp/store"},
    )
    assert cfg.listen == "0.0.0.0:7777"
    assert cfg.org_key == "from-env"
    assert cfg.store_dir == "/tmp/store"


def test_server_config_defaults():
    cfg = load_server_config(None, env={})
    assert cfg.port == 8080
    assert cfg.store_dir == "razorcd-artifacts"  # embedded file store by default
