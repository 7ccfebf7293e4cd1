"""HTTP-style API over the control plane.

The router is transport-free: it maps (method, path, headers, query, body)
to (status, headers, body) so the same code path serves real sockets, the
CLI, the in-process agent client, and tests. The upload endpoint mirrors
the channel-version upload wire format exactly, headers included.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..bundles import canonical_json
from ..errors import NotFound, RazorError
from .core import ControlPlane

JSON_CT = "application/json"


@dataclass
class ApiResponse:
    status: int
    headers: dict[str, str]
    body: bytes

    def json(self):
        return json.loads(self.body.decode("utf-8"))


def _json_response(status: int, obj, extra_headers: dict | None = None) -> ApiResponse:
    headers = {"content-type": JSON_CT}
    if extra_headers:
        headers.update(extra_headers)
    return ApiResponse(status, headers, canonical_json(obj).encode("utf-8"))


def _error_response(exc: RazorError) -> ApiResponse:
    return _json_response(
        exc.http_status,
        {"status": "error", "code": exc.code, "message": str(exc)},
    )


class ApiRouter:
    def __init__(self, control_plane: ControlPlane):
        self.cp = control_plane
        self._routes = [
            ("POST", re.compile(r"^/api/v1/channels/([^/]+)/version$"), self._upload_version),
            ("GET", re.compile(r"^/api/v1/channels/([^/]+)/versions$"), self._list_versions),
            ("POST", re.compile(r"^/api/v1/channels$"), self._create_channel),
            ("GET", re.compile(r"^/api/v1/channels$"), self._list_channels),
            ("DELETE", re.compile(r"^/api/v1/channels/([^/]+)$"), self._delete_channel),
            ("POST", re.compile(r"^/api/v1/subscriptions$"), self._create_subscription),
            ("GET", re.compile(r"^/api/v1/subscriptions$"), self._list_subscriptions),
            ("PATCH", re.compile(r"^/api/v1/subscriptions/([^/]+)/version$"), self._set_subscription_version),
            ("DELETE", re.compile(r"^/api/v1/subscriptions/([^/]+)$"), self._delete_subscription),
            ("POST", re.compile(r"^/api/v1/clusters/register$"), self._register_cluster),
            ("GET", re.compile(r"^/api/v1/clusters$"), self._list_clusters),
            ("GET", re.compile(r"^/api/v1/clusters/([^/]+)/subscriptions$"), self._poll_subscriptions),
            ("POST", re.compile(r"^/api/v1/clusters/([^/]+)/reports$"), self._ingest_reports),
            ("GET", re.compile(r"^/api/v1/clusters/([^/]+)/resources$"), self._query_resources),
            ("GET", re.compile(r"^/api/v1/artifacts/([^/]+)$"), self._fetch_artifact),
            ("POST", re.compile(r"^/api/v1/alerts$"), self._create_alert),
            ("GET", re.compile(r"^/api/v1/alerts$"), self._list_alerts),
            ("DELETE", re.compile(r"^/api/v1/alerts/([^/]+)$"), self._delete_alert),
            ("GET", re.compile(r"^/api/v1/alerts/firings$"), self._alert_firings),
        ]

    def handle(
        self,
        method: str,
        path: str,
        headers: dict[str, str] | None = None,
        query: dict[str, str] | None = None,
        body: bytes = b"",
    ) -> ApiResponse:
        headers = {k.lower(): v for k, v in (headers or {}).items()}
        query = query or {}
        # /alerts/firings must match before /alerts/{id} DELETE; route order handles
        # POST/GET collisions, but firings shares the GET /alerts prefix.
        if method == "GET" and path == "/api/v1/alerts/firings":
            handler, args = self._alert_firings, ()
        else:
            handler, args = None, ()
            for route_method, pattern, fn in self._routes:
                if route_method != method:
                    continue
                match = pattern.match(path)
                if match:
                    handler, args = fn, match.groups()
                    break
            if handler is None:
                return _json_response(
                    404, {"status": "error", "code": "not_found", "message": f"no route {method} {path}"}
                )
        try:
            return handler(headers, query, body, *args)
        except RazorError as exc:
            return _error_response(exc)

    # -- helpers ------------------------------------------------------------

    @staticmethod
    def _body_json(body: bytes) -> dict:
        if not body:
            return {}
        try:
            obj = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise NotFound(f"bad json body: {exc}") from exc
        return obj if isinstance(obj, dict) else {}

    def _admin(self, headers: dict) -> None:
        self.cp.check_admin(headers.get("x-api-key"), headers.get("x-user-id"))

    def _org(self, headers: dict) -> None:
        self.cp.check_org_key(headers.get("razeedash-org-key"))

    # -- channel endpoints ----------------------------------------------------

    def _create_channel(self, headers, query, body) -> ApiResponse:
        self._admin(headers)
        payload = self._body_json(body)
        channel = self.cp.create_channel(payload.get("name", ""))
        return _json_response(201, {"status": "success", "channel": channel.to_summary()})

    def _list_channels(self, headers, query, body) -> ApiResponse:
        self._admin(headers)
        return _json_response(200, {"channels": self.cp.list_channels()})

    def _delete_channel(self, headers, query, body, name) -> ApiResponse:
        self._admin(headers)
        self.cp.delete_channel(name)
        return _json_response(200, {"status": "success"})

    def _list_versions(self, headers, query, body, name) -> ApiResponse:
        self._admin(headers)
        return _json_response(200, {"versions": self.cp.list_versions(name)})

    def _upload_version(self, headers, query, body, channel) -> ApiResponse:
        receipt = self.cp.upload_version(
            channel,
            headers.get("resource-name", ""),
            body,
            org_key=headers.get("razeedash-org-key"),
            api_key=headers.get("x-api-key"),
            user_id=headers.get("x-user-id"),
        )
        return _json_response(200, receipt)

    # -- subscription endpoints -------------------------------------------------

    def _create_subscription(self, headers, query, body) -> ApiResponse:
        self._admin(headers)
        payload = self._body_json(body)
        sub = self.cp.create_subscription(
            payload.get("name", ""),
            payload.get("channel", ""),
            payload.get("version", ""),
            payload.get("tags", []),
        )
        return _json_response(201, {"status": "success", "subscription": sub.to_dict()})

    def _list_subscriptions(self, headers, query, body) -> ApiResponse:
        self._admin(headers)
        return _json_response(200, {"subscriptions": self.cp.list_subscriptions()})

    def _set_subscription_version(self, headers, query, body, sub_id) -> ApiResponse:
        self._admin(headers)
        payload = self._body_json(body)
        sub = self.cp.set_subscription_version(sub_id, payload.get("version", ""))
        return _json_response(200, {"status": "success", "subscription": sub.to_dict()})

    def _delete_subscription(self, headers, query, body, sub_id) -> ApiResponse:
        self._admin(headers)
        self.cp.delete_subscription(sub_id)
        return _json_response(200, {"status": "success"})

    # -- cluster endpoints ----------------------------------------------------------

    def _register_cluster(self, headers, query, body) -> ApiResponse:
        payload = self._body_json(body)
        record = self.cp.register_cluster(
            headers.get("razeedash-org-key"),
            payload.get("cluster_id", ""),
            payload.get("tags", []),
        )
        return _json_response(200, {"status": "success", "cluster": record.to_dict()})

    def _list_clusters(self, headers, query, body) -> ApiResponse:
        self._admin(headers)
        return _json_response(200, {"clusters": self.cp.query_inventory()})

    def _poll_subscriptions(self, headers, query, body, cluster_id) -> ApiResponse:
        self._org(headers)
        tags = None
        if "tags" in query:
            tags = [t for t in query["tags"].split(",") if t]
        handouts = self.cp.poll_subscriptions(cluster_id, tags)
        return _json_response(200, {"subscriptions": handouts})

    def _ingest_reports(self, headers, query, body, cluster_id) -> ApiResponse:
        payload = self._body_json(body)
        ack = self.cp.ingest_batch(
            cluster_id, payload.get("reports", []), org_key=headers.get("razeedash-org-key")
        )
        return _json_response(200, {"status": "success", "ack": ack})

    def _query_resources(self, headers, query, body, cluster_id) -> ApiResponse:
        self._admin(headers)
        label = None
        if query.get("label"):
            key, _, value = query["label"].partition("=")
            label = (key, value)
        reports = self.cp.query_resources(cluster_id, kind=query.get("kind"), label=label)
        return _json_response(200, {"resources": reports})

    def _fetch_artifact(self, headers, query, body, uid) -> ApiResponse:
        data, digest = self.cp.fetch_artifact(uid, org_key=headers.get("razeedash-org-key"))
        return ApiResponse(
            200,
            {"content-type": "text/yaml", "x-content-hash": digest},
            data,
        )

    # -- alert endpoints ---------------------------------------------------------------

    def _create_alert(self, headers, query, body) -> ApiResponse:
        self._admin(headers)
        payload = self._body_json(body)
        rule = self.cp.create_alert_rule(
            payload.get("name", ""), payload.get("condition", {}), payload.get("scope")
        )
        return _json_response(201, {"status": "success", "rule": rule.to_dict()})

    def _list_alerts(self, headers, query, body) -> ApiResponse:
        self._admin(headers)
        return _json_response(200, {"rules": self.cp.list_alert_rules()})

    def _delete_alert(self, headers, query, body, rule_id) -> ApiResponse:
        self._admin(headers)
        self.cp.delete_alert_rule(rule_id)
        return _json_response(200, {"status": "success"})

    def _alert_firings(self, headers, query, body) -> ApiResponse:
        self._admin(headers)
        now = float(query["now"]) if "now" in query else self.cp.clock()
        return _json_response(200, {"firings": self.cp.evaluate_alerts(now)})
