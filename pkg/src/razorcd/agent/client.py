"""Control-plane clients used by agents.

Both implementations speak the same wire protocol: the router client calls
the API router in-process (used by simulations and tests, deterministic and
socket-free), the HTTP client goes over the network. Error responses map
back to the same domain errors either way.
"""

from __future__ import annotations

import json

import requests

from ..control_plane.api import ApiRouter
from ..conventions import HEADER_ORG_KEY
from ..errors import ControlPlaneUnreachable, FetchFailed, RazorError

_ERRORS_BY_CODE: dict[str, type[RazorError]] = {
    cls.code: cls for cls in RazorError.__subclasses__()
}


def error_from_code(code: str, message: str) -> RazorError:
    return _ERRORS_BY_CODE.get(code, RazorError)(message)


class ControlPlaneClient:
    def register_cluster(self, cluster_id: str, tags) -> dict:
        raise NotImplementedError

    def poll_subscriptions(self, cluster_id: str, tags) -> list[dict]:
        raise NotImplementedError

    def fetch_artifact(self, version_uid: str) -> tuple[bytes, str]:
        raise NotImplementedError

    def send_reports(self, cluster_id: str, reports: list[dict], sent_at: float) -> dict:
        raise NotImplementedError


class RouterClient(ControlPlaneClient):
    """In-process client; `offline` / `artifacts_offline` emulate outages."""

    def __init__(self, router: ApiRouter, org_key: str):
        self.router = router
        self.org_key = org_key
        self.offline = False
        self.artifacts_offline = False

    def _call(self, method, path, query=None, body=b"", extra_headers=None):
        if self.offline:
            raise ControlPlaneUnreachable("control plane unreachable")
        headers = {HEADER_ORG_KEY: self.org_key}
        if extra_headers:
            headers.update(extra_headers)
        response = self.router.handle(method, path, headers, query or {}, body)
        if response.status >= 400:
            err = response.json()
            raise error_from_code(err.get("code", "error"), err.get("message", ""))
        return response

    def register_cluster(self, cluster_id, tags):
        body = json.dumps({"cluster_id": cluster_id, "tags": sorted(tags)}).encode()
        return self._call("POST", "/api/v1/clusters/register", body=body).json()["cluster"]

    def poll_subscriptions(self, cluster_id, tags):
        query = {"tags": ",".join(sorted(tags))}
        response = self._call("GET", f"/api/v1/clusters/{cluster_id}/subscriptions", query=query)
        return response.json()["subscriptions"]

    def fetch_artifact(self, version_uid):
        if self.artifacts_offline:
            raise FetchFailed("artifact store unreachable")
        response = self._call("GET", f"/api/v1/artifacts/{version_uid}")
        return response.body, response.headers.get("x-content-hash", "")

    def send_reports(self, cluster_id, reports, sent_at):
        body = json.dumps({"reports": reports, "sent_at": sent_at}).encode()
        return self._call("POST", f"/api/v1/clusters/{cluster_id}/reports", body=body).json()["ack"]


class HttpClient(ControlPlaneClient):
    def __init__(self, base_url: str, org_key: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.org_key = org_key
        self.timeout = timeout
        self._session = requests.Session()

    def _call(self, method, path, params=None, data=None, json_body=None):
        headers = {HEADER_ORG_KEY: self.org_key}
        try:
            response = self._session.request(
                method,
                self.base_url + path,
                params=params,
                data=data,
                json=json_body,
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ControlPlaneUnreachable(str(exc)) from exc
        if response.status_code >= 400:
            try:
                err = response.json()
            except ValueError:
                err = {}
            raise error_from_code(err.get("code", "error"), err.get("message", response.text))
        return response

    def register_cluster(self, cluster_id, tags):
        response = self._call(
            "POST", "/api/v1/clusters/register",
            json_body={"cluster_id": cluster_id, "tags": sorted(tags)},
        )
        return response.json()["cluster"]

    def poll_subscriptions(self, cluster_id, tags):
        response = self._call(
            "GET", f"/api/v1/clusters/{cluster_id}/subscriptions",
            params={"tags": ",".join(sorted(tags))},
        )
        return response.json()["subscriptions"]

    def fetch_artifact(self, version_uid):
        response = self._call("GET", f"/api/v1/artifacts/{version_uid}")
        return response.content, response.headers.get("x-content-hash", "")

    def send_reports(self, cluster_id, reports, sent_at):
        response = self._call(
            "POST", f"/api/v1/clusters/{cluster_id}/reports",
            json_body={"reports": reports, "sent_at": sent_at},
        )
        return response.json()["ack"]
