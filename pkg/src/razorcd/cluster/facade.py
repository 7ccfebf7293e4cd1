"""HTTP-style facade over a cluster store, mirroring custom-resource API paths:

    POST/GET/DELETE /apis/{group}/{version}/namespaces/{ns}/{plural}[/{name}]

Requests carry the cluster's bearer token in the Authorization header.
"""

from __future__ import annotations

import json
import re

from ..bundles import canonical_json
from ..errors import RazorError, Unauthorized
from .store import ClusterStore, ResourceKey

PATH_RE = re.compile(
    r"^/apis/(?P<group>[^/]+)/(?P<version>[^/]+)/namespaces/(?P<ns>[^/]+)/(?P<plural>[^/]+)(?:/(?P<name>[^/]+))?$"
)


class ClusterApiFacade:
    def __init__(self, store: ClusterStore):
        self.store = store

    def _check_token(self, headers: dict) -> None:
        auth = {k.lower(): v for k, v in headers.items()}.get("authorization", "")
        token = auth[len("Bearer "):] if auth.startswith("Bearer ") else auth
        if self.store.bearer_token and token != self.store.bearer_token:
            raise Unauthorized("bad bearer token")

    def handle(self, method: str, path: str, headers: dict | None = None, body: bytes = b""):
        """Returns (status, body_bytes). Objects are JSON manifest documents."""
        headers = headers or {}
        match = PATH_RE.match(path)
        if not match:
            return 404, self._err("not_found", f"no route {path}")
        try:
            self._check_token(headers)
            group, version, ns, plural, name = match.group(
                "group", "version", "ns", "plural", "name"
            )
            crd = self.store.resolve_plural(group, version, plural)
            api_version = f"{group}/{version}"
            if method == "POST" and name is None:
                doc = json.loads(body.decode("utf-8"))
                meta = doc.setdefault("metadata", {})
                meta.setdefault("namespace", ns)
                if doc.get("kind") != crd.kind or doc.get("apiVersion") != api_version:
                    return 400, self._err("invalid_object", "body kind does not match path")
                result = self.store.apply(doc)
                key = ResourceKey(api_version, crd.kind, meta["namespace"], meta["name"])
                obj = self.store.get(key)
                status = 201 if result.outcome == "created" else 200
                return status, canonical_json(obj.to_doc()).encode()
            if method == "GET" and name is None:
                objs = self.store.list(crd.kind, namespace=ns)
                return 200, canonical_json({"items": [o.to_doc() for o in objs]}).encode()
            if method == "GET":
                obj = self.store.get(ResourceKey(api_version, crd.kind, ns, name))
                return 200, canonical_json(obj.to_doc()).encode()
            if method == "DELETE" and name is not None:
                removed = self.store.delete(ResourceKey(api_version, crd.kind, ns, name))
                return 200, canonical_json(
                    {"status": "success", "removed": [k.to_dict() for k in removed]}
                ).encode()
            return 405, self._err("not_found", f"unsupported {method}")
        except RazorError as exc:
            return exc.http_status, self._err(exc.code, str(exc))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return 400, self._err("invalid_object", f"bad json body: {exc}")

    @staticmethod
    def _err(code: str, message: str) -> bytes:
        return canonical_json({"status": "error", "code": code, "message": message}).encode()
