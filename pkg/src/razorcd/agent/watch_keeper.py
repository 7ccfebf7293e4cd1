"""Watch keeper: reports labeled resources to the control plane.

Resources opt in via the watch label at one of three fidelity levels:
lite ships metadata and status only, detail adds spec, debug ships the
full object snapshot. Reports go out on a scan interval and, debounced,
on change events. Undeliverable batches are buffered and retried.
"""

from __future__ import annotations

from collections import deque

from ..cluster.store import ClusterStore, ResourceObject
from ..conventions import WATCH_LABEL, WATCH_LEVELS
from ..errors import ControlPlaneUnreachable, RazorError
from .client import ControlPlaneClient

BUFFER_LIMIT = 200


def build_report(obj: ResourceObject, observed_at: float, trigger: str) -> dict | None:
    """Report for one object, shaped by its watch level; None when unlabeled."""
    level = obj.labels.get(WATCH_LABEL)
    if level not in WATCH_LEVELS:
        return None
    metadata = {
        "apiVersion": obj.key.api_version,
        "kind": obj.key.kind,
        "namespace": obj.key.namespace,
        "name": obj.key.name,
        "labels": dict(obj.labels),
        "annotations": dict(obj.annotations),
        "generation": obj.generation,
    }
    payload: dict = {"metadata": metadata, "status": dict(obj.status)}
    if level in ("detail", "debug"):
        payload["spec"] = dict(obj.spec)
    if level == "debug":
        payload["object"] = obj.to_doc()
    return {
        "resource_key": obj.key.to_dict(),
        "level": level,
        "payload": payload,
        "observed_at": observed_at,
        "trigger": trigger,
    }


class WatchKeeper:
    def __init__(
        self,
        cluster_id: str,
        store: ClusterStore,
        client: ControlPlaneClient,
        debounce: float = 5.0,
    ):
        self.cluster_id = cluster_id
        self.store = store
        self.client = client
        self.debounce = debounce
        self._cursor = store.watch()
        self._last_emit: dict = {}
        self._buffer: deque[list[dict]] = deque(maxlen=BUFFER_LIMIT)
        self.last_error: str | None = None

    def scan(self, now: float) -> int:
        """Interval scan: one report per labeled object in the store."""
        reports = []
        for obj in self.store.all_objects():
            report = build_report(obj, now, "interval")
            if report is not None:
                reports.append(report)
        if reports:
            self._send(reports, now)
        return len(reports)

    def process_events(self, now: float) -> int:
        """Event-triggered reports, debounced per resource key."""
        emitted = 0
        for event in self._cursor.poll():
            report = build_report(event.object, now, "event")
            if report is None:
                continue
            key = event.object.key
            last = self._last_emit.get(key)
            if last is not None and now - last < self.debounce:
                continue
            self._last_emit[key] = now
            self._send([report], now)
            emitted += 1
        return emitted

    def _send(self, reports: list[dict], now: float) -> bool:
        batches = list(self._buffer) + [reports]
        self._buffer.clear()
        delivered = True
        for i, batch in enumerate(batches):
            try:
                self.client.send_reports(self.cluster_id, batch, now)
            except ControlPlaneUnreachable as exc:
                # Keep this and all later batches for the next attempt.
                self.last_error = str(exc)
                for remaining in batches[i:]:
                    self._buffer.append(remaining)
                delivered = False
                break
            except RazorError as exc:
                self.last_error = str(exc)
                delivered = False
                break
        else:
            self.last_error = None
        return delivered

    @property
    def buffered_batches(self) -> int:
        return len(self._buffer)
