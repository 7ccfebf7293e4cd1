"""Per-cluster agent: subscription poller and remote-resource controller.

The agent polls the control plane for subscriptions matching its tags and
materializes one RemoteResource custom resource per handout. A controller
reconciles each RemoteResource by fetching the referenced bundle, verifying
its content hash, and applying every document with provenance annotations
and an owner reference back to the RemoteResource, so pruning a vanished
subscription cascades away everything it installed.

Outages are fail-static: a poll or fetch failure records an error and leaves
the workload exactly as it was.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from ..bundles import content_hash, parse_bundle_cached
from ..cluster.store import CRD_KIND, ClusterStore, CrdDefinition, ResourceKey
from ..conventions import (
    AGENT_NAMESPACE,
    ANNOTATION_SUB_ID,
    ANNOTATION_VERSION_UID,
    RR_API_VERSION,
    RR_GROUP,
    RR_KIND,
    RR_PLURAL,
    RR_VERSION,
)
from ..errors import MalformedBundle, RazorError
from ..operators.runtime import ControllerRegistration, ControllerRuntime, ReconcileOutcome
from .client import ControlPlaneClient
from .config import AgentConfig
from .watch_keeper import WatchKeeper

RR_CONTROLLER_NAME = "remoteresource-controller"


@dataclass
class SyncResult:
    created: int = 0
    updated: int = 0
    pruned: int = 0
    error: str | None = None
    error_code: str | None = None


@dataclass
class TickSummary:
    now: float
    synced: bool = False
    scanned: bool = False
    sync_result: SyncResult | None = None
    reports_sent: int = 0
    events_reported: int = 0
    errors: list[str] = field(default_factory=list)


class Agent:
    def __init__(
        self,
        config: AgentConfig,
        store: ClusterStore,
        runtime: ControllerRuntime,
        client: ControlPlaneClient,
    ):
        self.config = config
        self.store = store
        self.runtime = runtime
        self.client = client
        self.keeper = WatchKeeper(config.cluster_id, store, client, config.watch_debounce)
        self._registered_upstream = False
        self._next_sync: float | None = None
        self._next_scan: float | None = None
        self.last_sync: SyncResult | None = None
        self._install()

    def _install(self) -> None:
        if not self.store.has_crd(RR_GROUP, RR_KIND):
            self.store.register_crd(CrdDefinition(RR_GROUP, RR_VERSION, RR_KIND, RR_PLURAL))
        self.runtime.register(
            ControllerRegistration(
                name=RR_CONTROLLER_NAME,
                watched_kind=RR_KIND,
                owned_kinds=(),
                reconcile=self.reconcile_remote_resource,
                backoff_initial=2.0,
                backoff_multiplier=2.0,
                backoff_cap=60.0,
            )
        )

    # -- subscription sync ----------------------------------------------------

    def sync_subscriptions(self, now: float) -> SyncResult:
        result = SyncResult()
        try:
            if not self._registered_upstream:
                self.client.register_cluster(self.config.cluster_id, self.config.tags)
                self._registered_upstream = True
            handouts = self.client.poll_subscriptions(self.config.cluster_id, self.config.tags)
        except RazorError as exc:
            # Fail static: keep every existing RemoteResource and workload.
            result.error = str(exc)
            result.error_code = exc.code
            self.last_sync = result
            return result

        desired = {h["sub_id"]: h for h in handouts}
        existing = {
            obj.spec.get("sub_id"): obj
            for obj in self.store.list(RR_KIND, namespace=AGENT_NAMESPACE)
        }
        for sub_id in sorted(desired):
            handout = desired[sub_id]
            doc = {
                "apiVersion": RR_API_VERSION,
                "kind": RR_KIND,
                "metadata": {"namespace": AGENT_NAMESPACE, "name": f"rr-{sub_id}"},
                "spec": {
                    "artifact_url": handout["artifact_url"],
                    "version_uid": handout["version_uid"],
                    "sub_id": sub_id,
                    "sub_revision": handout["sub_revision"],
                },
            }
            outcome = self.store.apply(doc)
            if outcome.outcome == "created":
                result.created += 1
            elif outcome.outcome == "updated":
                result.updated += 1
        for sub_id in sorted(set(existing) - set(desired)):
            self.store.delete(existing[sub_id].key)
            result.pruned += 1
        self.last_sync = result
        return result

    # -- remote resource reconciliation ------------------------------------------

    def reconcile_remote_resource(self, key: ResourceKey) -> ReconcileOutcome:
        rr = self.store.get_optional(key)
        if rr is None:
            return ReconcileOutcome.done()
        sub_id = rr.spec.get("sub_id", "")
        version_uid = rr.spec.get("version_uid", "")
        mutations = 0
        try:
            data, expected_hash = self.client.fetch_artifact(version_uid)
        except RazorError as exc:
            return self._fail(rr, exc.code, str(exc))
        try:
            docs = parse_bundle_cached(data)
        except MalformedBundle as exc:
            return self._fail(rr, exc.code, str(exc))
        digest = content_hash(docs)
        if expected_hash and digest != expected_hash:
            return self._fail(rr, "hash_mismatch", f"bundle hash {digest} != expected {expected_hash}")

        applied: list[ResourceKey] = []
        for doc in docs:
            if doc.get("kind") == CRD_KIND:
                # CRD documents register the kind; they are not store objects
                # and are never owned or pruned.
                if self.store.apply(doc).outcome != "unchanged":
                    mutations += 1
                continue
            stamped = copy.deepcopy(doc)
            meta = stamped.setdefault("metadata", {})
            annotations = meta.setdefault("annotations", {})
            annotations[ANNOTATION_SUB_ID] = sub_id
            annotations[ANNOTATION_VERSION_UID] = version_uid
            meta["ownerRefs"] = [key.to_dict()]
            target = ResourceKey(
                stamped["apiVersion"],
                stamped["kind"],
                meta.get("namespace") or "default",
                meta.get("name", ""),
            )
            existing = self.store.get_optional(target)
            if existing is not None:
                incumbent = existing.annotations.get(ANNOTATION_SUB_ID)
                if incumbent and incumbent != sub_id and incumbent < sub_id:
                    # Deterministic conflict rule: the smaller sub id keeps the object.
                    return self._fail(rr, "conflict", f"{target} is owned by {incumbent}")
            try:
                if self.store.apply(stamped).outcome != "unchanged":
                    mutations += 1
            except RazorError as exc:
                return self._fail(rr, exc.code, f"apply {target}: {exc}")
            applied.append(target)

        applied_set = set(applied)
        for prev in rr.status.get("applied_keys", []):
            old_key = ResourceKey.from_dict(prev)
            if old_key in applied_set:
                continue
            obj = self.store.get_optional(old_key)
            if obj is not None and obj.annotations.get(ANNOTATION_SUB_ID) == sub_id:
                self.store.delete(old_key)
                mutations += 1

        new_status = {
            "phase": "Applied",
            "applied_hash": digest,
            "applied_keys": [k.to_dict() for k in applied],
            "last_error": None,
        }
        if rr.status != new_status:
            self.store.update_status(key, new_status)
            mutations += 1
        return ReconcileOutcome.done(mutations)

    def _fail(self, rr, code: str, message: str) -> ReconcileOutcome:
        new_status = dict(rr.status)
        new_status["phase"] = "Failed"
        new_status["last_error"] = f"{code}: {message}"
        new_status.setdefault("applied_keys", [])
        new_status.setdefault("applied_hash", None)
        if rr.status != new_status:
            self.store.update_status(rr.key, new_status)
        return ReconcileOutcome.error(message)

    # -- tick driver ---------------------------------------------------------------

    def run_tick(self, now: float) -> TickSummary:
        """Run work due at `now`: each interval boundary fires exactly once."""
        summary = TickSummary(now=now)
        summary.events_reported += self.keeper.process_events(now)
        if self._next_sync is None or now >= self._next_sync:
            summary.sync_result = self.sync_subscriptions(now)
            summary.synced = True
            self._next_sync = now + self.config.poll_interval
            if summary.sync_result.error:
                summary.errors.append(summary.sync_result.error)
        if self._next_scan is None or now >= self._next_scan:
            summary.reports_sent = self.keeper.scan(now)
            summary.scanned = True
            self._next_scan = now + self.config.report_interval
            if self.keeper.last_error:
                summary.errors.append(self.keeper.last_error)
        return summary

    def next_due(self) -> float | None:
        candidates = [t for t in (self._next_sync, self._next_scan) if t is not None]
        return min(candidates) if candidates else None
