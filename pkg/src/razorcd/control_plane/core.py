"""Control plane: channels, versions, subscriptions, cluster inventory,
monitoring reports, and alert rules.

This is the server-side half of the pull deployment model. Admins publish
immutable versioned bundles into channels and bind them to tag sets through
subscriptions; cluster agents poll for subscriptions matching their tags and
fetch the referenced artifacts. Monitoring reports flow the other way.
"""

from __future__ import annotations

import hmac
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from ..artifacts import ArtifactStore, MemoryArtifactStore
from ..bundles import canonical_json, content_hash, parse_bundle, sha256_hex
from ..errors import (
    ChannelInUse,
    ChannelNotFound,
    DuplicateChannel,
    EmptyTags,
    InvalidName,
    InvalidRule,
    MalformedReport,
    NotFound,
    SubscriptionNotFound,
    Unauthorized,
    UnknownCluster,
    VersionExists,
    VersionNotFound,
)

NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

REPORT_LEVELS = ("lite", "detail", "debug")
REPORT_TRIGGERS = ("interval", "event")

# Reports retained per (cluster, resource); the summary view is latest-wins.
REPORT_HISTORY_LIMIT = 50


@dataclass(frozen=True)
class Credentials:
    """Static credentials: org_key authenticates clusters, api_key/user_id admins."""

    org_key: str
    api_key: str
    user_id: str

    def __post_init__(self):
        for name in ("org_key", "api_key", "user_id"):
            if not getattr(self, name):
                raise ValueError(f"credential {name} must be non-empty")


def _ct_equal(a: str, b: str) -> bool:
    return hmac.compare_digest(a.encode(), b.encode())


@dataclass
class ChannelVersion:
    uid: str
    name: str
    content_hash: str
    location: str
    payload_ref: str
    created_at: float

    def to_dict(self) -> dict:
        return {
            "uid": self.uid,
            "name": self.name,
            "content_hash": self.content_hash,
            "location": self.location,
            "created_at": self.created_at,
        }


@dataclass
class Channel:
    name: str
    created_at: float
    versions: dict[str, ChannelVersion] = field(default_factory=dict)
    version_order: list[str] = field(default_factory=list)

    def to_summary(self) -> dict:
        latest = self.version_order[-1] if self.version_order else None
        return {
            "name": self.name,
            "created_at": self.created_at,
            "version_count": len(self.version_order),
            "latest": latest,
        }


@dataclass
class Subscription:
    id: str
    name: str
    channel_name: str
    version_name: str
    tags: frozenset[str]
    revision: int = 1

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "channel": self.channel_name,
            "version": self.version_name,
            "tags": sorted(self.tags),
            "revision": self.revision,
        }


@dataclass
class ClusterRecord:
    cluster_id: str
    org_key: str
    tags: frozenset[str]
    registered_at: float
    last_seen: float

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "tags": sorted(self.tags),
            "registered_at": self.registered_at,
            "last_seen": self.last_seen,
        }


@dataclass
class AlertRule:
    id: str
    name: str
    condition: dict
    scope: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "condition": self.condition,
            "scope": self.scope,
        }


def _key_tuple(resource_key: dict) -> tuple[str, str, str, str]:
    try:
        return (
            resource_key["apiVersion"],
            resource_key["kind"],
            resource_key["namespace"],
            resource_key["name"],
        )
    except (TypeError, KeyError) as exc:
        raise MalformedReport(f"bad resource_key: {resource_key!r}") from exc


class ControlPlane:
    """Single-org control plane with an injectable clock and artifact store.

    All mutations are serialized behind one lock; no operation holds state
    across calls, so concurrent agents and admin clients are safe.
    """

    def __init__(
        self,
        credentials: Credentials,
        artifact_store: ArtifactStore | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.credentials = credentials
        self.store = artifact_store if artifact_store is not None else MemoryArtifactStore()
        self.clock = clock
        self._lock = threading.RLock()
        self._channels: dict[str, Channel] = {}
        self._versions_by_uid: dict[str, tuple[str, ChannelVersion]] = {}
        self._subscriptions: dict[str, Subscription] = {}
        self._sub_counter = 0
        self._clusters: dict[str, ClusterRecord] = {}
        self._history: dict[tuple, deque] = {}
        self._latest: dict[tuple, dict] = {}
        self._alert_rules: dict[str, AlertRule] = {}
        self._rule_counter = 0

    # -- auth ---------------------------------------------------------------

    def check_org_key(self, org_key: str | None) -> None:
        if not org_key or not _ct_equal(org_key, self.credentials.org_key):
            raise Unauthorized("invalid org key")

    def check_admin(self, api_key: str | None, user_id: str | None) -> None:
        if (
            not api_key
            or not user_id
            or not _ct_equal(api_key, self.credentials.api_key)
            or not _ct_equal(user_id, self.credentials.user_id)
        ):
            raise Unauthorized("invalid api key or user id")

    # -- channels and versions ----------------------------------------------

    def create_channel(self, name: str) -> Channel:
        if not name or not NAME_RE.match(name):
            raise InvalidName(f"channel name {name!r} is not path-safe")
        with self._lock:
            if name in self._channels:
                raise DuplicateChannel(f"channel {name!r} already exists")
            channel = Channel(name=name, created_at=self.clock())
            self._channels[name] = channel
            return channel

    def list_channels(self) -> list[dict]:
        with self._lock:
            return [self._channels[n].to_summary() for n in sorted(self._channels)]

    def delete_channel(self, name: str) -> None:
        with self._lock:
            if name not in self._channels:
                raise ChannelNotFound(f"channel {name!r} not found")
            live = [s.id for s in self._subscriptions.values() if s.channel_name == name]
            if live:
                raise ChannelInUse(f"channel {name!r} has subscriptions: {sorted(live)}")
            channel = self._channels.pop(name)
            for version in channel.versions.values():
                self._versions_by_uid.pop(version.uid, None)

    def upload_version(
        self,
        channel_name: str,
        version_name: str,
        payload: bytes,
        org_key: str | None = None,
        api_key: str | None = None,
        user_id: str | None = None,
    ) -> dict:
        """Store an immutable bundle under a channel; returns the upload receipt."""
        self.check_org_key(org_key)
        self.check_admin(api_key, user_id)
        if not version_name or not NAME_RE.match(version_name):
            raise InvalidName(f"version name {version_name!r} is not path-safe")
        docs = parse_bundle(payload)
        digest = content_hash(docs)
        with self._lock:
            channel = self._channels.get(channel_name)
            if channel is None:
                raise ChannelNotFound(f"channel {channel_name!r} not found")
            if version_name in channel.versions:
                raise VersionExists(
                    f"version {version_name!r} already exists in {channel_name!r}"
                )
            uid = sha256_hex(f"{channel_name}\n{version_name}\n{digest}".encode())[:16]
            payload_ref = f"{channel_name}__{version_name}__{uid}"
            self.store.put(payload_ref, payload)
            version = ChannelVersion(
                uid=uid,
                name=version_name,
                content_hash=digest,
                location=self.store.label,
                payload_ref=payload_ref,
                created_at=self.clock(),
            )
            channel.versions[version_name] = version
            channel.version_order.append(version_name)
            self._versions_by_uid[uid] = (channel_name, version)
        return {
            "status": "success",
            "version": {"uid": uid, "name": version_name, "location": version.location},
        }

    def list_versions(self, channel_name: str) -> list[dict]:
        with self._lock:
            channel = self._channels.get(channel_name)
            if channel is None:
                raise ChannelNotFound(f"channel {channel_name!r} not found")
            return [channel.versions[name].to_dict() for name in channel.version_order]

    def get_version(self, channel_name: str, version_name: str) -> ChannelVersion:
        with self._lock:
            channel = self._channels.get(channel_name)
            if channel is None:
                raise ChannelNotFound(f"channel {channel_name!r} not found")
            version = channel.versions.get(version_name)
            if version is None:
                raise VersionNotFound(
                    f"version {version_name!r} not found in {channel_name!r}"
                )
            return version

    def fetch_artifact(self, version_uid: str, org_key: str | None = None) -> tuple[bytes, str]:
        """Return (payload bytes, content hash) for a version uid."""
        self.check_org_key(org_key)
        with self._lock:
            entry = self._versions_by_uid.get(version_uid)
            if entry is None:
                raise NotFound(f"version uid {version_uid!r} not found")
            _, version = entry
        data = self.store.get(version.payload_ref)
        return data, version.content_hash

    # -- subscriptions --------------------------------------------------------

    def create_subscription(
        self, name: str, channel_name: str, version_name: str, tags: Iterable[str]
    ) -> Subscription:
        tag_set = frozenset(tags)
        if not tag_set:
            raise EmptyTags("subscription tags must be non-empty")
        with self._lock:
            self.get_version(channel_name, version_name)
            self._sub_counter += 1
            sub = Subscription(
                id=f"sub-{self._sub_counter:04d}",
                name=name,
                channel_name=channel_name,
                version_name=version_name,
                tags=tag_set,
            )
            self._subscriptions[sub.id] = sub
            return sub

    def list_subscriptions(self) -> list[dict]:
        with self._lock:
            subs = sorted(self._subscriptions.values(), key=lambda s: (s.name, s.id))
            return [s.to_dict() for s in subs]

    def get_subscription(self, sub_id: str) -> Subscription:
        with self._lock:
            sub = self._subscriptions.get(sub_id)
            if sub is None:
                raise SubscriptionNotFound(f"subscription {sub_id!r} not found")
            return sub

    def find_subscription_by_name(self, name: str) -> Subscription:
        with self._lock:
            matches = [s for s in self._subscriptions.values() if s.name == name]
            if not matches:
                raise SubscriptionNotFound(f"subscription named {name!r} not found")
            return sorted(matches, key=lambda s: s.id)[0]

    def set_subscription_version(self, sub_id: str, version_name: str) -> Subscription:
        """Flip a subscription to another version of its channel.

        This is the rollout lever: the next agent poll sees the new version.
        Flipping to the current version is a no-op and does not bump the revision.
        """
        with self._lock:
            sub = self.get_subscription(sub_id)
            if version_name == sub.version_name:
                return sub
            self.get_version(sub.channel_name, version_name)
            sub.version_name = version_name
            sub.revision += 1
            return sub

    def delete_subscription(self, sub_id: str) -> None:
        with self._lock:
            if sub_id not in self._subscriptions:
                raise SubscriptionNotFound(f"subscription {sub_id!r} not found")
            del self._subscriptions[sub_id]

    # -- cluster inventory ----------------------------------------------------

    def register_cluster(
        self, org_key: str | None, cluster_id: str, tags: Iterable[str]
    ) -> ClusterRecord:
        self.check_org_key(org_key)
        if not cluster_id:
            raise InvalidName("cluster_id must be non-empty")
        now = self.clock()
        with self._lock:
            record = self._clusters.get(cluster_id)
            if record is None:
                record = ClusterRecord(
                    cluster_id=cluster_id,
                    org_key=org_key or "",
                    tags=frozenset(tags),
                    registered_at=now,
                    last_seen=now,
                )
                self._clusters[cluster_id] = record
            else:
                record.tags = frozenset(tags)
                record.last_seen = now
            return record

    def poll_subscriptions(
        self, cluster_id: str, cluster_tags: Iterable[str] | None = None
    ) -> list[dict]:
        """Handouts for every subscription whose tags are a subset of the cluster's."""
        with self._lock:
            record = self._clusters.get(cluster_id)
            if record is None:
                raise UnknownCluster(f"cluster {cluster_id!r} is not registered")
            tags = frozenset(cluster_tags) if cluster_tags is not None else record.tags
            record.last_seen = self.clock()
            handouts = []
            for sub in sorted(self._subscriptions.values(), key=lambda s: (s.name, s.id)):
                if not sub.tags <= tags:
                    continue
                version = self._channels[sub.channel_name].versions[sub.version_name]
                handouts.append(
                    {
                        "sub_id": sub.id,
                        "sub_revision": sub.revision,
                        "channel": sub.channel_name,
                        "version_name": sub.version_name,
                        "version_uid": version.uid,
                        "artifact_url": f"/api/v1/artifacts/{version.uid}",
                    }
                )
            return handouts

    def query_inventory(self) -> list[dict]:
        with self._lock:
            out = []
            for cluster_id in sorted(self._clusters):
                record = self._clusters[cluster_id]
                count = len(
                    {key for key in self._latest if key[0] == cluster_id}
                )
                summary = record.to_dict()
                summary["resource_count"] = count
                out.append(summary)
            return out

    # -- monitoring reports -----------------------------------------------------

    def ingest_report(self, cluster_id: str, report: dict, org_key: str | None = None) -> dict:
        """Append one watch-keeper report; the summary index is latest-wins."""
        self.check_org_key(org_key)
        with self._lock:
            if cluster_id not in self._clusters:
                raise UnknownCluster(f"cluster {cluster_id!r} is not registered")
            level = report.get("level")
            if level not in REPORT_LEVELS:
                raise MalformedReport(f"bad level {level!r}")
            payload = report.get("payload")
            if not isinstance(payload, dict) or "metadata" not in payload or "status" not in payload:
                raise MalformedReport("payload must contain metadata and status sections")
            if level == "lite" and "spec" in payload:
                raise MalformedReport("lite reports must not contain a spec section")
            if report.get("trigger", "interval") not in REPORT_TRIGGERS:
                raise MalformedReport(f"bad trigger {report.get('trigger')!r}")
            key = (cluster_id,) + _key_tuple(report.get("resource_key"))
            stored = {
                "cluster_id": cluster_id,
                "resource_key": dict(report["resource_key"]),
                "level": level,
                "payload": payload,
                "observed_at": float(report.get("observed_at", self.clock())),
                "trigger": report.get("trigger", "interval"),
            }
            ring = self._history.setdefault(key, deque(maxlen=REPORT_HISTORY_LIMIT))
            ring.append(stored)
            latest = self._latest.get(key)
            if latest is None or stored["observed_at"] >= latest["observed_at"]:
                self._latest[key] = stored
            self._clusters[cluster_id].last_seen = self.clock()
            return {"stored": 1}

    def ingest_batch(self, cluster_id: str, reports: list[dict], org_key: str | None = None) -> dict:
        stored = 0
        for report in reports:
            self.ingest_report(cluster_id, report, org_key=org_key)
            stored += 1
        return {"stored": stored}

    def query_resources(
        self,
        cluster_id: str,
        kind: str | None = None,
        label: tuple[str, str] | None = None,
    ) -> list[dict]:
        """Latest report per resource on one cluster, optionally filtered."""
        with self._lock:
            if cluster_id not in self._clusters:
                raise UnknownCluster(f"cluster {cluster_id!r} is not registered")
            out = []
            for key in sorted(self._latest):
                if key[0] != cluster_id:
                    continue
                report = self._latest[key]
                if kind is not None and report["resource_key"]["kind"] != kind:
                    continue
                if label is not None:
                    labels = report["payload"].get("metadata", {}).get("labels", {})
                    if labels.get(label[0]) != label[1]:
                        continue
                out.append(report)
            return out

    def report_history(self, cluster_id: str, resource_key: dict) -> list[dict]:
        with self._lock:
            key = (cluster_id,) + _key_tuple(resource_key)
            return list(self._history.get(key, ()))

    # -- alerts -------------------------------------------------------------------

    def create_alert_rule(self, name: str, condition: dict, scope: dict | None = None) -> AlertRule:
        ctype = condition.get("type")
        if ctype == "cluster_stale":
            if not (isinstance(condition.get("max_silence"), (int, float)) and condition["max_silence"] > 0):
                raise InvalidRule("cluster_stale requires max_silence > 0")
        elif ctype == "resource_status_not":
            if not condition.get("expected"):
                raise InvalidRule("resource_status_not requires expected")
            if not (isinstance(condition.get("grace"), (int, float)) and condition["grace"] > 0):
                raise InvalidRule("resource_status_not requires grace > 0")
        else:
            raise InvalidRule(f"unknown condition type {ctype!r}")
        with self._lock:
            self._rule_counter += 1
            rule = AlertRule(
                id=f"rule-{self._rule_counter:03d}",
                name=name,
                condition=dict(condition),
                scope=dict(scope) if scope else None,
            )
            self._alert_rules[rule.id] = rule
            return rule

    def list_alert_rules(self) -> list[dict]:
        with self._lock:
            return [self._alert_rules[r].to_dict() for r in sorted(self._alert_rules)]

    def delete_alert_rule(self, rule_id: str) -> None:
        with self._lock:
            if rule_id not in self._alert_rules:
                raise NotFound(f"alert rule {rule_id!r} not found")
            del self._alert_rules[rule_id]

    def _in_scope(self, rule: AlertRule, record: ClusterRecord) -> bool:
        if not rule.scope:
            return True
        if rule.scope.get("cluster_id") and rule.scope["cluster_id"] != record.cluster_id:
            return False
        if rule.scope.get("tags") and not frozenset(rule.scope["tags"]) <= record.tags:
            return False
        return True

    def evaluate_alerts(self, now: float) -> list[dict]:
        """Pure function of stored state and `now`; returns rule firings."""
        with self._lock:
            firings = []
            for rule_id in sorted(self._alert_rules):
                rule = self._alert_rules[rule_id]
                ctype = rule.condition["type"]
                if ctype == "cluster_stale":
                    max_silence = rule.condition["max_silence"]
                    for cluster_id in sorted(self._clusters):
                        record = self._clusters[cluster_id]
                        if not self._in_scope(rule, record):
                            continue
                        if now - record.last_seen > max_silence:
                            firings.append(
                                {
                                    "rule_id": rule.id,
                                    "subject": cluster_id,
                                    "since": record.last_seen + max_silence,
                                }
                            )
                elif ctype == "resource_status_not":
                    expected = rule.condition["expected"]
                    grace = rule.condition["grace"]
                    for key in sorted(self._latest):
                        record = self._clusters.get(key[0])
                        if record is None or not self._in_scope(rule, record):
                            continue
                        latest = self._latest[key]
                        phase = latest["payload"].get("status", {}).get("phase")
                        if phase == expected:
                            continue
                        # Condition start: earliest consecutive non-expected report.
                        since_observed = latest["observed_at"]
                        for past in reversed(self._history.get(key, ())):
                            if past["payload"].get("status", {}).get("phase") == expected:
                                break
                            since_observed = past["observed_at"]
                        if now - since_observed > grace:
                            firings.append(
                                {
                                    "rule_id": rule.id,
                                    "subject": "{}/{}/{}/{}".format(key[0], key[2], key[3], key[4]),
                                    "since": since_observed + grace,
                                }
                            )
            return firings

    # -- debugging helpers ----------------------------------------------------------

    def state_digest(self) -> str:
        """Digest of externally observable state; used by determinism tests."""
        with self._lock:
            view = {
                "channels": self.list_channels(),
                "subscriptions": self.list_subscriptions(),
                "clusters": self.query_inventory(),
            }
        return sha256_hex(canonical_json(view).encode())
