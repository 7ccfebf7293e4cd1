"""In-process, Kubernetes-like resource store for one simulated cluster.

Each store is a single linearizable state machine: operations apply
atomically in arrival order and the watch stream observes exactly that
order, so replaying the event log over an empty store reproduces the
final state. Deletion cascades synchronously through owner references.
"""

from __future__ import annotations

import copy
import threading
from dataclasses import dataclass, field, replace

from ..bundles import canonical_json, sha256_hex
from ..errors import DuplicateCrd, InvalidObject, NotFound, UnknownKind

BUILTIN_KINDS = frozenset(
    {
        "Deployment",
        "Service",
        "Route",
        "Pod",
        "ConfigMap",
        "Secret",
        "ServiceAccount",
        "Role",
        "RoleBinding",
    }
)

CRD_KIND = "CustomResourceDefinition"

ADDED = "Added"
MODIFIED = "Modified"
DELETED = "Deleted"


@dataclass(frozen=True, order=True)
class ResourceKey:
    api_version: str
    kind: str
    namespace: str
    name: str

    def to_dict(self) -> dict:
        return {
            "apiVersion": self.api_version,
            "kind": self.kind,
            "namespace": self.namespace,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResourceKey":
        return cls(data["apiVersion"], data["kind"], data["namespace"], data["name"])


@dataclass
class ResourceObject:
    key: ResourceKey
    labels: dict = field(default_factory=dict)
    annotations: dict = field(default_factory=dict)
    spec: dict = field(default_factory=dict)
    status: dict = field(default_factory=dict)
    generation: int = 1
    resource_version: int = 1
    owner_refs: list[ResourceKey] = field(default_factory=list)
    deleting: bool = False

    def snapshot(self) -> "ResourceObject":
        return ResourceObject(
            key=self.key,
            labels=copy.deepcopy(self.labels),
            annotations=copy.deepcopy(self.annotations),
            spec=copy.deepcopy(self.spec),
            status=copy.deepcopy(self.status),
            generation=self.generation,
            resource_version=self.resource_version,
            owner_refs=list(self.owner_refs),
            deleting=self.deleting,
        )

    def to_doc(self) -> dict:
        return {
            "apiVersion": self.key.api_version,
            "kind": self.key.kind,
            "metadata": {
                "namespace": self.key.namespace,
                "name": self.key.name,
                "labels": copy.deepcopy(self.labels),
                "annotations": copy.deepcopy(self.annotations),
                "generation": self.generation,
                "resourceVersion": self.resource_version,
                "ownerRefs": [ref.to_dict() for ref in self.owner_refs],
            },
            "spec": copy.deepcopy(self.spec),
            "status": copy.deepcopy(self.status),
        }


@dataclass(frozen=True)
class CrdDefinition:
    group: str
    version: str
    kind: str
    plural: str


@dataclass(frozen=True)
class WatchEvent:
    type: str
    object: ResourceObject
    sequence: int


@dataclass
class ApplyResult:
    outcome: str  # created | updated | unchanged
    generation: int


def spec_hash(spec: dict) -> str:
    return sha256_hex(canonical_json(spec).encode())


def doc_to_fields(doc: dict) -> tuple[ResourceKey, dict, dict, dict, list[ResourceKey]]:
    """Split a manifest document into key, labels, annotations, spec, owner refs."""
    meta = doc.get("metadata") or {}
    api_version = doc.get("apiVersion", "")
    kind = doc.get("kind", "")
    name = meta.get("name", "")
    namespace = meta.get("namespace") or "default"
    if not api_version or not kind or not name:
        raise InvalidObject("object requires apiVersion, kind, and metadata.name")
    key = ResourceKey(api_version, kind, namespace, name)
    labels = dict(meta.get("labels") or {})
    annotations = dict(meta.get("annotations") or {})
    spec = copy.deepcopy(doc.get("spec") or {})
    owner_refs = [ResourceKey.from_dict(r) for r in meta.get("ownerRefs") or []]
    return key, labels, annotations, spec, owner_refs


class ClusterStore:
    """One cluster's resource state, CRD registry, and watch event log."""

    def __init__(self, cluster_id: str = "cluster", bearer_token: str = ""):
        self.cluster_id = cluster_id
        self.bearer_token = bearer_token
        self._lock = threading.RLock()
        self._objects: dict[ResourceKey, ResourceObject] = {}
        self._crds_by_group_kind: dict[tuple[str, str], CrdDefinition] = {}
        self._crds_by_plural: dict[str, CrdDefinition] = {}
        self._events: list[WatchEvent] = []
        self._sequence = 0

    # -- CRDs --------------------------------------------------------------

    def register_crd(self, crd: CrdDefinition) -> None:
        with self._lock:
            if (crd.group, crd.kind) in self._crds_by_group_kind:
                raise DuplicateCrd(f"CRD for {crd.group}/{crd.kind} already registered")
            if crd.plural in self._crds_by_plural:
                raise DuplicateCrd(f"CRD plural {crd.plural!r} already registered")
            if crd.plural != crd.plural.lower():
                raise InvalidObject(f"CRD plural {crd.plural!r} must be lowercase")
            self._crds_by_group_kind[(crd.group, crd.kind)] = crd
            self._crds_by_plural[crd.plural] = crd

    def crds(self) -> list[CrdDefinition]:
        with self._lock:
            return [self._crds_by_group_kind[k] for k in sorted(self._crds_by_group_kind)]

    def resolve_plural(self, group: str, version: str, plural: str) -> CrdDefinition:
        with self._lock:
            crd = self._crds_by_plural.get(plural.lower())
            if crd is None or crd.group != group or crd.version != version:
                raise NotFound(f"no CRD for {group}/{version} plural {plural!r}")
            return crd

    def _kind_known(self, api_version: str, kind: str) -> bool:
        if kind in BUILTIN_KINDS:
            return True
        group = api_version.split("/", 1)[0] if "/" in api_version else ""
        return (group, kind) in self._crds_by_group_kind

    def has_crd(self, group: str, kind: str) -> bool:
        with self._lock:
            return (group, kind) in self._crds_by_group_kind

    @staticmethod
    def crd_from_doc(doc: dict) -> CrdDefinition:
        spec = doc.get("spec") or {}
        names = spec.get("names") or {}
        group = spec.get("group", "")
        version = spec.get("version") or (spec.get("versions") or [""])[0]
        kind = names.get("kind", "")
        plural = names.get("plural", "")
        if not (group and version and kind and plural):
            raise InvalidObject("CRD document requires spec.group, version, names.kind, names.plural")
        return CrdDefinition(group=group, version=version, kind=kind, plural=plural.lower())

    # -- events --------------------------------------------------------------

    def _emit(self, event_type: str, obj: ResourceObject) -> None:
        self._sequence += 1
        self._events.append(WatchEvent(event_type, obj.snapshot(), self._sequence))

    @property
    def sequence(self) -> int:
        with self._lock:
            return self._sequence

    def events_since(self, from_sequence: int = 0, kinds=None) -> list[WatchEvent]:
        with self._lock:
            return [
                e
                for e in self._events
                if e.sequence > from_sequence and (kinds is None or e.object.key.kind in kinds)
            ]

    def watch(self, kinds=None, from_sequence: int = 0) -> "WatchCursor":
        return WatchCursor(self, kinds, from_sequence)

    # -- core operations ----------------------------------------------------------

    def apply(self, doc: dict) -> ApplyResult:
        """Create or replace desired state from a manifest document.

        Replaces spec/labels/annotations wholesale; never touches status.
        CustomResourceDefinition documents register the kind instead of
        storing an object, so bundles can carry CRDs inline.
        """
        with self._lock:
            if doc.get("kind") == CRD_KIND:
                return self._apply_crd(doc)
            key, labels, annotations, spec, owner_refs = doc_to_fields(doc)
            if not self._kind_known(key.api_version, key.kind):
                raise UnknownKind(f"kind {key.kind!r} ({key.api_version}) is not registered")
            for ref in owner_refs:
                if ref not in self._objects:
                    raise InvalidObject(f"owner ref {ref} does not exist")
            existing = self._objects.get(key)
            if existing is None:
                obj = ResourceObject(
                    key=key,
                    labels=labels,
                    annotations=annotations,
                    spec=spec,
                    owner_refs=owner_refs,
                )
                self._objects[key] = obj
                self._emit(ADDED, obj)
                return ApplyResult("created", obj.generation)
            spec_changed = spec_hash(existing.spec) != spec_hash(spec)
            meta_changed = (
                existing.labels != labels
                or existing.annotations != annotations
                or existing.owner_refs != owner_refs
            )
            if not spec_changed and not meta_changed:
                return ApplyResult("unchanged", existing.generation)
            existing.labels = labels
            existing.annotations = annotations
            existing.owner_refs = owner_refs
            existing.spec = spec
            if spec_changed:
                existing.generation += 1
            existing.resource_version += 1
            self._emit(MODIFIED, existing)
            return ApplyResult("updated", existing.generation)

    def _apply_crd(self, doc: dict) -> ApplyResult:
        crd = self.crd_from_doc(doc)
        current = self._crds_by_group_kind.get((crd.group, crd.kind))
        if current is None:
            self.register_crd(crd)
            return ApplyResult("created", 1)
        if current == crd:
            return ApplyResult("unchanged", 1)
        raise InvalidObject(f"CRD for {crd.group}/{crd.kind} conflicts with existing definition")

    def get(self, key: ResourceKey) -> ResourceObject:
        with self._lock:
            obj = self._objects.get(key)
            if obj is None:
                raise NotFound(f"{key} not found")
            return obj

    def get_optional(self, key: ResourceKey) -> ResourceObject | None:
        with self._lock:
            return self._objects.get(key)

    def list(self, kind: str, namespace: str | None = None, label_selector: dict | None = None):
        """Objects of `kind`, optionally restricted to a namespace and a label subset."""
        with self._lock:
            out = []
            for key in sorted(self._objects):
                if key.kind != kind:
                    continue
                if namespace is not None and key.namespace != namespace:
                    continue
                obj = self._objects[key]
                if label_selector and not all(
                    obj.labels.get(k) == v for k, v in label_selector.items()
                ):
                    continue
                out.append(obj)
            return out

    def all_objects(self) -> list[ResourceObject]:
        with self._lock:
            return [self._objects[k] for k in sorted(self._objects)]

    def update_status(self, key: ResourceKey, status: dict) -> ResourceObject:
        with self._lock:
            obj = self._objects.get(key)
            if obj is None:
                raise NotFound(f"{key} not found")
            obj.status = copy.deepcopy(status)
            obj.resource_version += 1
            self._emit(MODIFIED, obj)
            return obj

    def delete(self, key: ResourceKey) -> list[ResourceKey]:
        """Delete an object and, transitively, everything owned by it.

        Removal runs to a fixpoint: any object left with a dangling owner
        reference is garbage-collected in the same call. Returns the removed
        keys in deletion order.
        """
        with self._lock:
            if key not in self._objects:
                raise NotFound(f"{key} not found")
            removed: list[ResourceKey] = []
            self._remove(key, removed)
            changed = True
            while changed:
                changed = False
                for k in sorted(self._objects):
                    obj = self._objects[k]
                    if obj.owner_refs and any(ref not in self._objects for ref in obj.owner_refs):
                        self._remove(k, removed)
                        changed = True
                        break
            return removed

    def _remove(self, key: ResourceKey, removed: list[ResourceKey]) -> None:
        obj = self._objects.pop(key)
        obj.deleting = True
        removed.append(key)
        self._emit(DELETED, obj)

    # -- ownership scans -------------------------------------------------------------

    def owned_by(self, root: ResourceKey) -> list[ResourceObject]:
        """Objects whose owner chain reaches `root` (root excluded)."""
        with self._lock:
            result = []
            reach: dict[ResourceKey, bool] = {}

            def reaches(k: ResourceKey) -> bool:
                if k in reach:
                    return reach[k]
                reach[k] = False
                obj = self._objects.get(k)
                if obj is None:
                    return False
                hit = any(ref == root or reaches(ref) for ref in obj.owner_refs)
                reach[k] = hit
                return hit

            for k in sorted(self._objects):
                if k != root and reaches(k):
                    result.append(self._objects[k])
            return result


class WatchCursor:
    """Poll-based watch: each poll returns, in order, every event not yet seen."""

    def __init__(self, store: ClusterStore, kinds=None, from_sequence: int = 0):
        self._store = store
        self._kinds = set(kinds) if kinds is not None else None
        self._position = from_sequence

    def poll(self) -> list[WatchEvent]:
        events = self._store.events_since(self._position)
        if events:
            self._position = events[-1].sequence
        if self._kinds is None:
            return events
        return [e for e in events if e.object.key.kind in self._kinds]


def replay_events(events: list[WatchEvent]) -> dict[ResourceKey, ResourceObject]:
    """Fold a watch stream over an empty store; used as the replay oracle."""
    state: dict[ResourceKey, ResourceObject] = {}
    for event in events:
        if event.type in (ADDED, MODIFIED):
            state[event.object.key] = event.object
        elif event.type == DELETED:
            state.pop(event.object.key, None)
    return state
