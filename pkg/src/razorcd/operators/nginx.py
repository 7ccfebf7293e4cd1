"""Reference application operator and the bundle that ships it.

The operator reconciles Nginx custom resources into a Deployment, a Service,
and (when ingress is enabled) a Route, all owner-referenced to the CR. The
workload version the operator stamps into pod templates comes from its own
Deployment's version annotation, so shipping a new operator bundle upgrades
every instance on the cluster with no per-cluster admin action.
"""

from __future__ import annotations

from ..bundles import dump_bundle
from ..cluster.store import ClusterStore, ResourceKey
from ..conventions import WATCH_LABEL
from .runtime import ControllerRegistration, ControllerRuntime, ReconcileOutcome

NGINX_GROUP = "example.com"
NGINX_VERSION = "v1alpha1"
NGINX_API_VERSION = f"{NGINX_GROUP}/{NGINX_VERSION}"
NGINX_KIND = "Nginx"
NGINX_PLURAL = "nginxes"

OPERATOR_NAME = "nginx-operator"
OPERATOR_NAMESPACE = "nginx-operator"
OPERATOR_VERSION_ANNOTATION = "version"
CONTROLLER_NAME = "nginx-operator"


def operator_deployment_key() -> ResourceKey:
    return ResourceKey("apps/v1", "Deployment", OPERATOR_NAMESPACE, OPERATOR_NAME)


def installed_operator_version(store: ClusterStore) -> str | None:
    dep = store.get_optional(operator_deployment_key())
    if dep is None:
        return None
    return dep.annotations.get(OPERATOR_VERSION_ANNOTATION)


def build_operator_bundle(operator_version: str) -> bytes:
    """Multi-document bundle that installs or upgrades the operator.

    Deterministic for a given version: same input, byte-identical output.
    """
    if not operator_version:
        raise ValueError("operator_version must be non-empty")
    docs = [
        {
            "apiVersion": "apiextensions.k8s.io/v1",
            "kind": "CustomResourceDefinition",
            "metadata": {"name": f"{NGINX_PLURAL}.{NGINX_GROUP}"},
            "spec": {
                "group": NGINX_GROUP,
                "version": NGINX_VERSION,
                "names": {"kind": NGINX_KIND, "plural": NGINX_PLURAL},
            },
        },
        {
            "apiVersion": "v1",
            "kind": "ServiceAccount",
            "metadata": {"namespace": OPERATOR_NAMESPACE, "name": OPERATOR_NAME},
        },
        {
            "apiVersion": "rbac.authorization.k8s.io/v1",
            "kind": "Role",
            "metadata": {"namespace": OPERATOR_NAMESPACE, "name": OPERATOR_NAME},
            "spec": {
                "rules": [
                    {
                        "apiGroups": ["", "apps", NGINX_GROUP],
                        "resources": ["deployments", "services", "routes", "pods", NGINX_PLURAL],
                        "verbs": ["*"],
                    }
                ]
            },
        },
        {
            "apiVersion": "rbac.authorization.k8s.io/v1",
            "kind": "RoleBinding",
            "metadata": {"namespace": OPERATOR_NAMESPACE, "name": OPERATOR_NAME},
            "spec": {
                "role": OPERATOR_NAME,
                "subjects": [{"kind": "ServiceAccount", "name": OPERATOR_NAME}],
            },
        },
        {
            "apiVersion": "apps/v1",
            "kind": "Deployment",
            "metadata": {
                "namespace": OPERATOR_NAMESPACE,
                "name": OPERATOR_NAME,
                "labels": {"app": OPERATOR_NAME, WATCH_LABEL: "lite"},
                "annotations": {OPERATOR_VERSION_ANNOTATION: operator_version},
            },
            "spec": {
                "replicas": 1,
                "template": {
                    "metadata": {"labels": {"app": OPERATOR_NAME}},
                    "spec": {
                        "image": f"razee/{OPERATOR_NAME}:{operator_version}",
                        "version": operator_version,
                    },
                },
            },
        },
    ]
    return dump_bundle(docs)


def make_nginx_controller(store: ClusterStore) -> ControllerRegistration:
    return ControllerRegistration(
        name=CONTROLLER_NAME,
        watched_kind=NGINX_KIND,
        owned_kinds=("Deployment", "Service", "Route"),
        reconcile=lambda key: reconcile_nginx(store, key),
    )


def reconcile_nginx(store: ClusterStore, key: ResourceKey) -> ReconcileOutcome:
    cr = store.get_optional(key)
    if cr is None:
        return ReconcileOutcome.done()
    operator_version = installed_operator_version(store) or "unknown"
    workload_version = cr.spec.get("version") or operator_version
    replica_count = int(cr.spec.get("replicaCount", 0))
    ingress_enabled = bool((cr.spec.get("ingress") or {}).get("enabled"))
    actions = 0

    dep_doc = {
        "apiVersion": "apps/v1",
        "kind": "Deployment",
        "metadata": {
            "namespace": key.namespace,
            "name": key.name,
            "labels": {"app": key.name, WATCH_LABEL: "lite"},
            "ownerRefs": [key.to_dict()],
        },
        "spec": {
            "replicas": replica_count,
            "template": {
                "metadata": {"labels": {"app": key.name}},
                "spec": {"image": f"nginx:{workload_version}", "version": workload_version},
            },
        },
    }
    if store.apply(dep_doc).outcome != "unchanged":
        actions += 1

    svc_doc = {
        "apiVersion": "v1",
        "kind": "Service",
        "metadata": {
            "namespace": key.namespace,
            "name": key.name,
            "labels": {"app": key.name, WATCH_LABEL: "lite"},
            "ownerRefs": [key.to_dict()],
        },
        "spec": {"selector": {"app": key.name}, "ports": [{"port": 80}]},
    }
    if store.apply(svc_doc).outcome != "unchanged":
        actions += 1

    route_key = ResourceKey("route.openshift.io/v1", "Route", key.namespace, key.name)
    if ingress_enabled:
        route_doc = {
            "apiVersion": "route.openshift.io/v1",
            "kind": "Route",
            "metadata": {
                "namespace": key.namespace,
                "name": key.name,
                "labels": {"app": key.name, WATCH_LABEL: "lite"},
                "ownerRefs": [key.to_dict()],
            },
            "spec": {"host": f"{key.name}.apps.example.test", "to": key.name},
        }
        if store.apply(route_doc).outcome != "unchanged":
            actions += 1
    elif store.get_optional(route_key) is not None:
        store.delete(route_key)
        actions += 1

    dep = store.get(ResourceKey("apps/v1", "Deployment", key.namespace, key.name))
    ready = int(dep.status.get("readyReplicas", 0))
    phase = "Running" if ready == replica_count else "Pending"
    served = workload_version if phase == "Running" else cr.status.get("servedVersion")
    new_status = {"readyReplicas": ready, "phase": phase, "servedVersion": served}
    if cr.status != new_status:
        store.update_status(key, new_status)
        actions += 1
    return ReconcileOutcome.done(actions)


class OperatorHost:
    """Registers the application controller while its Deployment is installed.

    Models the operator pod's lifecycle: the CD bundle applying (or pruning)
    the operator Deployment is what starts (or stops) its reconcile loop.
    """

    def __init__(self, store: ClusterStore, runtime: ControllerRuntime):
        self.store = store
        self.runtime = runtime
        self._running_version: str | None = None

    def sync(self) -> bool:
        installed_version = installed_operator_version(self.store)
        registered = self.runtime.is_registered(CONTROLLER_NAME)
        if installed_version is not None and not registered:
            self.runtime.register(make_nginx_controller(self.store))
            self._running_version = installed_version
            return True
        if installed_version is None and registered:
            self.runtime.deregister(CONTROLLER_NAME)
            self._running_version = None
            return True
        if registered and installed_version != self._running_version:
            # Upgraded operator restarts: re-registering re-lists every CR,
            # which is how the new version propagates to existing instances.
            self.runtime.deregister(CONTROLLER_NAME)
            self.runtime.register(make_nginx_controller(self.store))
            self._running_version = installed_version
            return True
        return False
