"""Built-in deployment controller: keeps pods matching the deployment spec.

Creates missing pods, deletes surplus ones, and rolls stale pods (template
hash drift) one per reconcile pass so intermediate states are observable.
"""

from __future__ import annotations

from ..cluster.store import ClusterStore, ResourceKey, spec_hash
from .runtime import ControllerRegistration, ReconcileOutcome

TEMPLATE_HASH_ANNOTATION = "pod-template-hash"
CONTROLLER_NAME = "deployment-controller"


def make_deployment_controller(store: ClusterStore) -> ControllerRegistration:
    return ControllerRegistration(
        name=CONTROLLER_NAME,
        watched_kind="Deployment",
        owned_kinds=("Pod",),
        reconcile=lambda key: reconcile_deployment(store, key),
    )


def reconcile_deployment(store: ClusterStore, key: ResourceKey) -> ReconcileOutcome:
    dep = store.get_optional(key)
    if dep is None:
        # Owner-reference cascade already removed the pods.
        return ReconcileOutcome.done()
    replicas = int(dep.spec.get("replicas", 1))
    template = dep.spec.get("template") or {}
    template_hash = spec_hash(template)
    actions = 0

    pods = {
        p.key.name: p
        for p in store.list("Pod", namespace=key.namespace)
        if key in p.owner_refs
    }
    desired_names = [f"{key.name}-{i}" for i in range(replicas)]

    for name in sorted(set(pods) - set(desired_names)):
        store.delete(pods[name].key)
        del pods[name]
        actions += 1

    for name in desired_names:
        if name not in pods:
            actions += _create_pod(store, key, name, template, template_hash)

    stale = [
        name
        for name in desired_names
        if name in pods
        and pods[name].annotations.get(TEMPLATE_HASH_ANNOTATION) != template_hash
    ]
    if stale:
        # Rolling update: replace exactly one stale pod per pass.
        name = stale[0]
        store.delete(pods[name].key)
        actions += 1
        actions += _create_pod(store, key, name, template, template_hash)

    ready = 0
    for name in desired_names:
        pod = store.get_optional(ResourceKey("v1", "Pod", key.namespace, name))
        if (
            pod is not None
            and pod.annotations.get(TEMPLATE_HASH_ANNOTATION) == template_hash
            and pod.status.get("phase") == "Running"
        ):
            ready += 1

    new_status = {"replicas": replicas, "readyReplicas": ready}
    if dep.status != new_status:
        store.update_status(key, new_status)
        actions += 1
    return ReconcileOutcome.done(actions)


def _create_pod(
    store: ClusterStore,
    dep_key: ResourceKey,
    name: str,
    template: dict,
    template_hash: str,
) -> int:
    meta = template.get("metadata") or {}
    doc = {
        "apiVersion": "v1",
        "kind": "Pod",
        "metadata": {
            "namespace": dep_key.namespace,
            "name": name,
            "labels": dict(meta.get("labels") or {}),
            "annotations": {TEMPLATE_HASH_ANNOTATION: template_hash},
            "ownerRefs": [dep_key.to_dict()],
        },
        "spec": dict(template.get("spec") or {}),
    }
    store.apply(doc)
    # The store has no kubelet; the controller marks its pods running.
    store.update_status(ResourceKey("v1", "Pod", dep_key.namespace, name), {"phase": "Running"})
    return 2
