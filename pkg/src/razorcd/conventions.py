"""Wire-format constants shared by the control plane, agents, and operators."""

# Label that opts a resource into monitoring, and its fidelity levels.
WATCH_LABEL = "razeedash/watch-resource"
WATCH_LEVELS = ("lite", "detail", "debug")

# Provenance annotations stamped on every object an agent applies.
ANNOTATION_SUB_ID = "razeedash.io/sub-id"
ANNOTATION_VERSION_UID = "razeedash.io/version-uid"

# Namespace where agents materialize their custom resources.
AGENT_NAMESPACE = "razeedeploy"

# The agent-side custom resource pointing at a subscription's artifact.
RR_GROUP = "deploy.razeedash.io"
RR_VERSION = "v1alpha2"
RR_KIND = "RemoteResource"
RR_PLURAL = "remoteresources"
RR_API_VERSION = f"{RR_GROUP}/{RR_VERSION}"

# Auth and upload header names.
HEADER_ORG_KEY = "razeedash-org-key"
HEADER_API_KEY = "x-api-key"
HEADER_USER_ID = "x-user-id"
HEADER_RESOURCE_NAME = "resource-name"
