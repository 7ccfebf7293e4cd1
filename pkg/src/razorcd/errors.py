"""Domain error types shared across the control plane, cluster store, and agent."""

from __future__ import annotations


class RazorError(Exception):
    """Base class for all domain errors. `code` is the wire-level error code."""

    code = "error"
    http_status = 400


class InvalidName(RazorError):
    code = "invalid_name"
    http_status = 400


class DuplicateChannel(RazorError):
    code = "duplicate_channel"
    http_status = 409


class ChannelNotFound(RazorError):
    code = "channel_not_found"
    http_status = 404


class ChannelInUse(RazorError):
    code = "channel_in_use"
    http_status = 409


class VersionExists(RazorError):
    code = "version_exists"
    http_status = 409


class VersionNotFound(RazorError):
    code = "version_not_found"
    http_status = 404


class SubscriptionNotFound(RazorError):
    code = "subscription_not_found"
    http_status = 404


class EmptyTags(RazorError):
    code = "empty_tags"
    http_status = 400


class MalformedBundle(RazorError):
    code = "malformed_bundle"
    http_status = 400


class Unauthorized(RazorError):
    code = "unauthorized"
    http_status = 401


class UnknownCluster(RazorError):
    code = "unknown_cluster"
    http_status = 404


class MalformedReport(RazorError):
    code = "malformed_report"
    http_status = 400


class InvalidRule(RazorError):
    code = "invalid_rule"
    http_status = 400


class NotFound(RazorError):
    code = "not_found"
    http_status = 404


class DuplicateCrd(RazorError):
    code = "duplicate_crd"
    http_status = 409


class UnknownKind(RazorError):
    code = "unknown_kind"
    http_status = 400


class InvalidObject(RazorError):
    code = "invalid_object"
    http_status = 400


class DuplicateController(RazorError):
    code = "duplicate_controller"
    http_status = 409


class ControlPlaneUnreachable(RazorError):
    code = "control_plane_unreachable"
    http_status = 503


class FetchFailed(RazorError):
    code = "fetch_failed"
    http_status = 502


class HashMismatch(RazorError):
    code = "hash_mismatch"
    http_status = 502


class Conflict(RazorError):
    code = "conflict"
    http_status = 409


class ScenarioFailed(RazorError):
    code = "scenario_failed"
    http_status = 500


class HorizonExceeded(RazorError):
    """Raised when a simulation reaches its horizon before converging.

    Carries the partial report so callers can still inspect per-cluster state.
    """

    code = "horizon_exceeded"
    http_status = 500

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
