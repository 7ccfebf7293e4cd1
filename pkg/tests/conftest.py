from __future__ import annotations

import pytest

from razorcd.artifacts import MemoryArtifactStore
from razorcd.bundles import dump_bundle
from razorcd.control_plane.api import ApiRouter
from razorcd.control_plane.core import ControlPlane, Credentials

ORG_KEY = "org-key-test"
API_KEY = "api-key-test"
USER_ID = "user-test"

CREDS = Credentials(ORG_KEY, API_KEY, USER_ID)

# One (number, status, summary) entry per acceptance criterion that ran;
# printed as a dedicated section in the terminal summary.
ACCEPTANCE_RESULTS: list[tuple[int, str, str]] = []


def record_acceptance(number: int, status: str, summary: str) -> None:
    ACCEPTANCE_RESULTS.append((number, status, summary))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, summary in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"ACCEPTANCE {number}: {status} - {summary}")


class FakeClock:
    """Mutable logical clock injected into the control plane."""

    def __init__(self, now: float = 0.0):
        self.now = now

    def __call__(self) -> float:
        return self.now

    def advance(self, delta: float) -> float:
        self.now += delta
        return self.now


def make_bundle(*names: str, kind: str = "ConfigMap", namespace: str = "demo") -> bytes:
    docs = [
        {
            "apiVersion": "v1",
            "kind": kind,
            "metadata": {"namespace": namespace, "name": name},
            "spec": {"payload": name},
        }
        for name in names
    ]
    return dump_bundle(docs)


@pytest.fixture
def clock() -> FakeClock:
    return FakeClock()


@pytest.fixture
def cp(clock) -> ControlPlane:
    return ControlPlane(CREDS, MemoryArtifactStore(), clock=clock)


@pytest.fixture
def router(cp) -> ApiRouter:
    return ApiRouter(cp)


def upload(cp: ControlPlane, channel: str, version: str, payload: bytes) -> dict:
    return cp.upload_version(
        channel, version, payload, org_key=ORG_KEY, api_key=API_KEY, user_id=USER_ID
    )
