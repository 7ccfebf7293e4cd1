"""Controller runtime: watches a cluster store and drives reconcile loops.

Level-triggered: events only enqueue keys (deduplicated); each reconcile
reads current state and converges it toward desired state, so bursts of
events collapse and a reconcile at the fixed point performs no mutations.
Reconciles for distinct keys run serially inside one pump, which keeps the
whole runtime deterministic under the simulation's logical clock.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..cluster.store import ClusterStore, ResourceKey, WatchEvent
from ..errors import DuplicateController

DONE = "done"
REQUEUE = "requeue"
ERROR = "error"

# A pump that loops this many times without quiescing is livelocked.
MAX_PUMP_ITERATIONS = 1000


@dataclass
class ReconcileOutcome:
    result: str
    actions_taken: int = 0
    requeue_after: float = 0.0
    message: str = ""

    @classmethod
    def done(cls, actions: int = 0) -> "ReconcileOutcome":
        return cls(DONE, actions_taken=actions)

    @classmethod
    def requeue(cls, after: float, actions: int = 0) -> "ReconcileOutcome":
        return cls(REQUEUE, actions_taken=actions, requeue_after=after)

    @classmethod
    def error(cls, message: str, actions: int = 0) -> "ReconcileOutcome":
        return cls(ERROR, actions_taken=actions, message=message)


@dataclass
class ControllerRegistration:
    name: str
    watched_kind: str
    owned_kinds: tuple[str, ...]
    reconcile: Callable[[ResourceKey], ReconcileOutcome]
    backoff_initial: float = 1.0
    backoff_multiplier: float = 2.0
    backoff_cap: float = 60.0


@dataclass
class PumpStats:
    events: int = 0
    reconciles: int = 0
    errors: int = 0
    actions: int = 0


@dataclass
class _ControllerState:
    reg: ControllerRegistration
    queue: dict[ResourceKey, None] = field(default_factory=dict)  # ordered set
    error_streak: dict[ResourceKey, int] = field(default_factory=dict)

    def enqueue(self, key: ResourceKey) -> None:
        self.queue.setdefault(key, None)

    def backoff(self, key: ResourceKey) -> float:
        streak = self.error_streak.get(key, 1)
        delay = self.reg.backoff_initial * (self.reg.backoff_multiplier ** (streak - 1))
        return min(delay, self.reg.backoff_cap)


class ControllerRuntime:
    def __init__(self, store: ClusterStore):
        self.store = store
        self._cursor = store.watch()
        self._controllers: dict[str, _ControllerState] = {}
        self._scheduled: list[tuple[float, int, str, ResourceKey]] = []
        self._schedule_seq = 0

    def register(self, reg: ControllerRegistration) -> None:
        for state in self._controllers.values():
            if state.reg.watched_kind == reg.watched_kind:
                raise DuplicateController(
                    f"kind {reg.watched_kind!r} already watched by {state.reg.name!r}"
                )
        if reg.name in self._controllers:
            raise DuplicateController(f"controller {reg.name!r} already registered")
        state = _ControllerState(reg)
        # Level-triggered startup: reconcile everything that already exists.
        for obj in self.store.list(reg.watched_kind):
            state.enqueue(obj.key)
        self._controllers[reg.name] = state

    def deregister(self, name: str) -> None:
        self._controllers.pop(name, None)
        self._scheduled = [e for e in self._scheduled if e[2] != name]
        heapq.heapify(self._scheduled)

    def is_registered(self, name: str) -> bool:
        return name in self._controllers

    def _dispatch(self, event: WatchEvent) -> None:
        kind = event.object.key.kind
        for state in self._controllers.values():
            if kind == state.reg.watched_kind:
                state.enqueue(event.object.key)
            elif kind in state.reg.owned_kinds:
                for ref in event.object.owner_refs:
                    if ref.kind == state.reg.watched_kind:
                        state.enqueue(ref)

    def _schedule(self, at: float, name: str, key: ResourceKey) -> None:
        self._schedule_seq += 1
        heapq.heappush(self._scheduled, (at, self._schedule_seq, name, key))

    def _pull_due(self, now: float) -> bool:
        moved = False
        while self._scheduled and self._scheduled[0][0] <= now:
            _, _, name, key = heapq.heappop(self._scheduled)
            state = self._controllers.get(name)
            if state is not None:
                state.enqueue(key)
                moved = True
        return moved

    def next_due(self) -> Optional[float]:
        return self._scheduled[0][0] if self._scheduled else None

    def pump(self, now: float) -> PumpStats:
        """Process all watch events and due work at logical time `now`.

        Runs to quiescence: reconciles may emit new events, which are picked
        up within the same pump. Requeues and error backoffs scheduled in the
        future are left for a later pump.
        """
        stats = PumpStats()
        for _ in range(MAX_PUMP_ITERATIONS):
            events = self._cursor.poll()
            for event in events:
                self._dispatch(event)
            stats.events += len(events)
            self._pull_due(now)
            ran = 0
            for name in list(self._controllers):
                state = self._controllers.get(name)
                if state is None:
                    continue
                while state.queue:
                    key = next(iter(state.queue))
                    del state.queue[key]
                    outcome = self._run_one(state, key, now)
                    ran += 1
                    stats.reconciles += 1
                    stats.actions += outcome.actions_taken
                    if outcome.result == ERROR:
                        stats.errors += 1
            if ran == 0 and not events:
                return stats
        raise RuntimeError("controller runtime failed to quiesce; reconcile livelock")

    def _run_one(self, state: _ControllerState, key: ResourceKey, now: float) -> ReconcileOutcome:
        try:
            outcome = state.reg.reconcile(key)
        except Exception as exc:  # controller panic: isolate, count, requeue
            outcome = ReconcileOutcome.error(f"{type(exc).__name__}: {exc}")
        if outcome.result == ERROR:
            state.error_streak[key] = state.error_streak.get(key, 0) + 1
            self._schedule(now + state.backoff(key), state.reg.name, key)
        else:
            state.error_streak.pop(key, None)
            if outcome.result == REQUEUE:
                self._schedule(now + outcome.requeue_after, state.reg.name, key)
        return outcome
