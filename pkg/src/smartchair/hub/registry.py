"""Chair occupancy registry: one owner per chair, session lifecycle."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..model import Thresholds, ValidationError
from ..report import SessionRecord, SessionTally
from ..session import ChairSession

ANONYMOUS_CLIENT = "anonymous"


@dataclass(frozen=True)
class LoginRequest:
    chair_id: int
    query: str  # "login" | "logout"
    client_id: str = ANONYMOUS_CLIENT

    @classmethod
    def from_payload(cls, payload: dict) -> "LoginRequest":
        if not isinstance(payload, dict):
            raise ValidationError(f"payload: expected object, got {type(payload).__name__}")
        chair_id = payload.get("chairId")
        if not isinstance(chair_id, int) or isinstance(chair_id, bool) or chair_id < 1:
            raise ValidationError(f"chairId: must be a positive integer, got {chair_id!r}")
        query = payload.get("query")
        if query not in ("login", "logout"):
            raise ValidationError(f"query: must be 'login' or 'logout', got {query!r}")
        client_id = payload.get("client_id") or ANONYMOUS_CLIENT
        if not isinstance(client_id, str):
            raise ValidationError(f"client_id: must be a string, got {client_id!r}")
        return cls(chair_id=chair_id, query=query, client_id=client_id)


@dataclass
class ChairSlot:
    chair_id: int
    owner: str | None = None
    session: ChairSession | None = None
    tally: SessionTally | None = None
    last_activity: float = 0.0

    @property
    def occupied(self) -> bool:
        return self.owner is not None


@dataclass(frozen=True)
class LoginOutcome:
    success: bool
    reason: str | None = None
    command: str | None = None  # "start"/"stop" to forward to the chair
    record: SessionRecord | None = None  # closed session on logout


class ChairRegistry:
    """Tracks which client owns which chair. Mutated only by the hub's
    serialized event stream; never shared across writers."""

    def __init__(self, chair_ids: list[int], thresholds: Thresholds | None = None):
        if not chair_ids:
            raise ValidationError("chairs: at least one chair id required")
        self.thresholds = thresholds or Thresholds()
        self._slots = {cid: ChairSlot(chair_id=cid) for cid in sorted(set(chair_ids))}
        for cid in self._slots:
            if not isinstance(cid, int) or cid < 1:
                raise ValidationError(f"chairs: invalid chair id {cid!r}")

    @property
    def chair_ids(self) -> list[int]:
        return list(self._slots)

    def slot(self, chair_id: int) -> ChairSlot | None:
        return self._slots.get(chair_id)

    def login(self, chair_id: int, client_id: str, now: float) -> LoginOutcome:
        slot = self._slots.get(chair_id)
        if slot is None:
            return LoginOutcome(False, reason="unknown chair")
        if slot.occupied:
            return LoginOutcome(False, reason="occupied")
        slot.owner = client_id
        slot.session = ChairSession.open(chair_id, now, self.thresholds)
        slot.tally = SessionTally(now)
        slot.last_activity = now
        return LoginOutcome(True, command="start")

    def logout(self, chair_id: int, client_id: str, now: float) -> LoginOutcome:
        slot = self._slots.get(chair_id)
        if slot is None:
            return LoginOutcome(False, reason="unknown chair")
        if not slot.occupied:
            return LoginOutcome(False, reason="not occupied")
        if slot.owner != client_id:
            return LoginOutcome(False, reason="not owner")
        record = self._close_slot(slot, now)
        return LoginOutcome(True, command="stop", record=record)

    def expire_idle(self, now: float, max_silent_secs: float) -> list[SessionRecord]:
        """Force-close sessions with no traffic for max_silent_secs."""
        closed = []
        for slot in self._slots.values():
            if slot.occupied and now - slot.last_activity > max_silent_secs:
                closed.append(self._close_slot(slot, now))
        return closed

    def _close_slot(self, slot: ChairSlot, now: float) -> SessionRecord:
        assert slot.session is not None and slot.tally is not None
        slot.tally.close(now)
        record = SessionRecord(
            chair_id=slot.chair_id,
            start_time=slot.session.start_time,
            end_time=now,
            sitting_history=[dict(e) for e in slot.session.sitting_history],
            state_secs=dict(slot.tally.state_secs),
            long_sitting_episodes=slot.tally.long_sitting_episodes,
            red_episodes=slot.tally.red_episodes,
        )
        slot.owner = None
        slot.session = None
        slot.tally = None
        return record
