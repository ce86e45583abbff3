"""Pluggable publish/subscribe transport.

The in-memory bus implements QoS-0 semantics for tests and single-process
runs: per-topic FIFO per subscriber, at-most-once delivery, bounded
subscriber buffers that drop the oldest message rather than block the
publisher. Topic filters use MQTT rules ('+' single level, '#' multi level,
trailing only).
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Deque, Sequence

from .model import SmartChairError, ValidationError


class BusClosedError(SmartChairError):
    """Operation on a bus that has been shut down."""


@dataclass(frozen=True)
class BusMessage:
    topic: str
    payload: bytes
    published_at: float = 0.0
    seq: int = 0


def validate_topic(topic: str) -> None:
    if not topic or not isinstance(topic, str):
        raise ValidationError(f"topic: must be a non-empty string, got {topic!r}")
    if "+" in topic or "#" in topic:
        raise ValidationError(f"topic: wildcards not allowed in publish topics: {topic!r}")


def validate_filter(pattern: str) -> None:
    if not pattern or not isinstance(pattern, str):
        raise ValidationError(f"filter: must be a non-empty string, got {pattern!r}")
    levels = pattern.split("/")
    for i, level in enumerate(levels):
        if "#" in level:
            if level != "#" or i != len(levels) - 1:
                raise ValidationError(f"filter: '#' must be the whole final level: {pattern!r}")
        elif "+" in level and level != "+":
            raise ValidationError(f"filter: '+' must occupy a whole level: {pattern!r}")


def topic_matches(pattern: str, topic: str) -> bool:
    """MQTT filter matching: exact levels, '+' one level, '#' the rest."""
    p_levels = pattern.split("/")
    t_levels = topic.split("/")
    for i, p in enumerate(p_levels):
        if p == "#":
            return True
        if i >= len(t_levels):
            return False
        if p != "+" and p != t_levels[i]:
            return False
    return len(p_levels) == len(t_levels)


class Subscription:
    """Ordered stream of matching messages, consumed by one reader."""

    def __init__(self, patterns: tuple[str, ...], capacity: int):
        self.patterns = patterns
        self._capacity = capacity
        self._queue: Deque[BusMessage] = deque()
        self._cond = threading.Condition()
        self._dropped = 0
        self._open = True

    @property
    def dropped(self) -> int:
        return self._dropped

    def matches(self, topic: str) -> bool:
        return any(topic_matches(p, topic) for p in self.patterns)

    def deliver(self, message: BusMessage) -> None:
        with self._cond:
            if not self._open:
                return
            if len(self._queue) >= self._capacity:
                self._queue.popleft()
                self._dropped += 1
            self._queue.append(message)
            self._cond.notify()

    def get(self, timeout: float | None = None) -> BusMessage | None:
        """Next message, or None on timeout / closed-and-empty."""
        with self._cond:
            if not self._queue:
                self._cond.wait(timeout)
            if self._queue:
                return self._queue.popleft()
            return None

    def drain(self) -> list[BusMessage]:
        with self._cond:
            items = list(self._queue)
            self._queue.clear()
            return items

    def close(self) -> None:
        with self._cond:
            self._open = False
            self._cond.notify_all()


class MessageBus(ABC):
    """Transport contract shared by the in-memory bus and broker adapters."""

    @abstractmethod
    def publish(self, topic: str, payload: bytes | str, *, published_at: float | None = None) -> int:
        """Deliver to every matching subscription at most once; returns the
        local delivery count (0 for remote transports)."""

    @abstractmethod
    def subscribe(self, patterns: str | Sequence[str], *, capacity: int = 1024) -> Subscription:
        ...

    @abstractmethod
    def unsubscribe(self, subscription: Subscription) -> None:
        ...

    @abstractmethod
    def close(self) -> None:
        ...


def _coerce_payload(payload: bytes | str) -> bytes:
    if isinstance(payload, str):
        return payload.encode("utf-8")
    if isinstance(payload, (bytes, bytearray)):
        return bytes(payload)
    raise ValidationError(f"payload: expected bytes or str, got {type(payload).__name__}")


def _coerce_patterns(patterns: str | Sequence[str]) -> tuple[str, ...]:
    if isinstance(patterns, str):
        patterns = (patterns,)
    pats = tuple(patterns)
    if not pats:
        raise ValidationError("filter: at least one pattern required")
    for p in pats:
        validate_filter(p)
    return pats


class InMemoryBus(MessageBus):
    """Single-process bus; safe for concurrent publish/subscribe."""

    def __init__(self):
        self._subs: list[Subscription] = []
        self._lock = threading.Lock()
        self._seq = 0
        self._closed = False

    def publish(self, topic: str, payload: bytes | str, *, published_at: float | None = None) -> int:
        validate_topic(topic)
        body = _coerce_payload(payload)
        with self._lock:
            if self._closed:
                raise BusClosedError("publish on a closed bus")
            self._seq += 1
            message = BusMessage(
                topic=topic,
                payload=body,
                published_at=published_at if published_at is not None else 0.0,
                seq=self._seq,
            )
            targets = [s for s in self._subs if s.matches(topic)]
        for sub in targets:
            sub.deliver(message)
        return len(targets)

    def subscribe(self, patterns: str | Sequence[str], *, capacity: int = 1024) -> Subscription:
        pats = _coerce_patterns(patterns)
        sub = Subscription(pats, capacity)
        with self._lock:
            if self._closed:
                raise BusClosedError("subscribe on a closed bus")
            self._subs.append(sub)
        return sub

    def unsubscribe(self, subscription: Subscription) -> None:
        with self._lock:
            if subscription in self._subs:
                self._subs.remove(subscription)
        subscription.close()

    def close(self) -> None:
        with self._lock:
            self._closed = True
            subs = list(self._subs)
            self._subs.clear()
        for sub in subs:
            sub.close()
