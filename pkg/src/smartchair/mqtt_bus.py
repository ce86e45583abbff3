"""MQTT 3.1.1 broker adapter for the message-bus contract.

Speaks the minimal client subset this system needs: CONNECT with
credentials, SUBSCRIBE/UNSUBSCRIBE, PUBLISH at QoS 0, and PINGREQ
keepalives. Inbound PUBLISH packets are fanned out to local Subscription
queues with the same at-most-once semantics as the in-memory bus.
"""

from __future__ import annotations

import logging
import socket
import struct
import threading
import time
import uuid
from typing import Sequence
from urllib.parse import urlparse, unquote

from .bus import (
    BusClosedError,
    BusMessage,
    MessageBus,
    Subscription,
    _coerce_patterns,
    _coerce_payload,
    validate_topic,
)
from .model import SmartChairError

logger = logging.getLogger(__name__)

CONNECT, CONNACK, PUBLISH, SUBSCRIBE, SUBACK = 1, 2, 3, 8, 9
UNSUBSCRIBE, UNSUBACK, PINGREQ, PINGRESP, DISCONNECT = 10, 11, 12, 13, 14


class MqttError(SmartChairError):
    """Protocol or connection failure talking to the broker."""


def encode_varint(n: int) -> bytes:
    out = bytearray()
    while True:
        byte = n % 128
        n //= 128
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def encode_string(s: str) -> bytes:
    data = s.encode("utf-8")
    return struct.pack(">H", len(data)) + data


def encode_packet(packet_type: int, flags: int, body: bytes) -> bytes:
    return bytes([(packet_type << 4) | flags]) + encode_varint(len(body)) + body


def encode_connect(
    client_id: str,
    username: str | None,
    password: str | None,
    keepalive: int,
    clean_session: bool = True,
) -> bytes:
    flags = 0x02 if clean_session else 0x00
    payload = encode_string(client_id)
    if username is not None:
        flags |= 0x80
        payload += encode_string(username)
        if password is not None:
            flags |= 0x40
            payload += encode_string(password)
    body = encode_string("MQTT") + bytes([4, flags]) + struct.pack(">H", keepalive) + payload
    return encode_packet(CONNECT, 0, body)

def encode_publish(topic: str, payload: bytes) -> bytes:
    return encode_packet(PUBLISH, 0, encode_string(topic) + payload)  # QoS 0: no packet id


def encode_subscribe(packet_id: int, patterns: Sequence[str]) -> bytes:
    body = struct.pack(">H", packet_id)
    for pattern in patterns:
        body += encode_string(pattern) + b"\x00"  # requested QoS 0
    return encode_packet(SUBSCRIBE, 0x2, body)


def encode_unsubscribe(packet_id: int, patterns: Sequence[str]) -> bytes:
    body = struct.pack(">H", packet_id)
    for pattern in patterns:
        body += encode_string(pattern)
    return encode_packet(UNSUBSCRIBE, 0x2, body)


def decode_string(data: bytes, offset: int) -> tuple[str, int]:
    (length,) = struct.unpack_from(">H", data, offset)
    end = offset + 2 + length
    return data[offset + 2 : end].decode("utf-8"), end


def read_packet(sock: socket.socket) -> tuple[int, int, bytes]:
    """Read one packet: (type, flags, body). Raises MqttError on EOF."""
    head = _read_exact(sock, 1)
    packet_type, flags = head[0] >> 4, head[0] & 0x0F
    length = 0
    shift = 0
    while True:
        byte = _read_exact(sock, 1)[0]
        length |= (byte & 0x7F) << shift
        if not byte & 0x80:
            break
        shift += 7
        if shift > 21:
            raise MqttError("malformed remaining-length varint")
    body = _read_exact(sock, length) if length else b""
    return packet_type, flags, body


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise MqttError("connection closed by broker")
        buf.extend(chunk)
    return bytes(buf)


class MqttBus(MessageBus):
    """MessageBus backed by an external MQTT 3.1.1 broker, QoS 0 only."""

    def __init__(
        self,
        host: str,
        port: int = 1883,
        *,
        username: str | None = None,
        password: str | None = None,
        client_id: str | None = None,
        keepalive: int = 60,
        timeout: float = 10.0,
    ):
        self.client_id = client_id or f"smartchair-{uuid.uuid4().hex[:12]}"
        self._timeout = timeout
        self._subs: list[Subscription] = []
        self._lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._acks: dict[int, threading.Event] = {}
        self._packet_id = 0
        self._seq = 0
        self._closed = False

        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._send(encode_connect(self.client_id, username, password, keepalive))
        packet_type, _, body = read_packet(self._sock)
        if packet_type != CONNACK or len(body) < 2:
            raise MqttError(f"expected CONNACK, got packet type {packet_type}")
        if body[1] != 0:
            raise MqttError(f"broker refused connection, return code {body[1]}")
        self._sock.settimeout(None)

        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._pinger = threading.Thread(target=self._ping_loop, args=(keepalive,), daemon=True)
        self._pinger.start()

    @classmethod
    def from_url(cls, url: str, **kwargs) -> "MqttBus":
        """mqtt://[user[:password]@]host[:port]"""
        parsed = urlparse(url)
        if parsed.scheme != "mqtt" or not parsed.hostname:
            raise MqttError(f"expected mqtt://host[:port] URL, got {url!r}")
        return cls(
            parsed.hostname,
            parsed.port or 1883,
            username=unquote(parsed.username) if parsed.username else None,
            password=unquote(parsed.password) if parsed.password else None,
            **kwargs,
        )

    def publish(self, topic: str, payload: bytes | str, *, published_at: float | None = None) -> int:
        validate_topic(topic)
        if self._closed:
            raise BusClosedError("publish on a closed bus")
        self._send(encode_publish(topic, _coerce_payload(payload)))
        return 0  # deliveries happen at the broker

    def subscribe(self, patterns: str | Sequence[str], *, capacity: int = 1024) -> Subscription:
        pats = _coerce_patterns(patterns)
        if self._closed:
            raise BusClosedError("subscribe on a closed bus")
        sub = Subscription(pats, capacity)
        with self._lock:
            self._subs.append(sub)
        try:
            self._request_ack(encode_subscribe, pats)
        except Exception:
            with self._lock:
                self._subs.remove(sub)
            raise
        return sub

    def unsubscribe(self, subscription: Subscription) -> None:
        with self._lock:
            if subscription not in self._subs:
                return
            self._subs.remove(subscription)
        if not self._closed:
            self._request_ack(encode_unsubscribe, subscription.patterns)
        subscription.close()

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._send(encode_packet(DISCONNECT, 0, b""))
        except Exception:
            pass
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
        with self._lock:
            subs, self._subs = list(self._subs), []
        for sub in subs:
            sub.close()

    def _send(self, data: bytes) -> None:
        with self._write_lock:
            try:
                self._sock.sendall(data)
            except OSError as err:
                raise MqttError(f"send failed: {err}") from err

    def _request_ack(self, encoder, patterns: Sequence[str]) -> None:
        with self._lock:
            self._packet_id = self._packet_id % 0xFFFF + 1
            packet_id = self._packet_id
            event = threading.Event()
            self._acks[packet_id] = event
        self._send(encoder(packet_id, patterns))
        if not event.wait(self._timeout):
            self._acks.pop(packet_id, None)
            raise MqttError("broker did not acknowledge subscription change")

    def _read_loop(self) -> None:
        try:
            while not self._closed:
                packet_type, _, body = read_packet(self._sock)
                if packet_type == PUBLISH:
                    topic, end = decode_string(body, 0)
                    self._dispatch(topic, body[end:])
                elif packet_type in (SUBACK, UNSUBACK):
                    (packet_id,) = struct.unpack_from(">H", body, 0)
                    event = self._acks.pop(packet_id, None)
                    if event:
                        event.set()
                elif packet_type == PINGRESP:
                    pass
                else:
                    logger.debug("ignoring packet type %d", packet_type)
        except (MqttError, OSError) as err:
            if not self._closed:
                logger.warning("mqtt reader stopped: %s", err)
                self.close()

    def _dispatch(self, topic: str, payload: bytes) -> None:
        with self._lock:
            self._seq += 1
            message = BusMessage(topic=topic, payload=payload, published_at=time.time(), seq=self._seq)
            targets = [s for s in self._subs if s.matches(topic)]
        for sub in targets:
            sub.deliver(message)

    def _ping_loop(self, keepalive: int) -> None:
        interval = max(keepalive / 2, 1.0)
        while not self._closed:
            time.sleep(interval)
            if self._closed:
                return
            try:
                self._send(encode_packet(PINGREQ, 0, b""))
            except MqttError:
                return
