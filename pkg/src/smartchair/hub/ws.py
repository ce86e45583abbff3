"""WebSocket layer: live appData mirror, login bridge, report endpoint.

Paths served:

    /ws/ch{N}/appData   text frames, byte-identical to the bus appData payloads
    /ws/control         JSON login/logout bridge; appStatus replies broadcast
    GET /report/ch{N}?day=YYYY-MM-DD   daily report as JSON (plain HTTP)
    GET /chairs                        configured chairs and occupancy

The server runs its own asyncio loop in a background thread; the hub hands
payloads over via send(), which never blocks on slow clients.
"""

from __future__ import annotations

import asyncio
import json
import logging
import re
import threading
import uuid
from urllib.parse import parse_qs, urlparse

from websockets.asyncio.server import broadcast, serve
from websockets.datastructures import Headers
from websockets.http11 import Response

from ..report import daily_report
from .service import HubService
from .topics import APP_LOGIN_TOPIC, TOPIC_PREFIX

logger = logging.getLogger(__name__)

_DATA_PATH = re.compile(r"^/ws/ch(\d+)/appData$")
_REPORT_PATH = re.compile(r"^/report/ch(\d+)$")


def _http_response(status: int, reason: str, body: dict | str) -> Response:
    data = (json.dumps(body) if isinstance(body, dict) else body).encode()
    headers = Headers(
        [
            ("Content-Type", "application/json"),
            ("Content-Length", str(len(data))),
            ("Access-Control-Allow-Origin", "*"),
        ]
    )
    return Response(status, reason, headers, data)


class WebSocketFanout:
    """Bridges one HubService to browser clients."""

    def __init__(self, hub: HubService, host: str = "127.0.0.1", port: int = 8765):
        self.hub = hub
        self.host = host
        self.port = port
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._forwarder: threading.Thread | None = None
        self._stop: asyncio.Future | None = None
        self._ready = threading.Event()
        self._chair_clients: dict[int, set] = {}
        self._control_clients: set = set()
        self._status_sub = hub.bus.subscribe(f"{TOPIC_PREFIX}/+/appStatus")
        self._closing = False

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run_loop, daemon=True, name="ws-fanout")
        self._thread.start()
        if not self._ready.wait(timeout=10):
            raise RuntimeError("WebSocket server failed to start")
        self._forwarder = threading.Thread(
            target=self._forward_status, daemon=True, name="ws-status-forward"
        )
        self._forwarder.start()

    def stop(self) -> None:
        self._closing = True
        if self._loop and self._stop:
            self._loop.call_soon_threadsafe(
                lambda: self._stop.set_result(None) if not self._stop.done() else None
            )
        if self._thread:
            self._thread.join(timeout=5)
        self.hub.bus.unsubscribe(self._status_sub)
        if self._forwarder:
            self._forwarder.join(timeout=5)

    def _run_loop(self) -> None:
        asyncio.run(self._serve())

    async def _serve(self) -> None:
        self._loop = asyncio.get_running_loop()
        self._stop = self._loop.create_future()
        async with serve(
            self._handler,
            self.host,
            self.port,
            process_request=self._process_request,
        ) as server:
            if self.port == 0:
                self.port = next(iter(server.sockets)).getsockname()[1]
            self._ready.set()
            await self._stop

    # -- hub-facing API ------------------------------------------------------

    def send(self, chair_id: int, payload: bytes) -> None:
        """Mirror one appData payload to that chair's WebSocket clients."""
        if self._loop is None or self._closing:
            return
        text = payload.decode("utf-8")
        self._loop.call_soon_threadsafe(self._broadcast_chair, chair_id, text)

    def _broadcast_chair(self, chair_id: int, text: str) -> None:
        clients = self._chair_clients.get(chair_id)
        if clients:
            broadcast(clients, text)

    def _forward_status(self) -> None:
        while not self._closing:
            message = self._status_sub.get(timeout=0.2)
            if message is None:
                continue
            if self._loop is None:
                continue
            text = message.payload.decode("utf-8")
            self._loop.call_soon_threadsafe(self._broadcast_control, text)

    def _broadcast_control(self, text: str) -> None:
        if self._control_clients:
            broadcast(self._control_clients, text)

    # -- connection handling --------------------------------------------------

    def _process_request(self, connection, request):
        if request.headers.get("Upgrade", "").lower() == "websocket":
            return None  # continue the WebSocket handshake
        return self._handle_http(request)

    def _handle_http(self, request) -> Response:
        parsed = urlparse(request.path)
        match = _REPORT_PATH.match(parsed.path)
        if match:
            chair_id = int(match.group(1))
            day = parse_qs(parsed.query).get("day", [None])[0]
            if not day:
                return _http_response(400, "Bad Request", {"error": "missing ?day=YYYY-MM-DD"})
            sessions = self.hub.store.sessions(chair_id, day)
            report = daily_report(sessions).to_dict()
            report["day"] = day
            report["chairId"] = chair_id
            return _http_response(200, "OK", report)
        if parsed.path == "/chairs":
            chairs = [
                {"chairId": cid, "occupied": self.hub.registry.slot(cid).occupied}
                for cid in self.hub.registry.chair_ids
            ]
            return _http_response(200, "OK", {"chairs": chairs})
        return _http_response(404, "Not Found", {"error": f"no route for {parsed.path}"})

    async def _handler(self, connection) -> None:
        path = connection.request.path
        match = _DATA_PATH.match(path)
        if match:
            await self._serve_chair_stream(connection, int(match.group(1)))
        elif path == "/ws/control":
            await self._serve_control(connection)
        else:
            await connection.close(code=4004, reason=f"unknown path {path}")

    async def _serve_chair_stream(self, connection, chair_id: int) -> None:
        clients = self._chair_clients.setdefault(chair_id, set())
        clients.add(connection)
        try:
            async for _ in connection:
                pass  # data stream is one-way; inbound frames are ignored
        finally:
            clients.discard(connection)

    async def _serve_control(self, connection) -> None:
        client_id = f"ws-{uuid.uuid4().hex[:8]}"
        self._control_clients.add(connection)
        try:
            await connection.send(json.dumps({"hello": True, "client_id": client_id}))
            async for raw in connection:
                try:
                    body = json.loads(raw)
                    chair_id = body.get("chairId")
                    query = body.get("query")
                except (json.JSONDecodeError, AttributeError):
                    await connection.send(json.dumps({"error": "malformed request"}))
                    continue
                # the bridge owns the transport identity; clients cannot spoof it
                payload = {"chairId": chair_id, "query": query, "client_id": client_id}
                self.hub.bus.publish(APP_LOGIN_TOPIC, json.dumps(payload))
        finally:
            self._control_clients.discard(connection)
