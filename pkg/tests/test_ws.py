"""WebSocket fan-out server: data mirror, control bridge, HTTP endpoints."""

import asyncio
import json
import urllib.request

import pytest
from websockets.asyncio.client import connect

from smartchair.bus import InMemoryBus
from smartchair.clock import VirtualClock
from smartchair.hub import APP_LOGIN_TOPIC, PRESSURE_TOPIC, HubConfig, HubService
from smartchair.hub.ws import WebSocketFanout
from smartchair.store import MemoryStore

WIRE_FRAME = {"chairId": 1, "data": ["6.04", "6.21", "7.80", "6.75", "2.21", "1.35"]}


@pytest.fixture
def rig():
    bus = InMemoryBus()
    clock = VirtualClock(0.0)
    hub = HubService(bus, MemoryStore(), HubConfig(chairs=[1]), clock)
    fanout = WebSocketFanout(hub, host="127.0.0.1", port=0)
    hub.fanout = fanout
    fanout.start()

    class Rig:
        pass

    r = Rig()
    r.bus, r.clock, r.hub, r.fanout = bus, clock, hub, fanout
    r.url = f"ws://127.0.0.1:{fanout.port}"
    r.http = f"http://127.0.0.1:{fanout.port}"
    yield r
    fanout.stop()
    bus.close()


def login(rig, client="app-1"):
    rig.bus.publish(APP_LOGIN_TOPIC, json.dumps({"chairId": 1, "query": "login",
                                                 "client_id": client}))
    rig.hub.pump()


def push_frame(rig):
    rig.clock.advance(1.0)
    rig.bus.publish(PRESSURE_TOPIC, json.dumps(WIRE_FRAME))
    rig.hub.pump()


def test_chair_stream_mirrors_app_data_bytes(rig):
    monitor = rig.bus.subscribe("qiot/things/Matuska/chairs/ch1/appData")
    login(rig)

    async def scenario():
        async with connect(f"{rig.url}/ws/ch1/appData") as ws:
            push_frame(rig)
            return await asyncio.wait_for(ws.recv(), timeout=5)

    received = asyncio.run(scenario())
    published = monitor.drain()
    assert len(published) == 1
    assert received == published[0].payload.decode("utf-8")
    body = json.loads(received)
    assert body["chairId"] == 1 and "chdata" in body


def test_control_bridge_login_roundtrip(rig):
    async def scenario():
        async with connect(f"{rig.url}/ws/control") as ws:
            hello = json.loads(await asyncio.wait_for(ws.recv(), timeout=5))
            assert hello["hello"] is True and hello["client_id"].startswith("ws-")
            await ws.send(json.dumps({"chairId": 1, "query": "login"}))
            for _ in range(50):  # hub pump happens on the test thread
                await asyncio.sleep(0.05)
                rig.hub.pump()
                if rig.hub.registry.slot(1).occupied:
                    break
            reply = json.loads(await asyncio.wait_for(ws.recv(), timeout=5))
            return reply

    reply = asyncio.run(scenario())
    assert reply == {"chairId": 1, "query": "login", "success": True}
    assert rig.hub.registry.slot(1).owner.startswith("ws-")


def test_unknown_ws_path_closed(rig):
    async def scenario():
        async with connect(f"{rig.url}/ws/ch1/nonsense") as ws:
            with pytest.raises(Exception):
                await asyncio.wait_for(ws.recv(), timeout=5)

    asyncio.run(scenario())


def test_report_endpoint(rig):
    login(rig)
    for _ in range(30):
        push_frame(rig)
    rig.bus.publish(APP_LOGIN_TOPIC, json.dumps({"chairId": 1, "query": "logout",
                                                 "client_id": "app-1"}))
    rig.hub.pump()

    with urllib.request.urlopen(f"{rig.http}/report/ch1?day=1970-01-01") as response:
        report = json.loads(response.read())
    assert report["session_count"] == 1
    assert report["chairId"] == 1
    with urllib.request.urlopen(f"{rig.http}/chairs") as response:
        chairs = json.loads(response.read())
    assert chairs == {"chairs": [{"chairId": 1, "occupied": False}]}


def test_report_endpoint_requires_day(rig):
    with pytest.raises(urllib.error.HTTPError) as err:
        urllib.request.urlopen(f"{rig.http}/report/ch1")
    assert err.value.code == 400
