"""Full-stack flow over real MQTT sockets: hub and chair as separate clients."""

import json
import time

import pytest

from smartchair.clock import WallClock
from smartchair.firmware import FirmwareConfig, FirmwarePhase, FirmwareSim
from smartchair.hub import APP_LOGIN_TOPIC, HubConfig, HubService, topic_for
from smartchair.mqtt_bus import MqttBus
from smartchair.profiles import default_profile
from smartchair.store import MemoryStore

from mqtt_stub import StubBroker


@pytest.fixture
def broker():
    b = StubBroker()
    yield b
    b.stop()


def test_login_to_app_data_through_a_broker(broker):
    hub_bus = MqttBus("127.0.0.1", broker.port, client_id="hub")
    chair_bus = MqttBus("127.0.0.1", broker.port, client_id="chair-1")
    app_bus = MqttBus("127.0.0.1", broker.port, client_id="app")
    store = MemoryStore()
    hub = HubService(hub_bus, store, HubConfig(chairs=[1]), WallClock())

    firmware = FirmwareSim(FirmwareConfig(chair_id=1, publish_interval=0.0), default_profile(1), seed=4)
    commands = chair_bus.subscribe(topic_for(1, "sendingEnabled"))
    status = app_bus.subscribe(topic_for(1, "appStatus"))
    app_data = app_bus.subscribe(topic_for(1, "appData"))

    try:
        app_bus.publish(APP_LOGIN_TOPIC, json.dumps({"chairId": 1, "query": "login",
                                                     "client_id": "app"}))
        deadline = time.time() + 5
        while time.time() < deadline and hub.pump() == 0:
            time.sleep(0.02)
        reply = status.get(timeout=5)
        assert reply is not None and json.loads(reply.payload)["success"] is True

        # chair receives the start command and begins measuring
        start = commands.get(timeout=5)
        assert start is not None
        firmware.step(0.0)
        firmware.step(0.0)  # connect dance
        assert firmware.phase is FirmwarePhase.IDLE
        outputs = firmware.step(1.0, [start.payload])
        assert firmware.phase is FirmwarePhase.MEASURING
        assert len(outputs) == 1
        topic, payload = outputs[0]
        chair_bus.publish(topic, payload)

        deadline = time.time() + 5
        while time.time() < deadline and hub.pump() == 0:
            time.sleep(0.02)
        live = app_data.get(timeout=5)
        assert live is not None
        body = json.loads(live.payload)
        assert body["chairId"] == 1
        assert len(body["data"]) == 6
        assert body["chdata"]["actual_sitting_status"] in (0, 1)
        assert len(store._samples) == 1
    finally:
        hub.close()
        for bus in (hub_bus, chair_bus, app_bus):
            bus.close()
