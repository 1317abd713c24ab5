"""WebSocket bridge: JSON relay semantics and transport equivalence."""

import json
import threading
import time

import numpy as np
import pytest

from sonotrap.bridge import WebSocketBridge, pose_from_json
from sonotrap.games import GunPose, RacketPose
from sonotrap.protocol import (
    MalformedDatagram,
    TrapCommand,
    decode_trap_command,
    encode_trap_command,
    trap_command_from_json,
)
from sonotrap.server import GainConfig, ServerConfig, SimServer

from websockets.sync.client import connect


@pytest.fixture()
def live_server():
    server = SimServer(ServerConfig(ws_port=0, gain=GainConfig(ratio=1.0)))
    bridge = WebSocketBridge(server)
    stop = threading.Event()
    thread = threading.Thread(target=lambda: server.run(stop=stop), daemon=True)
    thread.start()
    yield server, bridge
    stop.set()
    thread.join(timeout=2.0)
    bridge.close()


def test_json_and_binary_commands_decode_identically():
    command = TrapCommand(5, 1234, np.array([0.01, -0.02, 0.003]))
    from_binary = decode_trap_command(encode_trap_command(command))
    from_json = trap_command_from_json(
        '{"type": "trap", "seq": 5, "t_us": 1234, "pos": [0.01, -0.02, 0.003]}')
    assert from_binary.sequence == from_json.sequence
    assert from_binary.timestamp_us == from_json.timestamp_us
    assert np.array_equal(from_binary.position, from_json.position)


def test_transport_equivalence_scripted():
    # identical command contents, one decoded from the datagram form and one
    # from the JSON form, produce bitwise-identical trajectories
    position = np.array([0.004, 0.001, -0.002])
    binary_cmd = decode_trap_command(encode_trap_command(TrapCommand(1, 0, position)))
    json_cmd = trap_command_from_json(json.dumps(
        {"type": "trap", "seq": 1, "t_us": 0, "pos": list(position)}))

    def run(command):
        server = SimServer(ServerConfig(gain=GainConfig(ratio=1.0)))
        updates = server.run_ticks(45, commands={0: [command]})
        return np.array([u.position for u in updates])

    assert np.array_equal(run(binary_cmd), run(json_cmd))


def test_pose_json_decoding():
    racket = pose_from_json({"type": "racket", "pos": [0.0, 0.01, 0.0],
                             "normal": [1.0, 0.0, 0.0], "vel": [0.1, 0.0, 0.0]})
    assert isinstance(racket, RacketPose)
    assert racket.velocity[0] == 0.1
    gun = pose_from_json({"type": "gun", "origin": [0.0, 0.0, 0.0],
                          "dir": [0.0, 1.0, 0.0], "trigger": True})
    assert isinstance(gun, GunPose)
    assert gun.trigger
    with pytest.raises(MalformedDatagram):
        pose_from_json({"type": "mystery"})


def test_live_bridge_round_trip(live_server):
    server, bridge = live_server
    with connect(f"ws://127.0.0.1:{bridge.port}") as ws:
        ws.send(json.dumps({"type": "trap", "seq": 1, "t_us": 0,
                            "pos": [0.005, 0.0, 0.0]}))
        message = json.loads(ws.recv(timeout=2.0))
    assert message["type"] == "particle"
    assert len(message["pos"]) == 3
    assert server.mailbox.stats.received >= 1


def test_live_bridge_broadcasts_same_sequence_to_all_clients(live_server):
    server, bridge = live_server
    with connect(f"ws://127.0.0.1:{bridge.port}") as a, \
         connect(f"ws://127.0.0.1:{bridge.port}") as b:
        seq_a = {json.loads(a.recv(timeout=2.0))["seq"] for _ in range(5)}
        seq_b = {json.loads(b.recv(timeout=2.0))["seq"] for _ in range(5)}
    assert seq_a & seq_b  # overlapping tick sequence numbers from one loop


def test_live_bridge_fast_sender_latest_wins(live_server):
    server, bridge = live_server
    ticks_before = server.stats.ticks
    with connect(f"ws://127.0.0.1:{bridge.port}") as ws:
        for seq in range(1, 201):  # ~500+ Hz burst
            ws.send(json.dumps({"type": "trap", "seq": seq, "t_us": seq,
                                "pos": [0.001, 0.0, 0.0]}))
        time.sleep(0.5)
    stats = server.mailbox.stats
    assert stats.received == 200
    # the loop applied at most one command per tick; the rest were dropped
    elapsed_ticks = server.stats.ticks - ticks_before + 2
    assert stats.applied <= elapsed_ticks
    assert stats.applied + stats.dropped_stale == 200 or stats.dropped_stale >= 150


def test_malformed_ws_message_counted(live_server):
    server, bridge = live_server
    with connect(f"ws://127.0.0.1:{bridge.port}") as ws:
        ws.send("not json at all")
        ws.send(json.dumps({"type": "wat"}))
        time.sleep(0.2)
    assert server.mailbox.stats.dropped_malformed >= 2


def test_bridge_survives_client_disconnect(live_server):
    server, bridge = live_server
    with connect(f"ws://127.0.0.1:{bridge.port}") as ws:
        ws.recv(timeout=2.0)
    # abrupt close above; the loop keeps ticking
    before = server.stats.ticks
    time.sleep(0.2)
    assert server.stats.ticks > before
