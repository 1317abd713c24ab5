"""WebSocket relay of the trap/particle protocol as JSON messages.

Semantics mirror the UDP path exactly: inbound trap commands land in the
same latest-wins mailbox, and outbound particle updates are broadcast with a
single-slot queue per client, so a slow client drops frames instead of
building a backlog.  Game pose inputs (racket, gun) ride the same socket as
additional JSON message types.
"""

from __future__ import annotations

import asyncio
import json
import threading

import numpy as np
from websockets.asyncio.server import serve

from . import games
from .protocol import (
    MalformedDatagram,
    particle_update_to_json,
    trap_command_from_json,
)


def pose_from_json(payload):
    """Racket or gun pose from its JSON message form."""
    if isinstance(payload, (str, bytes)):
        payload = json.loads(payload)
    kind = payload.get("type")
    try:
        if kind == "racket":
            return games.RacketPose(
                head_center=np.array(payload["pos"], dtype=float),
                head_normal=np.array(payload["normal"], dtype=float),
                velocity=np.array(payload.get("vel", [0.0, 0.0, 0.0]), dtype=float),
                head_radius=float(payload.get("radius", 0.015)))
        if kind == "gun":
            return games.GunPose(
                origin=np.array(payload["origin"], dtype=float),
                direction=np.array(payload["dir"], dtype=float),
                trigger=bool(payload.get("trigger", False)))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDatagram(f"bad {kind} message: {exc}") from exc
    raise MalformedDatagram(f"unknown message type {kind!r}")


class _ClientSlot:
    """Latest-wins outbound buffers for one connected client.

    Particle updates and game-status messages get separate single slots so
    a status frame is never displaced by a particle frame or vice versa.
    """

    def __init__(self):
        self.latest: str | None = None
        self.latest_status: str | None = None
        self.ready = asyncio.Event()

    def offer(self, payload: str):
        self.latest = payload  # silently replaces an unsent frame
        self.ready.set()

    def offer_status(self, payload: str):
        self.latest_status = payload
        self.ready.set()


class WebSocketBridge:
    """Bidirectional JSON relay running its own asyncio loop in a thread."""

    def __init__(self, server, host: str | None = None, port: int | None = None):
        self.server = server
        self._host = host if host is not None else server.config.host
        self._port = port if port is not None else server.config.ws_port
        self.port: int | None = None  # actual bound port, set at startup
        self._slots: set[_ClientSlot] = set()
        self._loop = asyncio.new_event_loop()
        self._stop: asyncio.Future | None = None
        self._started = threading.Event()
        self._startup_error: Exception | None = None
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        self._started.wait(timeout=5.0)
        if self._startup_error is not None:
            raise self._startup_error
        server.update_sinks.append(self.broadcast)
        server.event_sinks.append(self.broadcast_status)

    # ------------------------------------------------------------ loop side

    def _run(self):
        asyncio.set_event_loop(self._loop)
        try:
            self._loop.run_until_complete(self._serve())
        finally:
            self._loop.close()

    async def _serve(self):
        self._stop = self._loop.create_future()
        try:
            async with serve(self._handle_client, self._host, self._port) as ws_server:
                self.port = ws_server.sockets[0].getsockname()[1]
                self._started.set()
                await self._stop
        except OSError as exc:
            self._startup_error = exc
            self._started.set()

    async def _handle_client(self, connection):
        slot = _ClientSlot()
        self._slots.add(slot)
        sender = asyncio.create_task(self._send_loop(connection, slot))
        try:
            async for message in connection:
                self._dispatch(message)
        except Exception:
            pass  # client errors must not touch the simulation
        finally:
            self._slots.discard(slot)
            sender.cancel()

    async def _send_loop(self, connection, slot: _ClientSlot):
        while True:
            await slot.ready.wait()
            slot.ready.clear()
            payload = slot.latest
            slot.latest = None
            status = slot.latest_status
            slot.latest_status = None
            if payload is not None:
                await connection.send(payload)
            if status is not None:
                await connection.send(status)

    def _dispatch(self, message):
        try:
            payload = json.loads(message)
        except (TypeError, ValueError):
            self.server.mailbox.stats.dropped_malformed += 1
            return
        kind = payload.get("type")
        try:
            if kind == "trap":
                self.server.mailbox.post(trap_command_from_json(payload))
            elif kind == "racket":
                self.server.racket_mailbox.post(pose_from_json(payload))
            elif kind == "gun":
                self.server.gun_mailbox.post(pose_from_json(payload))
            else:
                self.server.mailbox.stats.dropped_malformed += 1
        except MalformedDatagram:
            self.server.mailbox.stats.dropped_malformed += 1

    # ------------------------------------------------------------ tick side

    def broadcast(self, update):
        payload = particle_update_to_json(update)
        self._loop.call_soon_threadsafe(self._offer_all, payload)

    def broadcast_status(self, status: dict):
        payload = json.dumps(status)
        self._loop.call_soon_threadsafe(self._offer_all_status, payload)

    def _offer_all(self, payload: str):
        for slot in self._slots:
            slot.offer(payload)

    def _offer_all_status(self, payload: str):
        for slot in self._slots:
            slot.offer_status(payload)

    def close(self):
        if self._stop is not None and not self._stop.done():
            self._loop.call_soon_threadsafe(self._stop.set_result, None)
        self._thread.join(timeout=2.0)
