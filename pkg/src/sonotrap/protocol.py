"""Wire protocol between interaction clients and the simulation loop.

Datagrams are little-endian and fixed-size: magic 0x4C56 (u16), version (u8),
message type (u8), sequence (u32), timestamp in microseconds (u64), then the
payload doubles.  A trap command carries one position (40 bytes total); a
particle update carries position, velocity and a u32 flag word (68 bytes).

Inbound commands land in a single-slot latest-wins mailbox: the loop applies
at most one command per tick and anything older than the newest pending or
already-applied command is dropped and counted, never queued.
"""

from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass, field

import numpy as np

MAGIC = 0x4C56
VERSION = 1
MSG_TRAP_COMMAND = 1
MSG_PARTICLE_UPDATE = 2

_HEADER = struct.Struct("<HBBIQ")
_TRAP = struct.Struct("<HBBIQ3d")
_UPDATE = struct.Struct("<HBBIQ6dI")

TRAP_COMMAND_SIZE = _TRAP.size  # 40
PARTICLE_UPDATE_SIZE = _UPDATE.size  # 68

FLAG_ESCAPED = 0x1
FLAG_TARGET_HIT = 0x2


class MalformedDatagram(ValueError):
    """Datagram failed structural validation (size, magic, version, type)."""


@dataclass(frozen=True)
class TrapCommand:
    sequence: int
    timestamp_us: int
    position: np.ndarray  # m

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float)
        if position.shape != (3,):
            raise ValueError("trap command position must be a 3-vector")
        if not np.all(np.isfinite(position)):
            raise ValueError("trap command position must be finite")
        object.__setattr__(self, "position", position)


@dataclass(frozen=True)
class ParticleUpdate:
    sequence: int
    timestamp_us: int
    position: np.ndarray  # m
    velocity: np.ndarray  # m/s
    flags: int = 0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))


def encode_trap_command(command: TrapCommand) -> bytes:
    return _TRAP.pack(MAGIC, VERSION, MSG_TRAP_COMMAND, command.sequence & 0xFFFFFFFF,
                      command.timestamp_us, *command.position)


def encode_particle_update(update: ParticleUpdate) -> bytes:
    return _UPDATE.pack(MAGIC, VERSION, MSG_PARTICLE_UPDATE, update.sequence & 0xFFFFFFFF,
                        update.timestamp_us, *update.position, *update.velocity,
                        update.flags & 0xFFFFFFFF)


def _check_header(data: bytes, expected_type: int, expected_size: int):
    if len(data) != expected_size:
        raise MalformedDatagram(f"expected {expected_size} bytes, got {len(data)}")
    magic, version, msg_type, _, _ = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedDatagram(f"bad magic 0x{magic:04X}")
    if version != VERSION:
        raise MalformedDatagram(f"unsupported version {version}")
    if msg_type != expected_type:
        raise MalformedDatagram(f"unexpected message type {msg_type}")


def decode_trap_command(data: bytes) -> TrapCommand:
    _check_header(data, MSG_TRAP_COMMAND, TRAP_COMMAND_SIZE)
    _, _, _, seq, t_us, x, y, z = _TRAP.unpack(data)
    return TrapCommand(seq, t_us, np.array([x, y, z]))


def decode_particle_update(data: bytes) -> ParticleUpdate:
    _check_header(data, MSG_PARTICLE_UPDATE, PARTICLE_UPDATE_SIZE)
    _, _, _, seq, t_us, *rest = _UPDATE.unpack(data)
    return ParticleUpdate(seq, t_us, np.array(rest[0:3]), np.array(rest[3:6]),
                          int(rest[6]))


# JSON mirrors carried over the WebSocket bridge.

def trap_command_to_json(command: TrapCommand) -> str:
    return json.dumps({"type": "trap", "seq": int(command.sequence),
                       "t_us": int(command.timestamp_us),
                       "pos": [float(v) for v in command.position]})

def trap_command_from_json(payload) -> TrapCommand:
    if isinstance(payload, (str, bytes)):
        payload = json.loads(payload)
    if payload.get("type") != "trap":
        raise MalformedDatagram(f"not a trap message: {payload.get('type')!r}")
    try:
        return TrapCommand(int(payload["seq"]), int(payload["t_us"]),
                           np.array(payload["pos"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDatagram(f"bad trap message: {exc}") from exc


def particle_update_to_json(update: ParticleUpdate) -> str:
    return json.dumps({"type": "particle", "seq": int(update.sequence),
                       "t_us": int(update.timestamp_us),
                       "pos": [float(v) for v in update.position],
                       "vel": [float(v) for v in update.velocity],
                       "flags": int(update.flags)})


def particle_update_from_json(payload) -> ParticleUpdate:
    if isinstance(payload, (str, bytes)):
        payload = json.loads(payload)
    if payload.get("type") != "particle":
        raise MalformedDatagram(f"not a particle message: {payload.get('type')!r}")
    return ParticleUpdate(int(payload["seq"]), int(payload["t_us"]),
                          np.array(payload["pos"], dtype=float),
                          np.array(payload["vel"], dtype=float),
                          int(payload.get("flags", 0)))


@dataclass
class MailboxStats:
    received: int = 0
    applied: int = 0
    dropped_stale: int = 0
    dropped_malformed: int = 0
    pending_depth: int = 0  # 0 or 1 by construction


class LatestWinsMailbox:
    """Single-slot command channel: newest command wins, nothing queues."""

    def __init__(self):
        self._lock = threading.Lock()
        self._pending: TrapCommand | None = None
        self._last_applied_seq = -1
        self.stats = MailboxStats()

    def post(self, command: TrapCommand) -> bool:
        """Offer a command; returns False when dropped as stale."""
        with self._lock:
            self.stats.received += 1
            if command.sequence <= self._last_applied_seq:
                self.stats.dropped_stale += 1
                return False
            if self._pending is not None:
                if command.sequence <= self._pending.sequence:
                    self.stats.dropped_stale += 1
                    return False
                self.stats.dropped_stale += 1  # the overwritten pending command
            self._pending = command
            self.stats.pending_depth = 1
            return True

    def ingest_datagram(self, data: bytes) -> TrapCommand | None:
        """Decode and post a raw datagram; malformed input is counted, not raised."""
        try:
            command = decode_trap_command(data)
        except MalformedDatagram:
            with self._lock:
                self.stats.dropped_malformed += 1
            return None
        self.post(command)
        return command

    def take(self) -> TrapCommand | None:
        """Newest pending command, consumed; None when the slot is empty."""
        with self._lock:
            command = self._pending
            self._pending = None
            self.stats.pending_depth = 0
            if command is not None:
                self._last_applied_seq = command.sequence
                self.stats.applied += 1
            return command


class PoseMailbox:
    """Latest-wins slot for game pose inputs (racket / gun)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._pending = None
        self._last = None

    def post(self, pose) -> None:
        with self._lock:
            self._pending = pose

    def take(self):
        """Newest pose, falling back to the last seen one between arrivals."""
        with self._lock:
            if self._pending is not None:
                self._last = self._pending
                self._pending = None
            return self._last
