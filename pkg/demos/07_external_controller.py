"""Drive a run from an external controller over the TCP line protocol.

The engine listens; a controller connects, reads one JSON message per line,
and answers every arrival with a decision. This demo runs both halves in one
process (the client in a thread) so it can be executed standalone; the
ref_controller/ package does the same over a real process boundary.

Run:  python demos/07_external_controller.py
"""

import socket
import threading

from skysim import (
    Arrival,
    Decision,
    Hello,
    Ready,
    TcpControllerServer,
    World,
    decode,
    encode,
    parse_scenario,
)
from skysim.protocol import PROTOCOL_VERSION
from skysim.fixtures import two_node_line
from skysim.model import SimSettings


def naive_controller(port):
    """Hop on the only segment, then declare the delivery complete."""
    sock = socket.create_connection(("127.0.0.1", port))
    reader = sock.makefile("rb")
    try:
        while True:
            line = reader.readline()
            if not line:
                return
            message = decode(line)
            print(f"  controller <- {type(message).__name__}")
            if isinstance(message, Hello):
                sock.sendall(encode(Ready(protocol_version=PROTOCOL_VERSION)))
            elif isinstance(message, Arrival):
                if message.node_id == "b":
                    reply = Decision(action="complete", drone_id=message.drone_id)
                else:
                    reply = Decision(action="traverse", drone_id=message.drone_id, segment="ab")
                print(f"  controller -> {reply.action}")
                sock.sendall(encode(reply))
    finally:
        sock.close()


net = two_node_line(settings=SimSettings(hover_takeoff_s=0.0, hover_landing_s=0.0))
scenario = parse_scenario(
    {
        "requests": [
            {"id": "r1", "origin": "a", "destination": "b",
             "payload_kg": 1.0, "swarm_size": 1, "release_time_s": 0}
        ],
        "faults": [],
        "max_time_s": 600,
        "seed": 0,
    }
)

server = TcpControllerServer(host="127.0.0.1", port=0, accept_timeout_s=10)
_, port = server.listen()
print(f"engine listening on 127.0.0.1:{port}")
client = threading.Thread(target=naive_controller, args=(port,), daemon=True)
client.start()

result = World(net, scenario, server).run()
client.join(timeout=5)

print(f"\nrun finished: {result.summary['drones'][0]['outcome']} "
      f"at t={result.summary['total_time_s']:.1f} s")
print("the same exchange works from any language that can speak"
      " line-delimited JSON over TCP")
