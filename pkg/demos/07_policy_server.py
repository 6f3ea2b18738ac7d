"""
Policy server round trip
========================

Serve a policy over HTTP, drive one observation through the wire format,
and show the remote client's failure ladder.
"""

import numpy as np
import requests

from hapticflight.core import FrameRaster, Observation
from hapticflight.policy import RemotePolicy, ZeroPolicy
from hapticflight.server import PolicyServer


def observation(step):
    frame = FrameRaster(np.zeros((320, 640, 3), dtype=np.uint8))
    return Observation(frame, frame, "fly to the sphere", step)


with PolicyServer(ZeroPolicy()) as server:
    print(f"serving on {server.url}")
    health = requests.get(f"{server.url}/health", timeout=5).json()
    print(f"health: {health}")

    client = RemotePolicy(server.url, timeout=5.0)
    action = client.act(observation(0))
    print(f"remote act -> {action}")

    # The request is JSON with base64 PNG frames; ~8 KB for flat frames.
    from hapticflight.wire import encode_act_request
    payload = encode_act_request(observation(1))
    size_kb = sum(len(str(v)) for v in payload.values()) / 1024
    print(f"request payload about {size_kb:.0f} KB "
          f"(fields: {sorted(payload.keys())})")

print("\nfailure ladder: a timed-out request repeats the previous action once;")
print("a second consecutive failure commands hover (the zero action); any")
print("successful reply resets the ladder. A malformed reply aborts the loop.")
