import base64
import json

import numpy as np
import pytest
import requests

from hapticflight.core import (ActionVector, FrameRaster, Observation,
                               action_to_list)
from hapticflight.policy import RemotePolicy, ZeroPolicy
from hapticflight.server import PolicyServer
from hapticflight.wire import (WireFormatError, decode_act_request,
                               decode_act_response, encode_act_request,
                               encode_act_response)


def make_observation(instruction="fly to the sphere", step=0, fill=0):
    pixels = np.full((320, 640, 3), fill, dtype=np.uint8)
    frame = FrameRaster(pixels)
    return Observation(frame, frame, instruction, step)


@pytest.fixture(scope="module")
def zero_server():
    with PolicyServer(ZeroPolicy()) as server:
        yield server


def test_health_endpoint(zero_server):
    resp = requests.get(f"{zero_server.url}/health", timeout=5)
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["policy"] == "zero"


def test_act_roundtrip_zero_policy(zero_server):
    payload = encode_act_request(make_observation())
    resp = requests.post(f"{zero_server.url}/act", json=payload, timeout=5)
    assert resp.status_code == 200
    body = resp.json()
    assert body["action"] == [0.0] * 7
    assert "latency_ms" in body


def test_act_missing_field_is_400(zero_server):
    payload = encode_act_request(make_observation())
    del payload["vr_frame_b64"]
    resp = requests.post(f"{zero_server.url}/act", json=payload, timeout=5)
    assert resp.status_code == 400
    assert "vr_frame_b64" in resp.json()["error"]


def test_act_invalid_json_is_400(zero_server):
    resp = requests.post(f"{zero_server.url}/act", data=b"{nope",
                         headers={"Content-Type": "application/json"}, timeout=5)
    assert resp.status_code == 400


def test_act_bad_base64_is_400(zero_server):
    payload = encode_act_request(make_observation())
    payload["real_frame_b64"] = "!!!not base64!!!"
    resp = requests.post(f"{zero_server.url}/act", json=payload, timeout=5)
    assert resp.status_code == 400


def test_act_wrong_size_png_is_400(zero_server):
    payload = encode_act_request(make_observation())
    import io

    from PIL import Image
    buf = io.BytesIO()
    Image.new("RGB", (64, 32)).save(buf, format="PNG")
    payload["real_frame_b64"] = base64.b64encode(buf.getvalue()).decode()
    resp = requests.post(f"{zero_server.url}/act", json=payload, timeout=5)
    assert resp.status_code == 400
    assert "640x320" in resp.json()["error"]


def test_faulty_policy_arity_is_500():
    class Arity6Policy(ZeroPolicy):
        def act(self, obs, privileged=None):
            return [0.0] * 6

    with PolicyServer(Arity6Policy()) as server:
        payload = encode_act_request(make_observation())
        resp = requests.post(f"{server.url}/act", json=payload, timeout=5)
        assert resp.status_code == 500
        assert "7" in resp.json()["error"]


def test_unknown_path_is_404(zero_server):
    assert requests.get(f"{zero_server.url}/nope", timeout=5).status_code == 404


def test_server_stateless_interleaved_sessions(zero_server):
    # Interleave two logical sessions; responses must match serial execution.
    obs_a = [make_observation("fly to the cube", i, fill=10) for i in range(3)]
    obs_b = [make_observation("fly to the cone", i, fill=200) for i in range(3)]

    def act(obs):
        resp = requests.post(f"{zero_server.url}/act",
                             json=encode_act_request(obs), timeout=5)
        assert resp.status_code == 200
        return resp.json()["action"]

    interleaved = [act(o) for pair in zip(obs_a, obs_b) for o in pair]
    serial = [act(o) for o in obs_a] + [act(o) for o in obs_b]
    assert all(a == [0.0] * 7 for a in interleaved + serial)


def test_remote_policy_against_real_server(zero_server):
    client = RemotePolicy(zero_server.url, timeout=5.0)
    assert client.check_health()["policy"] == "zero"
    action = client.act(make_observation())
    assert action == ActionVector.zero()


def test_wire_request_roundtrip_byte_stable():
    rng = np.random.default_rng(17)
    for step in range(5):
        pixels = rng.integers(0, 256, size=(320, 640, 3), dtype=np.uint8)
        obs = Observation(FrameRaster(pixels), FrameRaster(pixels),
                          "touch the food object", step)
        encoded = encode_act_request(obs)
        decoded = decode_act_request(encoded)
        re_encoded = encode_act_request(decoded)
        assert json.dumps(re_encoded, sort_keys=True) == \
            json.dumps(encoded, sort_keys=True)


def test_wire_response_roundtrip():
    action = ActionVector(0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7)
    payload = encode_act_response(action, 12.5)
    parsed, latency = decode_act_response(payload)
    assert parsed == action
    assert latency == 12.5
    assert encode_act_response(parsed, latency) == payload


def test_wire_rejects_malformed_responses():
    with pytest.raises(WireFormatError):
        decode_act_response({"action": [0.0] * 6})
    with pytest.raises(WireFormatError):
        decode_act_response({"action": [0.0] * 6 + [float("nan")]})
    with pytest.raises(WireFormatError):
        decode_act_response({})


def test_wire_rejects_bad_requests():
    with pytest.raises(WireFormatError, match="missing fields"):
        decode_act_request({"instruction": "x"})
    with pytest.raises(WireFormatError, match="step_index"):
        payload = encode_act_request(make_observation())
        payload["step_index"] = -3
        decode_act_request(payload)
