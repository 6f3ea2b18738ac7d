import numpy as np
import pytest

from hapticflight.core import (ActionVector, FrameRaster, Observation, Shape,
                               Texture, VirtualObject, action_to_list)
from hapticflight.policy import (ByShape, ByTexture, Follow, InstructionError,
                                 OracleConfig, OraclePolicy, ProtocolError,
                                 Relative, RemotePolicy, ResolutionError, Side,
                                 ZeroPolicy, oracle_act, parse_instruction,
                                 resolve_target)
from hapticflight.world import SceneConfig, SimConfig, spawn, step_control

CFG = SimConfig()


def make_world(drone=(0.0, 0.0, 1.0), objects=None):
    if objects is None:
        objects = (VirtualObject(Shape.SPHERE, Texture.FOOD, (1.0, -1.0, 1.0), 0.2),)
    return spawn(SceneConfig(drone_start=drone, objects=tuple(objects)), CFG)


def dummy_observation(instruction="fly to the sphere", step=0):
    frame = FrameRaster(np.zeros((320, 640, 3), dtype=np.uint8))
    return Observation(frame, frame, instruction, step)


# -- grammar -----------------------------------------------------------------

def test_parse_shape_instruction_case_insensitive():
    assert parse_instruction("Fly to the Sphere") == ByShape(Shape.SPHERE)
    assert parse_instruction("fly to the cube") == ByShape(Shape.CUBE)
    assert parse_instruction("  FLY  TO THE CONE. ") == ByShape(Shape.CONE)


def test_parse_relative_instruction():
    assert parse_instruction("fly to the left object") == Relative(Side.LEFT)
    assert parse_instruction("fly to the right object") == Relative(Side.RIGHT)


def test_parse_texture_instruction():
    assert parse_instruction("touch the plastic object") == ByTexture(Texture.PLASTIC)


def test_parse_follow_instruction():
    assert parse_instruction("follow the sphere") == Follow(ByShape(Shape.SPHERE))
    assert parse_instruction("follow the food") == Follow(ByTexture(Texture.FOOD))


def test_parse_rejects_out_of_grammar():
    with pytest.raises(InstructionError, match="supported templates"):
        parse_instruction("do a barrel roll")
    with pytest.raises(InstructionError):
        parse_instruction("")


# -- target resolution ---------------------------------------------------------

TWO_OBJECTS = (
    VirtualObject(Shape.SPHERE, Texture.FOOD, (1.0, -1.0, 1.0), 0.2),
    VirtualObject(Shape.CUBE, Texture.PLASTIC, (-1.0, 1.0, 1.0), 0.2),
)


def test_resolve_by_shape_unique():
    w = make_world(objects=TWO_OBJECTS)
    assert resolve_target(ByShape(Shape.SPHERE), w) == 0
    assert resolve_target(ByShape(Shape.CUBE), w) == 1


def test_resolve_relative_right_picks_max_x():
    w = make_world(objects=TWO_OBJECTS)
    assert resolve_target(Relative(Side.RIGHT), w) == 0  # sphere at x=1
    assert resolve_target(Relative(Side.LEFT), w) == 1


def test_resolve_relative_tie_breaks_smallest_y_then_index():
    objects = (
        VirtualObject(Shape.CUBE, Texture.OTHER, (1.0, 0.5, 1.0), 0.2),
        VirtualObject(Shape.CONE, Texture.OTHER, (1.0, -0.5, 1.0), 0.2),
    )
    w = make_world(objects=objects)
    assert resolve_target(Relative(Side.RIGHT), w) == 1  # same x, smaller y


def test_resolve_several_matches_picks_nearest():
    objects = (
        VirtualObject(Shape.SPHERE, Texture.FOOD, (2.0, 0.0, 1.0), 0.2),
        VirtualObject(Shape.SPHERE, Texture.FOOD, (0.5, 0.0, 1.0), 0.2),
    )
    w = make_world(objects=objects)
    assert resolve_target(ByShape(Shape.SPHERE), w) == 1


def test_resolve_no_match_is_error():
    w = make_world(objects=TWO_OBJECTS)
    with pytest.raises(ResolutionError, match="ByTexture"):
        resolve_target(ByTexture(Texture.OTHER), w)


def test_resolve_empty_scene_is_error():
    w = spawn(SceneConfig(objects=()), CFG)
    with pytest.raises(ResolutionError):
        resolve_target(ByShape(Shape.CUBE), w)


def test_follow_delegates_to_inner():
    w = make_world(objects=TWO_OBJECTS)
    assert resolve_target(Follow(ByShape(Shape.CUBE)), w) == 1


# -- oracle --------------------------------------------------------------------

def test_oracle_clamps_speed_to_unit_norm():
    w = make_world(drone=(0.0, 0.0, 1.0))
    cfg = OracleConfig(kp=0.8, v_clamp=1.0)
    a = oracle_act(w, ByShape(Shape.SPHERE), cfg)
    v_raw = 0.8 * np.array([1.0, -1.0, 0.0])
    expected = v_raw / np.linalg.norm(v_raw)  # scaled onto the clamp sphere
    assert a.vx == pytest.approx(expected[0], abs=1e-12)
    assert a.vy == pytest.approx(expected[1], abs=1e-12)
    assert a.vz == 0.0
    assert a.vx == pytest.approx(0.70711, abs=1e-5)
    assert (a.hx, a.hy, a.hz, a.hv) == (0.0, 0.0, 0.0, 0.0)  # far: no haptics


def test_oracle_degenerate_distance_points_down():
    w = make_world(drone=(1.0, -1.0, 1.0),
                   objects=(VirtualObject(Shape.SPHERE, Texture.PLASTIC,
                                          (1.0, -1.0, 1.0), 0.2),))
    a = oracle_act(w, ByShape(Shape.SPHERE), OracleConfig())
    assert (a.vx, a.vy, a.vz) == (0.0, 0.0, 0.0)
    assert (a.hx, a.hy, a.hz) == (0.0, 0.0, -1.0)
    assert a.hv == 0.9


def test_oracle_contact_unit_direction_and_texture_hv():
    w = make_world(drone=(0.0, 0.0, 1.0),
                   objects=(VirtualObject(Shape.SPHERE, Texture.FOOD,
                                          (0.25, 0.0, 1.0), 0.2),))
    a = oracle_act(w, ByShape(Shape.SPHERE), OracleConfig())
    assert (a.hx, a.hy, a.hz) == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)
    assert a.hv == 0.3


def test_oracle_no_haptics_when_touching_non_target():
    objects = (
        VirtualObject(Shape.SPHERE, Texture.FOOD, (2.0, 0.0, 1.0), 0.2),
        VirtualObject(Shape.CUBE, Texture.PLASTIC, (0.1, 0.0, 1.0), 0.2),
    )
    w = make_world(drone=(0.0, 0.0, 1.0), objects=objects)
    a = oracle_act(w, ByShape(Shape.SPHERE), OracleConfig())
    assert (a.hx, a.hy, a.hz, a.hv) == (0.0, 0.0, 0.0, 0.0)


def test_oracle_speed_bounded_on_seeded_states():
    rng = np.random.default_rng(5)
    cfg = OracleConfig()
    for _ in range(200):
        drone = (float(rng.uniform(-3, 3)), float(rng.uniform(-1.5, 1.5)), 1.0)
        target = (float(rng.uniform(-3, 3)), float(rng.uniform(-1.5, 1.5)), 1.0)
        w = make_world(drone=drone,
                       objects=(VirtualObject(Shape.CONE, Texture.OTHER, target, 0.2),))
        a = oracle_act(w, ByShape(Shape.CONE), cfg)
        assert np.linalg.norm([a.vx, a.vy, a.vz]) <= cfg.v_clamp + 1e-12


def test_oracle_memoryless_deterministic():
    w = make_world()
    cfg = OracleConfig()
    a1 = oracle_act(w, ByShape(Shape.SPHERE), cfg, t=1.0)
    a2 = oracle_act(w, ByShape(Shape.SPHERE), cfg, t=1.0)
    assert a1 == a2


def test_oracle_closed_loop_converges_from_grid():
    # Brute-force simulation: the convergence claim is checked, not assumed.
    target = np.array([1.0, -1.0, 1.0])
    cfg = OracleConfig()
    sel = ByShape(Shape.SPHERE)
    for x in np.linspace(-3.0, 3.0, 5):
        for y in np.linspace(-1.4, 1.4, 5):
            w = make_world(drone=(float(x), float(y), 1.0))
            for _ in range(50):  # 10 s of control at 5 Hz
                a = oracle_act(w, sel, cfg, t=w.sim_time)
                w, _ = step_control(w, a, CFG)
            assert np.linalg.norm(w.drone.position_array - target) < 0.1


def test_oracle_policy_requires_privileged_state():
    with pytest.raises(ValueError, match="privileged"):
        OraclePolicy().act(dummy_observation())


def test_zero_policy_hovers():
    assert ZeroPolicy().act(dummy_observation()) == ActionVector.zero()


# -- remote client -------------------------------------------------------------

class FakeResponse:
    def __init__(self, status_code=200, payload=None):
        self.status_code = status_code
        self._payload = payload if payload is not None else {}
        self.text = str(payload)

    def json(self):
        return self._payload


class FakeSession:
    """Scripted transport: each act() consumes one behavior."""

    def __init__(self, script):
        self.script = list(script)
        self.requests_seen = 0

    def post(self, url, json=None, timeout=None):
        import requests

        self.requests_seen += 1
        kind, *rest = self.script.pop(0)
        if kind == "timeout":
            raise requests.Timeout("deadline exceeded")
        if kind == "connerror":
            raise requests.ConnectionError("refused")
        if kind == "status":
            return FakeResponse(status_code=rest[0], payload={"error": "boom"})
        if kind == "action":
            return FakeResponse(payload={"action": rest[0], "latency_ms": 1.0})
        raise AssertionError(kind)

    def get(self, url, timeout=None):
        return FakeResponse(payload={"status": "ok", "policy": "fake"})


def test_remote_healthy_server_returns_parsed_action():
    session = FakeSession([("action", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7])])
    client = RemotePolicy("http://fake", session=session)
    a = client.act(dummy_observation())
    assert action_to_list(a) == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]


def test_remote_fallback_ladder_repeat_once_then_hover():
    a_list = [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    b_list = [0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0]
    session = FakeSession([
        ("action", a_list),
        ("timeout",),       # 1st failure: repeat A
        ("timeout",),       # 2nd consecutive: hover
        ("action", b_list),  # success resets the counter
        ("connerror",),     # 1st failure again: repeat B
    ])
    client = RemotePolicy("http://fake", session=session)
    obs = dummy_observation()
    assert action_to_list(client.act(obs)) == a_list
    assert action_to_list(client.act(obs)) == a_list
    assert client.act(obs) == ActionVector.zero()
    assert action_to_list(client.act(obs)) == b_list
    assert action_to_list(client.act(obs)) == b_list


def test_remote_first_failure_with_no_history_hovers():
    client = RemotePolicy("http://fake", session=FakeSession([("timeout",)]))
    assert client.act(dummy_observation()) == ActionVector.zero()


def test_remote_malformed_response_aborts():
    session = FakeSession([("action", [0.1, 0.2, 0.3, 0.4, 0.5])])  # arity 5
    client = RemotePolicy("http://fake", session=session)
    with pytest.raises(ProtocolError, match="malformed"):
        client.act(dummy_observation())


def test_remote_http_error_aborts():
    client = RemotePolicy("http://fake", session=FakeSession([("status", 500)]))
    with pytest.raises(ProtocolError, match="500"):
        client.act(dummy_observation())


def test_remote_health_check():
    client = RemotePolicy("http://fake", session=FakeSession([]))
    assert client.check_health()["status"] == "ok"
