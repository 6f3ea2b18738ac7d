import numpy as np
import pytest

from hapticflight.core import (ActionVector, Shape, Texture, VirtualObject,
                               clamp_action)
from hapticflight.world import (BackgroundStyle, SceneConfig,
                                SceneValidationError, SimConfig, ViewKind,
                                contact_query, pixel_to_world, render_topdown,
                                scene_from_json, scene_to_json, spawn,
                                step_control, step_physics, world_to_pixel)

CFG = SimConfig()


def one_sphere_scene(drone_start=(0.0, 0.0, 1.0), position=(1.0, -1.0, 1.0)):
    return SceneConfig(
        drone_start=drone_start,
        objects=(VirtualObject(Shape.SPHERE, Texture.FOOD, position, 0.2),),
    )


def test_spawn_constructor_contract():
    w = spawn(one_sphere_scene(), CFG)
    assert w.sim_time == 0.0
    assert w.drone.position == (0.0, 0.0, 1.0)
    assert w.drone.velocity == (0.0, 0.0, 0.0)
    assert len(w.objects) == 1


def test_spawn_rejects_out_of_bounds_object():
    scene = one_sphere_scene(position=(10.0, 0.0, 1.0))
    with pytest.raises(SceneValidationError, match="outside world bounds"):
        spawn(scene, CFG)


def test_spawn_rejects_out_of_bounds_start():
    with pytest.raises(SceneValidationError, match="drone start"):
        spawn(one_sphere_scene(drone_start=(0.0, 0.0, 5.0)), CFG)


def test_spawn_deterministic():
    a = spawn(one_sphere_scene(), CFG)
    b = spawn(one_sphere_scene(), CFG)
    assert a.drone == b.drone and a.objects == b.objects and a.sim_time == b.sim_time


def test_step_physics_first_order_lag():
    w = spawn(one_sphere_scene(), CFG)
    w2 = step_physics(w, (1.0, 0.0, 0.0), CFG)
    expected_vx = (CFG.dt_physics / CFG.tau) * 1.0
    assert w2.drone.velocity[0] == pytest.approx(expected_vx, abs=1e-15)
    assert w2.drone.velocity[0] == pytest.approx(0.0333333, abs=1e-6)
    assert w2.sim_time == pytest.approx(CFG.dt_physics)


def test_step_physics_fixed_point_is_pure_drift():
    w = spawn(one_sphere_scene(), CFG)
    # Reach a steady velocity first, then command exactly that velocity.
    for _ in range(5):
        w = step_physics(w, (0.5, -0.25, 0.0), CFG)
    v = w.drone.velocity
    w2 = step_physics(w, v, CFG)
    assert w2.drone.velocity == v
    expected_p = np.array(w.drone.position) + np.array(v) * CFG.dt_physics
    assert np.allclose(w2.drone.position, expected_p, atol=1e-15)


def brute_force_lag(n_steps, dt, tau, v_cmd):
    """Independent oracle: iterate the scalar recursion directly."""
    v = 0.0
    for _ in range(n_steps):
        v = v + (dt / tau) * (v_cmd - v)
    return v


def test_step_physics_100_steps_matches_recursion_oracle():
    w = spawn(one_sphere_scene(), CFG)
    for _ in range(100):
        w = step_physics(w, (1.0, 0.0, 0.0), CFG)
    oracle = brute_force_lag(100, CFG.dt_physics, CFG.tau, 1.0)
    assert w.drone.velocity[0] == pytest.approx(oracle, abs=1e-15)
    closed_form = 1.0 - (1.0 - CFG.dt_physics / CFG.tau) ** 100
    assert w.drone.velocity[0] == pytest.approx(closed_form, abs=1e-12)
    assert w.drone.velocity[0] == pytest.approx(0.9663, abs=5e-4)


def test_step_control_zero_action_stays_put():
    w = spawn(one_sphere_scene(), CFG)
    start = w.drone.position
    for _ in range(10):
        w, sample = step_control(w, ActionVector.zero(), CFG)
    assert w.drone.position == start
    assert sample.t == pytest.approx(10 * CFG.dt_control)


def test_step_control_one_tick_matches_substep_oracle():
    w = spawn(one_sphere_scene(), CFG)
    a = clamp_action((1.0, 0, 0, 0, 0, 0, 0))
    w2, sample = step_control(w, a, CFG)
    oracle = brute_force_lag(CFG.substeps_per_control, CFG.dt_physics, CFG.tau, 1.0)
    assert w2.drone.velocity[0] == pytest.approx(oracle, abs=1e-15)
    assert w2.drone.velocity[0] == pytest.approx(0.4924, abs=5e-4)
    assert sample.t == pytest.approx(CFG.dt_control)


def test_step_control_deterministic_bitwise():
    a = clamp_action((0.3, -0.8, 0.1, 0.2, 0, 0, 0.5))
    w1, s1 = step_control(spawn(one_sphere_scene(), CFG), a, CFG)
    w2, s2 = step_control(spawn(one_sphere_scene(), CFG), a, CFG)
    assert w1.drone == w2.drone and s1 == s2


def test_haptic_components_never_touch_flight_state():
    flights = []
    for haptics in ((0, 0, 0, 0), (1.0, -1.0, 0.5, 0.9)):
        w = spawn(one_sphere_scene(), CFG)
        positions = []
        for _ in range(20):
            a = clamp_action((0.4, -0.2, 0.05, *haptics))
            w, sample = step_control(w, a, CFG)
            positions.append(sample.position)
        flights.append(positions)
    assert flights[0] == flights[1]  # bitwise identical trajectories


def test_velocity_never_exceeds_v_max():
    rng = np.random.default_rng(11)
    w = spawn(one_sphere_scene(), CFG)
    for _ in range(500):
        cmd = rng.uniform(-CFG.v_max, CFG.v_max, size=3)
        w = step_physics(w, cmd, CFG)
        assert np.all(np.abs(w.drone.velocity_array) <= CFG.v_max + 1e-12)


def test_bounds_clipping_zeroes_velocity_on_axis():
    scene = SceneConfig(drone_start=(3.1, 0.0, 1.0), objects=())
    w = spawn(scene, CFG)
    for _ in range(200):
        w = step_physics(w, (1.0, 0.0, 0.0), CFG)
    assert w.drone.position[0] == CFG.bounds_x[1]
    assert w.drone.velocity[0] == 0.0


def test_contact_query_at_center_and_afar():
    w = spawn(one_sphere_scene(drone_start=(1.0, -1.0, 1.0)), CFG)
    info = contact_query(w)
    assert info.object_index == 0
    assert info.distance == pytest.approx(0.0)
    assert info.in_contact

    w = spawn(one_sphere_scene(drone_start=(0.0, 0.0, 1.0)), CFG)
    info = contact_query(w)
    assert info.distance == pytest.approx(np.sqrt(2.0), abs=1e-12)
    assert not info.in_contact


def test_contact_query_empty_scene():
    w = spawn(SceneConfig(objects=()), CFG)
    assert contact_query(w) is None


def test_world_to_pixel_mapping():
    assert world_to_pixel(0.0, 0.0) == (320, 160)
    assert world_to_pixel(1.0, -1.0) == (420, 260)


def test_pixel_roundtrip_within_half_pixel():
    rng = np.random.default_rng(3)
    for _ in range(500):
        x, y = rng.uniform(-3.0, 3.0), rng.uniform(-1.5, 1.5)
        col, row = world_to_pixel(x, y)
        rx, ry = pixel_to_world(col, row)
        assert abs(rx - x) <= 0.005 + 1e-12
        assert abs(ry - y) <= 0.005 + 1e-12


def test_render_real_view_centers_drone_disc():
    w = spawn(one_sphere_scene(), CFG)
    frame = render_topdown(w, ViewKind.REAL)
    assert tuple(frame.pixels[160, 320]) == (255, 255, 255)
    # 12 px radius: inside vs outside.
    assert tuple(frame.pixels[160, 320 + 12]) == (255, 255, 255)
    assert tuple(frame.pixels[160, 320 + 14]) != (255, 255, 255)


def test_render_vr_sprite_at_mapped_pixel():
    w = spawn(one_sphere_scene(), CFG)
    frame = render_topdown(w, ViewKind.VR)
    assert tuple(frame.pixels[260, 420]) == (40, 200, 40)  # food-colored sphere
    assert tuple(frame.pixels[160, 320]) == (20, 20, 20)   # no drone in VR view


def test_render_real_objects_are_dim_outlines():
    w = spawn(one_sphere_scene(), CFG)
    frame = render_topdown(w, ViewKind.REAL)
    # Center of the object is background; its rim carries the dimmed color.
    assert tuple(frame.pixels[260, 420]) == (20, 20, 20)
    assert tuple(frame.pixels[260, 420 + 20]) == (20, 100, 20)


def test_render_deterministic_byte_identical():
    w = spawn(one_sphere_scene(), CFG)
    a = render_topdown(w, ViewKind.REAL)
    b = render_topdown(w, ViewKind.REAL)
    assert a.tobytes() == b.tobytes()


def test_render_offscreen_geometry_is_clipped():
    scene = SceneConfig(objects=(VirtualObject(Shape.CUBE, Texture.OTHER,
                                               (3.15, 1.55, 1.0), 0.3),))
    w = spawn(scene, CFG)
    frame = render_topdown(w, ViewKind.VR)  # must simply not crash
    assert frame.pixels.shape == (320, 640, 3)


def test_cube_and_cone_shapes_render_distinctly():
    cube = SceneConfig(objects=(VirtualObject(Shape.CUBE, Texture.PLASTIC,
                                              (0.0, 0.0, 1.0), 0.2),))
    cone = SceneConfig(objects=(VirtualObject(Shape.CONE, Texture.PLASTIC,
                                              (0.0, 0.0, 1.0), 0.2),))
    cube_frame = render_topdown(spawn(cube, CFG), ViewKind.VR)
    cone_frame = render_topdown(spawn(cone, CFG), ViewKind.VR)
    # Cube fills its corners; the inscribed upward triangle does not.
    assert tuple(cube_frame.pixels[160 - 18, 320 - 18]) == (40, 40, 220)
    assert tuple(cone_frame.pixels[160 - 18, 320 - 18]) == (20, 20, 20)
    # Both cover the apex column near the top of the sprite.
    assert tuple(cone_frame.pixels[160 - 18, 320]) == (40, 40, 220)


def test_background_styles_differ():
    base = one_sphere_scene()
    frames = {}
    for style in BackgroundStyle:
        scene = SceneConfig(base.drone_start, base.objects, style)
        frames[style] = render_topdown(spawn(scene, CFG), ViewKind.VR).tobytes()
    assert len(set(frames.values())) == 3


def test_scene_json_roundtrip():
    scene = SceneConfig(
        drone_start=(0.5, -0.25, 1.0),
        objects=(VirtualObject(Shape.CONE, Texture.OTHER, (1.0, 1.0, 1.0), 0.3),),
        background_style=BackgroundStyle.CLUTTERED,
    )
    assert scene_from_json(scene_to_json(scene)) == scene


def test_sim_config_validates_tick_ratio():
    with pytest.raises(ValueError):
        SimConfig(dt_physics=0.03, dt_control=0.2)
