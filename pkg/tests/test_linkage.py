import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hapticflight.core import Shape, Texture, VibrationLevel
from hapticflight.linkage import (DEFAULT_ARRAY_CONFIG, HapticArrayConfig,
                                  LinkageGeometry, ServoAngles,
                                  SingularConfigurationError, TravelSegment,
                                  WorkspaceError, encode_shape_profile,
                                  extension_to_angles, forward_kinematics,
                                  haptic_to_array_commands, inverse_kinematics,
                                  render_pattern, servo_pulse_us,
                                  vibration_offset, workspace_contains)

G = LinkageGeometry()  # d=0.04, l1=0.05, l2=0.07, servo range [0, pi]

# Closed-form oracle for the symmetric pose: both elbows at height l1,
# horizontal half-separation d/2, so EE.y = l1 + sqrt(l2^2 - (d/2)^2).
FK_SYMMETRIC_Y = 0.05 + math.sqrt(0.07 ** 2 - 0.02 ** 2)


def sample_workspace_points(g, n, seed):
    """Seeded rejection sampling over the reachable workspace."""
    rng = np.random.default_rng(seed)
    points = []
    while len(points) < n:
        p = rng.uniform([-0.09, -0.01], [0.13, 0.13])
        if workspace_contains(g, p):
            points.append(p)
    return np.array(points)


def test_fk_symmetric_pose_matches_closed_form():
    ee = forward_kinematics(G, ServoAngles(math.pi / 2, math.pi / 2))
    assert ee[0] == pytest.approx(0.02, abs=1e-12)
    assert ee[1] == pytest.approx(FK_SYMMETRIC_Y, abs=1e-12)
    assert ee[1] == pytest.approx(0.117082, abs=1e-6)


@given(st.floats(min_value=0.35, max_value=math.pi - 0.35))
def test_fk_mirror_symmetry_puts_ee_on_midline(theta1):
    ee = forward_kinematics(G, ServoAngles(theta1, math.pi - theta1))
    assert ee[0] == pytest.approx(G.d / 2, abs=1e-12)


def test_fk_tangency_limit_returns_single_point():
    g = LinkageGeometry(d=0.04, l1=0.05, l2=0.02)
    ee = forward_kinematics(g, ServoAngles(math.pi / 2, math.pi / 2))
    assert np.allclose(ee, (0.02, 0.05), atol=1e-12)


def test_fk_disjoint_circles_is_singular():
    g = LinkageGeometry(d=0.04, l1=0.05, l2=0.019)
    with pytest.raises(SingularConfigurationError):
        forward_kinematics(g, ServoAngles(math.pi / 2, math.pi / 2))


def test_fk_elbow_distance_residuals():
    for theta1, theta2 in ((1.2, 1.8), (0.9, 2.0), (math.pi / 2, math.pi / 2)):
        angles = ServoAngles(theta1, theta2)
        ee = forward_kinematics(G, angles)
        elbows = G.bases + G.l1 * np.array(
            [[math.cos(theta1), math.sin(theta1)],
             [math.cos(theta2), math.sin(theta2)]])
        for elbow in elbows:
            assert abs(np.linalg.norm(ee - elbow) - G.l2) < 1e-9


def test_ik_recovers_symmetric_pose():
    angles = inverse_kinematics(G, (0.02, FK_SYMMETRIC_Y))
    assert angles.theta1 == pytest.approx(math.pi / 2, abs=1e-9)
    assert angles.theta2 == pytest.approx(math.pi / 2, abs=1e-9)


def test_ik_midline_targets_are_mirror_symmetric():
    for y in (0.08, 0.10, 0.115):
        angles = inverse_kinematics(G, (G.d / 2, y))
        assert angles.theta2 == pytest.approx(math.pi - angles.theta1, abs=1e-9)


def test_ik_unreachable_target_reports_distance():
    with pytest.raises(WorkspaceError) as err:
        inverse_kinematics(G, (1.0, 1.0))
    # Distance to workspace: |p - base0| - (l1 + l2).
    assert err.value.distance == pytest.approx(math.hypot(1, 1) - 0.12, abs=1e-9)


def test_fk_ik_identity_on_seeded_workspace():
    for p in sample_workspace_points(G, 2000, seed=7):
        q = forward_kinematics(G, inverse_kinematics(G, p))
        assert np.linalg.norm(q - p) < 1e-9


def test_workspace_membership_cases():
    assert workspace_contains(G, (0.02, FK_SYMMETRIC_Y))
    # Annulus boundary counts as reachable.
    assert workspace_contains(G, (0.02, 0.0))
    assert not workspace_contains(G, (10.0, 10.0))
    assert not workspace_contains(G, (1.0, 1.0))


def test_shape_profiles_table():
    assert encode_shape_profile(Shape.CUBE).heights == (1.0, 1.0, 1.0)
    assert encode_shape_profile(Shape.SPHERE).heights == (0.7, 1.0, 0.7)
    assert encode_shape_profile(Shape.CONE).heights == (0.2, 1.0, 0.2)


def test_shape_profiles_pairwise_distinct():
    profiles = [np.array(encode_shape_profile(s).heights) for s in Shape]
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.max(np.abs(profiles[i] - profiles[j])) >= 0.3 - 1e-12


def test_vibration_offset_values():
    assert vibration_offset(VibrationLevel.NULL, 0.123) == 0.0
    assert vibration_offset(VibrationLevel.HIGH, 0.01) == pytest.approx(0.10, abs=1e-12)
    assert vibration_offset(VibrationLevel.LOW, 0.0) == 0.0
    for level in VibrationLevel:
        for t in np.linspace(0, 1, 97):
            assert abs(vibration_offset(level, float(t))) <= 0.10 + 1e-12


def test_haptic_zero_action_means_no_actuation():
    left, right = haptic_to_array_commands(0, 0, 0, 0, contact=None, t=0.0)
    assert left.extensions == (0.0, 0.0, 0.0)
    assert left.vibration == VibrationLevel.NULL
    assert left == right


def test_haptic_full_press_on_cone():
    left, right = haptic_to_array_commands(1, 1, 1, 0.9,
                                           contact=(Shape.CONE, Texture.PLASTIC), t=0.0)
    assert left.extensions == pytest.approx((0.2, 1.0, 0.2), abs=1e-12)
    assert left.vibration == VibrationLevel.HIGH
    assert left == right


def test_haptic_half_press_on_cube():
    left, _ = haptic_to_array_commands(0.5, 0.5, 0.5, 0.5,
                                       contact=(Shape.CUBE, Texture.FOOD), t=0.0)
    assert left.extensions == pytest.approx((0.5, 0.5, 0.5), abs=1e-12)
    assert left.vibration == VibrationLevel.LOW


def test_haptic_out_of_range_rejected():
    with pytest.raises(ValueError):
        haptic_to_array_commands(1.5, 0, 0, 0)
    with pytest.raises(ValueError):
        haptic_to_array_commands(0, 0, 0, 1.5)


def test_hv_band_thresholds():
    _, r = haptic_to_array_commands(0, 0, 0, 0.75, t=0.0)
    assert r.vibration == VibrationLevel.HIGH
    _, r = haptic_to_array_commands(0, 0, 0, 0.25, t=0.0)
    assert r.vibration == VibrationLevel.LOW
    _, r = haptic_to_array_commands(0, 0, 0, 0.249, t=0.0)
    assert r.vibration == VibrationLevel.NULL


def test_extension_endpoints_hit_travel_segment():
    cfg = DEFAULT_ARRAY_CONFIG
    g = cfg.geometry
    for extension, y in ((0.0, cfg.travel.y_retracted), (1.0, cfg.travel.y_extended)):
        angles = extension_to_angles(cfg, 0, extension)
        expected = inverse_kinematics(g, (g.d / 2, y))
        assert angles.theta1 == pytest.approx(expected.theta1, abs=1e-12)
        assert angles.theta2 == pytest.approx(expected.theta2, abs=1e-12)


def test_extension_midpoint_fk_roundtrip():
    cfg = DEFAULT_ARRAY_CONFIG
    g = cfg.geometry
    angles = extension_to_angles(cfg, 1, 0.5)
    y_mid = (cfg.travel.y_retracted + cfg.travel.y_extended) / 2
    ee = forward_kinematics(g, angles)
    assert np.linalg.norm(ee - np.array([g.d / 2, y_mid])) < 1e-9


def test_extension_monotone_on_grid():
    cfg = DEFAULT_ARRAY_CONFIG
    ys = [forward_kinematics(cfg.geometry, extension_to_angles(cfg, 2, e))[1]
          for e in np.linspace(0, 1, 101)]
    assert all(b > a for a, b in zip(ys, ys[1:]))


def test_invalid_travel_segment_rejected_at_construction():
    with pytest.raises(ValueError):
        HapticArrayConfig(travel=TravelSegment(y_retracted=0.08, y_extended=0.5))


def test_servo_pulse_endpoints_and_linearity():
    limits = (0.0, math.pi)
    assert servo_pulse_us(0.0, limits) == 500.0
    assert servo_pulse_us(math.pi, limits) == 2500.0
    assert servo_pulse_us(math.pi / 2, limits) == pytest.approx(1500.0, abs=1e-9)
    pulses = [servo_pulse_us(a, limits) for a in np.linspace(0, math.pi, 50)]
    assert all(b > a for a, b in zip(pulses, pulses[1:]))
    with pytest.raises(ValueError):
        servo_pulse_us(-0.1, limits)


def test_render_pattern_shape_and_range():
    series = render_pattern(Shape.SPHERE, VibrationLevel.HIGH)
    assert series.shape == (100, 3)
    assert series.min() >= 0.0 and series.max() <= 1.0
    # Side linkages oscillate around strength * 0.7 with amplitude 0.1.
    assert series[:, 0].mean() == pytest.approx(0.8 * 0.7, abs=1e-6)
    assert series[:, 0] == pytest.approx(series[:, 2])


def test_render_pattern_null_is_static():
    series = render_pattern(Shape.CUBE, VibrationLevel.NULL)
    assert np.ptp(series, axis=0) == pytest.approx((0.0, 0.0, 0.0))
