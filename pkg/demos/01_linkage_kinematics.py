"""
Five-bar linkage kinematics
===========================

Forward and inverse kinematics of one haptic linkage, the reachable
workspace, and the servo pulse mapping.
"""

import numpy as np

from hapticflight.linkage import (DEFAULT_ARRAY_CONFIG, LinkageGeometry,
                                  ServoAngles, extension_to_angles,
                                  forward_kinematics, inverse_kinematics,
                                  servo_pulse_us, workspace_contains)

g = LinkageGeometry()
print(f"geometry: base separation {g.d} m, l1 {g.l1} m, l2 {g.l2} m")

# The symmetric pose: both servos straight up.
ee = forward_kinematics(g, ServoAngles(np.pi / 2, np.pi / 2))
print(f"FK(pi/2, pi/2) -> end-effector at ({ee[0]:.4f}, {ee[1]:.6f}) m")

# And back again.
angles = inverse_kinematics(g, ee)
print(f"IK of that point -> theta1={angles.theta1:.6f}, theta2={angles.theta2:.6f}")

# Sample the reachable workspace.
rng = np.random.default_rng(0)
candidates = rng.uniform([-0.09, -0.01], [0.13, 0.13], size=(20000, 2))
inside = np.array([workspace_contains(g, p) for p in candidates])
points = candidates[inside]
print(f"workspace sampling: {inside.mean() * 100:.1f}% of the bounding box reachable")
print(f"  x span [{points[:, 0].min():.3f}, {points[:, 0].max():.3f}] m, "
      f"y span [{points[:, 1].min():.3f}, {points[:, 1].max():.3f}] m")

# Round-trip accuracy over the sampled region.
errors = [np.linalg.norm(forward_kinematics(g, inverse_kinematics(g, p)) - p)
          for p in points[:2000]]
print(f"FK(IK(p)) worst error over 2000 points: {max(errors):.2e} m")

# Extension travel: normalized extension -> servo angles -> PWM pulses.
print("\nextension  theta1(rad)  theta2(rad)  pulse1(us)  pulse2(us)")
for extension in (0.0, 0.25, 0.5, 0.75, 1.0):
    a = extension_to_angles(DEFAULT_ARRAY_CONFIG, 0, extension)
    limits = (g.servo_min, g.servo_max)
    print(f"{extension:9.2f}  {a.theta1:11.4f}  {a.theta2:11.4f}"
          f"  {servo_pulse_us(a.theta1, limits):10.1f}"
          f"  {servo_pulse_us(a.theta2, limits):10.1f}")
