"""
Closed-loop flight
==================

One language-commanded flight: render frames, query the scripted oracle,
step the plant, stop on arrival-and-hover. Prints the action stream
around contact, where the haptic channel switches on.
"""

import numpy as np

from hapticflight.core import Shape, Texture, VirtualObject
from hapticflight.loop import run_closed_loop
from hapticflight.policy import OraclePolicy
from hapticflight.world import SceneConfig, SimConfig, spawn

cfg = SimConfig(seed=3)
scene = SceneConfig(
    drone_start=(-1.5, 1.0, 1.0),
    objects=(VirtualObject(Shape.SPHERE, Texture.PLASTIC, (1.0, -1.0, 1.0), 0.2),),
)

records = []
result = run_closed_loop(spawn(scene, cfg), OraclePolicy(), "fly to the sphere",
                         cfg, on_tick=records.append)

status = result.status
print(f"ticks: {result.n_ticks}, stop reason: {status.stop_reason}")
print(f"reached target at t={status.reach_time:.1f} s, hover span "
      f"{status.hover_span:.1f} s, success={status.success}")

positions = result.trajectory.positions
print(f"start {positions[0][:2]}, end {np.round(positions[-1][:2], 3)}")

first_contact = next(i for i, r in enumerate(records) if r.action.hv > 0)
print(f"\naction stream around first contact (tick {first_contact}):")
print("tick     vx      vy      hz      hv   left-array extensions")
for r in records[first_contact - 2:first_contact + 3]:
    a = r.action
    left = r.commands[0]
    print(f"{r.index:4d} {a.vx:7.3f} {a.vy:7.3f} {a.hz:7.3f} {a.hv:6.2f}"
          f"   {np.round(left.extensions, 3)} ({left.vibration.name.lower()})")
