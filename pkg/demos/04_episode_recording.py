"""
Episode recording
=================

Record one episode (frames as PNG, steps as JSON lines, metadata), then
load it back and confirm the round trip is lossless.
"""

import tempfile
from pathlib import Path

from hapticflight.core import Shape, Texture, VirtualObject
from hapticflight.dataset import hash_tree, load_episode, record_episode, validate_dataset
from hapticflight.policy import OraclePolicy
from hapticflight.world import SceneConfig, SimConfig

cfg = SimConfig()
scene = SceneConfig(
    drone_start=(0.0, 0.5, 1.0),
    objects=(VirtualObject(Shape.CONE, Texture.FOOD, (1.5, -0.5, 1.0), 0.2),),
)

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "ep_demo"
    meta = record_episode(scene, OraclePolicy(), "fly to the cone", cfg, out,
                          "ep_demo", Shape.CONE, Texture.FOOD, (1.5, -0.5, 1.0),
                          seed=11)
    print(f"recorded {meta.num_steps} steps to {out.name}/")
    files = sorted(p.name for p in out.iterdir())
    print(f"layout: {files[:3]} ... {files[-2:]} ({len(files)} files)")
    print(f"tree hash: {hash_tree(out)[:16]}...")

    loaded, steps = load_episode(out)
    assert loaded == meta
    step0, real0, vr0 = steps[0]
    print(f"\nloaded back: step 0 action={list(step0.action)}")
    print(f"frames decode to {real0.width}x{real0.height}; is_first={step0.is_first}")
    last = steps[-1][0]
    print(f"last step index {last.step_index}, is_last={last.is_last}")

    report = validate_dataset(Path(tmp))
    print(f"\nvalidator: {report.episodes_checked} episode(s), "
          f"{len(report.violations)} violations")
