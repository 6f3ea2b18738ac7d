"""Episode recording, dataset generation, validation and loading.

On-disk layout per episode: meta.json, episode.jsonl (one step object per
line, UTF-8, LF), and two PNG frames per step. The logical step schema
follows episodic RL dataset conventions: observation, action, is_first /
is_last flags (is_terminal coincides with is_last here).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import FrameRaster, Shape, Texture, VirtualObject, parse_action
from .evaluation import FlightCriteria
from .imaging import FrameFormatError, frame_to_png_bytes, png_bytes_to_frame
from .loop import TickRecord, run_closed_loop
from .policy import PolicyInterface
from .world import SceneConfig, SimConfig, spawn

EPISODE_STEP_CAP = 110  # control ticks; mirrors the mean session length
DATASET_VERSION = 1
N_VARIATIONS = 50

INCOMPLETE_MARKER = "INCOMPLETE"


class DatasetFormatError(ValueError):
    """An episode directory or file violates the dataset layout."""


@dataclass(frozen=True)
class EpisodeMeta:
    episode_id: str
    shape: Shape
    texture: Texture
    drone_start: tuple[float, float, float]
    target_position: tuple[float, float, float]
    instruction: str
    seed: int
    num_steps: int

    def __post_init__(self):
        if self.num_steps < 2:
            raise ValueError(f"episode needs at least 2 steps, got {self.num_steps}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["shape"] = self.shape.name.lower()
        d["texture"] = self.texture.name.lower()
        d["drone_start"] = list(self.drone_start)
        d["target_position"] = list(self.target_position)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "EpisodeMeta":
        return cls(
            episode_id=d["episode_id"],
            shape=Shape.from_name(d["shape"]),
            texture=Texture.from_name(d["texture"]),
            drone_start=tuple(d["drone_start"]),
            target_position=tuple(d["target_position"]),
            instruction=d["instruction"],
            seed=int(d["seed"]),
            num_steps=int(d["num_steps"]),
        )


@dataclass(frozen=True)
class StepRecord:
    step_index: int
    is_first: bool
    is_last: bool
    real_frame_path: str
    vr_frame_path: str
    instruction: str
    action: tuple[float, ...]
    drone_position: tuple[float, float, float]

    def to_json(self) -> dict:
        return {
            "step_index": self.step_index,
            "is_first": self.is_first,
            "is_last": self.is_last,
            "is_terminal": self.is_last,
            "observation": {
                "real_frame_path": self.real_frame_path,
                "vr_frame_path": self.vr_frame_path,
                "instruction": self.instruction,
            },
            "action": list(self.action),
            "drone_position": list(self.drone_position),
        }

    @classmethod
    def from_json(cls, d: dict) -> "StepRecord":
        obs = d["observation"]
        return cls(
            step_index=int(d["step_index"]),
            is_first=bool(d["is_first"]),
            is_last=bool(d["is_last"]),
            real_frame_path=obs["real_frame_path"],
            vr_frame_path=obs["vr_frame_path"],
            instruction=obs["instruction"],
            action=tuple(float(x) for x in d["action"]),
            drone_position=tuple(float(x) for x in d["drone_position"]),
        )


def record_episode(scene: SceneConfig, policy: PolicyInterface, instruction: str,
                   cfg: SimConfig, out_dir: Path, episode_id: str,
                   shape: Shape, texture: Texture,
                   target_position: tuple[float, float, float],
                   seed: int,
                   criteria: Optional[FlightCriteria] = None) -> EpisodeMeta:
    """Run the closed loop and persist one episode directory.

    Stops on arrival-and-hover or after the step cap. Writes one step per
    control tick; a crash mid-write leaves an INCOMPLETE marker behind.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    criteria = criteria or FlightCriteria()
    world = spawn(scene, cfg)
    steps: list[dict] = []

    def on_tick(record: TickRecord) -> None:
        i = record.index
        real_name = f"step_{i:05d}_real.png"
        vr_name = f"step_{i:05d}_vr.png"
        (out_dir / real_name).write_bytes(frame_to_png_bytes(record.observation.real_frame))
        (out_dir / vr_name).write_bytes(frame_to_png_bytes(record.observation.vr_frame))
        steps.append(StepRecord(
            step_index=i,
            is_first=i == 0,
            is_last=False,  # patched below once the episode length is known
            real_frame_path=real_name,
            vr_frame_path=vr_name,
            instruction=record.observation.instruction,
            action=tuple(float(x) for x in
                         (record.action.vx, record.action.vy, record.action.vz,
                          record.action.hx, record.action.hy, record.action.hz,
                          record.action.hv)),
            drone_position=record.world_before.drone.position,
        ).to_json())

    try:
        run_closed_loop(world, policy, instruction, cfg, stop=criteria.stop_rule(),
                        max_ticks=EPISODE_STEP_CAP, on_tick=on_tick)
        if steps:
            steps[-1]["is_last"] = True
            steps[-1]["is_terminal"] = True
        meta = EpisodeMeta(
            episode_id=episode_id, shape=shape, texture=texture,
            drone_start=scene.drone_start, target_position=target_position,
            instruction=instruction, seed=seed, num_steps=len(steps),
        )
        with open(out_dir / "episode.jsonl", "w", encoding="utf-8", newline="\n") as f:
            for step in steps:
                f.write(json.dumps(step, separators=(",", ":")) + "\n")
        with open(out_dir / "meta.json", "w", encoding="utf-8", newline="\n") as f:
            json.dump(meta.to_json(), f, indent=2, sort_keys=True)
            f.write("\n")
        return meta
    except Exception:
        (out_dir / INCOMPLETE_MARKER).write_text("episode recording aborted\n")
        raise


def _variation(base_seed: int, index: int, cfg: SimConfig) -> tuple[tuple, tuple]:
    """Grid-jittered (drone_start, target_position) for one variation."""
    rng = np.random.default_rng(np.random.SeedSequence([base_seed, index]))
    # 10 x 5 grid of start cells over the central flight area, jittered.
    gx, gy = index % 10, (index // 10) % 5
    start_x = -1.8 + gx * 0.4 + float(rng.uniform(-0.15, 0.15))
    start_y = -1.2 + gy * 0.6 + float(rng.uniform(-0.15, 0.15))
    start = (start_x, start_y, 1.0)
    for _ in range(1000):
        tx = float(rng.uniform(-2.0, 2.0))
        ty = float(rng.uniform(-1.3, 1.3))
        target = (tx, ty, 1.0)
        if np.linalg.norm(np.subtract(target, start)) >= 1.2:
            return start, target
    raise RuntimeError("could not place target away from start")


def episode_id_for(variation: int, shape: Shape, texture: Texture) -> str:
    return f"ep_{variation:03d}_{shape.name.lower()}_{texture.name.lower()}"


def generate_dataset(root_dir: Path, base_seed: int,
                     cfg: Optional[SimConfig] = None,
                     policy: Optional[PolicyInterface] = None) -> dict:
    """Generate the full 50-variation x 9-cell dataset (450 episodes).

    The manifest (dataset_info.json) records per-cell counts, total steps
    and any per-episode failures; generation continues past failures.
    """
    from .policy import OraclePolicy

    root_dir = Path(root_dir)
    root_dir.mkdir(parents=True, exist_ok=True)
    if any(root_dir.iterdir()):
        raise DatasetFormatError(f"output directory {root_dir} is not empty")
    cfg = cfg or SimConfig()
    policy = policy or OraclePolicy()
    per_cell: dict[tuple[Shape, Texture], int] = {}
    failures: list[dict] = []
    total_steps = 0
    for variation in range(N_VARIATIONS):
        start, target = _variation(base_seed, variation, cfg)
        for shape in Shape:
            for texture in Texture:
                episode_id = episode_id_for(variation, shape, texture)
                seed_seq = np.random.SeedSequence(
                    [base_seed, variation, int(shape), int(texture)])
                seed = int(seed_seq.generate_state(1, dtype=np.uint64)[0])
                scene = SceneConfig(
                    drone_start=start,
                    objects=(VirtualObject(shape, texture, target, 0.2),),
                )
                instruction = f"fly to the {shape.name.lower()}"
                try:
                    meta = record_episode(scene, policy, instruction, cfg,
                                          root_dir / episode_id, episode_id,
                                          shape, texture, target, seed)
                    per_cell[(shape, texture)] = per_cell.get((shape, texture), 0) + 1
                    total_steps += meta.num_steps
                except Exception as exc:
                    failures.append({"episode_id": episode_id, "error": str(exc)})
    manifest = {
        "version": DATASET_VERSION,
        "episode_count": sum(per_cell.values()),
        "per_cell_counts": [
            {"shape": s.name.lower(), "texture": t.name.lower(),
             "count": per_cell.get((s, t), 0)}
            for s in Shape for t in Texture
        ],
        "total_steps": total_steps,
        "base_seed": base_seed,
        "failures": failures,
    }
    with open(root_dir / "dataset_info.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


@dataclass
class ValidationReport:
    episodes_checked: int = 0
    violations: list[tuple[str, Optional[int], str]] = None

    def __post_init__(self):
        if self.violations is None:
            self.violations = []

    def add(self, episode_id: str, step: Optional[int], message: str) -> None:
        self.violations.append((episode_id, step, message))

    @property
    def ok(self) -> bool:
        return not self.violations


def _validate_episode(ep_dir: Path, report: ValidationReport) -> int:
    """Check one episode directory; returns its step count."""
    episode_id = ep_dir.name
    meta_path = ep_dir / "meta.json"
    steps_path = ep_dir / "episode.jsonl"
    if (ep_dir / INCOMPLETE_MARKER).exists():
        report.add(episode_id, None, "episode marked incomplete")
        return 0
    if not meta_path.exists():
        report.add(episode_id, None, "missing meta.json")
        return 0
    if not steps_path.exists():
        report.add(episode_id, None, "missing episode.jsonl")
        return 0
    try:
        meta = EpisodeMeta.from_json(json.loads(meta_path.read_text(encoding="utf-8")))
    except Exception as exc:
        report.add(episode_id, None, f"unreadable meta.json: {exc}")
        return 0
    steps = []
    with open(steps_path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            try:
                steps.append(StepRecord.from_json(json.loads(line)))
            except Exception as exc:
                report.add(episode_id, lineno, f"bad step line {lineno}: {exc}")
                return len(steps)
    if meta.num_steps != len(steps):
        report.add(episode_id, None,
                   f"meta num_steps={meta.num_steps} but {len(steps)} step lines")
    for i, step in enumerate(steps):
        if step.step_index != i:
            report.add(episode_id, i, f"step_index {step.step_index}, expected {i}")
        if step.is_first != (i == 0):
            report.add(episode_id, i, "is_first misplaced")
        if step.is_last != (i == len(steps) - 1):
            report.add(episode_id, i, "is_last misplaced")
        if len(step.action) != 7:
            report.add(episode_id, i, f"action arity {len(step.action)}")
        else:
            try:
                parse_action(list(step.action))
            except ValueError as exc:
                report.add(episode_id, i, f"invalid action: {exc}")
        for path_name in (step.real_frame_path, step.vr_frame_path):
            frame_path = ep_dir / path_name
            if not frame_path.exists():
                report.add(episode_id, i, f"missing frame {path_name}")
                continue
            try:
                png_bytes_to_frame(frame_path.read_bytes())
            except FrameFormatError as exc:
                report.add(episode_id, i, f"bad frame {path_name}: {exc}")
    return len(steps)


def validate_dataset(root_dir: Path) -> ValidationReport:
    """Validate every episode under root_dir and the manifest counts."""
    root_dir = Path(root_dir)
    if not root_dir.is_dir():
        raise OSError(f"dataset root {root_dir} is not a directory")
    report = ValidationReport()
    episode_dirs = sorted(p for p in root_dir.iterdir() if p.is_dir())
    counted_steps = 0
    for ep_dir in episode_dirs:
        counted_steps += _validate_episode(ep_dir, report)
        report.episodes_checked += 1
    manifest_path = root_dir / "dataset_info.json"
    if manifest_path.exists():
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except Exception as exc:
            report.add("<manifest>", None, f"unreadable dataset_info.json: {exc}")
            return report
        if manifest.get("episode_count") != len(episode_dirs):
            report.add("<manifest>", None,
                       f"manifest episode_count={manifest.get('episode_count')} but "
                       f"{len(episode_dirs)} episode directories present")
        cell_total = sum(c.get("count", 0) for c in manifest.get("per_cell_counts", []))
        if cell_total != manifest.get("episode_count"):
            report.add("<manifest>", None, "per-cell counts do not sum to episode_count")
        if manifest.get("total_steps") != counted_steps:
            report.add("<manifest>", None,
                       f"manifest total_steps={manifest.get('total_steps')} but "
                       f"episodes contain {counted_steps}")
    return report


def load_episode(ep_dir: Path) -> tuple[EpisodeMeta, list[tuple[StepRecord, FrameRaster, FrameRaster]]]:
    """Load one episode with decoded frames.

    Returns (meta, [(step, real_frame, vr_frame), ...]); loading inverts
    recording exactly, including frame bytes.
    """
    ep_dir = Path(ep_dir)
    meta_path = ep_dir / "meta.json"
    if not meta_path.exists():
        raise DatasetFormatError(f"{ep_dir}: missing meta.json")
    try:
        meta = EpisodeMeta.from_json(json.loads(meta_path.read_text(encoding="utf-8")))
    except (KeyError, ValueError) as exc:
        raise DatasetFormatError(f"{meta_path}: {exc}") from exc
    steps = []
    steps_path = ep_dir / "episode.jsonl"
    if not steps_path.exists():
        raise DatasetFormatError(f"{ep_dir}: missing episode.jsonl")
    with open(steps_path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            try:
                step = StepRecord.from_json(json.loads(line))
            except (KeyError, ValueError) as exc:
                raise DatasetFormatError(
                    f"{steps_path} line {lineno}: {exc}") from exc
            frames = []
            for name in (step.real_frame_path, step.vr_frame_path):
                try:
                    frames.append(png_bytes_to_frame((ep_dir / name).read_bytes()))
                except (OSError, FrameFormatError) as exc:
                    raise DatasetFormatError(f"{ep_dir / name}: {exc}") from exc
            steps.append((step, frames[0], frames[1]))
    return meta, steps


def hash_tree(root: Path) -> str:
    """SHA-256 over sorted relative paths and file contents."""
    root = Path(root)
    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(str(path.relative_to(root)).encode("utf-8"))
        digest.update(b"\0")
        digest.update(path.read_bytes())
        digest.update(b"\0")
    return digest.hexdigest()
