"""Deterministic fixed-step world: drone plant, scene, contact, rasterizer.

The drone tracks commanded velocity through a first-order lag and is
integrated on a fine physics step; control acts at an integer multiple of
that step. Rendering is an orthographic top-down projection with integer
pixel arithmetic so identical states produce byte-identical frames on any
platform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core import (FRAME_HEIGHT, FRAME_WIDTH, ActionVector, DroneState,
                   FrameRaster, Shape, Texture, VirtualObject)

PIXELS_PER_METER = 100.0

# Texture palette for rendered objects (RGB).
TEXTURE_COLORS = {
    Texture.FOOD: (40, 200, 40),
    Texture.PLASTIC: (40, 40, 220),
    Texture.OTHER: (150, 150, 150),
}

BACKGROUND_DEFAULT = (20, 20, 20)
BACKGROUND_ALT = (70, 45, 90)
DRONE_COLOR = (255, 255, 255)
DRONE_RADIUS_PX = 12


class SceneValidationError(ValueError):
    """A scene violates world invariants; message lists every violation."""


class BackgroundStyle(enum.IntEnum):
    DEFAULT = 0
    ALT_COLOR = 1
    CLUTTERED = 2


class ViewKind(enum.Enum):
    REAL = "real"
    VR = "vr"


@dataclass(frozen=True)
class SimConfig:
    """Simulation timing, plant and world-bounds parameters."""

    dt_physics: float = 0.01
    dt_control: float = 0.2   # 5 Hz control
    tau: float = 0.3          # velocity tracking time constant (s)
    v_max: float = 1.0
    bounds_x: tuple[float, float] = (-3.2, 3.2)
    bounds_y: tuple[float, float] = (-1.6, 1.6)
    bounds_z: tuple[float, float] = (0.2, 2.5)
    seed: int = 0

    def __post_init__(self):
        if self.dt_physics <= 0 or self.dt_control <= 0:
            raise ValueError("time steps must be positive")
        ratio = self.dt_control / self.dt_physics
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("dt_control must be a positive integer multiple of dt_physics")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        for lo, hi in (self.bounds_x, self.bounds_y, self.bounds_z):
            if not lo < hi:
                raise ValueError("world bounds must be non-degenerate")

    @property
    def substeps_per_control(self) -> int:
        return int(round(self.dt_control / self.dt_physics))

    @property
    def lower_bounds(self) -> np.ndarray:
        return np.array([self.bounds_x[0], self.bounds_y[0], self.bounds_z[0]])

    @property
    def upper_bounds(self) -> np.ndarray:
        return np.array([self.bounds_x[1], self.bounds_y[1], self.bounds_z[1]])

    def contains(self, p: Sequence[float]) -> bool:
        lo, hi = self.lower_bounds, self.upper_bounds
        return bool(np.all(np.asarray(p) >= lo) and np.all(np.asarray(p) <= hi))


@dataclass(frozen=True)
class SceneConfig:
    """Initial conditions: drone start, virtual objects, background style."""

    drone_start: tuple[float, float, float] = (0.0, 0.0, 1.0)
    objects: tuple[VirtualObject, ...] = ()
    background_style: BackgroundStyle = BackgroundStyle.DEFAULT

    def __post_init__(self):
        object.__setattr__(self, "drone_start",
                           tuple(float(c) for c in self.drone_start))
        object.__setattr__(self, "objects", tuple(self.objects))


@dataclass(frozen=True)
class TrajectorySample:
    """Drone position at one control tick."""

    t: float
    position: tuple[float, float, float]


@dataclass(frozen=True)
class Trajectory:
    """Control-tick position samples with uniform spacing."""

    samples: tuple[TrajectorySample, ...]

    def __post_init__(self):
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.samples])


@dataclass(frozen=True)
class ContactInfo:
    """Nearest-object query result."""

    object_index: int
    distance: float
    in_contact: bool


# Contact begins this far beyond the object's nominal size (m).
CONTACT_MARGIN = 0.1


@dataclass(frozen=True)
class WorldState:
    """Full simulation state. Stepping returns a new state; instances are
    treated as immutable values (the rng is only consumed by scene
    perturbation helpers, never by stepping)."""

    drone: DroneState
    objects: tuple[VirtualObject, ...]
    sim_time: float
    rng: np.random.Generator = field(compare=False, repr=False,
                                     default_factory=lambda: np.random.default_rng(0))
    background: BackgroundStyle = BackgroundStyle.DEFAULT


def scene_to_json(scene: SceneConfig) -> dict:
    return {
        "drone_start": list(scene.drone_start),
        "objects": [
            {"shape": o.shape.name.lower(), "texture": o.texture.name.lower(),
             "position": list(o.position), "size": o.size}
            for o in scene.objects
        ],
        "background_style": scene.background_style.name.lower(),
    }


def scene_from_json(payload: dict) -> SceneConfig:
    if not isinstance(payload, dict):
        raise SceneValidationError("scene must be a JSON object")
    try:
        objects = tuple(
            VirtualObject(
                shape=Shape.from_name(o["shape"]),
                texture=Texture.from_name(o["texture"]),
                position=tuple(o["position"]),
                size=float(o["size"]),
            )
            for o in payload.get("objects", ())
        )
        style = BackgroundStyle[payload.get("background_style", "default").upper()]
        return SceneConfig(
            drone_start=tuple(payload.get("drone_start", (0.0, 0.0, 1.0))),
            objects=objects,
            background_style=style,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneValidationError(f"invalid scene JSON: {exc}") from exc


def validate_scene(scene: SceneConfig, cfg: SimConfig) -> list[str]:
    """Collect every invariant violation in a scene; empty means valid."""
    problems = []
    if not cfg.contains(scene.drone_start):
        problems.append(f"drone start {scene.drone_start} outside world bounds")
    for i, obj in enumerate(scene.objects):
        if not cfg.contains(obj.position):
            problems.append(f"object {i} at {obj.position} outside world bounds")
        if obj.size <= 0:
            problems.append(f"object {i} has non-positive size {obj.size}")
    return problems


def spawn(scene: SceneConfig, cfg: SimConfig) -> WorldState:
    """Create the initial world: drone at rest at its start pose, t=0."""
    problems = validate_scene(scene, cfg)
    if problems:
        raise SceneValidationError("; ".join(problems))
    return WorldState(
        drone=DroneState(position=scene.drone_start, velocity=(0.0, 0.0, 0.0)),
        objects=scene.objects,
        sim_time=0.0,
        rng=np.random.default_rng(cfg.seed),
        background=scene.background_style,
    )


def step_physics(w: WorldState, v_cmd: Sequence[float], cfg: SimConfig) -> WorldState:
    """One physics substep: first-order velocity lag, then position update.

    Positions clip to world bounds; a clipped axis has its velocity zeroed.
    """
    dt = cfg.dt_physics
    v = np.asarray(w.drone.velocity, dtype=float)
    p = np.asarray(w.drone.position, dtype=float)
    v_cmd = np.asarray(v_cmd, dtype=float)
    v_new = v + (dt / cfg.tau) * (v_cmd - v)
    p_new = p + v_new * dt
    lo, hi = cfg.lower_bounds, cfg.upper_bounds
    clipped = np.clip(p_new, lo, hi)
    v_new = np.where(clipped != p_new, 0.0, v_new)
    return replace(w,
                   drone=DroneState(position=tuple(clipped), velocity=tuple(v_new)),
                   sim_time=w.sim_time + dt)


def step_control(w: WorldState, a: ActionVector,
                 cfg: SimConfig) -> tuple[WorldState, TrajectorySample]:
    """Apply one action for a full control tick.

    Runs dt_control/dt_physics physics substeps with the action's velocity
    command. Haptic components ride along for actuation but never touch
    flight state.
    """
    v_cmd = (a.vx, a.vy, a.vz)
    for _ in range(cfg.substeps_per_control):
        w = step_physics(w, v_cmd, cfg)
    return w, TrajectorySample(t=w.sim_time, position=w.drone.position)


def contact_query(w: WorldState) -> Optional[ContactInfo]:
    """Nearest object by center distance, or None for an empty scene."""
    if not w.objects:
        return None
    p = w.drone.position_array
    distances = [float(np.linalg.norm(obj.position_array - p)) for obj in w.objects]
    idx = int(np.argmin(distances))
    dist = distances[idx]
    return ContactInfo(object_index=idx, distance=dist,
                       in_contact=dist <= w.objects[idx].size + CONTACT_MARGIN)


def world_to_pixel(x: float, y: float) -> tuple[int, int]:
    """World (x, y) in meters to (col, row); 100 px/m, origin at frame center."""
    col = FRAME_WIDTH // 2 + int(round(PIXELS_PER_METER * x))
    row = FRAME_HEIGHT // 2 - int(round(PIXELS_PER_METER * y))
    return col, row


def pixel_to_world(col: int, row: int) -> tuple[float, float]:
    """Center of a pixel back to world coordinates."""
    x = (col - FRAME_WIDTH // 2) / PIXELS_PER_METER
    y = (FRAME_HEIGHT // 2 - row) / PIXELS_PER_METER
    return x, y


class _Patch:
    """A boolean sprite mask restricted to its clipped bounding box."""

    __slots__ = ("row0", "col0", "mask")

    def __init__(self, cx: int, cy: int, radius: float):
        extent = int(math.ceil(radius)) + 1
        self.col0 = max(0, cx - extent)
        self.row0 = max(0, cy - extent)
        col1 = min(FRAME_WIDTH, cx + extent + 1)
        row1 = min(FRAME_HEIGHT, cy + extent + 1)
        if col1 <= self.col0 or row1 <= self.row0:
            self.mask = np.zeros((0, 0), dtype=bool)
        else:
            self.mask = np.zeros((row1 - self.row0, col1 - self.col0), dtype=bool)

    def grids(self) -> tuple[np.ndarray, np.ndarray]:
        h, w = self.mask.shape
        cols = (np.arange(w) + self.col0)[None, :]
        rows = (np.arange(h) + self.row0)[:, None]
        return cols, rows

    def paint(self, frame: np.ndarray, color: tuple[int, int, int]) -> None:
        if self.mask.size == 0:
            return
        h, w = self.mask.shape
        view = frame[self.row0:self.row0 + h, self.col0:self.col0 + w]
        view[self.mask] = color

    def outline(self) -> "_Patch":
        eroded = self.mask.copy()
        if eroded.size:
            eroded[1:, :] &= self.mask[:-1, :]
            eroded[:-1, :] &= self.mask[1:, :]
            eroded[:, 1:] &= self.mask[:, :-1]
            eroded[:, :-1] &= self.mask[:, 1:]
        rim = _Patch.__new__(_Patch)
        rim.row0, rim.col0 = self.row0, self.col0
        rim.mask = self.mask & ~eroded
        return rim


def _disc_patch(cx: int, cy: int, radius: float) -> _Patch:
    patch = _Patch(cx, cy, radius)
    if patch.mask.size:
        cols, rows = patch.grids()
        patch.mask |= (cols - cx) ** 2 + (rows - cy) ** 2 <= radius * radius
    return patch


def _square_patch(cx: int, cy: int, half: float) -> _Patch:
    patch = _Patch(cx, cy, half)
    if patch.mask.size:
        cols, rows = patch.grids()
        patch.mask |= (np.abs(cols - cx) <= half) & (np.abs(rows - cy) <= half)
    return patch


def _triangle_patch(cx: int, cy: int, radius: float) -> _Patch:
    # Upward triangle inscribed in the circle: apex at the top, base below.
    patch = _Patch(cx, cy, radius)
    if patch.mask.size:
        s = math.sqrt(3.0) / 2.0
        verts = ((cx, cy - radius),
                 (cx - s * radius, cy + 0.5 * radius),
                 (cx + s * radius, cy + 0.5 * radius))
        cols, rows = patch.grids()
        inside = np.ones_like(patch.mask)
        for (ax, ay), (bx, by) in zip(verts, verts[1:] + verts[:1]):
            # Keep pixels on the interior side of each directed edge.
            cross = (bx - ax) * (rows - ay) - (by - ay) * (cols - ax)
            inside &= cross <= 0
        patch.mask |= inside
    return patch


def _object_patch(obj: VirtualObject) -> _Patch:
    cx, cy = world_to_pixel(obj.position[0], obj.position[1])
    radius = PIXELS_PER_METER * obj.size
    if obj.shape == Shape.CUBE:
        return _square_patch(cx, cy, radius)
    if obj.shape == Shape.SPHERE:
        return _disc_patch(cx, cy, radius)
    return _triangle_patch(cx, cy, radius)


def _clutter_rects() -> list[tuple[int, int, int, int]]:
    # Fixed pseudo-random clutter pattern; LCG keeps it identical everywhere.
    rects = []
    state = 0x2545F491
    for _ in range(14):
        state = (1103515245 * state + 12345) % (1 << 31)
        col = state % (FRAME_WIDTH - 60)
        state = (1103515245 * state + 12345) % (1 << 31)
        row = state % (FRAME_HEIGHT - 40)
        state = (1103515245 * state + 12345) % (1 << 31)
        w = 20 + state % 40
        state = (1103515245 * state + 12345) % (1 << 31)
        h = 14 + state % 26
        rects.append((col, row, w, h))
    return rects


_CLUTTER_RECTS = _clutter_rects()


def _background(style: BackgroundStyle) -> np.ndarray:
    frame = np.empty((FRAME_HEIGHT, FRAME_WIDTH, 3), dtype=np.uint8)
    if style == BackgroundStyle.ALT_COLOR:
        frame[:] = BACKGROUND_ALT
    else:
        frame[:] = BACKGROUND_DEFAULT
    if style == BackgroundStyle.CLUTTERED:
        for col, row, w, h in _CLUTTER_RECTS:
            frame[row:row + h, col:col + w] = (55, 55, 60)
    return frame


def render_topdown(w: WorldState, view: ViewKind) -> FrameRaster:
    """Render one 640x320 top-down frame.

    The VR view shows only the virtual objects, filled in their texture
    colors. The real view shows the same background, objects as dim
    outlines, and the drone as a white disc. No anti-aliasing; output is
    deterministic.
    """
    frame = _background(w.background)
    for obj in w.objects:
        patch = _object_patch(obj)
        color = TEXTURE_COLORS[obj.texture]
        if view == ViewKind.VR:
            patch.paint(frame, color)
        else:
            dim = tuple(c // 2 for c in color)
            patch.outline().paint(frame, dim)
    if view == ViewKind.REAL:
        cx, cy = world_to_pixel(w.drone.position[0], w.drone.position[1])
        _disc_patch(cx, cy, DRONE_RADIUS_PX).paint(frame, DRONE_COLOR)
    frame.setflags(write=False)
    return FrameRaster(frame)
