"""Shared domain types and the 7D action contract.

The action vector is the single currency between policy and plant:
three commanded velocities, three haptic force-direction components,
and one vibration intensity, in that order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

FRAME_WIDTH = 640
FRAME_HEIGHT = 320

ACTION_ORDER = ("vx", "vy", "vz", "hx", "hy", "hz", "hv")


class ActionRangeError(ValueError):
    """An action component is non-finite or outside its declared range."""


class ActionParseError(ValueError):
    """A raw action list cannot be parsed into an ActionVector."""


class Shape(enum.IntEnum):
    """Virtual object shapes. Integer codes are part of the serialized format."""

    CUBE = 0
    SPHERE = 1
    CONE = 2

    @classmethod
    def from_name(cls, name: str) -> "Shape":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown shape {name!r}; expected one of "
                             f"{[s.name.lower() for s in cls]}") from None


class Texture(enum.IntEnum):
    """Virtual object surface categories. Codes are stable for serialization."""

    FOOD = 0
    PLASTIC = 1
    OTHER = 2

    @classmethod
    def from_name(cls, name: str) -> "Texture":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown texture {name!r}; expected one of "
                             f"{[t.name.lower() for t in cls]}") from None


class VibrationLevel(enum.IntEnum):
    """Vibration intensity bands. NULL means zero amplitude."""

    HIGH = 0
    LOW = 1
    NULL = 2

    @classmethod
    def from_name(cls, name: str) -> "VibrationLevel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown vibration level {name!r}; expected one of "
                             f"{[v.name.lower() for v in cls]}") from None


@dataclass(frozen=True)
class HapticPattern:
    """One of the nine renderable tactile patterns: a shape at a vibration level."""

    shape: Shape
    vibration: VibrationLevel


@dataclass(frozen=True)
class ActionVector:
    """7D action: velocities (m/s), haptic direction, vibration intensity.

    Velocity and haptic-direction components live in [-1, 1], vibration
    intensity in [0, 1]. The zero vector means hover with no haptics.
    """

    vx: float
    vy: float
    vz: float
    hx: float
    hy: float
    hz: float
    hv: float

    def __post_init__(self):
        for name in ACTION_ORDER:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ActionRangeError(f"action component {name} is not finite: {value!r}")
        for name in ("vx", "vy", "vz", "hx", "hy", "hz"):
            value = getattr(self, name)
            if not -1.0 <= value <= 1.0:
                raise ActionRangeError(f"action component {name}={value} outside [-1, 1]")
        if not 0.0 <= self.hv <= 1.0:
            raise ActionRangeError(f"action component hv={self.hv} outside [0, 1]")

    @classmethod
    def zero(cls) -> "ActionVector":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.vz])

    @property
    def haptic_direction(self) -> np.ndarray:
        return np.array([self.hx, self.hy, self.hz])


def clamp_action(a: "ActionVector | Sequence[float]") -> ActionVector:
    """Clamp components into the declared ranges and build an ActionVector.

    Accepts an ActionVector (already valid by construction, returned as-is)
    or a raw 7-sequence in wire order. Velocities and haptic directions
    clamp to [-1, 1], vibration to [0, 1]. Non-finite input is an error,
    never silently clamped.
    """
    if isinstance(a, ActionVector):
        return a
    xs = list(a)
    if len(xs) != len(ACTION_ORDER):
        raise ActionRangeError(f"action must have 7 components, got {len(xs)}")
    clamped = {}
    for name, value in zip(ACTION_ORDER, xs):
        value = float(value)
        if not math.isfinite(value):
            raise ActionRangeError(f"action component {name} is not finite: {value!r}")
        low = 0.0 if name == "hv" else -1.0
        clamped[name] = min(1.0, max(low, value))
    return ActionVector(**clamped)


def action_to_list(a: ActionVector) -> list[float]:
    """Serialize to the wire layout [vx, vy, vz, hx, hy, hz, hv]."""
    return [a.vx, a.vy, a.vz, a.hx, a.hy, a.hz, a.hv]


def parse_action(xs: Sequence[float]) -> ActionVector:
    """Parse a 7-number list in wire order; inverse of action_to_list.

    Rejects wrong arity, non-finite values, and out-of-range components.
    """
    xs = list(xs)
    if len(xs) != len(ACTION_ORDER):
        raise ActionParseError(f"action must have 7 components, got {len(xs)}")
    values = []
    for name, value in zip(ACTION_ORDER, xs):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ActionParseError(f"action component {name} is not a number: {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ActionParseError(f"action component {name} is not finite: {value!r}")
        values.append(value)
    try:
        return ActionVector(*values)
    except ActionRangeError as exc:
        raise ActionParseError(str(exc)) from None


@dataclass(frozen=True)
class VirtualObject:
    """A virtual scene object: shape, surface texture, world position, size.

    Size is the radius for spheres/cones and the half-extent for cubes (m).
    """

    shape: Shape
    texture: Texture
    position: tuple[float, float, float]
    size: float

    def __post_init__(self):
        if not self.size > 0:
            raise ValueError(f"object size must be > 0, got {self.size}")
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))

    @property
    def position_array(self) -> np.ndarray:
        return np.array(self.position)


@dataclass(frozen=True)
class DroneState:
    """Ground-truth drone pose: world position (m) and velocity (m/s)."""

    position: tuple[float, float, float]
    velocity: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        object.__setattr__(self, "velocity", tuple(float(c) for c in self.velocity))

    @property
    def position_array(self) -> np.ndarray:
        return np.array(self.position)

    @property
    def velocity_array(self) -> np.ndarray:
        return np.array(self.velocity)


class FrameRaster:
    """A fixed 640x320 RGB8 frame, row-major with the top row first.

    Pixels are held in a read-only (height, width, 3) uint8 array; identical
    frames compare equal byte for byte.
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels)
        if pixels.shape != (FRAME_HEIGHT, FRAME_WIDTH, 3) or pixels.dtype != np.uint8:
            raise ValueError(
                f"frame must be ({FRAME_HEIGHT}, {FRAME_WIDTH}, 3) uint8, "
                f"got {pixels.shape} {pixels.dtype}")
        if pixels.flags.writeable:
            pixels = pixels.copy()
            pixels.setflags(write=False)
        self.pixels = pixels

    width = FRAME_WIDTH
    height = FRAME_HEIGHT

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameRaster):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self) -> int:
        return hash(self.tobytes())

    def __repr__(self) -> str:
        return f"FrameRaster({self.width}x{self.height})"


@dataclass(frozen=True)
class Observation:
    """What a policy sees each tick: both frames, the instruction, step index."""

    real_frame: FrameRaster
    vr_frame: FrameRaster
    instruction: str
    step_index: int

    def __post_init__(self):
        if not self.instruction:
            raise ValueError("observation instruction must be non-empty")
        if self.step_index < 0:
            raise ValueError(f"step_index must be >= 0, got {self.step_index}")
