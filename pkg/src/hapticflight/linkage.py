"""Planar inverse five-bar linkage kinematics and tactile pattern encoding.

Each haptic array is three identical five-bar linkages side by side. A
linkage has two servo-driven proximal links of length l1 anchored at base
pivots (0, 0) and (d, 0), joined by two distal links of length l2 whose
common joint is the end-effector. "Inverse" refers to the solution branch
elevated away from the base: FK picks the larger-y circle intersection and
IK the elbow-outward configuration, which are consistent on the calibrated
travel segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Shape, Texture, VibrationLevel

LINKAGES_PER_ARRAY = 3

# Linear servo pulse map endpoints (standard hobby-servo PWM range).
PULSE_MIN_US = 500.0
PULSE_MAX_US = 2500.0

# Vibration waveforms: extension-modulation amplitude and frequency per level.
VIBRATION_WAVEFORMS = {
    VibrationLevel.HIGH: (0.10, 25.0),
    VibrationLevel.LOW: (0.05, 10.0),
    VibrationLevel.NULL: (0.0, 0.0),
}

# Normalized per-linkage height profiles encoding each shape across an array.
SHAPE_PROFILES = {
    Shape.CUBE: (1.0, 1.0, 1.0),     # flat contact
    Shape.SPHERE: (0.7, 1.0, 0.7),   # smooth dome
    Shape.CONE: (0.2, 1.0, 0.2),     # sharp peak
}

# Vibration-intensity thresholds: hv >= 0.75 high, hv >= 0.25 low, else null.
HV_HIGH_THRESHOLD = 0.75
HV_LOW_THRESHOLD = 0.25


class SingularConfigurationError(ValueError):
    """The distal circles do not intersect (disjoint or coincident)."""


class WorkspaceError(ValueError):
    """Target lies outside the reachable workspace."""

    def __init__(self, message: str, distance: float = 0.0):
        super().__init__(message)
        self.distance = distance


class ServoLimitError(ValueError):
    """A required servo angle violates the configured limits."""


@dataclass(frozen=True)
class LinkageGeometry:
    """Five-bar geometry: base separation, link lengths, servo limits (rad)."""

    d: float = 0.04
    l1: float = 0.05
    l2: float = 0.07
    servo_min: float = 0.0
    servo_max: float = math.pi

    def __post_init__(self):
        if self.d <= 0 or self.l1 <= 0 or self.l2 <= 0:
            raise ValueError("link dimensions must be positive")
        if not self.l1 + self.l2 > self.d / 2:
            raise ValueError("workspace is empty: l1 + l2 must exceed d/2")
        if not self.servo_min < self.servo_max:
            raise ValueError("servo_min must be below servo_max")

    @property
    def bases(self) -> np.ndarray:
        return np.array([[0.0, 0.0], [self.d, 0.0]])


@dataclass(frozen=True)
class ServoAngles:
    """Servo angles (rad), CCW from +x at the left and right base pivots."""

    theta1: float
    theta2: float


@dataclass(frozen=True)
class ArrayCommand:
    """Actuation for one 3-linkage array: extensions, vibration, phase.

    Extension index 0 is the leftmost linkage of the array. Two commands,
    one per hand, form a full device command.
    """

    extensions: tuple[float, float, float]
    vibration: VibrationLevel
    vibration_phase: float = 0.0

    def __post_init__(self):
        if len(self.extensions) != LINKAGES_PER_ARRAY:
            raise ValueError(f"expected {LINKAGES_PER_ARRAY} extensions")
        ext = tuple(float(e) for e in self.extensions)
        if any(not 0.0 <= e <= 1.0 for e in ext):
            raise ValueError(f"extensions must lie in [0, 1], got {ext}")
        object.__setattr__(self, "extensions", ext)


@dataclass(frozen=True)
class PatternProfile:
    """Normalized per-linkage target heights for one array."""

    heights: tuple[float, float, float]

    def __post_init__(self):
        if any(not 0.0 <= h <= 1.0 for h in self.heights):
            raise ValueError(f"profile heights must lie in [0, 1], got {self.heights}")


def _elbows(g: LinkageGeometry, angles: ServoAngles) -> np.ndarray:
    return g.bases + g.l1 * np.array(
        [[math.cos(angles.theta1), math.sin(angles.theta1)],
         [math.cos(angles.theta2), math.sin(angles.theta2)]])


def forward_kinematics(g: LinkageGeometry, angles: ServoAngles) -> np.ndarray:
    """End-effector position for given servo angles.

    Intersects the two distal circles (radius l2 around each elbow) and
    returns the solution with larger y, i.e. the branch away from the base.
    """
    for name, theta in (("theta1", angles.theta1), ("theta2", angles.theta2)):
        if not g.servo_min - 1e-12 <= theta <= g.servo_max + 1e-12:
            raise ServoLimitError(
                f"{name}={theta} outside servo limits [{g.servo_min}, {g.servo_max}]")
    e1, e2 = _elbows(g, angles)
    delta = e2 - e1
    q = float(np.hypot(*delta))
    if q < 1e-12:
        raise SingularConfigurationError("elbow points coincide; end-effector undefined")
    if q > 2.0 * g.l2 + 1e-12:
        raise SingularConfigurationError(
            f"distal circles are disjoint: elbow separation {q:.6g} exceeds 2*l2={2 * g.l2:.6g}")
    h_sq = g.l2 * g.l2 - (q / 2.0) ** 2
    h = math.sqrt(max(h_sq, 0.0))
    mid = (e1 + e2) / 2.0
    # Unit perpendicular to the elbow chord; +90 deg rotation of delta/q.
    perp = np.array([-delta[1], delta[0]]) / q
    p_up = mid + h * perp
    p_down = mid - h * perp
    return p_up if p_up[1] >= p_down[1] else p_down


def _subchain_angle(g: LinkageGeometry, base: np.ndarray, target: np.ndarray,
                    elbow_sign: float) -> float:
    """Two-link IK for one side; elbow_sign +1 rotates the proximal link CCW
    past the target direction (left side), -1 CW (right side)."""
    rel = target - base
    r = float(np.hypot(*rel))
    lo, hi = abs(g.l1 - g.l2), g.l1 + g.l2
    if r < lo - 1e-12 or r > hi + 1e-12:
        gap = (lo - r) if r < lo else (r - hi)
        raise WorkspaceError(
            f"target at distance {r:.6g} from base outside annulus [{lo:.6g}, {hi:.6g}]",
            distance=gap)
    phi = math.atan2(rel[1], rel[0])
    cos_alpha = (g.l1 * g.l1 + r * r - g.l2 * g.l2) / (2.0 * g.l1 * r)
    alpha = math.acos(min(1.0, max(-1.0, cos_alpha)))
    return phi + elbow_sign * alpha


def inverse_kinematics(g: LinkageGeometry, target) -> ServoAngles:
    """Servo angles reaching `target`, elbow-outward branch.

    Inverse of forward_kinematics on the calibrated workspace:
    FK(IK(p)) == p to within 1e-9.
    """
    target = np.asarray(target, dtype=float)
    theta1 = _subchain_angle(g, g.bases[0], target, +1.0)
    theta2 = _subchain_angle(g, g.bases[1], target, -1.0)
    for name, theta in (("theta1", theta1), ("theta2", theta2)):
        if not g.servo_min - 1e-9 <= theta <= g.servo_max + 1e-9:
            raise ServoLimitError(
                f"{name}={theta:.6g} for target {target.tolist()} violates "
                f"servo limits [{g.servo_min}, {g.servo_max}]")
    return ServoAngles(theta1, theta2)


def workspace_contains(g: LinkageGeometry, p) -> bool:
    """True iff both subchains reach `p` on the elbow-outward branch.

    Annulus and servo-limit boundaries count as reachable.
    """
    try:
        inverse_kinematics(g, p)
    except (WorkspaceError, ServoLimitError):
        return False
    return True


def encode_shape_profile(s: Shape) -> PatternProfile:
    """Per-linkage height profile rendering a shape across one array."""
    return PatternProfile(SHAPE_PROFILES[Shape(s)])


def vibration_level_for(hv: float) -> VibrationLevel:
    """Map vibration intensity to its actuation band."""
    if hv >= HV_HIGH_THRESHOLD:
        return VibrationLevel.HIGH
    if hv >= HV_LOW_THRESHOLD:
        return VibrationLevel.LOW
    return VibrationLevel.NULL


def vibration_offset(level: VibrationLevel, t: float) -> float:
    """Extension offset of the vibration waveform at time t (s)."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    amplitude, frequency = VIBRATION_WAVEFORMS[VibrationLevel(level)]
    if amplitude == 0.0:
        return 0.0
    return amplitude * math.sin(2.0 * math.pi * frequency * t)


def vibration_phase(level: VibrationLevel, t: float) -> float:
    """Waveform phase (rad) at time t, in [0, 2*pi)."""
    _, frequency = VIBRATION_WAVEFORMS[VibrationLevel(level)]
    if frequency == 0.0:
        return 0.0
    return (2.0 * math.pi * frequency * t) % (2.0 * math.pi)


def haptic_to_array_commands(hx: float, hy: float, hz: float, hv: float,
                             contact: tuple[Shape, Texture] | None = None,
                             t: float = 0.0) -> tuple[ArrayCommand, ArrayCommand]:
    """Map haptic action components onto the two linkage arrays.

    Base extension is the haptic direction magnitude normalized to [0, 1],
    shaped by the contacted object's profile (flat when nothing is in
    contact) plus the vibration waveform. Both arrays receive identical
    commands (bilateral symmetry).
    """
    for name, value in (("hx", hx), ("hy", hy), ("hz", hz)):
        if not -1.0 <= value <= 1.0:
            raise ValueError(f"haptic component {name}={value} outside [-1, 1]")
    if not 0.0 <= hv <= 1.0:
        raise ValueError(f"haptic component hv={hv} outside [0, 1]")
    e0 = min(1.0, math.sqrt(hx * hx + hy * hy + hz * hz) / math.sqrt(3.0))
    if contact is not None:
        profile = encode_shape_profile(contact[0]).heights
    else:
        profile = (1.0, 1.0, 1.0)
    level = vibration_level_for(hv)
    offset = vibration_offset(level, t)
    extensions = tuple(min(1.0, max(0.0, e0 * p + offset)) for p in profile)
    command = ArrayCommand(extensions, level, vibration_phase(level, t))
    return command, command


@dataclass(frozen=True)
class TravelSegment:
    """Vertical end-effector travel range used for extension mapping (m)."""

    y_retracted: float = 0.08
    y_extended: float = 0.115

    def __post_init__(self):
        if not self.y_retracted < self.y_extended:
            raise ValueError("y_retracted must be below y_extended")


@dataclass(frozen=True)
class HapticArrayConfig:
    """Geometry plus calibrated travel segment, validated at construction.

    Every extension in [0, 1] must map to a reachable end-effector target;
    this is asserted here on a fine grid so extension_to_angles can never
    raise for a validated configuration.
    """

    geometry: LinkageGeometry = field(default_factory=LinkageGeometry)
    travel: TravelSegment = field(default_factory=TravelSegment)

    def __post_init__(self):
        x = self.geometry.d / 2.0
        for frac in np.linspace(0.0, 1.0, 101):
            y = self.travel.y_retracted + frac * (self.travel.y_extended - self.travel.y_retracted)
            if not workspace_contains(self.geometry, (x, y)):
                raise ValueError(
                    f"travel segment leaves the workspace at extension {frac:.2f} "
                    f"(target ({x}, {y}))")


DEFAULT_ARRAY_CONFIG = HapticArrayConfig()


def extension_to_angles(cfg: HapticArrayConfig, array_slot: int,
                        extension: float) -> ServoAngles:
    """Servo angles realizing a normalized extension for one linkage slot.

    Linearly interpolates the end-effector between the retracted and
    extended travel endpoints (x fixed at d/2) and solves IK. Monotone:
    larger extension moves the end-effector further from the base.
    """
    if not 0 <= array_slot < LINKAGES_PER_ARRAY:
        raise ValueError(f"array_slot must be 0..{LINKAGES_PER_ARRAY - 1}, got {array_slot}")
    if not 0.0 <= extension <= 1.0:
        raise ValueError(f"extension must lie in [0, 1], got {extension}")
    g = cfg.geometry
    y = cfg.travel.y_retracted + extension * (cfg.travel.y_extended - cfg.travel.y_retracted)
    return inverse_kinematics(g, (g.d / 2.0, y))


def servo_pulse_us(angle: float, limits: tuple[float, float]) -> float:
    """Linear map from a servo angle to PWM pulse width (microseconds)."""
    servo_min, servo_max = limits
    if not servo_min < servo_max:
        raise ValueError("limits must satisfy servo_min < servo_max")
    if not servo_min <= angle <= servo_max:
        raise ValueError(f"angle {angle} outside servo limits [{servo_min}, {servo_max}]")
    frac = (angle - servo_min) / (servo_max - servo_min)
    return PULSE_MIN_US + frac * (PULSE_MAX_US - PULSE_MIN_US)


# Contact strength used when rendering isolated tactile patterns: leaves the
# vibration waveform unclipped for every shape profile (0.8 + 0.10 <= 1 on
# the tallest linkage, 0.8 * 0.2 - 0.10 >= 0 on the shortest).
PATTERN_RENDER_STRENGTH = 0.8


def render_pattern(shape: Shape, vibration: VibrationLevel, duration: float = 1.0,
                   rate: float = 100.0,
                   strength: float = PATTERN_RENDER_STRENGTH) -> np.ndarray:
    """Sample one array's extension time-series for a tactile pattern.

    Returns an (n, 3) array of per-linkage extensions at `rate` Hz over
    `duration` seconds, starting at t=0.
    """
    if duration <= 0 or rate <= 0:
        raise ValueError("duration and rate must be positive")
    profile = encode_shape_profile(shape).heights
    n = int(round(duration * rate))
    times = np.arange(n) / rate
    amplitude, frequency = VIBRATION_WAVEFORMS[VibrationLevel(vibration)]
    offsets = amplitude * np.sin(2.0 * math.pi * frequency * times)
    series = strength * np.asarray(profile)[None, :] + offsets[:, None]
    return np.clip(series, 0.0, 1.0)
