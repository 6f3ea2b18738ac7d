"""Flight-task scoring, generalization suite, confusion-matrix
aggregation, and the tactile pattern decoder.

Reference statistics from the original hardware study are carried as
constants for side-by-side reporting; they are context, not targets, for
the scripted oracle.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .core import HapticPattern, Shape, Texture, VibrationLevel, VirtualObject
from .linkage import SHAPE_PROFILES
from .loop import StopRule, run_closed_loop
from .policy import PolicyInterface, ProtocolError, parse_instruction, resolve_target
from .world import (BackgroundStyle, SceneConfig, SimConfig, Trajectory,
                    TrajectorySample, spawn)

# Headline statistics reported for the original learned-model system;
# reproduced in reports for comparison only.
REFERENCE_FLIGHT_STATS = {
    "success_rate": 0.567,
    "reach_time_mean_s": 21.3,
    "reach_time_min_s": 11.9,
    "reach_time_max_s": 35.7,
    "pose_error_mean_m": 0.24,
    "pose_error_se_m": 0.08,
}

REFERENCE_GENERALIZATION_RATES = {
    "visual": 0.700,
    "motion": 0.544,
    "physical": 0.400,
    "semantic": 0.350,
}

# Texture decoding thresholds on the vibration-intensity channel.
TEXTURE_HV_FOOD_MAX = 0.45
TEXTURE_HV_PLASTIC_MIN = 0.75

# Signals quieter than this are treated as no-contact / no-vibration.
AMPLITUDE_FLOOR = 0.01


class EvaluationInputError(ValueError):
    """Malformed input to an evaluation operation."""


class OutcomeClass(enum.Enum):
    SUCCESS = "success"
    PARTIAL = "partial"
    FAIL = "fail"


@dataclass(frozen=True)
class FlightCriteria:
    """Task success definition: radius, sustained hover, and time budget."""

    success_radius: float = 0.8
    hover_duration: float = 5.0
    timeout: float = 40.0

    def __post_init__(self):
        if self.success_radius <= 0 or self.hover_duration <= 0 or self.timeout <= 0:
            raise ValueError("criteria must be positive")
        if not self.hover_duration < self.timeout:
            raise ValueError("hover_duration must be below timeout")

    def stop_rule(self) -> StopRule:
        return StopRule(self.success_radius, self.hover_duration, self.timeout)


@dataclass(frozen=True)
class FlightOutcome:
    outcome: OutcomeClass
    reach_time: Optional[float]
    hover_pose_errors: tuple[float, ...] = ()
    reason: Optional[str] = None

    def __post_init__(self):
        if self.outcome == OutcomeClass.FAIL and self.reach_time is not None:
            raise ValueError("failed flights cannot carry a reach time")
        if self.outcome == OutcomeClass.SUCCESS and self.reach_time is None:
            raise ValueError("successful flights must carry a reach time")


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Contiguous True runs as [start, end] index pairs (inclusive)."""
    runs = []
    start = None
    for i, v in enumerate(mask):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def classify_flight(traj: Trajectory, target: Sequence[float],
                    c: FlightCriteria) -> FlightOutcome:
    """Score one trajectory against a target pose.

    Reach time is the first sample inside the success radius (within the
    time budget). Success requires a contiguous in-radius span at least
    hover_duration long; a reach without such a span is partial.
    """
    if len(traj) == 0:
        raise EvaluationInputError("trajectory is empty")
    target = np.asarray(target, dtype=float)
    times = traj.times
    distances = np.linalg.norm(traj.positions - target[None, :], axis=1)
    in_radius = distances <= c.success_radius
    reach_candidates = np.flatnonzero(in_radius & (times <= c.timeout + 1e-9))
    if reach_candidates.size == 0:
        return FlightOutcome(OutcomeClass.FAIL, reach_time=None)
    reach_idx = int(reach_candidates[0])
    reach_time = float(times[reach_idx])
    runs = [(a, b) for a, b in _runs(in_radius) if b >= reach_idx]
    for a, b in runs:
        if times[b] - times[a] >= c.hover_duration - 1e-9:
            errors = tuple(float(e) for e in distances[a:b + 1])
            return FlightOutcome(OutcomeClass.SUCCESS, reach_time=reach_time,
                                 hover_pose_errors=errors)
    a, b = max(runs, key=lambda r: times[r[1]] - times[r[0]])
    errors = tuple(float(e) for e in distances[a:b + 1])
    return FlightOutcome(OutcomeClass.PARTIAL, reach_time=reach_time,
                         hover_pose_errors=errors)


@dataclass(frozen=True)
class FlightMetrics:
    n: int
    n_success: int
    n_partial: int
    n_fail: int
    success_rate: float
    reach_time_mean: Optional[float]
    reach_time_min: Optional[float]
    reach_time_max: Optional[float]
    pose_error_mean: Optional[float]
    pose_error_se: Optional[float]


def flight_metrics(outcomes: Sequence[FlightOutcome]) -> FlightMetrics:
    """Aggregate outcomes into the standard statistic set.

    Pose-error dispersion is the standard error over per-flight mean
    errors (sample std / sqrt(n)).
    """
    if not outcomes:
        raise EvaluationInputError("no outcomes to aggregate")
    n = len(outcomes)
    n_success = sum(o.outcome == OutcomeClass.SUCCESS for o in outcomes)
    n_partial = sum(o.outcome == OutcomeClass.PARTIAL for o in outcomes)
    n_fail = n - n_success - n_partial
    reach = [o.reach_time for o in outcomes if o.reach_time is not None]
    per_flight_error = [float(np.mean(o.hover_pose_errors))
                        for o in outcomes if o.hover_pose_errors]
    if per_flight_error:
        mean_error = float(np.mean(per_flight_error))
        if len(per_flight_error) > 1:
            se = float(np.std(per_flight_error, ddof=1) / np.sqrt(len(per_flight_error)))
        else:
            se = 0.0
    else:
        mean_error = None
        se = None
    return FlightMetrics(
        n=n, n_success=n_success, n_partial=n_partial, n_fail=n_fail,
        success_rate=n_success / n,
        reach_time_mean=float(np.mean(reach)) if reach else None,
        reach_time_min=float(np.min(reach)) if reach else None,
        reach_time_max=float(np.max(reach)) if reach else None,
        pose_error_mean=mean_error,
        pose_error_se=se,
    )


# The three evaluation target poses (z fixed at hover altitude).
DEFAULT_TARGET_POSES = ((1.0, -1.0, 1.0), (0.0, -1.0, 1.0), (1.0, 1.0, 1.0))
_POSE_SHAPES = (Shape.SPHERE, Shape.CUBE, Shape.CONE)
_TEXTURES = (Texture.FOOD, Texture.PLASTIC, Texture.OTHER)


@dataclass(frozen=True)
class TrialResult:
    pose_index: int
    trial_index: int
    outcome: FlightOutcome
    trajectory: Trajectory
    instruction: str


@dataclass
class FlightSuiteReport:
    criteria: FlightCriteria
    per_pose: list[FlightMetrics]
    overall: FlightMetrics
    trials: list[TrialResult]
    reference: dict = field(default_factory=lambda: dict(REFERENCE_FLIGHT_STATS))

    def plot_rows(self) -> list[tuple[float, float, float, str]]:
        """(t, x, y, outcome) rows for external trajectory plotting."""
        rows = []
        for trial in self.trials:
            label = trial.outcome.outcome.value
            for s in trial.trajectory.samples:
                rows.append((s.t, s.position[0], s.position[1], label))
        return rows


def _jittered_start(rng: np.random.Generator, target: np.ndarray,
                    cfg: SimConfig, min_distance: float) -> tuple[float, float, float]:
    for _ in range(1000):
        x = float(rng.uniform(-1.2, 1.2))
        y = float(rng.uniform(-1.2, 1.2))
        start = (x, y, 1.0)
        if np.linalg.norm(np.asarray(start) - target) >= min_distance and cfg.contains(start):
            return start
    raise RuntimeError("could not sample a start pose away from the target")


def run_flight_suite(policy: PolicyInterface, poses: Sequence[Sequence[float]],
                     trials_per_pose: int, cfg: SimConfig,
                     criteria: FlightCriteria | None = None,
                     seed: int = 0) -> FlightSuiteReport:
    """Seeded flight trials against each target pose.

    Each trial spawns a single instructed object at the pose, starts the
    drone from a jittered position outside the success radius, and runs
    the closed loop headless. Policy errors count as failures.
    """
    if trials_per_pose < 1:
        raise EvaluationInputError("trials_per_pose must be >= 1")
    criteria = criteria or FlightCriteria()
    trials: list[TrialResult] = []
    per_pose: list[FlightMetrics] = []
    for pi, pose in enumerate(poses):
        target = np.asarray(pose, dtype=float)
        pose_outcomes = []
        for ti in range(trials_per_pose):
            rng = np.random.default_rng(np.random.SeedSequence([seed, pi, ti]))
            shape = _POSE_SHAPES[pi % len(_POSE_SHAPES)]
            texture = _TEXTURES[ti % len(_TEXTURES)]
            start = _jittered_start(rng, target, cfg,
                                    min_distance=criteria.success_radius + 0.3)
            scene = SceneConfig(
                drone_start=start,
                objects=(VirtualObject(shape, texture, tuple(target), 0.2),),
            )
            instruction = f"fly to the {shape.name.lower()}"
            world = spawn(scene, cfg)
            try:
                result = run_closed_loop(world, policy, instruction, cfg,
                                         stop=criteria.stop_rule(), target=target)
                outcome = classify_flight(result.trajectory, target, criteria)
                trajectory = result.trajectory
            except ProtocolError:
                raise
            except Exception as exc:  # policy fault -> scored failure
                outcome = FlightOutcome(OutcomeClass.FAIL, reach_time=None,
                                        reason=f"policy error: {exc}")
                trajectory = Trajectory((TrajectorySample(t=0.0, position=start),))
            pose_outcomes.append(outcome)
            trials.append(TrialResult(pi, ti, outcome, trajectory, instruction))
        per_pose.append(flight_metrics(pose_outcomes))
    overall = flight_metrics([t.outcome for t in trials])
    return FlightSuiteReport(criteria=criteria, per_pose=per_pose,
                             overall=overall, trials=trials)


class GeneralizationAxis(enum.Enum):
    VISUAL = "visual"
    MOTION = "motion"
    PHYSICAL = "physical"
    SEMANTIC = "semantic"


def _other_choices(rng: np.random.Generator, current, options):
    pool = [o for o in options if o != current]
    return pool[int(rng.integers(len(pool)))]


def _resolve_scene_target(scene: SceneConfig, instruction: str, cfg: SimConfig) -> int:
    world = spawn(scene, cfg)
    try:
        return resolve_target(parse_instruction(instruction), world)
    except Exception:
        return 0


def _sample_clear_position(rng: np.random.Generator, scene: SceneConfig,
                           cfg: SimConfig) -> tuple[float, float, float]:
    taken = [np.asarray(o.position) for o in scene.objects]
    taken.append(np.asarray(scene.drone_start))
    for _ in range(1000):
        candidate = np.array([float(rng.uniform(-2.0, 2.0)),
                              float(rng.uniform(-1.2, 1.2)), 1.0])
        if all(np.linalg.norm(candidate - p) >= 0.6 for p in taken):
            return tuple(candidate)
    raise RuntimeError("could not place a distractor object")


def perturb_scene(axis: GeneralizationAxis, base: SceneConfig, instruction: str,
                  seed: int, cfg: SimConfig | None = None) -> tuple[SceneConfig, str]:
    """Generate one held-out evaluation scene along a generalization axis.

    Visual changes appearance only; motion adds distractor objects;
    physical rescales or re-textures the target; semantic rewrites the
    instruction to an unseen template that still denotes the same object.
    """
    cfg = cfg or SimConfig()
    axis = GeneralizationAxis(axis)
    axis_code = list(GeneralizationAxis).index(axis)
    rng = np.random.default_rng(np.random.SeedSequence([seed, axis_code]))
    target_idx = _resolve_scene_target(base, instruction, cfg)
    objects = list(base.objects)
    if axis == GeneralizationAxis.VISUAL:
        style = (BackgroundStyle.ALT_COLOR, BackgroundStyle.CLUTTERED)[int(rng.integers(2))]
        for i, obj in enumerate(objects):
            if i != target_idx:
                objects[i] = VirtualObject(obj.shape,
                                           _other_choices(rng, obj.texture, list(Texture)),
                                           obj.position, obj.size)
        scene = SceneConfig(base.drone_start, tuple(objects), style)
        return scene, instruction
    if axis == GeneralizationAxis.MOTION:
        count = int(rng.integers(1, 3))
        scene = base
        for _ in range(count):
            position = _sample_clear_position(rng, scene, cfg)
            distractor = VirtualObject(
                shape=list(Shape)[int(rng.integers(3))],
                texture=list(Texture)[int(rng.integers(3))],
                position=position,
                size=float(rng.uniform(0.15, 0.3)),
            )
            scene = SceneConfig(scene.drone_start, scene.objects + (distractor,),
                                scene.background_style)
        return scene, instruction
    if axis == GeneralizationAxis.PHYSICAL:
        target = objects[target_idx]
        mode = int(rng.integers(3))  # 0 resize, 1 retexture, 2 both
        size = target.size
        texture = target.texture
        if mode in (0, 2):
            size = float(target.size * rng.uniform(0.5, 2.0))
        if mode in (1, 2):
            texture = _other_choices(rng, target.texture, list(Texture))
        objects[target_idx] = VirtualObject(target.shape, texture, target.position, size)
        scene = SceneConfig(base.drone_start, tuple(objects), base.background_style)
        return scene, instruction
    # Semantic: held-out instruction template denoting the same target.
    target = objects[target_idx]
    xs = [o.position[0] for o in objects]
    use_relative = bool(rng.integers(2))
    if use_relative and target.position[0] == min(xs):
        new_instruction = "fly to the left object"
    elif use_relative and target.position[0] == max(xs):
        new_instruction = "fly to the right object"
    else:
        new_instruction = f"follow the {target.shape.name.lower()}"
    return base, new_instruction


@dataclass
class GeneralizationReport:
    trials_per_axis: int
    rates: dict[str, float]
    counts: dict[str, tuple[int, int]]  # axis -> (successes, trials)
    reference: dict = field(default_factory=lambda: dict(REFERENCE_GENERALIZATION_RATES))


def run_generalization(policy: PolicyInterface,
                       axes: Sequence[GeneralizationAxis | str],
                       trials_per_axis: int, cfg: SimConfig,
                       criteria: FlightCriteria | None = None,
                       seed: int = 0) -> GeneralizationReport:
    """Per-axis success rates over seeded perturbed scenes.

    Base tasks mirror the flight suite; instruction parse or resolution
    errors inside the policy score the trial as a failure.
    """
    if trials_per_axis < 1:
        raise EvaluationInputError("trials_per_axis must be >= 1")
    criteria = criteria or FlightCriteria()
    rates: dict[str, float] = {}
    counts: dict[str, tuple[int, int]] = {}
    for axis in (GeneralizationAxis(a) for a in axes):
        successes = 0
        for ti in range(trials_per_axis):
            rng = np.random.default_rng(np.random.SeedSequence([seed, 97, ti]))
            shape = _POSE_SHAPES[ti % 3]
            texture = _TEXTURES[(ti // 3) % 3]
            target_pos = np.asarray(DEFAULT_TARGET_POSES[ti % 3], dtype=float)
            start = _jittered_start(rng, target_pos, cfg,
                                    min_distance=criteria.success_radius + 0.3)
            base = SceneConfig(start, (VirtualObject(shape, texture,
                                                     tuple(target_pos), 0.2),))
            instruction = f"fly to the {shape.name.lower()}"
            scene, new_instruction = perturb_scene(axis, base, instruction,
                                                   seed=seed * 1000 + ti, cfg=cfg)
            world = spawn(scene, cfg)
            target = scene.objects[_resolve_scene_target(scene, new_instruction, cfg)]
            try:
                result = run_closed_loop(world, policy, new_instruction, cfg,
                                         stop=criteria.stop_rule(),
                                         target=target.position_array)
                outcome = classify_flight(result.trajectory, target.position_array,
                                          criteria)
            except ProtocolError:
                raise
            except Exception:
                outcome = FlightOutcome(OutcomeClass.FAIL, reach_time=None,
                                        reason="policy error")
            if outcome.outcome == OutcomeClass.SUCCESS:
                successes += 1
        rates[axis.value] = successes / trials_per_axis
        counts[axis.value] = (successes, trials_per_axis)
    return GeneralizationReport(trials_per_axis=trials_per_axis, rates=rates,
                                counts=counts)


# -- confusion matrices ----------------------------------------------------


@dataclass(frozen=True)
class ConfusionMatrix:
    """Row-stochastic confusion matrix (rows actual, columns predicted)."""

    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        n = len(self.labels)
        if values.shape != (n, n):
            raise EvaluationInputError(
                f"matrix shape {values.shape} does not match {n} labels")
        sums = values.sum(axis=1)
        # Published tables carry rounding; allow +-0.02 per row.
        bad = [i for i, s in enumerate(sums) if abs(s - 1.0) > 0.02 + 1e-9]
        if bad:
            raise EvaluationInputError(
                f"rows {bad} not row-stochastic within tolerance: sums "
                f"{[round(float(sums[i]), 4) for i in bad]}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "values", values)

    @property
    def diagonal_mean(self) -> float:
        return float(np.mean(np.diag(self.values)))


@dataclass(frozen=True)
class ConfusionAggregation:
    shape_matrix: ConfusionMatrix
    vibration_matrix: ConfusionMatrix
    full_diagonal_mean: float
    shape_diagonal_mean: float
    vibration_diagonal_mean: float


def _marginal(full: ConfusionMatrix, part: int) -> ConfusionMatrix:
    groups: list = []
    for label in full.labels:
        key = label[part]
        if key not in groups:
            groups.append(key)
    index = {label: (groups.index(label[part])) for label in full.labels}
    k = len(groups)
    out = np.zeros((k, k))
    counts = np.zeros(k)
    for i, row_label in enumerate(full.labels):
        gi = index[row_label]
        counts[gi] += 1
        for j, col_label in enumerate(full.labels):
            out[gi, groups.index(col_label[part])] += full.values[i, j]
    out /= counts[:, None]
    return ConfusionMatrix(tuple(groups), out)


def aggregate_confusion(full: ConfusionMatrix) -> ConfusionAggregation:
    """Collapse a 9x9 (shape, vibration) matrix to its two 3x3 marginals.

    Each marginal entry averages, over the co-factor levels, the total
    probability mass assigned to the predicted group.
    """
    if len(full.labels) != 9:
        raise EvaluationInputError(f"expected 9 labels, got {len(full.labels)}")
    for label in full.labels:
        if not (isinstance(label, tuple) and len(label) == 2):
            raise EvaluationInputError(
                f"labels must be (shape, vibration) pairs, got {label!r}")
    shapes = {l[0] for l in full.labels}
    vibrations = {l[1] for l in full.labels}
    if len(shapes) != 3 or len(vibrations) != 3 or len(set(full.labels)) != 9:
        raise EvaluationInputError("labels must cover 3 shapes x 3 vibration levels")
    shape_matrix = _marginal(full, 0)
    vibration_matrix = _marginal(full, 1)
    return ConfusionAggregation(
        shape_matrix=shape_matrix,
        vibration_matrix=vibration_matrix,
        full_diagonal_mean=full.diagonal_mean,
        shape_diagonal_mean=shape_matrix.diagonal_mean,
        vibration_diagonal_mean=vibration_matrix.diagonal_mean,
    )


def load_confusion_json(payload: dict) -> ConfusionMatrix:
    """Build a matrix from {'labels': [[shape, vibration], ...], 'rows': [[...]]}."""
    if not isinstance(payload, dict) or "labels" not in payload or "rows" not in payload:
        raise EvaluationInputError("confusion JSON needs 'labels' and 'rows'")
    labels = tuple(tuple(l) for l in payload["labels"])
    return ConfusionMatrix(labels, np.asarray(payload["rows"], dtype=float))


def reference_study_matrix() -> ConfusionMatrix:
    """The bundled 9x9 perception-study matrix."""
    text = resources.files("hapticflight").joinpath(
        "data/perception_study_9x9.json").read_text(encoding="utf-8")
    return load_confusion_json(json.loads(text))


# -- tactile pattern decoding ----------------------------------------------


@dataclass(frozen=True)
class DecodedPattern:
    shape: Optional[Shape]
    vibration: VibrationLevel
    texture: Texture
    shape_ambiguous: bool

    @property
    def pattern(self) -> Optional[HapticPattern]:
        if self.shape is None:
            return None
        return HapticPattern(self.shape, self.vibration)


def decode_pattern(signal: np.ndarray, hv: float, rate: float = 100.0) -> DecodedPattern:
    """Invert the haptic encoding from one array's extension time-series.

    Shape comes from the time-averaged, peak-normalized profile by nearest
    L-infinity match; vibration from the dominant frequency of the middle
    linkage; texture from the vibration-intensity thresholds. Signals
    below the amplitude floor are flagged ambiguous rather than guessed.
    """
    signal = np.asarray(signal, dtype=float)
    if signal.ndim != 2 or signal.shape[1] != 3:
        raise EvaluationInputError(
            f"signal must be (n, 3) per-linkage extensions, got {signal.shape}")
    if rate <= 0:
        raise EvaluationInputError("rate must be positive")
    if signal.shape[0] < rate * 0.5:
        raise EvaluationInputError(
            f"signal too short: {signal.shape[0]} samples at {rate} Hz "
            "(need at least 0.5 s)")
    means = signal.mean(axis=0)
    peak = float(means.max())
    if peak < AMPLITUDE_FLOOR:
        shape = None
        ambiguous = True
    else:
        normalized = means / peak
        shape = min(SHAPE_PROFILES,
                    key=lambda s: float(np.max(np.abs(normalized - np.asarray(SHAPE_PROFILES[s])))))
        ambiguous = False
    mid = signal[:, 1]
    amplitude = float(mid.max() - mid.min()) / 2.0
    if amplitude < AMPLITUDE_FLOOR:
        vibration = VibrationLevel.NULL
    else:
        spectrum = np.abs(np.fft.rfft(mid - mid.mean()))
        freqs = np.fft.rfftfreq(len(mid), d=1.0 / rate)
        peak_freq = float(freqs[1:][int(np.argmax(spectrum[1:]))])
        vibration = (VibrationLevel.HIGH if abs(peak_freq - 25.0) <= abs(peak_freq - 10.0)
                     else VibrationLevel.LOW)
    if hv <= TEXTURE_HV_FOOD_MAX:
        texture = Texture.FOOD
    elif hv >= TEXTURE_HV_PLASTIC_MIN:
        texture = Texture.PLASTIC
    else:
        texture = Texture.OTHER
    return DecodedPattern(shape=shape, vibration=vibration, texture=texture,
                          shape_ambiguous=ambiguous)
