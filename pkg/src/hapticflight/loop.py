"""Frame-by-frame control loop over the simulated world.

One tick renders both frames, queries the policy, derives the haptic
array commands, and advances the plant by one control period. The loop
is deterministic; wall-clock pacing in live mode never influences state.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ActionVector, Observation
from .linkage import ArrayCommand, haptic_to_array_commands
from .policy import (InstructionError, PolicyInterface, ResolutionError,
                     parse_instruction, resolve_target)
from .world import (SimConfig, Trajectory, TrajectorySample, ViewKind,
                    WorldState, contact_query, render_topdown, step_control)


@dataclass(frozen=True)
class StopRule:
    """When the loop is allowed to stop on its own.

    Mirrors the flight criteria: stop early once a contiguous in-radius
    span of at least hover_duration is achieved, otherwise at timeout.
    """

    success_radius: float = 0.8
    hover_duration: float = 5.0
    timeout: float = 40.0


@dataclass(frozen=True)
class TickRecord:
    """Everything produced by a single control tick."""

    index: int
    observation: Observation
    action: ActionVector
    commands: tuple[ArrayCommand, ArrayCommand]
    world_before: WorldState
    world_after: WorldState
    sample: TrajectorySample
    duration_s: float


@dataclass
class LoopStatus:
    """Outcome-so-far summary, updated after every tick."""

    reached: bool = False
    reach_time: Optional[float] = None
    hover_span: float = 0.0
    success: bool = False
    done: bool = False
    stop_reason: Optional[str] = None


class ControlLoop:
    """Steppable closed loop; commands apply between ticks.

    Single-owner: call tick() from one task only. The sim service mutates
    instruction/scene between ticks, which preserves per-tick determinism.
    """

    def __init__(self, world: WorldState, policy: PolicyInterface, instruction: str,
                 cfg: SimConfig, stop: StopRule | None = None,
                 target: Optional[Sequence[float]] = None,
                 max_ticks: Optional[int] = None):
        self.world = world
        self.policy = policy
        self.instruction = instruction
        self.cfg = cfg
        self.stop = stop or StopRule()
        self.max_ticks = max_ticks
        self._explicit_target = None if target is None else np.asarray(target, dtype=float)
        self.status = LoopStatus()
        self.tick_index = 0
        self.samples: list[TrajectorySample] = [
            TrajectorySample(t=world.sim_time, position=world.drone.position)]
        self.last_action: Optional[ActionVector] = None
        self.last_commands: Optional[tuple[ArrayCommand, ArrayCommand]] = None
        self._streak_start: Optional[float] = None
        self._ingest_sample(self.samples[0])

    # -- state mutation between ticks ------------------------------------

    def set_instruction(self, text: str) -> None:
        self.instruction = text
        # A new goal restarts hover accounting; reach history is kept.
        self._streak_start = None
        self.status.hover_span = 0.0

    def reset(self, world: WorldState) -> None:
        self.world = world
        self.tick_index = 0
        self.status = LoopStatus()
        self.samples = [TrajectorySample(t=world.sim_time, position=world.drone.position)]
        self.last_action = None
        self.last_commands = None
        self._streak_start = None
        self._ingest_sample(self.samples[0])

    def spawn_object(self, obj) -> None:
        self.world = replace(self.world, objects=self.world.objects + (obj,))

    # -- core ------------------------------------------------------------

    def current_target(self) -> Optional[np.ndarray]:
        """Target position the stop rule tracks, re-resolved every tick."""
        if self._explicit_target is not None:
            return self._explicit_target
        try:
            sel = parse_instruction(self.instruction)
            idx = resolve_target(sel, self.world)
        except (InstructionError, ResolutionError):
            return None
        return self.world.objects[idx].position_array

    def tick(self) -> TickRecord:
        if self.status.done:
            raise RuntimeError("loop already finished")
        started = time.perf_counter()
        before = self.world
        obs = Observation(
            real_frame=render_topdown(before, ViewKind.REAL),
            vr_frame=render_topdown(before, ViewKind.VR),
            instruction=self.instruction,
            step_index=self.tick_index,
        )
        action = self.policy.act(obs, privileged=before)
        info = contact_query(before)
        contact = None
        if info is not None and info.in_contact:
            touched = before.objects[info.object_index]
            contact = (touched.shape, touched.texture)
        commands = haptic_to_array_commands(action.hx, action.hy, action.hz, action.hv,
                                            contact=contact, t=before.sim_time)
        after, sample = step_control(before, action, self.cfg)
        self.world = after
        self.samples.append(sample)
        self.last_action = action
        self.last_commands = commands
        record = TickRecord(index=self.tick_index, observation=obs, action=action,
                            commands=commands, world_before=before, world_after=after,
                            sample=sample, duration_s=time.perf_counter() - started)
        self.tick_index += 1
        self._ingest_sample(sample)
        self._check_done(sample)
        return record

    def trajectory(self) -> Trajectory:
        return Trajectory(tuple(self.samples))

    # -- stop-rule bookkeeping --------------------------------------------

    def _ingest_sample(self, sample: TrajectorySample) -> None:
        target = self.current_target()
        if target is None:
            self._streak_start = None
            return
        distance = float(np.linalg.norm(np.asarray(sample.position) - target))
        if distance <= self.stop.success_radius:
            if not self.status.reached:
                self.status.reached = True
                self.status.reach_time = sample.t
            if self._streak_start is None:
                self._streak_start = sample.t
            self.status.hover_span = sample.t - self._streak_start
            if self.status.hover_span >= self.stop.hover_duration - 1e-9:
                self.status.success = True
        else:
            self._streak_start = None
            self.status.hover_span = 0.0

    def _check_done(self, sample: TrajectorySample) -> None:
        if self.status.success:
            self.status.done = True
            self.status.stop_reason = "success"
        elif self.max_ticks is not None and self.tick_index >= self.max_ticks:
            self.status.done = True
            self.status.stop_reason = "max_ticks"
        elif sample.t >= self.stop.timeout - 1e-9:
            self.status.done = True
            self.status.stop_reason = "timeout"


@dataclass
class ClosedLoopResult:
    trajectory: Trajectory
    status: LoopStatus
    n_ticks: int
    tick_durations: list[float] = field(default_factory=list)


def run_closed_loop(world: WorldState, policy: PolicyInterface, instruction: str,
                    cfg: SimConfig, stop: StopRule | None = None,
                    target: Optional[Sequence[float]] = None,
                    max_ticks: Optional[int] = None,
                    on_tick: Optional[Callable[[TickRecord], None]] = None,
                    live: bool = False) -> ClosedLoopResult:
    """Drive a ControlLoop to completion.

    Headless by default; live mode paces ticks to dt_control wall clock
    without affecting simulated state. on_tick sees every TickRecord in
    order (dataset recording, console streaming).
    """
    loop = ControlLoop(world, policy, instruction, cfg, stop=stop,
                       target=target, max_ticks=max_ticks)
    durations = []
    next_deadline = time.monotonic()
    while not loop.status.done:
        if live:
            next_deadline += cfg.dt_control
            delay = next_deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        record = loop.tick()
        durations.append(record.duration_s)
        if on_tick is not None:
            on_tick(record)
    return ClosedLoopResult(trajectory=loop.trajectory(), status=loop.status,
                            n_ticks=loop.tick_index, tick_durations=durations)
