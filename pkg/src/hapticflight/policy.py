"""Instruction grammar, the scripted oracle policy, and the remote client.

The oracle is the desk-scale stand-in for a learned vision-language
policy: it reads privileged world state, steers toward the instructed
object with a clamped proportional law, and synthesizes haptic components
on contact. Remote policies see only the observation and speak the
policy-server wire protocol.
"""

from __future__ import annotations

import abc
import enum
import math
import re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import requests

from .core import ActionVector, Observation, Shape, Texture, clamp_action
from .wire import WireFormatError, decode_act_response, encode_act_request
from .world import WorldState, contact_query

# Vibration intensity emitted per contacted texture; three well-separated
# levels so a threshold decoder discriminates them exactly on clean signals.
TEXTURE_HV = {
    Texture.FOOD: 0.3,
    Texture.PLASTIC: 0.9,
    Texture.OTHER: 0.6,
}


class InstructionError(ValueError):
    """Instruction text does not match the supported grammar."""


class ResolutionError(ValueError):
    """A selector matches no object in the scene."""


class ProtocolError(RuntimeError):
    """The remote policy returned a malformed response; the loop must abort."""


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class ByShape:
    shape: Shape


@dataclass(frozen=True)
class ByTexture:
    texture: Texture


@dataclass(frozen=True)
class Relative:
    side: Side


@dataclass(frozen=True)
class Follow:
    inner: Union[ByShape, ByTexture]


TargetSelector = Union[ByShape, ByTexture, Relative, Follow]

SUPPORTED_TEMPLATES = (
    "fly to the {cube|sphere|cone}",
    "touch the {food|plastic|other} object",
    "fly to the {left|right} object",
    "follow the {cube|sphere|cone|food|plastic|other}",
)

_SHAPE_WORDS = "cube|sphere|cone"
_TEXTURE_WORDS = "food|plastic|other"
_PATTERNS = (
    (re.compile(rf"fly to the ({_SHAPE_WORDS})$"),
     lambda m: ByShape(Shape.from_name(m.group(1)))),
    (re.compile(rf"touch the ({_TEXTURE_WORDS}) object$"),
     lambda m: ByTexture(Texture.from_name(m.group(1)))),
    (re.compile(r"fly to the (left|right) object$"),
     lambda m: Relative(Side(m.group(1)))),
    (re.compile(rf"follow the ({_SHAPE_WORDS})$"),
     lambda m: Follow(ByShape(Shape.from_name(m.group(1))))),
    (re.compile(rf"follow the ({_TEXTURE_WORDS})$"),
     lambda m: Follow(ByTexture(Texture.from_name(m.group(1))))),
)


def parse_instruction(text: str) -> TargetSelector:
    """Parse an instruction against the closed template grammar.

    Matching is case-insensitive and whitespace-tolerant; anything outside
    the grammar raises rather than defaulting.
    """
    if not text or not text.strip():
        raise InstructionError("instruction is empty")
    normalized = " ".join(text.lower().split()).rstrip(".!")
    for pattern, build in _PATTERNS:
        m = pattern.match(normalized)
        if m:
            return build(m)
    raise InstructionError(
        f"unrecognized instruction {text!r}; supported templates: "
        + "; ".join(SUPPORTED_TEMPLATES))


def resolve_target(sel: TargetSelector, w: WorldState) -> int:
    """Index of the object a selector denotes in the current scene.

    Shape/texture selectors pick the unique match, or the nearest one when
    several match. Relative selectors order by x (ties by y, then index).
    Follow re-resolves its inner selector every call.
    """
    if not w.objects:
        raise ResolutionError(f"cannot resolve {sel!r}: scene is empty")
    if isinstance(sel, Follow):
        return resolve_target(sel.inner, w)
    if isinstance(sel, (ByShape, ByTexture)):
        if isinstance(sel, ByShape):
            matches = [i for i, o in enumerate(w.objects) if o.shape == sel.shape]
        else:
            matches = [i for i, o in enumerate(w.objects) if o.texture == sel.texture]
        if not matches:
            raise ResolutionError(f"no object matches {sel!r}")
        if len(matches) == 1:
            return matches[0]
        drone = w.drone.position_array
        return min(matches,
                   key=lambda i: (float(np.linalg.norm(w.objects[i].position_array - drone)), i))
    if isinstance(sel, Relative):
        sign = 1.0 if sel.side == Side.LEFT else -1.0
        return min(range(len(w.objects)),
                   key=lambda i: (sign * w.objects[i].position[0],
                                  w.objects[i].position[1], i))
    raise TypeError(f"unknown selector {sel!r}")


@dataclass(frozen=True)
class OracleConfig:
    """Gains and arrival radius for the scripted oracle."""

    kp: float = 0.8          # proportional gain (1/s)
    v_clamp: float = 1.0     # speed limit (m/s)
    arrival_radius: float = 0.8

    def __post_init__(self):
        if self.kp <= 0:
            raise ValueError("kp must be positive")
        if self.v_clamp <= 0:
            raise ValueError("v_clamp must be positive")


def oracle_act(w: WorldState, sel: TargetSelector, cfg: OracleConfig,
               t: float = 0.0) -> ActionVector:
    """One control action from privileged state: clamped proportional
    velocity toward the target; haptic direction and texture-coded
    vibration only while in contact with the resolved target."""
    idx = resolve_target(sel, w)
    target = w.objects[idx]
    drone = w.drone.position_array
    offset = target.position_array - drone
    v = cfg.kp * offset
    speed = float(np.linalg.norm(v))
    if speed > cfg.v_clamp:
        v = v * (cfg.v_clamp / speed)
    hx = hy = hz = hv = 0.0
    info = contact_query(w)
    if info is not None and info.in_contact and info.object_index == idx:
        distance = float(np.linalg.norm(offset))
        if distance < 1e-9:
            direction = np.array([0.0, 0.0, -1.0])
        else:
            direction = offset / distance
        hx, hy, hz = (float(c) for c in direction)
        hv = TEXTURE_HV[target.texture]
    return clamp_action((float(v[0]), float(v[1]), float(v[2]), hx, hy, hz, hv))


class PolicyInterface(abc.ABC):
    """Maps an observation (plus optional privileged state) to an action."""

    name = "policy"

    @abc.abstractmethod
    def act(self, obs: Observation, privileged: Optional[WorldState] = None) -> ActionVector:
        ...


class ZeroPolicy(PolicyInterface):
    """Always hovers: the zero action."""

    name = "zero"

    def act(self, obs: Observation, privileged: Optional[WorldState] = None) -> ActionVector:
        return ActionVector.zero()


class OraclePolicy(PolicyInterface):
    """Scripted policy using privileged world state.

    Parses the observation's instruction each call, so instruction changes
    mid-session take effect at the next tick.
    """

    name = "oracle"

    def __init__(self, cfg: OracleConfig | None = None):
        self.cfg = cfg or OracleConfig()
        self._cache: tuple[str, TargetSelector] | None = None

    def _selector(self, instruction: str) -> TargetSelector:
        if self._cache is not None and self._cache[0] == instruction:
            return self._cache[1]
        sel = parse_instruction(instruction)
        self._cache = (instruction, sel)
        return sel

    def act(self, obs: Observation, privileged: Optional[WorldState] = None) -> ActionVector:
        if privileged is None:
            raise ValueError("oracle policy requires privileged world state")
        sel = self._selector(obs.instruction)
        return oracle_act(privileged, sel, self.cfg, t=privileged.sim_time)


class RemotePolicy(PolicyInterface):
    """Client for a served policy.

    Transport failures degrade gracefully: the previous action is repeated
    once, and after two consecutive failures the client commands hover.
    A syntactically valid reply with a bad action aborts instead.
    """

    name = "remote"

    def __init__(self, endpoint: str, timeout: float = 0.25,
                 session: Optional[requests.Session] = None):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._session = session or requests.Session()
        self._last_action = ActionVector.zero()
        self._consecutive_failures = 0

    def check_health(self) -> dict:
        """Verify the endpoint is reachable; call once at session start."""
        resp = self._session.get(f"{self.endpoint}/health", timeout=self.timeout)
        if resp.status_code != 200:
            raise ProtocolError(f"health check failed with status {resp.status_code}")
        return resp.json()

    def act(self, obs: Observation, privileged: Optional[WorldState] = None) -> ActionVector:
        try:
            resp = self._session.post(f"{self.endpoint}/act",
                                      json=encode_act_request(obs),
                                      timeout=self.timeout)
        except (requests.Timeout, requests.ConnectionError):
            return self._fallback()
        if resp.status_code != 200:
            raise ProtocolError(f"policy server returned status {resp.status_code}: "
                                f"{resp.text[:200]}")
        try:
            action, _latency = decode_act_response(resp.json())
        except (WireFormatError, ValueError) as exc:
            raise ProtocolError(f"malformed policy response: {exc}") from exc
        self._consecutive_failures = 0
        self._last_action = action
        return action

    def _fallback(self) -> ActionVector:
        self._consecutive_failures += 1
        if self._consecutive_failures >= 2:
            return ActionVector.zero()
        return self._last_action
