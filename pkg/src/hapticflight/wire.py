"""Policy-server wire schema: JSON bodies with base64 PNG frames.

Request fields: instruction, real_frame_b64, vr_frame_b64, step_index.
Response fields: action (7-number list), latency_ms. Field names are part
of the protocol and must not change.
"""

from __future__ import annotations

import base64
import binascii
from typing import Any, Mapping

from .core import ActionParseError, ActionVector, Observation, action_to_list, parse_action
from .imaging import FrameFormatError, frame_to_png_bytes, png_bytes_to_frame


class WireFormatError(ValueError):
    """A wire message violates the request/response schema."""


def encode_act_request(obs: Observation) -> dict[str, Any]:
    return {
        "instruction": obs.instruction,
        "real_frame_b64": base64.b64encode(frame_to_png_bytes(obs.real_frame)).decode("ascii"),
        "vr_frame_b64": base64.b64encode(frame_to_png_bytes(obs.vr_frame)).decode("ascii"),
        "step_index": obs.step_index,
    }


def decode_act_request(payload: Mapping[str, Any]) -> Observation:
    if not isinstance(payload, Mapping):
        raise WireFormatError("request body must be a JSON object")
    missing = [k for k in ("instruction", "real_frame_b64", "vr_frame_b64", "step_index")
               if k not in payload]
    if missing:
        raise WireFormatError(f"request missing fields: {', '.join(missing)}")
    instruction = payload["instruction"]
    if not isinstance(instruction, str) or not instruction:
        raise WireFormatError("instruction must be a non-empty string")
    step_index = payload["step_index"]
    if isinstance(step_index, bool) or not isinstance(step_index, int) or step_index < 0:
        raise WireFormatError("step_index must be a non-negative integer")
    frames = {}
    for key in ("real_frame_b64", "vr_frame_b64"):
        value = payload[key]
        if not isinstance(value, str):
            raise WireFormatError(f"{key} must be a base64 string")
        try:
            raw = base64.b64decode(value, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise WireFormatError(f"{key} is not valid base64: {exc}") from exc
        try:
            frames[key] = png_bytes_to_frame(raw)
        except FrameFormatError as exc:
            raise WireFormatError(f"{key}: {exc}") from exc
    return Observation(real_frame=frames["real_frame_b64"],
                       vr_frame=frames["vr_frame_b64"],
                       instruction=instruction,
                       step_index=step_index)


def encode_act_response(action: ActionVector, latency_ms: float) -> dict[str, Any]:
    return {"action": action_to_list(action), "latency_ms": float(latency_ms)}


def decode_act_response(payload: Mapping[str, Any]) -> tuple[ActionVector, float]:
    if not isinstance(payload, Mapping):
        raise WireFormatError("response body must be a JSON object")
    if "action" not in payload:
        raise WireFormatError("response missing field: action")
    action = payload["action"]
    if not isinstance(action, (list, tuple)):
        raise WireFormatError("action must be a list")
    try:
        parsed = parse_action(action)
    except ActionParseError as exc:
        raise WireFormatError(f"invalid action: {exc}") from exc
    latency = payload.get("latency_ms", 0.0)
    if isinstance(latency, bool) or not isinstance(latency, (int, float)):
        raise WireFormatError("latency_ms must be a number")
    return parsed, float(latency)
