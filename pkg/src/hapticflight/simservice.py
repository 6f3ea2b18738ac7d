"""Live simulation service for operator consoles.

A single session owns the control loop and steps it in one background
task; WebSocket clients receive one JSON event per control tick and may
send commands, which are queued and applied only at tick boundaries so
every tick stays deterministic. Joining clients get an immediate full
snapshot; all clients see the same stream.
"""

from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response

from .core import Shape, Texture, VirtualObject, action_to_list
from .imaging import frame_to_png_bytes
from .linkage import ArrayCommand
from .loop import ControlLoop, StopRule
from .policy import InstructionError, PolicyInterface, parse_instruction
from .world import (SceneConfig, SceneValidationError, SimConfig, ViewKind,
                    render_topdown, scene_from_json, spawn)


def _array_to_json(cmd: ArrayCommand) -> dict:
    return {
        "extensions": list(cmd.extensions),
        "vibration": cmd.vibration.name.lower(),
        "vibration_phase": cmd.vibration_phase,
    }


@dataclass
class _Client:
    queue: asyncio.Queue = field(default_factory=asyncio.Queue)


class SimSession:
    """Single-owner live simulation with command queue and event fan-out."""

    def __init__(self, scene: SceneConfig, cfg: SimConfig, policy: PolicyInterface,
                 instruction: str, stop: StopRule | None = None,
                 live: bool = True):
        self.scene = scene
        self.cfg = cfg
        self.policy = policy
        self.live = live
        self.loop = ControlLoop(spawn(scene, cfg), policy, instruction, cfg, stop=stop)
        self.paused = False
        self.event_counter = 0
        self._clients: list[_Client] = []
        self._commands: asyncio.Queue = asyncio.Queue()
        self._task: Optional[asyncio.Task] = None
        self._stopping = False

    # -- event plumbing ----------------------------------------------------

    def snapshot(self) -> dict:
        """Full-state event reflecting the world as of the last tick."""
        loop = self.loop
        world = loop.world
        status = loop.status
        return {
            "type": "event",
            "tick": self.event_counter,
            "sim_time": world.sim_time,
            "paused": self.paused,
            "drone": {
                "position": list(world.drone.position),
                "velocity": list(world.drone.velocity),
            },
            "objects": [
                {"shape": o.shape.name.lower(), "texture": o.texture.name.lower(),
                 "position": list(o.position), "size": o.size}
                for o in world.objects
            ],
            "instruction": loop.instruction,
            "last_action": (action_to_list(loop.last_action)
                            if loop.last_action is not None else None),
            "arrays": ([_array_to_json(c) for c in loop.last_commands]
                       if loop.last_commands is not None else None),
            "outcome": {
                "reached": status.reached,
                "reach_time": status.reach_time,
                "hover_span": status.hover_span,
                "success": status.success,
                "done": status.done,
                "stop_reason": status.stop_reason,
            },
        }

    def _broadcast(self, event: dict) -> None:
        for client in list(self._clients):
            client.queue.put_nowait(event)

    def attach(self) -> _Client:
        client = _Client()
        self._clients.append(client)
        client.queue.put_nowait(self.snapshot())
        return client

    def detach(self, client: _Client) -> None:
        if client in self._clients:
            self._clients.remove(client)

    # -- command handling ----------------------------------------------------

    async def submit(self, client: _Client, raw: str) -> None:
        try:
            command = json.loads(raw)
            if not isinstance(command, dict) or "type" not in command:
                raise ValueError("command must be an object with a 'type' field")
        except ValueError as exc:
            client.queue.put_nowait({"type": "error", "message": f"bad command: {exc}"})
            return
        await self._commands.put((client, command))

    def _apply_command(self, client: _Client, command: dict) -> None:
        kind = command.get("type")
        try:
            if kind == "set_instruction":
                text = command.get("text", "")
                parse_instruction(text)  # reject gibberish before it reaches the policy
                self.loop.set_instruction(text)
            elif kind == "pause":
                self.paused = True
            elif kind == "resume":
                self.paused = False
            elif kind == "reset":
                scene = scene_from_json(command.get("scene", {}))
                self.loop.reset(spawn(scene, self.cfg))
                self.scene = scene
            elif kind == "spawn":
                payload = command.get("object", {})
                obj = VirtualObject(
                    shape=Shape.from_name(payload["shape"]),
                    texture=Texture.from_name(payload["texture"]),
                    position=tuple(payload["position"]),
                    size=float(payload["size"]),
                )
                self.loop.spawn_object(obj)
            else:
                raise ValueError(f"unknown command type {kind!r}")
        except (InstructionError, SceneValidationError, KeyError, TypeError, ValueError) as exc:
            client.queue.put_nowait({"type": "error", "message": str(exc)})

    async def _drain_commands(self) -> None:
        while not self._commands.empty():
            client, command = self._commands.get_nowait()
            self._apply_command(client, command)

    # -- driver ----------------------------------------------------------

    async def run(self) -> None:
        """Tick at the control rate until stopped; commands between ticks."""
        interval = self.cfg.dt_control if self.live else 0.0
        next_deadline = asyncio.get_event_loop().time()
        while not self._stopping:
            await self._drain_commands()
            if self.paused or self.loop.status.done:
                await asyncio.sleep(min(0.05, interval) if interval else 0.001)
                continue
            if interval:
                next_deadline += interval
                delay = next_deadline - asyncio.get_event_loop().time()
                if delay > 0:
                    await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)
            self.loop.tick()
            self.event_counter += 1
            self._broadcast(self.snapshot())

    def start(self) -> None:
        self._task = asyncio.get_event_loop().create_task(self.run())

    async def stop(self) -> None:
        self._stopping = True
        if self._task is not None:
            await self._task


def create_app(session: SimSession) -> FastAPI:
    """FastAPI app exposing /ws event streaming and /frame snapshots."""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        session.start()
        yield
        await session.stop()

    app = FastAPI(title="hapticflight sim service", lifespan=lifespan)

    @app.get("/status")
    async def status():
        return JSONResponse(session.snapshot())

    @app.get("/frame/{view}")
    async def frame(view: str):
        if view not in ("real", "vr"):
            return JSONResponse({"error": "view must be 'real' or 'vr'"}, status_code=404)
        kind = ViewKind.REAL if view == "real" else ViewKind.VR
        raster = render_topdown(session.loop.world, kind)
        return Response(content=frame_to_png_bytes(raster), media_type="image/png")

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        client = session.attach()
        try:
            receiver = asyncio.create_task(_receive_loop(session, client, websocket))
            try:
                while True:
                    event = await client.queue.get()
                    await websocket.send_text(json.dumps(event))
            finally:
                receiver.cancel()
        except (WebSocketDisconnect, RuntimeError):
            pass  # client went away; nothing to do
        finally:
            session.detach(client)

    return app


async def _receive_loop(session: SimSession, client, websocket: WebSocket) -> None:
    try:
        while True:
            raw = await websocket.receive_text()
            await session.submit(client, raw)
    except WebSocketDisconnect:
        pass


def serve_sim(bind_address: str, session: SimSession) -> None:
    """Run the sim service synchronously on host:port (blocks)."""
    import uvicorn

    host, _, port = bind_address.partition(":")
    app = create_app(session)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8400),
                log_level="warning")
