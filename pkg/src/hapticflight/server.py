"""HTTP policy server: the model-serving boundary.

Stateless JSON-over-HTTP: POST /act maps one observation request to one
action response, GET /health reports liveness. Responses are validated
server-side so a faulty policy yields 500, never a malformed action on
the wire.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .core import ActionVector, parse_action
from .policy import PolicyInterface
from .wire import WireFormatError, decode_act_request, encode_act_response


class PolicyServer:
    """Threaded HTTP server wrapping a policy behind the wire protocol."""

    def __init__(self, policy: PolicyInterface, host: str = "127.0.0.1", port: int = 0):
        self.policy = policy
        handler = _make_handler(policy)
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._httpd.server_address[:2]

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def start(self) -> None:
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        name="policy-server", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def __enter__(self) -> "PolicyServer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def _make_handler(policy: PolicyInterface):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/health":
                self._send_json(200, {"status": "ok", "policy": policy.name})
            else:
                self._send_json(404, {"error": f"unknown path {self.path}"})

        def do_POST(self):
            if self.path != "/act":
                self._send_json(404, {"error": f"unknown path {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
                payload = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                self._send_json(400, {"error": f"invalid JSON body: {exc}"})
                return
            try:
                obs = decode_act_request(payload)
            except WireFormatError as exc:
                self._send_json(400, {"error": str(exc)})
                return
            started = time.perf_counter()
            try:
                action = policy.act(obs)
                if isinstance(action, (list, tuple)):
                    action = parse_action(action)
                if not isinstance(action, ActionVector):
                    raise TypeError(
                        f"policy returned {type(action).__name__}, expected ActionVector")
            except Exception as exc:
                self._send_json(500, {"error": f"policy failure: {exc}"})
                return
            latency_ms = (time.perf_counter() - started) * 1000.0
            self._send_json(200, encode_act_response(action, latency_ms))

    return Handler


def serve_policy(policy: PolicyInterface, bind_address: str) -> PolicyServer:
    """Start serving a policy on host:port; returns the running server."""
    host, _, port = bind_address.partition(":")
    server = PolicyServer(policy, host=host or "127.0.0.1", port=int(port or 0))
    server.start()
    return server
