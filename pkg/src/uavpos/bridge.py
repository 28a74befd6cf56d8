"""Network-facing environment server and a minimal client.

External agents (any language) drive reset/step over a TCP stream.
Frames are length-prefixed JSON: a 4-byte big-endian payload length
followed by a UTF-8 JSON object with at least a "type" key. One
environment per connection; the server only advances the environment in
response to client messages.

Session protocol:
  client  hello {}                -> server  spec {...}
  client  reset {seed}            -> server  obs {...}
  client  act {action}            -> server  step_result {...}
  client  close {}                -> connection closes
Any violation gets an error frame, then the connection closes.
"""

from __future__ import annotations

import json
import logging
import math
import socket
import socketserver
import struct
import threading
import uuid

from .env import ACTION_NAMES, UavEnv
from .errors import EpisodeFinished, FrameError, ProtocolError

log = logging.getLogger(__name__)

MESSAGE_TYPES = (
    "hello", "spec", "reset", "obs", "act", "step_result", "close", "error",
)
_HEADER = struct.Struct(">I")
MAX_FRAME = 1 << 20


def encode(msg: dict) -> bytes:
    """Length-prefixed JSON frame for one message.

    Strict JSON only: non-finite numbers must be sanitized (see
    clean_numbers) before they reach the wire, so any compliant parser
    can read the stream.
    """
    if msg.get("type") not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {msg.get('type')!r}")
    payload = json.dumps(msg, sort_keys=True, allow_nan=False).encode("utf-8")
    return _HEADER.pack(len(payload)) + payload


def clean_numbers(value):
    """Replace non-finite floats with None, recursively."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: clean_numbers(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean_numbers(v) for v in value]
    return value


def decode(data: bytes) -> dict:
    """Inverse of encode for a complete frame; decode(encode(m)) == m."""
    if len(data) < _HEADER.size:
        raise FrameError("frame shorter than the length header")
    (length,) = _HEADER.unpack(data[: _HEADER.size])
    body = data[_HEADER.size :]
    if len(body) != length:
        raise FrameError(f"frame length {len(body)} != header {length}")
    return _parse_body(body)


def _parse_body(body: bytes) -> dict:
    try:
        msg = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"undecodable frame payload: {exc}") from exc
    if not isinstance(msg, dict):
        raise FrameError("frame payload must be a JSON object")
    if msg.get("type") not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {msg.get('type')!r}")
    return msg


def read_frame(stream) -> dict:
    """Read one frame from a file-like byte stream."""
    header = stream.read(_HEADER.size)
    if len(header) == 0:
        raise FrameError("stream closed")
    if len(header) < _HEADER.size:
        raise FrameError("truncated frame header")
    (length,) = _HEADER.unpack(header)
    if length > MAX_FRAME:
        raise FrameError(f"frame of {length} bytes exceeds limit")
    body = stream.read(length)
    if len(body) < length:
        raise FrameError("truncated frame payload")
    return _parse_body(body)


def write_frame(stream, msg: dict) -> None:
    stream.write(encode(msg))
    stream.flush()


def obs_payload(obs) -> dict:
    return {
        "x": obs.position.x,
        "y": obs.position.y,
        "z": obs.position.z,
        "x_norm": obs.normalized[0],
        "y_norm": obs.normalized[1],
        "z_norm": obs.normalized[2],
        "n_los": obs.n_los,
        "n_ues": obs.n_ues,
    }


def step_payload(result) -> dict:
    return {
        "observation": obs_payload(result.observation),
        "reward": result.reward,
        "done": result.done,
        "info": clean_numbers(result.info),
    }


def spec_payload(scenario) -> dict:
    env_cfg = scenario.env
    zone = scenario.zone
    return {
        "action_count": len(ACTION_NAMES),
        "actions": list(ACTION_NAMES),
        "episode_length": env_cfg.steps_per_episode,
        "decision_interval": env_cfg.decision_interval,
        "observation": {
            "fields": [
                "x", "y", "z", "x_norm", "y_norm", "z_norm", "n_los", "n_ues",
            ],
            "position_ranges": {
                "x": list(zone.x_range),
                "y": list(zone.y_range),
                "z": list(zone.z_range),
            },
            "n_ues": len(scenario.ues),
        },
        "scenario": scenario.name,
    }


class _SessionHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server: BridgeServer = self.server  # type: ignore[assignment]
        env = UavEnv(server.scenario)
        session = uuid.uuid4().hex
        armed = False
        try:
            first = read_frame(self.rfile)
            if first["type"] != "hello":
                raise ProtocolError("expected hello")
            write_frame(
                self.wfile,
                {
                    "type": "spec",
                    "session": session,
                    "payload": spec_payload(server.scenario),
                },
            )
            while True:
                msg = read_frame(self.rfile)
                mtype = msg["type"]
                if mtype == "close":
                    return
                if mtype == "reset":
                    seed = int(msg.get("payload", {}).get("seed", 0))
                    obs = env.reset(seed=seed)
                    armed = True
                    write_frame(
                        self.wfile,
                        {
                            "type": "obs",
                            "session": session,
                            "payload": obs_payload(obs),
                        },
                    )
                elif mtype == "act":
                    if not armed:
                        raise ProtocolError("act before reset")
                    action = msg.get("payload", {}).get("action")
                    if not isinstance(action, int) or not 0 <= action <= 6:
                        raise ProtocolError("action out of range")
                    result = env.step(action)
                    write_frame(
                        self.wfile,
                        {
                            "type": "step_result",
                            "session": session,
                            "payload": step_payload(result),
                        },
                    )
                else:
                    raise ProtocolError(f"unexpected message type {mtype!r}")
        except (FrameError, ProtocolError, EpisodeFinished, ValueError) as exc:
            log.info("session %s closed on protocol violation: %s", session, exc)
            try:
                write_frame(
                    self.wfile,
                    {
                        "type": "error",
                        "session": session,
                        "payload": {"message": str(exc)},
                    },
                )
            except OSError:
                pass


class BridgeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, scenario, address):
        self.scenario = scenario
        super().__init__(address, _SessionHandler)


def serve(scenario, host: str, port: int):
    """Run the environment server until interrupted."""
    server = BridgeServer(scenario, (host, port))
    log.warning("serving %s on %s:%d", scenario.name, *server.server_address)
    try:
        server.serve_forever()
    finally:
        server.server_close()


def start_background_server(scenario, host: str = "127.0.0.1", port: int = 0):
    """Start a server thread; returns (server, (host, port)). For tests."""
    server = BridgeServer(scenario, (host, port))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, server.server_address


class BridgeClient:
    """Minimal in-language client for the wire protocol."""

    def __init__(self, host: str, port: int, timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self._sock.makefile("rwb")
        write_frame(self._file, {"type": "hello"})
        reply = read_frame(self._file)
        if reply["type"] == "error":
            raise ProtocolError(reply["payload"]["message"])
        if reply["type"] != "spec":
            raise ProtocolError(f"expected spec, got {reply['type']!r}")
        self.session = reply.get("session")
        self.spec = reply["payload"]

    def reset(self, seed: int = 0) -> dict:
        write_frame(self._file, {"type": "reset", "payload": {"seed": seed}})
        reply = read_frame(self._file)
        if reply["type"] == "error":
            raise ProtocolError(reply["payload"]["message"])
        return reply["payload"]

    def step(self, action: int) -> dict:
        if not 0 <= int(action) < self.spec["action_count"]:
            raise ValueError(f"action {action} out of range")
        write_frame(self._file, {"type": "act", "payload": {"action": int(action)}})
        reply = read_frame(self._file)
        if reply["type"] == "error":
            raise ProtocolError(reply["payload"]["message"])
        return reply["payload"]

    def close(self) -> None:
        try:
            write_frame(self._file, {"type": "close"})
        except OSError:
            pass
        self._file.close()
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
