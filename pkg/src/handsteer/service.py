"""WebSocket streaming service around the recognizer.

One connection = one hand-stream session with its own rolling window and
command filter; the model is shared read-only. Clients send precomputed
feature frames (the six channels plus palm speed), keeping the service
sensor-agnostic:

    inbound:  {"type": "frame", "t": 1.0, "features": [6 reals],
               "speed": 0.0, "present": true}
    outbound: {"type": "result", "t": 1.0, "meta": "PostureState",
               "label": "GoStraight", "command": 1, "margin": 0.42}
              {"type": "error", "code": "BadMessage", "detail": "..."}

Warm-up frames receive no reply; afterwards every inbound frame gets exactly
one outbound message, in order. A GET on /healthz returns model metadata.
"""
from __future__ import annotations

import asyncio
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadMessage, ModelMissing
from .frames import SignalFrame
from .labels import MetaState
from .recognizer import RecognizerModel, StepEvent, StreamRecognizer


@dataclass
class SessionState:
    """Per-connection recognizer state."""

    session_id: int
    recognizer: StreamRecognizer
    frames_seen: int = 0
    last_emit_t: float = float("nan")


def parse_frame_message(raw: str | bytes):
    """Validate one inbound text message.

    Returns ``(t, features, speed, present)``; raises BadMessage on any
    schema violation.
    """
    try:
        msg = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise BadMessage(f"not valid JSON: {exc}") from None
    if not isinstance(msg, dict) or msg.get("type") != "frame":
        raise BadMessage("expected a message with type 'frame'")
    try:
        t = float(msg["t"])
        present = bool(msg["present"])
    except (KeyError, TypeError, ValueError):
        raise BadMessage("frame needs numeric 't' and boolean 'present'") from None
    features = msg.get("features")
    speed = msg.get("speed", 0.0)
    if not present:
        return t, None, 0.0, False
    if not isinstance(features, (list, tuple)) or len(features) != 6:
        raise BadMessage("'features' must hold exactly 6 reals")
    try:
        feats = [float(v) for v in features]
        speed = float(speed)
    except (TypeError, ValueError):
        raise BadMessage("non-numeric feature or speed value") from None
    if not all(math.isfinite(v) for v in feats) or not math.isfinite(speed):
        raise BadMessage("non-finite feature or speed value")
    if speed < 0:
        raise BadMessage("speed must be >= 0")
    return t, feats, speed, True


def frame_from_features(t: float, features: list[float], speed: float) -> SignalFrame:
    """Rebuild a frame from the wire fields; the palm normal is renormalized
    and the velocity is any vector with the requested magnitude."""
    normal = np.array(features[:3], dtype=float)
    norm = float(np.linalg.norm(normal))
    if norm < 1e-9:
        raise BadMessage("palm normal is (near) zero")
    if abs(norm - 1.0) > 1e-12:
        normal = normal / norm
    return SignalFrame(
        t=t,
        palm_normal=normal,
        roll=float(features[3]),
        pitch=float(features[4]),
        yaw=float(features[5]),
        palm_velocity=np.array([speed, 0.0, 0.0]),
    )


def result_message(ev: StepEvent) -> str:
    out: dict[str, object] = {"type": "result", "t": ev.t, "meta": ev.meta.value}
    if ev.meta is not MetaState.NO_HAND:
        out["label"] = ev.label
        out["command"] = ev.filtered_command
        out["margin"] = ev.margin
    return json.dumps(out)


def error_message(code: str, detail: str) -> str:
    return json.dumps({"type": "error", "code": code, "detail": detail})


def handle_message(state: SessionState, raw: str | bytes) -> str | None:
    """Process one inbound message; returns the reply text or None (warm-up).

    Malformed messages produce error replies and leave the session usable.
    """
    try:
        t, features, speed, present = parse_frame_message(raw)
    except BadMessage as exc:
        return error_message("BadMessage", str(exc))
    state.frames_seen += 1
    if not present:
        ev = state.recognizer.step(None, t=t)
        return result_message(ev)
    try:
        frame = frame_from_features(t, features, speed)
    except BadMessage as exc:
        return error_message("BadMessage", str(exc))
    ev = state.recognizer.step(frame)
    if ev is None:
        return None
    state.last_emit_t = ev.t
    return result_message(ev)


def model_metadata(model: RecognizerModel) -> dict:
    return {
        "status": "ok",
        "width": model.width,
        "classifier": model.classifier,
        "rate_hz": model.rate_hz,
        "blocks": model.block_sizes(),
    }


async def run_service(model: RecognizerModel | None, bind: str, port: int,
                      ready: asyncio.Event | None = None) -> None:
    """Serve sessions until cancelled. ``ready`` is set once listening."""
    import websockets

    session_counter = 0

    async def handler(connection):
        nonlocal session_counter
        if model is None:
            await connection.send(
                error_message("ModelMissing", "service has no model loaded")
            )
            await connection.close()
            return
        session_counter += 1
        state = SessionState(
            session_id=session_counter, recognizer=StreamRecognizer(model)
        )
        async for raw in connection:
            reply = handle_message(state, raw)
            if reply is not None:
                await connection.send(reply)
        # disconnect discards the session state with the connection

    async def health(connection, request):
        if request.path == "/healthz":
            if model is None:
                body = json.dumps({"status": "no-model"})
            else:
                body = json.dumps(model_metadata(model))
            return connection.respond(200, body + "\n")
        return None

    async with websockets.serve(handler, bind, port, process_request=health):
        if ready is not None:
            ready.set()
        await asyncio.Future()


def serve_forever(model: RecognizerModel, bind: str = "127.0.0.1",
                  port: int = 8765) -> None:
    if model is None:
        raise ModelMissing("cannot serve without a model")
    try:
        asyncio.run(run_service(model, bind, port))
    except KeyboardInterrupt:
        pass
