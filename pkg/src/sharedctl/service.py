"""Live teleoperation gateway.

One session = one live control loop driven by timestamped force messages
over a websocket. The simulation clock follows the client's timestamps
(zero-order hold between messages, release after the gate window), so a
recorded message stream replayed through the service reproduces the
offline engine exactly.

Wire format: JSON text messages with a `v` version field.
  inbound:  {"v": 1, "t": <s>, "fx": <N>, "fy": <N>, "fz": <N>}
  outbound: {"v": 1, "type": "frame", ...} every Nth tick
            {"v": 1, "type": "done", "completed": ..., "metrics": {...}}
            {"v": 1, "type": "error", "error": "..."}
"""

from __future__ import annotations

import asyncio
import math
import os
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .config import ConfigError, scenario_from_dict
from .control import ControlFrame
from .metrics import MetricError, compute_metrics
from .session import Scenario, StreamEngine, write_telemetry
from .vec import EPS_VEL, norm

WIRE_VERSION = 1
DISCONNECT_ABORT_S = 10.0
BACKLOG_SOFT_LIMIT = 32  # queued outbound frames before decimation adapts
SLOW_STRIDE = 5  # extra decimation under backlog (10 -> 50 tick stride)

WAITING, RUNNING, DONE, ABORTED = "waiting", "running", "done", "aborted"


def _instant_disagreement(frame: ControlFrame) -> float:
    nh = norm(frame.v_h)
    ns = norm(frame.v_s)
    if nh < EPS_VEL or ns < EPS_VEL:
        return 0.0
    c = (frame.v_h[0] * frame.v_s[0] + frame.v_h[1] * frame.v_s[1]
         + frame.v_h[2] * frame.v_s[2]) / (nh * ns)
    return math.acos(min(1.0, max(-1.0, c))) / math.pi * 100.0


def frame_message(frame: ControlFrame, loop_count: int) -> dict:
    return {
        "v": WIRE_VERSION,
        "type": "frame",
        "t": frame.t,
        "x": list(frame.x),
        "goal": list(frame.goal),
        "path_progress": frame.s_near,
        "eta_h": frame.eta_h,
        "eta_r": frame.eta_r,
        "eta_s": frame.eta_s,
        "v_s": list(frame.v_s),
        "disagreement_instant": _instant_disagreement(frame),
        "loop": loop_count,
        "mode": frame.mode.value,
    }


@dataclass
class LiveSession:
    id: str
    scenario: Scenario
    engine: StreamEngine
    created_at: float
    state: str = WAITING
    t_origin: float | None = None
    last_t: float = -math.inf
    record_path: str | None = None
    trial_completed: bool = False
    final_metrics: dict | None = None
    disconnect_deadline: float | None = None
    attached: bool = False
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    def descriptor(self) -> dict:
        return {
            "id": self.id,
            "state": self.state,
            "created_at": self.created_at,
            "mode": self.scenario.mode.value,
            "loops_required": self.scenario.loops_required,
            "timeout_s": self.scenario.timeout,
            "sim_time": self.engine.engine.sim_time,
            "loops_completed": self.engine.engine.loop.follower.loops_completed,
        }


def create_app(data_dir: str = "./sessions", max_sessions: int = 8,
               static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="sharedctl session service")
    sessions: dict[str, LiveSession] = {}
    os.makedirs(data_dir, exist_ok=True)

    def _finish(sess: LiveSession, aborted: bool = False) -> None:
        if sess.state in (DONE, ABORTED):
            return
        record = sess.engine.close(session_id=sess.id)
        sess.state = ABORTED if aborted and not record.completed else DONE
        sess.trial_completed = record.completed
        sess.record_path = os.path.join(data_dir, f"{sess.id}.log")
        write_telemetry(record, sess.record_path)
        try:
            sess.final_metrics = compute_metrics(record).as_dict()
        except MetricError:
            sess.final_metrics = None

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "sessions": len(sessions)}

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        active = sum(1 for s in sessions.values() if s.state in (WAITING, RUNNING))
        if active >= max_sessions:
            raise HTTPException(503, detail="session limit reached")
        decimation = body.pop("decimation", 10)
        try:
            scenario = scenario_from_dict(body)
            engine = StreamEngine(scenario, decimation=int(decimation))
        except (ConfigError, ValueError) as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        sess = LiveSession(
            id=uuid.uuid4().hex[:12], scenario=scenario, engine=engine,
            created_at=time.time(),
        )
        sessions[sess.id] = sess
        return sess.descriptor()

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(404, detail="no such session")
        return sess.descriptor()

    @app.get("/sessions/{session_id}/record")
    async def get_record(session_id: str, metrics: bool = False):
        sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(404, detail="no such session")
        if sess.record_path is None:
            raise HTTPException(409, detail="session still running, no record yet")
        if metrics:
            return JSONResponse({"completed": sess.trial_completed,
                                 "metrics": sess.final_metrics})
        with open(sess.record_path) as fh:
            return PlainTextResponse(fh.read())

    async def _watchdog(sess: LiveSession):
        while sess.state in (WAITING, RUNNING):
            await asyncio.sleep(0.5)
            if (sess.disconnect_deadline is not None and not sess.attached
                    and time.monotonic() >= sess.disconnect_deadline):
                async with sess.lock:
                    _finish(sess, aborted=True)
                return

    @app.websocket("/sessions/{session_id}/io")
    async def session_io(ws: WebSocket, session_id: str):
        sess = sessions.get(session_id)
        if sess is None:
            await ws.close(code=4404)
            return
        if sess.state in (DONE, ABORTED):
            await ws.close(code=4409)
            return
        await ws.accept()
        sess.attached = True
        sess.disconnect_deadline = None
        watchdog = asyncio.create_task(_watchdog(sess))
        outbox: asyncio.Queue = asyncio.Queue()

        async def sender():
            while True:
                msg = await outbox.get()
                if msg is None:
                    return
                await ws.send_json(msg)

        send_task = asyncio.create_task(sender())
        try:
            while sess.state in (WAITING, RUNNING):
                msg = await ws.receive_json()
                if msg.get("v") != WIRE_VERSION:
                    await outbox.put({"v": WIRE_VERSION, "type": "error",
                                      "error": f"unsupported wire version {msg.get('v')!r}"})
                    continue
                if "mode" in msg or msg.get("type") == "configure":
                    await outbox.put({"v": WIRE_VERSION, "type": "error",
                                      "error": "scenario is immutable once created"})
                    continue
                try:
                    t_client = float(msg["t"])
                    f = (float(msg["fx"]), float(msg["fy"]), float(msg["fz"]))
                except (KeyError, TypeError, ValueError):
                    await outbox.put({"v": WIRE_VERSION, "type": "error",
                                      "error": "expected numeric fields t, fx, fy, fz"})
                    continue
                if sess.t_origin is None:
                    sess.t_origin = t_client
                    sess.state = RUNNING
                t_rel = t_client - sess.t_origin
                if t_rel < sess.last_t:
                    continue  # out-of-order message, drop
                sess.last_t = t_rel
                async with sess.lock:
                    frames = sess.engine.feed(t_rel, f)
                    loops = sess.engine.engine.loop.follower.loops_completed
                    backlog = outbox.qsize()
                    stride = SLOW_STRIDE if backlog > BACKLOG_SOFT_LIMIT else 1
                    for i, fr in enumerate(frames):
                        if i % stride == 0:
                            await outbox.put(frame_message(fr, loops))
                    if sess.engine.done:
                        _finish(sess)
                        await outbox.put({
                            "v": WIRE_VERSION, "type": "done",
                            "completed": sess.trial_completed,
                            "metrics": sess.final_metrics,
                        })
                if sess.state in (DONE, ABORTED):
                    break
            # drain before closing
            while not outbox.empty():
                await asyncio.sleep(0.01)
            await outbox.put(None)
            await send_task
            await ws.close()
        except WebSocketDisconnect:
            sess.attached = False
            if sess.state in (WAITING, RUNNING):
                sess.disconnect_deadline = time.monotonic() + DISCONNECT_ABORT_S
        finally:
            sess.attached = False
            if not send_task.done():
                await outbox.put(None)
                try:
                    await send_task
                except Exception:
                    pass
            watchdog.cancel()

    if static_dir and os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
