"""Live simulation behind an HTTP+JSON protocol with a server-push channel.

One simulation, one owner: every handler takes the service lock, so client
requests serialize and never interleave inside a firmware tick.  In real-time
mode a background thread advances simulated time 1 ms per wall millisecond;
with manual clocking the time only moves on POST /api/clock.

Events go out as server-sent events, one JSON object per message:
``{"type": <lcd_changed|lock|buzzer|state_changed>, "snapshot": {...}}``.
Every externally visible change observed at a tick emits exactly one event.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from pydantic import BaseModel

from .config import SimConfig
from .eeprom import BadHex, BadImageSize, format_hex_image, parse_hex_image
from .keypad import KEY_SYMBOLS
from .machine import LockSimulation

_STATE_FIELDS = ("mode", "sleeping", "attempts")


class ServiceError(Exception):
    def __init__(self, status_code: int, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


class KeyRequest(BaseModel):
    key: str
    action: str = "tap"


class ClockRequest(BaseModel):
    advance_ms: int


class SimulationService:
    def __init__(self, config: SimConfig | None = None,
                 eeprom_image: bytes | None = None,
                 manual_clock: bool = False, seed: int = 0):
        self.manual_clock = manual_clock
        self._lock = threading.RLock()
        self.sim = LockSimulation(config, eeprom_image, seed)
        self.sim.add_tick_observer(lambda sim: self._emit_diff())
        self._subscribers: list[queue.Queue] = []
        self.sim.boot()
        self._last = self.sim.snapshot()
        self._stop = threading.Event()
        self._thread = None
        if not manual_clock:
            self._thread = threading.Thread(target=self._realtime_loop,
                                            daemon=True)
            self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread:
            self._thread.join(timeout=2)

    # -- commands (each serializes on the owner lock) -----------------------

    def state(self) -> dict:
        with self._lock:
            return self.sim.snapshot()

    def key(self, sym: str, action: str) -> None:
        if sym not in KEY_SYMBOLS:
            raise ServiceError(400, f"unknown key {sym!r}")
        if action not in ("press", "release", "tap"):
            raise ServiceError(400, f"unknown action {action!r}")
        with self._lock:
            pressed = self.sim.keypad.is_pressed(sym)
            if action == "press":
                if pressed:
                    raise ServiceError(409, f"key {sym!r} is already pressed")
                self.sim.press(sym)
            elif action == "release":
                if not pressed:
                    raise ServiceError(409, f"key {sym!r} is not pressed")
                self.sim.release(sym)
            else:
                if pressed:
                    raise ServiceError(409, f"key {sym!r} is already pressed")
                self.sim.tap(sym)

    def advance_clock(self, ms: int) -> dict:
        if not self.manual_clock:
            raise ServiceError(409, "clock is real-time; start with --manual-clock")
        if ms < 0:
            raise ServiceError(400, "advance_ms must be >= 0")
        with self._lock:
            self.sim.advance_ms(ms)
            return {"t_ms": self.sim.now_us // 1000}

    def eeprom_hex(self) -> str:
        with self._lock:
            return format_hex_image(self.sim.eeprom.image_bytes())

    def put_eeprom(self, text: str) -> None:
        try:
            image = parse_hex_image(text)
        except (BadHex, BadImageSize) as exc:
            raise ServiceError(400, str(exc))
        with self._lock:
            self.sim.load_eeprom_image(image)
            self.sim.reboot()
            self._emit_diff()

    def reset(self) -> None:
        with self._lock:
            self.sim.reboot()
            self._emit_diff()

    # -- events ----------------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _emit_diff(self) -> None:
        snap = self.sim.snapshot()
        last = self._last
        self._last = snap
        kinds = []
        if snap["lcd"] != last["lcd"]:
            kinds.append("lcd_changed")
        if snap["lock"] != last["lock"]:
            kinds.append("lock")
        if snap["buzzer"] != last["buzzer"]:
            kinds.append("buzzer")
        if any(snap[f] != last[f] for f in _STATE_FIELDS):
            kinds.append("state_changed")
        if not kinds:
            return
        for kind in kinds:
            event = {"type": kind, "snapshot": snap}
            for q in self._subscribers:
                q.put(event)

    def _realtime_loop(self) -> None:
        last = time.monotonic()
        while not self._stop.is_set():
            time.sleep(0.005)
            now = time.monotonic()
            dt_ms = int((now - last) * 1000)
            if dt_ms <= 0:
                continue
            last += dt_ms / 1000.0
            with self._lock:
                self.sim.advance_ms(dt_ms)


def create_app(service: SimulationService,
               panel_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="locksim")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ServiceError)
    def _service_error(request: Request, exc: ServiceError):
        return JSONResponse({"error": exc.detail}, status_code=exc.status_code)

    @app.get("/api/state")
    def get_state():
        return service.state()

    @app.post("/api/key", status_code=204)
    def post_key(req: KeyRequest):
        service.key(req.key, req.action)

    @app.post("/api/clock")
    def post_clock(req: ClockRequest):
        return service.advance_clock(req.advance_ms)

    @app.get("/api/eeprom", response_class=PlainTextResponse)
    def get_eeprom():
        return service.eeprom_hex()

    @app.put("/api/eeprom", status_code=204)
    async def put_eeprom(request: Request):
        body = await request.body()
        service.put_eeprom(body.decode("ascii", "replace"))

    @app.post("/api/reset", status_code=204)
    def post_reset():
        service.reset()

    @app.get("/api/events")
    def get_events():
        q = service.subscribe()

        def gen():
            try:
                while True:
                    try:
                        event = q.get(timeout=0.5)
                    except queue.Empty:
                        yield ": ping\n\n"
                        continue
                    yield f"data: {json.dumps(event)}\n\n"
            finally:
                service.unsubscribe(q)

        return StreamingResponse(gen(), media_type="text/event-stream")

    if panel_dir and Path(panel_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=panel_dir, html=True),
                  name="panel")

    return app


def serve(host: str, port: int, config: SimConfig | None = None,
          eeprom_image: bytes | None = None, manual_clock: bool = False,
          seed: int = 0, panel_dir: str | None = None) -> None:
    import uvicorn

    if panel_dir is None:
        candidate = Path.cwd() / "frontend" / "dist"
        panel_dir = str(candidate) if candidate.is_dir() else None
    service = SimulationService(config, eeprom_image, manual_clock, seed)
    app = create_app(service, panel_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        service.stop()
