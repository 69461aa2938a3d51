"""Virtual time base and pin-level electrical fabric.

Sixteen pins on two 8-bit ports, each with direction/latch/pull-up state,
plus registered switches that can short pairs of pins together.  Net levels
are resolved combinationally: any strong low wins, then strong high, then
weak pull-ups, then the floating default.  Switch transitions are scheduled
on a microsecond clock and fire in timestamp order while the clock advances.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace

LOW = 0
HIGH = 1

INPUT = "input"
OUTPUT = "output"


class GpioError(Exception):
    """Base class for electrical-fabric errors."""


class DrivingInputPin(GpioError):
    """drive() was called on a pin configured as input (a firmware bug)."""


class UnknownSwitch(GpioError):
    pass


@dataclass(frozen=True, order=True)
class PinId:
    port: str   # "A" or "B"
    index: int  # 0..7

    def __post_init__(self):
        if self.port not in ("A", "B") or not 0 <= self.index <= 7:
            raise ValueError(f"no such pin: {self.port}{self.index}")

    @classmethod
    def parse(cls, text: str) -> "PinId":
        text = text.strip().upper()
        if len(text) < 2 or text[0] not in "AB" or not text[1:].isdigit():
            raise ValueError(f"bad pin name {text!r} (expected e.g. 'B3')")
        return cls(text[0], int(text[1:]))

    def __str__(self) -> str:
        return f"{self.port}{self.index}"


ALL_PINS = tuple(PinId(p, i) for p in ("A", "B") for i in range(8))
PORTB_PINS = tuple(PinId("B", i) for i in range(8))


@dataclass
class PinConfig:
    direction: str = INPUT
    latch: int = LOW
    weak_pullup: bool = False
    open_drain: bool = False


@dataclass
class SimClock:
    """Monotonically nondecreasing simulated time, in microseconds."""

    t_us: int = 0


@dataclass
class FabricDiagnostics:
    float_reads: int = 0
    bus_contentions: int = 0


@dataclass
class _Switch:
    a: PinId
    b: PinId
    closed: bool = False


class PinFabric:
    """The shared electrical state all peripherals hang off.

    Single-owner: every mutation happens on one logical timeline; callers
    must not mutate from two contexts at once.
    """

    def __init__(self, floating_default: int = HIGH):
        self.clock = SimClock()
        self.floating_default = floating_default
        self.diagnostics = FabricDiagnostics()
        self.switch_log: list[tuple[int, str, bool]] = []
        self._configs: dict[PinId, PinConfig] = {p: PinConfig() for p in ALL_PINS}
        self._switches: dict[str, _Switch] = {}
        self._events: list[tuple[int, int, str, bool]] = []
        self._event_seq = 0
        self._components: dict[PinId, tuple[PinId, ...]] = {}
        self._listeners: dict[PinId, list] = {}
        self._listener_levels: dict[PinId, int] = {}
        self._portb_seq = 0
        self._portb_levels: tuple = ()
        self._rebuild_components()
        self._portb_levels = self._portb_state()

    # -- time ------------------------------------------------------------

    @property
    def now_us(self) -> int:
        return self.clock.t_us

    def advance(self, dt_us: int) -> None:
        if dt_us < 0:
            raise ValueError("time cannot run backwards")
        self.advance_to(self.clock.t_us + dt_us)

    def advance_to(self, t_us: int) -> None:
        """Advance the clock, firing scheduled switch transitions in order."""
        if t_us < self.clock.t_us:
            raise ValueError("time cannot run backwards")
        while self._events and self._events[0][0] <= t_us:
            when, _, switch_id, closed = heapq.heappop(self._events)
            self.clock.t_us = when
            self._apply_switch(switch_id, closed)
        self.clock.t_us = t_us

    # -- configuration and driving ---------------------------------------

    def pin_config(self, pin: PinId) -> PinConfig:
        return replace(self._configs[pin])

    def configure_pin(self, pin: PinId, cfg: PinConfig) -> None:
        self._configs[pin] = replace(cfg)
        self._mutated((pin,))

    def make_output(self, pin: PinId, level: int) -> None:
        self._configs[pin] = PinConfig(direction=OUTPUT, latch=level)
        self._mutated((pin,))

    def make_input(self, pin: PinId, pullup: bool = False) -> None:
        cfg = self._configs[pin]
        self._configs[pin] = PinConfig(direction=INPUT, latch=cfg.latch,
                                       weak_pullup=pullup)
        self._mutated((pin,))

    def drive(self, pin: PinId, level: int) -> None:
        cfg = self._configs[pin]
        if cfg.direction != OUTPUT:
            raise DrivingInputPin(f"{pin} is an input")
        if cfg.latch != level:
            cfg.latch = level
            self._mutated((pin,))

    def sample(self, pin: PinId) -> int:
        return self._resolve(pin, record=True)

    # -- switches ----------------------------------------------------------

    def register_switch(self, switch_id: str, a: PinId, b: PinId) -> None:
        self._switches[switch_id] = _Switch(a, b)

    def set_switch(self, switch_id: str, closed: bool, at: int | None = None) -> None:
        if switch_id not in self._switches:
            raise UnknownSwitch(switch_id)
        if at is None or at == self.clock.t_us:
            self._apply_switch(switch_id, closed)
            return
        if at < self.clock.t_us:
            raise ValueError(f"cannot schedule switch event in the past ({at} < {self.clock.t_us})")
        self._event_seq += 1
        heapq.heappush(self._events, (at, self._event_seq, switch_id, closed))

    def switch_closed(self, switch_id: str) -> bool:
        return self._switches[switch_id].closed

    def cancel_scheduled(self) -> None:
        """Drop scheduled-but-unfired switch transitions (power cycle)."""
        self._events.clear()

    def _apply_switch(self, switch_id: str, closed: bool) -> None:
        sw = self._switches[switch_id]
        if sw.closed == closed:
            return
        sw.closed = closed
        self.switch_log.append((self.clock.t_us, switch_id, closed))
        self._rebuild_components()
        self._mutated((sw.a, sw.b), topology_changed=True)

    # -- wake detection ----------------------------------------------------

    def portb_mark(self) -> int:
        """Marker for portb_changed_since; take one before sleeping."""
        return self._portb_seq

    def portb_changed_since(self, mark: int) -> bool:
        return self._portb_seq > mark

    # -- observers ---------------------------------------------------------

    def add_level_listener(self, pin: PinId, fn) -> None:
        """fn(t_us, old_level, new_level) fires whenever the pin's resolved
        level changes.  Used to wire edge-sensitive peripherals (LCD E line)."""
        self._listeners.setdefault(pin, []).append(fn)
        self._listener_levels[pin] = self._resolve(pin, record=False)

    # -- net resolution ----------------------------------------------------

    def _rebuild_components(self) -> None:
        parent = {p: p for p in ALL_PINS}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for sw in self._switches.values():
            if sw.closed:
                ra, rb = find(sw.a), find(sw.b)
                if ra != rb:
                    parent[ra] = rb
        groups: dict[PinId, list[PinId]] = {}
        for p in ALL_PINS:
            groups.setdefault(find(p), []).append(p)
        self._components = {}
        for members in groups.values():
            net = tuple(members)
            for p in members:
                self._components[p] = net

    def net_of(self, pin: PinId) -> tuple[PinId, ...]:
        return self._components[pin]

    def _resolve(self, pin: PinId, record: bool) -> int:
        strong_low = strong_high = pulled = False
        for p in self._components[pin]:
            cfg = self._configs[p]
            if cfg.direction == OUTPUT:
                if cfg.open_drain and cfg.latch == HIGH:
                    continue  # open-drain high releases the net
                if cfg.latch == LOW:
                    strong_low = True
                else:
                    strong_high = True
            elif cfg.weak_pullup:
                pulled = True
        if strong_low:
            if strong_high and record:
                self.diagnostics.bus_contentions += 1
            return LOW
        if strong_high:
            return HIGH
        if pulled:
            return HIGH
        if record:
            self.diagnostics.float_reads += 1
        return self.floating_default

    def _portb_state(self) -> tuple:
        out = []
        for pin in PORTB_PINS:
            if self._configs[pin].direction == INPUT:
                out.append(self._resolve(pin, record=False))
            else:
                out.append(None)
        return tuple(out)

    def _mutated(self, affected: tuple, topology_changed: bool = False) -> None:
        # Wake detection compares sampled input levels on port B only.
        if topology_changed or any(p.port == "B" for p in affected):
            levels = self._portb_state()
            if levels != self._portb_levels:
                self._portb_levels = levels
                self._portb_seq += 1
        for pin, fns in self._listeners.items():
            if not topology_changed and pin not in affected and \
                    not any(a in self._components[pin] for a in affected):
                continue
            new = self._resolve(pin, record=False)
            old = self._listener_levels[pin]
            if new != old:
                self._listener_levels[pin] = new
                for fn in fns:
                    fn(self.clock.t_us, old, new)
