"""Scripted scenarios: timed key events plus assertions, run deterministically.

Grammar (one directive per line, full-line ``#`` comments allowed):

    eeprom load <path>
    config <key> <value>
    at <ms> press <sym>
    at <ms> release <sym>
    at <ms> tap <sym>                  # press + release 60 ms later
    at <ms> advance                    # just run the simulation to <ms>
    at <ms> expect lcd <row> "<text>"  # text is blank-padded to 20 columns
    at <ms> expect lock <open|closed>
    at <ms> expect buzzer <on|off>
    at <ms> expect mode <NAME>

Setup directives (``eeprom``/``config``) must precede the timeline, and
timeline timestamps must be nondecreasing.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field, replace

from .config import ConfigError, SimConfig
from .eeprom import load_image
from .firmware import Mode
from .hd44780 import VISIBLE_COLS
from .keypad import KEY_SYMBOLS
from .machine import LockSimulation

TAP_GAP_DEFAULT_MS = 60

MODE_NAMES = tuple(m.value for m in Mode)


class ScenarioSyntaxError(Exception):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class KeyEvent:
    t_ms: int
    action: str  # "press" or "release"
    sym: str
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class Expect:
    t_ms: int
    kind: str          # "lcd", "lock", "buzzer", "mode"
    expected: object   # (row, text) | "open"/"closed" | "on"/"off" | mode name
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class Advance:
    t_ms: int
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class EepromLoad:
    path: str
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class ConfigSet:
    key: str
    value: str
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class ScenarioScript:
    setup: tuple = ()
    timeline: tuple = ()

    def to_text(self) -> str:
        """Print the parsed script; re-parsing the result round-trips."""
        lines = []
        for d in self.setup:
            if isinstance(d, EepromLoad):
                lines.append(f"eeprom load {d.path}")
            else:
                lines.append(f"config {d.key} {d.value}")
        for d in self.timeline:
            if isinstance(d, KeyEvent):
                lines.append(f"at {d.t_ms} {d.action} {d.sym}")
            elif isinstance(d, Advance):
                lines.append(f"at {d.t_ms} advance")
            elif d.kind == "lcd":
                row, text = d.expected
                lines.append(f'at {d.t_ms} expect lcd {row} "{text}"')
            else:
                lines.append(f"at {d.t_ms} expect {d.kind} {d.expected}")
        return "\n".join(lines) + "\n"


@dataclass
class RunReport:
    passed: bool
    failures: list            # (line, expected, actual)
    lcd: list                 # final frame rows
    lock: str
    buzzer: str
    t_ms: int
    scans_executed: int
    event_log: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failures": [{"line": ln, "expected": exp, "actual": act}
                         for ln, exp, act in self.failures],
            "lcd": self.lcd,
            "lock": self.lock,
            "buzzer": self.buzzer,
            "t_ms": self.t_ms,
            "scans_executed": self.scans_executed,
        }


def parse_scenario(text: str) -> ScenarioScript:
    setup: list = []
    timeline: list = []
    last_t = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            tokens = shlex.split(line, posix=True)
        except ValueError as exc:
            raise ScenarioSyntaxError(lineno, f"bad quoting: {exc}")
        head = tokens[0]
        if head == "eeprom":
            if len(tokens) != 3 or tokens[1] != "load":
                raise ScenarioSyntaxError(lineno, "expected: eeprom load <path>")
            if timeline:
                raise ScenarioSyntaxError(lineno, "eeprom load must precede the timeline")
            setup.append(EepromLoad(tokens[2], lineno))
        elif head == "config":
            if len(tokens) != 3:
                raise ScenarioSyntaxError(lineno, "expected: config <key> <value>")
            if timeline:
                raise ScenarioSyntaxError(lineno, "config must precede the timeline")
            setup.append(ConfigSet(tokens[1], tokens[2], lineno))
        elif head == "at":
            directive = _parse_at(tokens, lineno)
            t = directive[0].t_ms if isinstance(directive, tuple) else directive.t_ms
            if t < last_t:
                raise ScenarioSyntaxError(lineno, f"timestamp {t} decreases (last was {last_t})")
            last_t = t
            if isinstance(directive, tuple):
                timeline.extend(directive)
            else:
                timeline.append(directive)
        else:
            raise ScenarioSyntaxError(lineno, f"unknown directive {head!r}")
    return ScenarioScript(tuple(setup), tuple(timeline))


def _parse_at(tokens, lineno):
    if len(tokens) < 3:
        raise ScenarioSyntaxError(lineno, "expected: at <ms> <directive>")
    try:
        t_ms = int(tokens[1])
    except ValueError:
        raise ScenarioSyntaxError(lineno, f"bad timestamp {tokens[1]!r}")
    if t_ms < 0:
        raise ScenarioSyntaxError(lineno, "timestamp must be >= 0")
    verb = tokens[2]
    rest = tokens[3:]
    if verb in ("press", "release", "tap"):
        if len(rest) != 1:
            raise ScenarioSyntaxError(lineno, f"expected: at <ms> {verb} <sym>")
        sym = rest[0]
        if sym not in KEY_SYMBOLS:
            raise ScenarioSyntaxError(lineno, f"unknown key {sym!r}")
        if verb == "tap":
            return (KeyEvent(t_ms, "press", sym, lineno),
                    KeyEvent(t_ms + TAP_GAP_DEFAULT_MS, "release", sym, lineno))
        return KeyEvent(t_ms, verb, sym, lineno)
    if verb == "advance":
        if rest:
            raise ScenarioSyntaxError(lineno, "expected: at <ms> advance")
        return Advance(t_ms, lineno)
    if verb == "expect":
        return _parse_expect(t_ms, rest, lineno)
    raise ScenarioSyntaxError(lineno, f"unknown directive {verb!r}")


def _parse_expect(t_ms, rest, lineno):
    if not rest:
        raise ScenarioSyntaxError(lineno, "expected: at <ms> expect <what> ...")
    what = rest[0]
    if what == "lcd":
        if len(rest) != 3:
            raise ScenarioSyntaxError(lineno, 'expected: at <ms> expect lcd <row> "<text>"')
        if rest[1] not in ("0", "1"):
            raise ScenarioSyntaxError(lineno, f"lcd row must be 0 or 1, got {rest[1]!r}")
        text = rest[2]
        if len(text) > VISIBLE_COLS:
            raise ScenarioSyntaxError(lineno, f"lcd text longer than {VISIBLE_COLS} columns")
        return Expect(t_ms, "lcd", (int(rest[1]), text.ljust(VISIBLE_COLS)), lineno)
    if what == "lock":
        if len(rest) != 2 or rest[1] not in ("open", "closed"):
            raise ScenarioSyntaxError(lineno, "expected: expect lock <open|closed>")
        return Expect(t_ms, "lock", rest[1], lineno)
    if what == "buzzer":
        if len(rest) != 2 or rest[1] not in ("on", "off"):
            raise ScenarioSyntaxError(lineno, "expected: expect buzzer <on|off>")
        return Expect(t_ms, "buzzer", rest[1], lineno)
    if what == "mode":
        if len(rest) != 2 or rest[1] not in MODE_NAMES:
            raise ScenarioSyntaxError(lineno, f"expected: expect mode <{'|'.join(MODE_NAMES)}>")
        return Expect(t_ms, "mode", rest[1], lineno)
    raise ScenarioSyntaxError(lineno, f"unknown expectation {what!r}")


class _RunObserver:
    """Per-tick watcher: collects the event log and enforces the masking
    invariant (row 1 never shows a password symbol while entering)."""

    def __init__(self):
        self.events: list = []
        self.failures: list = []
        self._last: dict | None = None

    def __call__(self, sim: LockSimulation) -> None:
        snap = sim.snapshot()
        if snap["mode"] in ("SCANNING", "ENTERING", "CHANGE_ENTRY"):
            row1 = snap["lcd"][1]
            if any(ch not in "* " for ch in row1):
                if not any(f[1] == "masked row 1" for f in self.failures):
                    self.failures.append((0, "masked row 1", repr(row1)))
        if self._last is not None:
            for key in ("lcd", "lock", "buzzer", "mode"):
                if snap[key] != self._last[key]:
                    self.events.append((snap["t_ms"], key, snap[key]))
        self._last = snap


def run(script: ScenarioScript, seed: int = 0,
        config: SimConfig | None = None,
        eeprom_image: bytes | None = None,
        on_sim=None) -> RunReport:
    """Execute a script; same script + seed + config gives an identical
    report.  Assertion failures are data in the report, not exceptions.
    on_sim, when given, receives the simulation before it runs (trace taps)."""
    cfg = replace(config) if config is not None else SimConfig()
    image = eeprom_image
    for d in script.setup:
        if isinstance(d, ConfigSet):
            try:
                cfg.set(d.key, d.value)
            except ConfigError as exc:
                raise ScenarioSyntaxError(d.line, str(exc))
        else:
            image = load_image(d.path)

    sim = LockSimulation(cfg, image, seed)
    if on_sim is not None:
        on_sim(sim)
    observer = _RunObserver()
    sim.add_tick_observer(observer)
    sim.boot()

    # Key events are pre-scheduled on the switch event queue (a tap's release
    # may land between later directives); the run then advances through the
    # checkpoints in script order.
    failures: list = []
    for d in script.timeline:
        if isinstance(d, KeyEvent):
            if d.action == "press":
                sim.press(d.sym, at=d.t_ms * 1000)
            else:
                sim.release(d.sym, at=d.t_ms * 1000)
            observer.events.append((d.t_ms, "key", f"{d.action} {d.sym}"))
    for d in script.timeline:
        if isinstance(d, KeyEvent):
            continue
        sim.advance_to_us(d.t_ms * 1000)
        if isinstance(d, Expect):
            _check(sim, d, failures)

    failures.extend(observer.failures)
    snap = sim.snapshot()
    return RunReport(
        passed=not failures,
        failures=failures,
        lcd=snap["lcd"],
        lock=snap["lock"],
        buzzer=snap["buzzer"],
        t_ms=snap["t_ms"],
        scans_executed=sim.firmware.scans_executed,
        event_log=observer.events,
    )


def _check(sim: LockSimulation, d: Expect, failures: list) -> None:
    snap = sim.snapshot()
    if d.kind == "lcd":
        row, text = d.expected
        actual = snap["lcd"][row]
        if actual != text:
            failures.append((d.line, f'lcd {row} "{text}"', f'"{actual}"'))
    elif d.kind == "lock":
        if snap["lock"] != d.expected:
            failures.append((d.line, f"lock {d.expected}", f"lock {snap['lock']}"))
    elif d.kind == "buzzer":
        if snap["buzzer"] != d.expected:
            failures.append((d.line, f"buzzer {d.expected}", f"buzzer {snap['buzzer']}"))
    elif d.kind == "mode":
        if snap["mode"] != d.expected:
            failures.append((d.line, f"mode {d.expected}", f"mode {snap['mode']}"))
