"""Simulation configuration: timing knobs, scan strategy, fault model, pin map.

Config files are plain ``key = value`` text; the scenario ``config`` directive
sets the same keys.  Pins are named like ``B3``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .gpio import PinId

PER_PIN = "per_pin"
CONVENTIONAL = "conventional"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class PinMap:
    rows: tuple = tuple(PinId("B", r) for r in range(4))
    cols: tuple = tuple(PinId("B", 4 + c) for c in range(4))
    lcd_db: tuple = tuple(PinId("A", i) for i in range(4))  # DB4..DB7
    lcd_rs: PinId = PinId("A", 6)
    lcd_e: PinId = PinId("A", 7)
    actuator: PinId = PinId("A", 4)  # lock relay (steady high) + alarm (2 Hz)


@dataclass
class SimConfig:
    debounce_ms: int = 20
    idle_timeout_ms: int = 5000
    alarm_duration_ms: int = 10000
    message_ms: int = 2000
    tick_us: int = 1000
    tap_gap_ms: int = 60
    scan_strategy: str = PER_PIN
    fault_model: bool = False
    corruption_rule: str = "force_low"
    bounce_profile: str = "clean"   # or "random": seeded chatter on every press
    password_length: int = 10
    alarm_latching: bool = False
    pins: PinMap = field(default_factory=PinMap)

    _INT_KEYS = ("debounce_ms", "idle_timeout_ms", "alarm_duration_ms",
                 "message_ms", "tick_us", "tap_gap_ms", "password_length")
    _BOOL_KEYS = ("fault_model", "alarm_latching")
    _CHOICE_KEYS = {
        "scan_strategy": (PER_PIN, CONVENTIONAL),
        "corruption_rule": ("force_low", "follow_neighbor"),
        "bounce_profile": ("clean", "random"),
    }

    def set(self, key: str, value: str) -> None:
        key = key.strip()
        value = value.strip()
        if key in self._INT_KEYS:
            try:
                n = int(value)
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {value!r}")
            if n < 0:
                raise ConfigError(f"{key}: must be >= 0")
            setattr(self, key, n)
        elif key in self._BOOL_KEYS:
            low = value.lower()
            if low in ("on", "true", "1", "yes"):
                setattr(self, key, True)
            elif low in ("off", "false", "0", "no"):
                setattr(self, key, False)
            else:
                raise ConfigError(f"{key}: expected on/off, got {value!r}")
        elif key in self._CHOICE_KEYS:
            if value not in self._CHOICE_KEYS[key]:
                raise ConfigError(f"{key}: expected one of "
                                  f"{self._CHOICE_KEYS[key]}, got {value!r}")
            setattr(self, key, value)
        elif key.startswith("pin."):
            self._set_pin(key[4:], value)
        else:
            raise ConfigError(f"unknown config key {key!r}")

    def _set_pin(self, name: str, value: str) -> None:
        try:
            pin = PinId.parse(value)
        except ValueError as exc:
            raise ConfigError(str(exc))
        pins = self.pins
        if name.startswith("row") and name[3:] in "0123" and len(name) == 4:
            rows = list(pins.rows)
            rows[int(name[3])] = pin
            self.pins = replace(pins, rows=tuple(rows))
        elif name.startswith("col") and name[3:] in "0123" and len(name) == 4:
            cols = list(pins.cols)
            cols[int(name[3])] = pin
            self.pins = replace(pins, cols=tuple(cols))
        elif name.startswith("lcd_db") and name[6:] in "4567" and len(name) == 7:
            db = list(pins.lcd_db)
            db[int(name[6]) - 4] = pin
            self.pins = replace(pins, lcd_db=tuple(db))
        elif name in ("lcd_rs", "lcd_e", "actuator"):
            self.pins = replace(pins, **{name: pin})
        else:
            raise ConfigError(f"unknown pin name {name!r}")

    # derived microsecond values used by the firmware
    @property
    def debounce_us(self) -> int:
        return self.debounce_ms * 1000

    @property
    def idle_timeout_us(self) -> int:
        return self.idle_timeout_ms * 1000

    @property
    def alarm_duration_us(self) -> int:
        return self.alarm_duration_ms * 1000

    @property
    def message_us(self) -> int:
        return self.message_ms * 1000

    @property
    def tap_gap_us(self) -> int:
        return self.tap_gap_ms * 1000


def parse_config_text(text: str, base: SimConfig | None = None) -> SimConfig:
    cfg = base if base is not None else SimConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        try:
            cfg.set(key, value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}")
    return cfg


def load_config_file(path, base: SimConfig | None = None) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base)
