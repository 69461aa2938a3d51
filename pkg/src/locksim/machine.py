"""Whole-board assembly: fabric, keypad, LCD, EEPROM and firmware wired up,
with the tick loop that interleaves scheduled switch events and firmware
main-loop iterations on one timeline."""

from __future__ import annotations

import random

from .config import SimConfig
from .eeprom import IDLE, Eeprom
from .firmware import LcdBusDriver, LockFirmware
from .gpio import HIGH, LOW, PinFabric
from .hd44780 import COMMAND, DATA, Hd44780, LcdBusSample
from .keypad import FaultModel, KeypadMatrix, random_bounce


class LockSimulation:
    """One complete lock on a virtual bench.

    All mutation funnels through this object on a single logical timeline;
    it is safe to hand the whole simulation between execution contexts but
    never to mutate it from two at once.
    """

    def __init__(self, config: SimConfig | None = None,
                 eeprom_image: bytes | None = None, seed: int = 0):
        self.config = config or SimConfig()
        self.rng = random.Random(seed)
        self.fabric = PinFabric()
        fault = FaultModel(coupled_inputs_enabled=self.config.fault_model,
                           corruption_rule=self.config.corruption_rule)
        self.keypad = KeypadMatrix(self.fabric, fault,
                                   row_pins=self.config.pins.rows,
                                   col_pins=self.config.pins.cols)
        self.lcd = Hd44780()
        self.eeprom = Eeprom(eeprom_image)
        self.display = LcdBusDriver(self.fabric, self.config.pins)
        self.firmware = LockFirmware(self.fabric, self.keypad, self.eeprom,
                                     self.config, self.display)
        self._tick_observers: list = []
        self._next_tick_us = 0
        # Board reset posture: E held low before the controller starts, so
        # the first firmware drive of the line is not seen as a clock edge.
        self.fabric.make_output(self.config.pins.lcd_e, LOW)
        self.fabric.add_level_listener(self.config.pins.lcd_e, self._on_e_edge)

    # -- LCD bus tap -----------------------------------------------------------

    def _on_e_edge(self, t_us: int, old: int, new: int) -> None:
        if not (old == HIGH and new == LOW):
            return
        pins = self.config.pins
        rs = DATA if self.fabric.sample(pins.lcd_rs) == HIGH else COMMAND
        nibble = 0
        for i, pin in enumerate(pins.lcd_db):
            nibble |= self.fabric.sample(pin) << i
        self.lcd.enable_falling_edge(LcdBusSample(rs, nibble, t_us))

    # -- lifecycle ---------------------------------------------------------------

    def boot(self) -> None:
        self.firmware.boot()
        self._next_tick_us = self.fabric.now_us + self.config.tick_us

    def reboot(self) -> None:
        """Power-cycle everything except the EEPROM image."""
        self.fabric.cancel_scheduled()
        self.keypad.release_all()
        self.lcd.reset()
        self.eeprom.arm_state = IDLE
        self.boot()

    def add_tick_observer(self, fn) -> None:
        """fn(sim) runs after every firmware tick."""
        self._tick_observers.append(fn)

    # -- time --------------------------------------------------------------------

    @property
    def now_us(self) -> int:
        return self.fabric.now_us

    def advance_to_us(self, target: int) -> None:
        while self._next_tick_us <= target:
            t = self._next_tick_us
            self.fabric.advance_to(t)
            self.firmware.firmware_tick(t)
            self._next_tick_us += self.config.tick_us
            for fn in self._tick_observers:
                fn(self)
        self.fabric.advance_to(target)

    def advance_ms(self, ms: int) -> None:
        self.advance_to_us(self.fabric.now_us + ms * 1000)

    # -- key input -----------------------------------------------------------------

    def press(self, sym: str, at: int | None = None) -> None:
        self.keypad.press(sym, at, self._bounce(True))

    def release(self, sym: str, at: int | None = None) -> None:
        self.keypad.release(sym, at, self._bounce(False))

    def tap(self, sym: str, at: int | None = None) -> None:
        start = self.fabric.now_us if at is None else at
        self.keypad.press(sym, start, self._bounce(True))
        self.keypad.release(sym, start + self.config.tap_gap_us, self._bounce(False))

    def _bounce(self, final_closed: bool):
        if self.config.bounce_profile == "random":
            return random_bounce(self.rng, final_closed)
        return None

    # -- observation ----------------------------------------------------------------

    def snapshot(self) -> dict:
        fw = self.firmware
        frame = self.lcd.frame()
        return {
            "lcd": list(frame.rows),
            "lock": "open" if fw.lock_open else "closed",
            "buzzer": "on" if fw.buzzer_on else "off",
            "mode": fw.mode.value,
            "t_ms": self.fabric.now_us // 1000,
            "sleeping": fw.sleeping,
            "attempts": fw.attempts,
        }

    def load_eeprom_image(self, image: bytes) -> None:
        self.eeprom.load_bytes(image)
