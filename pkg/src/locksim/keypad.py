"""Electrical model of the 4x4 keypad on port B.

Rows sit on B0..B3, columns on B4..B7; each key is a switch shorting its row
pin to its column pin.  Presses and releases can carry explicit bounce trains,
and a coupled-input fault model can corrupt column reads whenever more than
one column pin is configured as input at the same time.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gpio import INPUT, LOW, PinFabric, PinId

KEY_GRID = (
    ("1", "2", "3", "A"),
    ("4", "5", "6", "B"),
    ("7", "8", "9", "C"),
    ("*", "0", "#", "D"),
)
KEY_SYMBOLS = tuple(sym for row in KEY_GRID for sym in row)

ROW_PINS = tuple(PinId("B", r) for r in range(4))
COL_PINS = tuple(PinId("B", 4 + c) for c in range(4))

FORCE_LOW = "force_low"
FOLLOW_NEIGHBOR = "follow_neighbor"


class UnknownKey(Exception):
    pass


@dataclass(frozen=True)
class KeyPosition:
    row: int
    col: int

    def __post_init__(self):
        if not (0 <= self.row <= 3 and 0 <= self.col <= 3):
            raise ValueError(f"no key at ({self.row},{self.col})")


def keymap(pos: KeyPosition) -> str:
    return KEY_GRID[pos.row][pos.col]


def key_position(sym: str) -> KeyPosition:
    for r, row in enumerate(KEY_GRID):
        for c, s in enumerate(row):
            if s == sym:
                return KeyPosition(r, c)
    raise UnknownKey(sym)


@dataclass(frozen=True)
class BounceProfile:
    """Contact chatter: (offset_us, closed) transitions, offsets strictly
    increasing, the last entry being the final stable state."""

    transitions: tuple

    def __post_init__(self):
        if not self.transitions:
            raise ValueError("empty bounce profile")
        offs = [t[0] for t in self.transitions]
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise ValueError("bounce offsets must be strictly increasing")

    @property
    def span_us(self) -> int:
        return self.transitions[-1][0]

    @property
    def final_closed(self) -> bool:
        return self.transitions[-1][1]


def random_bounce(rng, final_closed: bool, max_span_us: int = 5000,
                  min_transitions: int = 2, max_transitions: int = 10) -> BounceProfile:
    """Seeded bounce generator: N in [2,10] alternating transitions ending in
    the requested stable state, confined to max_span_us."""
    n = rng.randint(min_transitions, max_transitions)
    offsets = sorted(rng.sample(range(0, max_span_us), n))
    states = [final_closed if (n - 1 - i) % 2 == 0 else not final_closed
              for i in range(n)]
    return BounceProfile(tuple(zip(offsets, states)))


@dataclass
class FaultModel:
    """The coupled-input column fault: with >= 2 column pins configured as
    inputs simultaneously, their reads are corrupted per the rule."""

    coupled_inputs_enabled: bool = False
    corruption_rule: str = FORCE_LOW


class KeypadMatrix:
    def __init__(self, fabric: PinFabric, fault: FaultModel | None = None,
                 row_pins=ROW_PINS, col_pins=COL_PINS):
        self.fabric = fabric
        self.fault = fault or FaultModel()
        self.row_pins = tuple(row_pins)
        self.col_pins = tuple(col_pins)
        self.ignored_ops = 0
        self._pressed = {sym: False for sym in KEY_SYMBOLS}
        for sym in KEY_SYMBOLS:
            pos = key_position(sym)
            fabric.register_switch(self.switch_id(sym),
                                   self.row_pins[pos.row], self.col_pins[pos.col])

    @staticmethod
    def switch_id(sym: str) -> str:
        return f"key_{sym}"

    def is_pressed(self, sym: str) -> bool:
        """Logical (requested final) state of a key, schedule included."""
        if sym not in self._pressed:
            raise UnknownKey(sym)
        return self._pressed[sym]

    def release_all(self) -> None:
        for sym in KEY_SYMBOLS:
            if self._pressed[sym]:
                self.release(sym)

    def press(self, sym: str, at: int | None = None,
              bounce: BounceProfile | None = None) -> None:
        self._transition(sym, True, at, bounce)

    def release(self, sym: str, at: int | None = None,
                bounce: BounceProfile | None = None) -> None:
        self._transition(sym, False, at, bounce)

    def _transition(self, sym, closed, at, bounce):
        if sym not in self._pressed:
            raise UnknownKey(sym)
        if self._pressed[sym] == closed:
            self.ignored_ops += 1  # already in the requested final state
            return
        if bounce is not None and bounce.final_closed != closed:
            raise ValueError("bounce profile does not end in the requested state")
        if at is None:
            at = self.fabric.now_us
        swid = self.switch_id(sym)
        if bounce is None:
            self.fabric.set_switch(swid, closed, at)
        else:
            for off, state in bounce.transitions:
                self.fabric.set_switch(swid, state, at + off)
        self._pressed[sym] = closed

    def corrupted_sample(self, pin: PinId) -> int:
        """Column read as the firmware sees it: defers to the true resolved
        level unless the fault model applies to this sample."""
        true_level = self.fabric.sample(pin)
        if not self.fault.coupled_inputs_enabled or pin not in self.col_pins:
            return true_level
        input_cols = [p for p in self.col_pins
                      if self.fabric.pin_config(p).direction == INPUT]
        if len(input_cols) < 2 or pin not in input_cols:
            return true_level
        if self.fault.corruption_rule == FORCE_LOW:
            # One column dragged low disturbs every simultaneously-input column.
            if any(self.fabric.sample(p) == LOW for p in input_cols):
                return LOW
            return true_level
        # FOLLOW_NEIGHBOR: the pin reads its next input-configured neighbour.
        i = input_cols.index(pin)
        return self.fabric.sample(input_cols[(i + 1) % len(input_cols)])
