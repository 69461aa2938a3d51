"""The lock controller as a portable state machine over the emulated hardware.

One firmware_tick is one main-loop iteration: either a sleep/wake check or a
full keypad scan followed by debounce and at most one symbol of processing.
The LCD is driven through a small display strategy so the state machine can
also be exercised without any electrical fabric attached (model checking,
unit tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .config import PER_PIN, PinMap, SimConfig
from .eeprom import PASSWORD_ADDR, Eeprom
from .gpio import HIGH, LOW, PinFabric
from .keypad import KeyPosition, KeypadMatrix, keymap

PROMPT = "Enter Password:"
MSG_OK = "verify successfully"
MSG_FAIL = "Wrong Password!"
PROMPT_CHANGE = "New Password:"
MSG_CHANGED = "Password Changed"
MSG_SHORT = "Need 10 Symbols"

ENTRY_SYMBOLS = frozenset("0123456789*#")
MAX_ATTEMPTS = 3
ALARM_HALF_PERIOD_US = 250_000  # 2 Hz buzzer square wave


class Mode(Enum):
    BOOT = "BOOT"
    SLEEPING = "SLEEPING"
    SCANNING = "SCANNING"
    ENTERING = "ENTERING"
    VERIFYING = "VERIFYING"
    UNLOCKED = "UNLOCKED"
    CHANGE_ENTRY = "CHANGE_ENTRY"
    ALARM = "ALARM"


class ChangeRejected(Exception):
    """New password shorter than the required length; nothing was written."""


@dataclass
class ScanCursor:
    key_index: int = 0
    row: int = 0
    col: int = 0
    working_value: int | None = None


@dataclass
class VerifyCursor:
    count: int = 0
    pos1: int = 0
    pos2: int = 0
    data1: int | None = None
    data2: int | None = None
    comparisons: int = 0


class NullDisplay:
    """Display stub for driving the state machine without hardware."""

    def init(self) -> None:
        pass

    def prompt(self, text: str) -> None:
        pass

    def stars(self, count: int) -> None:
        pass


class LcdBusDriver:
    """Writes to the LCD over the pin fabric with the two-nibble protocol:
    RS set while E is low, nibble put while E is high, latched on the
    falling edge, high nibble first."""

    def __init__(self, fabric: PinFabric, pins: PinMap):
        self.fabric = fabric
        self.pins = pins
        self._stars = 0

    def init(self) -> None:
        f, p = self.fabric, self.pins
        f.drive(p.lcd_e, LOW)
        f.drive(p.lcd_rs, LOW)
        # Lone high-half of the 4-bit function set, then the full setup.
        f.drive(p.lcd_e, HIGH)
        self._put_nibble(0x2)
        f.drive(p.lcd_e, LOW)
        for cmd in (0x28, 0x0C, 0x06, 0x01):
            self.command(cmd)
        self._stars = 0

    def command(self, byte: int) -> None:
        self._send(False, byte)

    def data(self, byte: int) -> None:
        self._send(True, byte)

    def prompt(self, text: str) -> None:
        self.command(0x01)  # clear resets the address counter to row 0
        for ch in text:
            self.data(ord(ch))
        self._stars = 0

    def stars(self, count: int) -> None:
        while self._stars < count:
            self.command(0x80 | (0x40 + self._stars))
            self.data(ord("*"))
            self._stars += 1
        while self._stars > count:
            self._stars -= 1
            self.command(0x80 | (0x40 + self._stars))
            self.data(ord(" "))

    def _send(self, rs_data: bool, byte: int) -> None:
        f, p = self.fabric, self.pins
        f.drive(p.lcd_e, LOW)
        f.drive(p.lcd_rs, HIGH if rs_data else LOW)
        f.drive(p.lcd_e, HIGH)
        self._put_nibble(byte >> 4)
        f.drive(p.lcd_e, LOW)
        f.drive(p.lcd_e, HIGH)
        self._put_nibble(byte & 0xF)
        f.drive(p.lcd_e, LOW)

    def _put_nibble(self, nibble: int) -> None:
        for i, pin in enumerate(self.pins.lcd_db):
            self.fabric.drive(pin, (nibble >> i) & 1)


class LockFirmware:
    """Scanning, debounce, password entry/verification, change flow, alarm,
    sleep/wake.  fabric and keypad may be None to drive the pure state
    machine directly through feed_symbol()."""

    def __init__(self, fabric: PinFabric | None, keypad: KeypadMatrix | None,
                 eeprom: Eeprom, config: SimConfig | None = None,
                 display=None):
        self.fabric = fabric
        self.keypad = keypad
        self.eeprom = eeprom
        self.config = config or SimConfig()
        self.display = display if display is not None else NullDisplay()
        self.mode = Mode.BOOT
        self.attempts = 0
        self.lock_open = False
        self.scans_executed = 0
        self.symbol_log: list[tuple[int, str]] = []
        self.scan_cursor = ScanCursor()
        self.verify_cursor = VerifyCursor()
        self._buffer: list[str] = []
        self._now = 0
        self._idle_since = 0
        self._sleep_mark = 0
        self._message_until: int | None = None
        self._alarm_start = 0
        self._alarm_until: int | None = None
        self._held_pos: KeyPosition | None = None
        self._candidate: tuple[KeyPosition, int] | None = None

    # -- observable state ---------------------------------------------------

    @property
    def password_buffer(self) -> tuple:
        return tuple(self._buffer)

    @property
    def buzzer_on(self) -> bool:
        return self.mode is Mode.ALARM

    @property
    def sleeping(self) -> bool:
        return self.mode is Mode.SLEEPING

    # -- lifecycle ------------------------------------------------------------

    def boot(self) -> None:
        now = self.fabric.now_us if self.fabric else 0
        self._now = now
        pins = self.config.pins
        if self.fabric:
            for pin in pins.lcd_db:
                self.fabric.make_output(pin, LOW)
            self.fabric.make_output(pins.lcd_rs, LOW)
            self.fabric.make_output(pins.lcd_e, LOW)
            self.fabric.make_output(pins.actuator, LOW)
            for pin in pins.rows:
                self.fabric.make_output(pin, LOW)
            self._set_scan_posture()
        self.mode = Mode.SCANNING
        self.attempts = 0
        self.lock_open = False
        self.scans_executed = 0
        self.symbol_log = []
        self._buffer = []
        self._idle_since = now
        self._message_until = None
        self._alarm_until = None
        self._held_pos = None
        self._candidate = None
        self.display.init()
        self.display.prompt(PROMPT)

    def firmware_tick(self, now: int) -> None:
        self._now = now
        if self.mode is Mode.SLEEPING:
            if not self.fabric.portb_changed_since(self._sleep_mark):
                return
            self._wake(now)
        self._service_timers(now)
        if self.mode is Mode.ALARM:
            self._drive_alarm(now)
            return
        self.scans_executed += 1
        pos = self.row_scan()
        if pos is not None:
            self._idle_since = now
        sym = self._debounce(pos, now)
        if sym is not None:
            self.symbol_log.append((now, sym))
            self.feed_symbol(sym, now)
        if (self.mode is Mode.SCANNING and not self._buffer
                and now - self._idle_since >= self.config.idle_timeout_us):
            self._enter_sleep()

    # -- scanning ---------------------------------------------------------------

    def row_scan(self) -> KeyPosition | None:
        pins = self.config.pins
        fabric = self.fabric
        found = None
        for r in range(4):
            for rr in range(4):
                fabric.drive(pins.rows[rr], LOW if rr == r else HIGH)
            self.scan_cursor.row = r
            self.scan_cursor.key_index = 4 * r
            col = self.col_scan(r)
            if col is not None:
                found = KeyPosition(r, col)
                break
        for pin in pins.rows:
            fabric.drive(pin, LOW)
        return found

    def col_scan(self, row: int) -> int | None:
        pins = self.config.pins
        fabric = self.fabric
        if self.config.scan_strategy == PER_PIN:
            # One column at a time becomes an input; the rest stay outputs,
            # so a change on one column cannot disturb another.
            for c in range(4):
                fabric.make_input(pins.cols[c], pullup=True)
                level = self.keypad.corrupted_sample(pins.cols[c])
                fabric.make_output(pins.cols[c], HIGH)
                if level == LOW:
                    self._note_col(row, c)
                    return c
            return None
        # Conventional: all four columns are inputs for the whole scan.
        for c in range(4):
            fabric.make_input(pins.cols[c], pullup=True)
        for c in range(4):
            if self.keypad.corrupted_sample(pins.cols[c]) == LOW:
                self._note_col(row, c)
                return c
        return None

    def _note_col(self, row: int, col: int) -> None:
        cur = self.scan_cursor
        cur.col = col
        cur.working_value = col
        cur.key_index = 4 * row + col

    def find_key(self, cursor: ScanCursor) -> str:
        return keymap(KeyPosition(cursor.row, cursor.col))

    def _debounce(self, pos: KeyPosition | None, now: int) -> str | None:
        if pos is None:
            self._held_pos = None
            self._candidate = None
            return None
        if pos == self._held_pos:
            return None
        if self._candidate is None or self._candidate[0] != pos:
            self._candidate = (pos, now)
            return None
        if self._held_pos is not None:
            return None  # a new symbol requires full release first
        if now - self._candidate[1] >= self.config.debounce_us:
            self._held_pos = pos
            self._candidate = None
            self.scan_cursor.row = pos.row
            self._note_col(pos.row, pos.col)
            return self.find_key(self.scan_cursor)
        return None

    # -- symbol handling -----------------------------------------------------

    def feed_symbol(self, sym: str, now: int) -> None:
        """Deliver one debounced symbol, honoring alarm and message gating."""
        self._now = max(self._now, now)
        self._service_timers(self._now)
        if self.mode in (Mode.ALARM, Mode.SLEEPING):
            return
        if self._message_until is not None and self._now < self._message_until:
            return  # the firmware is busy showing a message
        self.handle_symbol(sym)

    def handle_symbol(self, sym: str) -> None:
        mode = self.mode
        if mode in (Mode.SCANNING, Mode.ENTERING):
            if sym in ENTRY_SYMBOLS:
                self._append_symbol(sym)
                self.mode = Mode.ENTERING
            elif sym == "A":
                self._backspace()
            elif sym == "D":
                self._submit_entry()
        elif mode is Mode.UNLOCKED:
            if sym == "B":
                self._relock()
            elif sym == "C":
                self.mode = Mode.CHANGE_ENTRY
                self._buffer.clear()
                self.display.prompt(PROMPT_CHANGE)
        elif mode is Mode.CHANGE_ENTRY:
            if sym in ENTRY_SYMBOLS:
                self._append_symbol(sym)
            elif sym == "A":
                self._backspace()
            elif sym == "D":
                self._submit_change()

    def _append_symbol(self, sym: str) -> None:
        if len(self._buffer) < self.config.password_length:
            self._buffer.append(sym)
            self.display.stars(len(self._buffer))

    def _backspace(self) -> None:
        if self._buffer:
            self._buffer.pop()
            self.display.stars(len(self._buffer))

    # -- verification ---------------------------------------------------------

    def _submit_entry(self) -> None:
        self.mode = Mode.VERIFYING
        ok = False
        if len(self._buffer) == self.config.password_length:
            entered = bytes(ord(s) for s in self._buffer)
            stored = self.read_password_from_eeprom()
            ok = self.verify_password(entered, stored)
        self.on_verify_result(ok)

    def verify_password(self, entered, stored) -> bool:
        """Compare the two symbol arrays through a single shared pointer that
        alternates between them, saving and restoring its position, counting
        down from the password length.  True only when every pair matched."""
        pwlen = self.config.password_length
        cur = VerifyCursor()
        self.verify_cursor = cur
        if len(entered) != pwlen or len(stored) != pwlen:
            return False
        mem = list(entered) + list(stored)
        cur.count = pwlen
        fsr = 0
        save2 = 0
        first_pass = True
        while True:
            cur.data1 = mem[fsr]
            fsr += 1
            save1 = cur.pos1 = fsr
            if first_pass:
                fsr = pwlen  # start of the second array
                first_pass = False
            else:
                fsr = save2
            cur.data2 = mem[fsr]
            fsr += 1
            save2 = cur.pos2 = fsr
            fsr = save1
            cur.comparisons += 1
            if cur.data1 != cur.data2:
                return False
            cur.count -= 1
            if cur.count == 0:
                return True

    def on_verify_result(self, ok: bool) -> None:
        self._buffer.clear()
        if ok:
            self.attempts = 0
            self.mode = Mode.UNLOCKED
            self._set_lock(True)
            self._message_until = None
            self.display.prompt(MSG_OK)
            return
        self.attempts += 1
        self.display.prompt(MSG_FAIL)
        if self.attempts >= MAX_ATTEMPTS:
            self.mode = Mode.ALARM
            self._alarm_start = self._now
            if self.config.alarm_latching:
                self._alarm_until = None
            else:
                self._alarm_until = self._now + self.config.alarm_duration_us
            self._message_until = None
            self._drive_alarm(self._now)
        else:
            self.mode = Mode.SCANNING
            self._message_until = self._now + self.config.message_us

    # -- EEPROM password -----------------------------------------------------

    def read_password_from_eeprom(self) -> bytes:
        count = self.config.password_length
        addr = PASSWORD_ADDR
        out = bytearray()
        while count:
            out.append(self.eeprom.read(addr))
            addr += 1
            count -= 1
        return bytes(out)

    def write_password_to_eeprom(self, symbols) -> None:
        pwlen = self.config.password_length
        if len(symbols) < pwlen:
            raise ChangeRejected(f"{len(symbols)} symbols, need {pwlen}")
        addr = PASSWORD_ADDR
        count = pwlen
        i = 0
        while count:
            value = ord(symbols[i])
            i += 1
            self.eeprom.write_control(0xAA)
            self.eeprom.write_control(0x55)
            self.eeprom.write(addr, value)
            addr += 1
            count -= 1

    def _submit_change(self) -> None:
        try:
            self.write_password_to_eeprom(list(self._buffer))
        except ChangeRejected:
            self._buffer.clear()
            self.display.prompt(MSG_SHORT)
            self._message_until = self._now + self.config.message_us
            return
        self._buffer.clear()
        self.mode = Mode.UNLOCKED
        self.display.prompt(MSG_CHANGED)
        self._message_until = self._now + self.config.message_us

    # -- lock, alarm, sleep ----------------------------------------------------

    def _set_lock(self, open_: bool) -> None:
        self.lock_open = open_
        if self.fabric:
            self.fabric.drive(self.config.pins.actuator, HIGH if open_ else LOW)

    def _relock(self) -> None:
        self._set_lock(False)
        self._buffer.clear()
        self.mode = Mode.SCANNING
        self._message_until = None
        self.display.prompt(PROMPT)

    def _drive_alarm(self, now: int) -> None:
        if self.fabric is None:
            return
        phase_high = ((now - self._alarm_start) // ALARM_HALF_PERIOD_US) % 2 == 0
        self.fabric.drive(self.config.pins.actuator, HIGH if phase_high else LOW)

    def _service_timers(self, now: int) -> None:
        if self.mode is Mode.ALARM:
            if self._alarm_until is not None and now >= self._alarm_until:
                self.attempts = 0
                self.mode = Mode.SCANNING
                self._message_until = None
                if self.fabric:
                    self.fabric.drive(self.config.pins.actuator, LOW)
                self._restore_display()
            return
        if self._message_until is not None and now >= self._message_until:
            self._message_until = None
            self._restore_display()

    def _restore_display(self) -> None:
        if self.mode in (Mode.SCANNING, Mode.ENTERING):
            self.display.prompt(PROMPT)
            self.display.stars(len(self._buffer))
        elif self.mode is Mode.CHANGE_ENTRY:
            self.display.prompt(PROMPT_CHANGE)
            self.display.stars(len(self._buffer))
        elif self.mode is Mode.UNLOCKED:
            self.display.prompt(MSG_OK)

    def _enter_sleep(self) -> None:
        pins = self.config.pins
        for pin in pins.rows:
            self.fabric.drive(pin, LOW)
        for pin in pins.cols:
            self.fabric.make_input(pin, pullup=True)
        self._sleep_mark = self.fabric.portb_mark()
        self.mode = Mode.SLEEPING

    def _wake(self, now: int) -> None:
        self._set_scan_posture()
        self.mode = Mode.SCANNING
        self._idle_since = now

    def _set_scan_posture(self) -> None:
        pins = self.config.pins
        if self.config.scan_strategy == PER_PIN:
            for pin in pins.cols:
                self.fabric.make_output(pin, HIGH)
        else:
            for pin in pins.cols:
                self.fabric.make_input(pin, pullup=True)

    # -- snapshot/restore (between ticks) -------------------------------------

    _FSM_FIELDS = ("mode", "attempts", "lock_open", "_now", "_idle_since",
                   "_sleep_mark", "_message_until", "_alarm_start",
                   "_alarm_until", "_held_pos", "_candidate")

    def fsm_state(self) -> dict:
        state = {f: getattr(self, f) for f in self._FSM_FIELDS}
        state["_buffer"] = tuple(self._buffer)
        return state

    def restore_fsm_state(self, state: dict) -> None:
        for f in self._FSM_FIELDS:
            setattr(self, f, state[f])
        self._buffer = list(state["_buffer"])
