"""HD44780-compatible character LCD controller emulation.

Decodes E-clocked transfers (one nibble per falling edge in 4-bit mode, high
nibble first), executes the write-only command subset, maintains DDRAM and
renders the visible 20x2 window.  The controller powers up in 8-bit mode, so
the first command clocks are interpreted from the four data lines alone; a
function-set with DL=0 drops it into 4-bit mode.
"""

from __future__ import annotations

from dataclasses import dataclass

COMMAND = "C"
DATA = "D"

ROW_BASES = (0x00, 0x40)
ROW_SPAN = 0x28          # 40 characters of DDRAM per row
VISIBLE_COLS = 20
ONE_LINE_SPAN = 0x50
DDRAM_SIZE = 0x68        # flat store; the 0x28..0x3F gap stays unused


@dataclass(frozen=True)
class LcdBusSample:
    """One E falling edge: register select plus the DB7..DB4 nibble."""

    rs: str      # COMMAND or DATA
    nibble: int  # 0..15
    t_us: int = 0


@dataclass(frozen=True)
class TraceRecord:
    t_us: int
    rs: str
    byte: int


@dataclass(frozen=True)
class LcdFrame:
    rows: tuple

    def __str__(self) -> str:
        return "\n".join(f"[{r}]" for r in self.rows)


@dataclass
class LcdDiagnostics:
    protocol_violations: int = 0
    unsupported_commands: int = 0
    bad_addresses: int = 0


def is_valid_address(addr: int, two_lines: bool) -> bool:
    if two_lines:
        return (0x00 <= addr <= 0x27) or (0x40 <= addr <= 0x67)
    return 0x00 <= addr < ONE_LINE_SPAN


class Hd44780:
    def __init__(self):
        self.reset()

    def reset(self) -> None:
        self.four_bit_mode = False
        self.two_lines = False
        self.display_on = False
        self.entry_increment = True
        self.address_counter = 0
        self.ddram = bytearray(b" " * DDRAM_SIZE)
        self.pending_nibble: LcdBusSample | None = None
        self.diagnostics = LcdDiagnostics()
        self._trace: list[TraceRecord] = []

    # -- bus decoding ------------------------------------------------------

    def enable_falling_edge(self, sample: LcdBusSample) -> None:
        if not self.four_bit_mode:
            # 8-bit mode with only DB7..DB4 wired: the nibble is the high half
            # of the byte, the unconnected low lines read as zero.
            self._dispatch(sample.rs, sample.nibble << 4, sample.t_us)
            return
        if self.pending_nibble is None:
            self.pending_nibble = sample
            return
        first = self.pending_nibble
        self.pending_nibble = None
        if first.rs != sample.rs:
            # RS changed between the two halves of a byte: drop it.
            self.diagnostics.protocol_violations += 1
            return
        self._dispatch(sample.rs, (first.nibble << 4) | sample.nibble, sample.t_us)

    def _dispatch(self, rs: str, byte: int, t_us: int) -> None:
        self._trace.append(TraceRecord(t_us, rs, byte))
        if rs == COMMAND:
            self.execute_command(byte)
        else:
            self.write_data(byte)

    # -- command set ---------------------------------------------------------

    def execute_command(self, byte: int) -> None:
        if byte & 0x80:            # set DDRAM address
            addr = byte & 0x7F
            if is_valid_address(addr, self.two_lines):
                self.address_counter = addr
            else:
                self.diagnostics.bad_addresses += 1
        elif byte & 0x40:          # CGRAM: out of scope
            self.diagnostics.unsupported_commands += 1
        elif byte & 0x20:          # function set
            self.four_bit_mode = not (byte & 0x10)
            self.two_lines = bool(byte & 0x08)
        elif byte & 0x10:          # cursor/display shift: out of scope
            self.diagnostics.unsupported_commands += 1
        elif byte & 0x08:          # display on/off
            self.display_on = bool(byte & 0x04)
        elif byte & 0x04:          # entry mode set
            self.entry_increment = bool(byte & 0x02)
        elif byte & 0x02:          # return home
            self.address_counter = 0
        elif byte & 0x01:          # clear display
            self.ddram = bytearray(b" " * DDRAM_SIZE)
            self.address_counter = 0
            self.entry_increment = True
        else:
            self.diagnostics.unsupported_commands += 1

    def write_data(self, byte: int) -> None:
        self.ddram[self.address_counter] = byte & 0xFF
        self._step_address()

    def _step_address(self) -> None:
        ac = self.address_counter
        if self.two_lines:
            if self.entry_increment:
                if ac == 0x27:
                    ac = 0x40
                elif ac == 0x67:
                    ac = 0x00
                else:
                    ac += 1
            else:
                if ac == 0x40:
                    ac = 0x27
                elif ac == 0x00:
                    ac = 0x67
                else:
                    ac -= 1
        else:
            step = 1 if self.entry_increment else -1
            ac = (ac + step) % ONE_LINE_SPAN
        self.address_counter = ac

    # -- observation ---------------------------------------------------------

    def frame(self) -> LcdFrame:
        rows = []
        for base in ROW_BASES:
            rows.append("".join(_printable(b)
                                for b in self.ddram[base:base + VISIBLE_COLS]))
        return LcdFrame(tuple(rows))

    def bus_trace(self) -> tuple:
        return tuple(self._trace)

    def trace_text(self) -> str:
        """One record per line: `t_us RS=<C|D> byte=0xHH`."""
        return "\n".join(f"{r.t_us} RS={r.rs} byte=0x{r.byte:02X}"
                         for r in self._trace)

    def trace_json(self) -> list:
        return [{"t_us": r.t_us, "rs": r.rs, "byte": r.byte} for r in self._trace]

    @classmethod
    def from_trace(cls, records) -> "Hd44780":
        """Replay a decoded trace into a fresh controller."""
        lcd = cls()
        for rec in records:
            if rec.rs == COMMAND:
                lcd.execute_command(rec.byte)
            else:
                lcd.write_data(rec.byte)
        return lcd


def _printable(b: int) -> str:
    return chr(b) if 0x20 <= b <= 0x7E else "·"
