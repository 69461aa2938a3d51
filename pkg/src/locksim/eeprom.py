"""128-byte data-EEPROM emulation with the 0xAA/0x55 write-arming sequence.

A byte write lands only while the arming automaton is in ARMED, and each
successful write consumes the arming.  Images persist as raw 128-byte binary
files or as 256 hex characters (whitespace ignored, case-insensitive) when
the file name ends in ``.hex``.
"""

from __future__ import annotations

EEPROM_SIZE = 128
PASSWORD_ADDR = 0x00
PASSWORD_LEN = 10

IDLE = "IDLE"
AA_SEEN = "AA_SEEN"
ARMED = "ARMED"


class EepromError(Exception):
    pass


class AddressOutOfRange(EepromError):
    pass


class WriteNotArmed(EepromError):
    pass


class BadImageSize(EepromError):
    pass


class BadHex(EepromError):
    pass


def factory_image() -> bytes:
    """Password region set to ASCII "0000000000", the rest erased (0xFF)."""
    return b"0" * PASSWORD_LEN + b"\xFF" * (EEPROM_SIZE - PASSWORD_LEN)


class Eeprom:
    def __init__(self, image: bytes | None = None):
        self._bytes = bytearray(image if image is not None else factory_image())
        if len(self._bytes) != EEPROM_SIZE:
            raise BadImageSize(f"image is {len(self._bytes)} bytes, need {EEPROM_SIZE}")
        self.arm_state = IDLE
        self.read_count = 0
        self.write_count = 0

    def read(self, addr: int) -> int:
        self._check_addr(addr)
        self.read_count += 1
        return self._bytes[addr]

    def write_control(self, value: int) -> None:
        """The EECON2-style arming automaton; any out-of-sequence value
        falls back to IDLE."""
        if self.arm_state == IDLE and value == 0xAA:
            self.arm_state = AA_SEEN
        elif self.arm_state == AA_SEEN and value == 0x55:
            self.arm_state = ARMED
        else:
            self.arm_state = IDLE

    def write(self, addr: int, value: int) -> None:
        self._check_addr(addr)
        if self.arm_state != ARMED:
            raise WriteNotArmed(f"write to 0x{addr:02X} without arming")
        self._bytes[addr] = value & 0xFF
        self.arm_state = IDLE
        self.write_count += 1

    def image_bytes(self) -> bytes:
        return bytes(self._bytes)

    def load_bytes(self, image: bytes) -> None:
        if len(image) != EEPROM_SIZE:
            raise BadImageSize(f"image is {len(image)} bytes, need {EEPROM_SIZE}")
        self._bytes = bytearray(image)
        self.arm_state = IDLE

    @staticmethod
    def _check_addr(addr: int) -> None:
        if not 0 <= addr < EEPROM_SIZE:
            raise AddressOutOfRange(f"0x{addr:02X}")


# -- image files -------------------------------------------------------------

def format_hex_image(image: bytes) -> str:
    if len(image) != EEPROM_SIZE:
        raise BadImageSize(f"image is {len(image)} bytes, need {EEPROM_SIZE}")
    return image.hex().upper()


def parse_hex_image(text: str) -> bytes:
    compact = "".join(text.split())
    if any(c not in "0123456789abcdefABCDEF" for c in compact):
        raise BadHex("non-hex character in image text")
    if len(compact) != EEPROM_SIZE * 2:
        raise BadImageSize(f"{len(compact)} hex chars, need {EEPROM_SIZE * 2}")
    return bytes.fromhex(compact)


def load_image(path) -> bytes:
    path = str(path)
    if path.endswith(".hex"):
        with open(path, "r", encoding="ascii") as fh:
            return parse_hex_image(fh.read())
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) != EEPROM_SIZE:
        raise BadImageSize(f"{path}: {len(data)} bytes, need {EEPROM_SIZE}")
    return data


def save_image(path, image: bytes) -> None:
    path = str(path)
    if len(image) != EEPROM_SIZE:
        raise BadImageSize(f"image is {len(image)} bytes, need {EEPROM_SIZE}")
    if path.endswith(".hex"):
        with open(path, "w", encoding="ascii") as fh:
            fh.write(format_hex_image(image))
    else:
        with open(path, "wb") as fh:
            fh.write(image)
