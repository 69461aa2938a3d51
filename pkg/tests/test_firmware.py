"""Lock firmware: boot, scanning, debounce, entry, verification, alarm, sleep."""

import random

from locksim.config import CONVENTIONAL, PER_PIN, SimConfig
from locksim.eeprom import Eeprom
from locksim.firmware import (MSG_CHANGED, MSG_FAIL, MSG_OK, PROMPT,
                              PROMPT_CHANGE, LockFirmware, Mode)
from locksim.gpio import HIGH, LOW
from locksim.keypad import KEY_SYMBOLS, BounceProfile, keymap
from locksim.machine import LockSimulation

PASSWORD_ALPHABET = "0123456789*#"


def make_sim(image=None, seed=0, **overrides):
    cfg = SimConfig()
    for key, value in overrides.items():
        setattr(cfg, key, value)
    sim = LockSimulation(cfg, image, seed)
    sim.boot()
    return sim


class RecordingDisplay:
    """Display stub that tracks what the firmware asked it to show."""

    def __init__(self):
        self.prompts = []
        self.star_count = 0

    def init(self):
        pass

    def prompt(self, text):
        self.prompts.append(text)
        self.star_count = 0

    def stars(self, count):
        self.star_count = count

    @property
    def row0(self):
        return self.prompts[-1] if self.prompts else ""


def abstract_fw(image=None, **overrides):
    """Firmware with no electrical fabric: state machine only."""
    cfg = SimConfig()
    cfg.message_ms = 0
    cfg.alarm_duration_ms = 0
    for key, value in overrides.items():
        setattr(cfg, key, value)
    display = RecordingDisplay()
    fw = LockFirmware(None, None, Eeprom(image), cfg, display)
    fw.boot()
    return fw, display


def feed(fw, symbols, start_ms=1, step_ms=50):
    t = start_ms
    for sym in symbols:
        fw.feed_symbol(sym, t * 1000)
        t += step_ms
    return t


class TestBoot:
    def test_prompt_and_posture(self):
        sim = make_sim()
        assert sim.lcd.frame().rows[0] == "Enter Password:     "
        assert sim.firmware.mode is Mode.SCANNING
        assert not sim.firmware.lock_open
        assert sim.fabric.sample(sim.config.pins.actuator) == LOW

    def test_trace_begins_with_function_set_pair(self):
        sim = make_sim()
        trace = sim.lcd.bus_trace()
        assert (trace[0].rs, trace[0].byte) == ("C", 0x20)
        assert (trace[1].rs, trace[1].byte) == ("C", 0x28)

    def test_lcd_configured_4bit_two_lines(self):
        sim = make_sim()
        assert sim.lcd.four_bit_mode
        assert sim.lcd.two_lines
        assert sim.lcd.display_on


class TestScanning:
    def test_held_key_found_at_its_position(self):
        sim = make_sim()
        sim.keypad.press("8")
        pos = sim.firmware.row_scan()
        assert (pos.row, pos.col) == (2, 1)

    def test_no_key_scans_clean(self):
        sim = make_sim()
        assert sim.firmware.row_scan() is None

    def test_two_keys_same_column_lower_row_wins(self):
        sim = make_sim()
        sim.keypad.press("2")   # (0,1)
        sim.keypad.press("8")   # (2,1)
        pos = sim.firmware.row_scan()
        assert (pos.row, pos.col) == (0, 1)

    def test_find_key_uses_cursor(self):
        sim = make_sim()
        fw = sim.firmware
        for (r, c), sym in (((1, 3), "B"), ((2, 3), "C"), ((3, 1), "0")):
            fw.scan_cursor.row = r
            fw._note_col(r, c)
            assert fw.find_key(fw.scan_cursor) == sym
            assert fw.scan_cursor.key_index == 4 * r + c


def detected_symbol(strategy, fault_on, sym):
    sim = make_sim(scan_strategy=strategy, fault_model=fault_on)
    sim.keypad.press(sym)
    pos = sim.firmware.row_scan()
    return keymap(pos) if pos is not None else None


class TestScanStrategies:
    def test_per_pin_correct_for_all_keys_with_fault(self):
        for sym in KEY_SYMBOLS:
            assert detected_symbol(PER_PIN, True, sym) == sym

    def test_conventional_misreads_with_fault(self):
        results = {sym: detected_symbol(CONVENTIONAL, True, sym)
                   for sym in KEY_SYMBOLS}
        misread = [sym for sym, got in results.items() if got != sym]
        assert misread, "expected at least one misread key"
        assert results["9"] != "9"

    def test_conventional_fine_without_fault(self):
        for sym in KEY_SYMBOLS:
            assert detected_symbol(CONVENTIONAL, False, sym) == sym


class TestDebounce:
    def symbols(self, sim):
        return [sym for _, sym in sim.firmware.symbol_log]

    def test_bounce_within_window_yields_one_event(self):
        sim = make_sim()
        press = BounceProfile(((0, True), (700, False), (1400, True),
                               (2300, False), (3100, True)))
        sim.keypad.press("5", at=2000, bounce=press)
        sim.advance_ms(60)
        release = BounceProfile(((0, False), (900, True), (1800, False)))
        sim.keypad.release("5", bounce=release)
        sim.advance_ms(60)
        assert self.symbols(sim) == ["5"]

    def test_key_held_forever_is_one_event(self):
        sim = make_sim()
        sim.keypad.press("1")
        sim.advance_ms(500)
        assert self.symbols(sim) == ["1"]

    def test_two_spaced_taps_are_two_events(self):
        sim = make_sim()
        sim.keypad.press("7", at=10_000)
        sim.keypad.release("7", at=35_000)
        sim.keypad.press("7", at=60_000)
        sim.keypad.release("7", at=85_000)
        sim.advance_ms(150)
        assert self.symbols(sim) == ["7", "7"]

    def test_second_key_needs_release_of_first(self):
        sim = make_sim()
        sim.keypad.press("1", at=1000)
        sim.advance_ms(50)
        sim.keypad.press("2")      # rollover while '1' still held
        sim.advance_ms(50)
        assert self.symbols(sim) == ["1"]
        sim.keypad.release("1")
        sim.keypad.release("2")
        sim.advance_ms(5)
        sim.keypad.press("2")
        sim.advance_ms(50)
        assert self.symbols(sim) == ["1", "2"]


class TestSymbolHandling:
    def test_digits_echo_stars_on_row1(self):
        sim = make_sim()
        for i, sym in enumerate(("1", "2", "3")):
            sim.tap(sym)
            sim.advance_ms(100)
            assert sim.lcd.frame().rows[1] == "*" * (i + 1) + " " * (19 - i)
        assert sim.firmware.password_buffer == ("1", "2", "3")

    def test_backspace_erases_one_star(self):
        sim = make_sim()
        for sym in "12345":
            sim.tap(sym)
            sim.advance_ms(100)
        sim.tap("A")
        sim.advance_ms(100)
        assert sim.firmware.password_buffer == ("1", "2", "3", "4")
        assert sim.lcd.frame().rows[1] == "****" + " " * 16

    def test_buffer_capped_at_password_length(self):
        fw, display = abstract_fw()
        feed(fw, "0123456789")
        assert len(fw.password_buffer) == 10
        feed(fw, "7", start_ms=2000)
        assert len(fw.password_buffer) == 10
        assert display.star_count == 10

    def test_control_keys_never_stored(self):
        fw, _ = abstract_fw()
        feed(fw, "12BC")
        assert fw.password_buffer == ("1", "2")

    def test_backspace_algebra_random_prefixes(self):
        rng = random.Random(99)
        for _ in range(200):
            fw, display = abstract_fw()
            prefix = [rng.choice(PASSWORD_ALPHABET) for _ in range(rng.randrange(9))]
            t = feed(fw, prefix)
            before = (fw.password_buffer, display.star_count)
            t = feed(fw, rng.choice(PASSWORD_ALPHABET), start_ms=t)
            feed(fw, "A", start_ms=t)
            assert (fw.password_buffer, display.star_count) == before

    def test_change_mode_requires_unlock(self):
        fw, display = abstract_fw()
        feed(fw, "C")
        assert fw.mode in (Mode.SCANNING, Mode.ENTERING)
        assert display.row0 == PROMPT


class TestVerifyPassword:
    def fw(self):
        return LockFirmware(None, None, Eeprom(), SimConfig())

    def test_identity_matches(self):
        fw = self.fw()
        assert fw.verify_password(b"0123456789", b"0123456789") is True
        assert fw.verify_cursor.comparisons == 10

    def test_mismatch_at_last_position(self):
        fw = self.fw()
        assert fw.verify_password(b"0000000000", b"000000000X") is False
        assert fw.verify_cursor.comparisons == 10

    def test_mismatch_at_first_position(self):
        fw = self.fw()
        assert fw.verify_password(b"X000000000", b"0000000000") is False
        assert fw.verify_cursor.comparisons == 1

    def test_wrong_length_is_false(self):
        fw = self.fw()
        assert fw.verify_password(b"0123", b"0123456789") is False

    def test_random_pairs_match_naive_comparison(self):
        from oracles import naive_verify
        rng = random.Random(31337)
        alphabet = PASSWORD_ALPHABET.encode()
        for _ in range(1000):
            a = bytes(rng.choice(alphabet) for _ in range(10))
            if rng.random() < 0.5:
                b = bytes(a)
            else:
                b = bytes(rng.choice(alphabet) for _ in range(10))
            assert self.fw().verify_password(a, b) == naive_verify(a, b)


class TestVerifyOutcomes:
    def test_short_submission_fails_without_eeprom_access(self):
        fw, display = abstract_fw()
        reads_before = fw.eeprom.read_count
        feed(fw, "123D")
        assert fw.mode is Mode.SCANNING
        assert fw.attempts == 1
        assert fw.eeprom.read_count == reads_before
        assert not fw.lock_open

    def test_correct_password_unlocks(self):
        fw, display = abstract_fw()
        feed(fw, "0000000000D")
        assert fw.mode is Mode.UNLOCKED
        assert fw.lock_open
        assert fw.attempts == 0
        assert display.row0 == MSG_OK

    def test_two_wrong_then_correct_resets_counter(self):
        fw, _ = abstract_fw()
        t = feed(fw, "1111111111D")
        t = feed(fw, "2222222222D", start_ms=t)
        assert fw.attempts == 2
        feed(fw, "0000000000D", start_ms=t)
        assert fw.attempts == 0
        assert fw.lock_open

    def test_three_wrong_raises_alarm(self):
        fw, display = abstract_fw(alarm_duration_ms=10_000)
        t = feed(fw, "1111111111D")
        t = feed(fw, "2222222222D", start_ms=t)
        feed(fw, "3333333333D", start_ms=t)
        assert fw.mode is Mode.ALARM
        assert fw.buzzer_on
        assert fw.attempts == 3
        assert display.row0 == MSG_FAIL

    def test_alarm_expires_and_reprompts(self):
        fw, display = abstract_fw(alarm_duration_ms=1000)
        t = feed(fw, "1111111111D" * 3)
        fw.feed_symbol("5", (t + 2000) * 1000)  # past the alarm window
        assert fw.mode is not Mode.ALARM
        assert fw.attempts == 0

    def test_keypad_ignored_during_alarm(self):
        fw, _ = abstract_fw(alarm_duration_ms=60_000)
        t = feed(fw, "1111111111D" * 3)
        feed(fw, "0000000000D", start_ms=t)
        assert fw.mode is Mode.ALARM
        assert not fw.lock_open


class TestActuatorPin:
    def test_unlock_asserts_steady_high(self):
        sim = make_sim()
        for sym in "0000000000D":
            sim.tap(sym)
            sim.advance_ms(100)
        assert sim.firmware.mode is Mode.UNLOCKED
        pin = sim.config.pins.actuator
        levels = set()
        for _ in range(6):
            sim.advance_ms(100)
            levels.add(sim.fabric.sample(pin))
        assert levels == {HIGH}

    def test_alarm_toggles_at_2hz(self):
        sim = make_sim(message_ms=100)
        for _ in range(3):
            for sym in "1111111111D":
                sim.tap(sym)
                sim.advance_ms(100)
            sim.advance_ms(300)
        assert sim.firmware.mode is Mode.ALARM
        pin = sim.config.pins.actuator
        seen = []
        for _ in range(8):
            sim.advance_ms(125)
            seen.append(sim.fabric.sample(pin))
        assert set(seen) == {LOW, HIGH}, f"no 2 Hz toggle: {seen}"

    def test_relock_deasserts(self):
        sim = make_sim()
        for sym in "0000000000D":
            sim.tap(sym)
            sim.advance_ms(100)
        sim.tap("B")
        sim.advance_ms(100)
        assert not sim.firmware.lock_open
        assert sim.fabric.sample(sim.config.pins.actuator) == LOW
        assert sim.lcd.frame().rows[0].rstrip() == PROMPT


class TestChangeFlow:
    def unlock(self, fw, t=1):
        return feed(fw, "0000000000D", start_ms=t)

    def test_change_password_writes_ten_armed_bytes(self):
        fw, display = abstract_fw()
        t = self.unlock(fw)
        t = feed(fw, "C", start_ms=t)
        assert fw.mode is Mode.CHANGE_ENTRY
        assert display.row0 == PROMPT_CHANGE
        writes_before = fw.eeprom.write_count
        t = feed(fw, "13579*#024D", start_ms=t)
        assert fw.eeprom.write_count == writes_before + 10
        assert fw.read_password_from_eeprom() == b"13579*#024"
        assert display.row0 == MSG_CHANGED
        assert fw.mode is Mode.UNLOCKED

    def test_short_change_rejected_image_untouched(self):
        fw, _ = abstract_fw()
        t = self.unlock(fw)
        t = feed(fw, "C", start_ms=t)
        before = fw.eeprom.image_bytes()
        feed(fw, "1234D", start_ms=t)
        assert fw.eeprom.image_bytes() == before
        assert fw.mode is Mode.CHANGE_ENTRY

    def test_new_password_verifies_after_change(self):
        fw, _ = abstract_fw()
        t = self.unlock(fw)
        t = feed(fw, "C9876543210D", start_ms=t)
        t = feed(fw, "B", start_ms=t)        # relock
        assert not fw.lock_open
        t = feed(fw, "0000000000D", start_ms=t)  # old password
        assert not fw.lock_open
        feed(fw, "9876543210D", start_ms=t)
        assert fw.lock_open

    def test_read_password_issues_exactly_ten_reads(self):
        fw, _ = abstract_fw()
        n0 = fw.eeprom.read_count
        assert fw.read_password_from_eeprom() == b"0000000000"
        assert fw.eeprom.read_count == n0 + 10

    def test_custom_image_read_back(self):
        image = b"13579*#024" + b"\xFF" * 118
        fw, _ = abstract_fw(image=image)
        assert fw.read_password_from_eeprom() == b"13579*#024"


class TestPinMapConfig:
    def test_remapped_lcd_pins_still_decode(self):
        cfg = SimConfig()
        cfg.set("pin.lcd_rs", "A5")
        cfg.set("pin.actuator", "A6")
        sim = LockSimulation(cfg)
        sim.boot()
        assert sim.lcd.frame().rows[0] == "Enter Password:     "
        for sym in "0000000000D":
            sim.tap(sym)
            sim.advance_ms(100)
        assert sim.firmware.lock_open
        assert sim.fabric.sample(cfg.pins.actuator) == HIGH


class TestSleepWake:
    def test_idle_timeout_sleeps_and_counter_freezes(self):
        sim = make_sim(idle_timeout_ms=1000)
        sim.advance_ms(1500)
        assert sim.firmware.sleeping
        c0 = sim.firmware.scans_executed
        sim.advance_ms(10_000)
        assert sim.firmware.scans_executed == c0

    def test_key_press_wakes_within_one_tick(self):
        sim = make_sim(idle_timeout_ms=1000)
        sim.advance_ms(1500)
        assert sim.firmware.sleeping
        c0 = sim.firmware.scans_executed
        sim.press("5")
        sim.advance_ms(1)
        assert not sim.firmware.sleeping
        assert sim.firmware.scans_executed == c0 + 1

    def test_wake_then_key_still_registers(self):
        sim = make_sim(idle_timeout_ms=1000)
        sim.advance_ms(1500)
        sim.tap("4")
        sim.advance_ms(200)
        assert sim.firmware.password_buffer == ("4",)

    def test_no_sleep_while_entering(self):
        sim = make_sim(idle_timeout_ms=500)
        sim.tap("9")
        sim.advance_ms(100)
        sim.advance_ms(2000)
        assert not sim.firmware.sleeping
        assert sim.firmware.mode is Mode.ENTERING
