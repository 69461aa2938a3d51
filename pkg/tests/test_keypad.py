"""Keypad matrix: the key grid, bounce scheduling, and the coupled-input fault."""

import random

import pytest

from locksim.gpio import HIGH, LOW, PinFabric
from locksim.keypad import (COL_PINS, FOLLOW_NEIGHBOR, FORCE_LOW, ROW_PINS,
                            BounceProfile, FaultModel, KeyPosition,
                            KeypadMatrix, UnknownKey, key_position, keymap,
                            random_bounce)

# Table layout frozen: row-major symbols with the control-key column last.
EXPECTED_GRID = {
    (0, 0): "1", (0, 1): "2", (0, 2): "3", (0, 3): "A",
    (1, 0): "4", (1, 1): "5", (1, 2): "6", (1, 3): "B",
    (2, 0): "7", (2, 1): "8", (2, 2): "9", (2, 3): "C",
    (3, 0): "*", (3, 1): "0", (3, 2): "#", (3, 3): "D",
}


class TestKeymap:
    def test_all_sixteen_positions(self):
        for (r, c), sym in EXPECTED_GRID.items():
            assert keymap(KeyPosition(r, c)) == sym

    def test_inverse_is_identity(self):
        for (r, c), sym in EXPECTED_GRID.items():
            assert key_position(sym) == KeyPosition(r, c)

    def test_unknown_symbol(self):
        with pytest.raises(UnknownKey):
            key_position("E")

    def test_position_bounds(self):
        with pytest.raises(ValueError):
            KeyPosition(4, 0)


class TestPressRelease:
    def setup_method(self):
        self.fab = PinFabric()
        self.pad = KeypadMatrix(self.fab)

    def test_clean_press_closes_row_col_switch(self):
        self.pad.press("5", at=1000)
        self.fab.advance_to(1000)
        assert self.fab.switch_log == [(1000, "key_5", True)]
        # row1/col1 shorted: drive the row, the column follows
        self.fab.make_output(ROW_PINS[1], LOW)
        self.fab.make_input(COL_PINS[1], pullup=True)
        assert self.fab.sample(COL_PINS[1]) == LOW

    def test_bounce_transitions_replay_verbatim(self):
        profile = BounceProfile(((0, True), (400, False), (900, True),
                                 (1500, False), (2800, True)))
        self.pad.press("1", at=10_000, bounce=profile)
        self.fab.advance_to(20_000)
        assert self.fab.switch_log == [
            (10_000, "key_1", True),
            (10_400, "key_1", False),
            (10_900, "key_1", True),
            (11_500, "key_1", False),
            (12_800, "key_1", True),
        ]

    def test_release_of_unpressed_key_is_noop(self):
        n0 = self.pad.ignored_ops
        self.pad.release("7")
        assert self.pad.ignored_ops == n0 + 1
        assert self.fab.switch_log == []

    def test_unknown_key_raises(self):
        with pytest.raises(UnknownKey):
            self.pad.press("Z")

    def test_bounce_must_end_in_requested_state(self):
        profile = BounceProfile(((0, True), (100, False)))
        with pytest.raises(ValueError):
            self.pad.press("1", bounce=profile)

    def test_bounce_offsets_must_increase(self):
        with pytest.raises(ValueError):
            BounceProfile(((100, True), (100, False), (200, True)))


class TestBounceGenerator:
    def test_preset_bounds(self):
        rng = random.Random(42)
        for _ in range(200):
            p = random_bounce(rng, final_closed=True)
            assert 2 <= len(p.transitions) <= 10
            assert p.span_us <= 5000
            assert p.final_closed is True
            offs = [t[0] for t in p.transitions]
            assert offs == sorted(set(offs))

    def test_alternating_states(self):
        rng = random.Random(1)
        p = random_bounce(rng, final_closed=False)
        states = [s for _, s in p.transitions]
        for a, b in zip(states, states[1:]):
            assert a != b
        assert states[-1] is False


def scan_setup(fab, row):
    """Drive one row low, the rest high; all columns inputs with pull-ups."""
    for r, p in enumerate(ROW_PINS):
        fab.make_output(p, LOW if r == row else HIGH)
    for p in COL_PINS:
        fab.make_input(p, pullup=True)


class TestElectricalScanProperties:
    def test_idle_columns_high_for_all_row_patterns(self):
        fab = PinFabric()
        KeypadMatrix(fab)
        for pattern in range(16):
            for r, p in enumerate(ROW_PINS):
                fab.make_output(p, (pattern >> r) & 1)
            for p in COL_PINS:
                fab.make_input(p, pullup=True)
                assert fab.sample(p) == HIGH, f"pattern {pattern:04b}, {p}"

    def test_exactly_one_column_low_per_key(self):
        """With key (r,c) pressed and row r low, column c alone reads low
        when scanned one column at a time."""
        for sym, (r, c) in ((s, (p.row, p.col)) for s, p in
                            ((s, key_position(s)) for s in EXPECTED_GRID.values())):
            fab = PinFabric()
            pad = KeypadMatrix(fab)
            pad.press(sym)
            scan_setup(fab, r)
            lows = [cc for cc, p in enumerate(COL_PINS) if fab.sample(p) == LOW]
            assert lows == [c], f"key {sym}: columns {lows}"


class TestFaultModel:
    def press_and_scan(self, sym, rule, columns_as_inputs):
        fab = PinFabric()
        pad = KeypadMatrix(fab, FaultModel(coupled_inputs_enabled=True,
                                           corruption_rule=rule))
        pos = key_position(sym)
        pad.press(sym)
        for r, p in enumerate(ROW_PINS):
            fab.make_output(p, LOW if r == pos.row else HIGH)
        if columns_as_inputs:
            for p in COL_PINS:
                fab.make_input(p, pullup=True)
            return pos, [pad.corrupted_sample(p) for p in COL_PINS]
        # one-at-a-time: only the probed column is an input
        reads = []
        for p in COL_PINS:
            fab.make_output(p, HIGH)
        for p in COL_PINS:
            fab.make_input(p, pullup=True)
            reads.append(pad.corrupted_sample(p))
            fab.make_output(p, HIGH)
        return pos, reads

    def test_single_input_column_always_reads_true_level(self):
        for sym in EXPECTED_GRID.values():
            pos, reads = self.press_and_scan(sym, FORCE_LOW, columns_as_inputs=False)
            assert reads == [LOW if c == pos.col else HIGH for c in range(4)]

    def test_force_low_corrupts_simultaneous_inputs(self):
        pos, reads = self.press_and_scan("9", FORCE_LOW, columns_as_inputs=True)
        assert pos.col == 2
        assert reads == [LOW, LOW, LOW, LOW]  # neighbours dragged down

    def test_follow_neighbor_shifts_the_reading(self):
        pos, reads = self.press_and_scan("9", FOLLOW_NEIGHBOR, columns_as_inputs=True)
        # each column reports the true level of the next input column
        assert reads == [HIGH, LOW, HIGH, HIGH]

    def test_force_low_no_key_reads_high(self):
        fab = PinFabric()
        pad = KeypadMatrix(fab, FaultModel(coupled_inputs_enabled=True))
        for p in ROW_PINS:
            fab.make_output(p, LOW)
        for p in COL_PINS:
            fab.make_input(p, pullup=True)
        assert [pad.corrupted_sample(p) for p in COL_PINS] == [HIGH] * 4

    def test_disabled_fault_is_passthrough_for_all_keys(self):
        for sym in EXPECTED_GRID.values():
            fab = PinFabric()
            pad = KeypadMatrix(fab)  # fault disabled
            pos = key_position(sym)
            pad.press(sym)
            scan_setup(fab, pos.row)
            for c, p in enumerate(COL_PINS):
                assert pad.corrupted_sample(p) == fab.sample(p)
