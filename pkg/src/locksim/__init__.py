"""Deterministic behavioral simulator of a keypad/LCD electronic code lock."""

__version__ = "0.1.0"
