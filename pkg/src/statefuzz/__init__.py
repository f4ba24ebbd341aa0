"""Stateful greybox fuzzing driven by a state transition tree."""

__version__ = "0.1.0"
