"""Utilities for parsing durations.

Accepts strings like ``1h30m`` or ``45s``.
"""
import re

_UNIT = {"h": 3600, "m": 60, "s": 1}
_PART = re.compile(r"(\d+)([hms])")


def parse_duration(text: str) -> int:
    """Return the number of seconds in ``text``.

    >>> parse_duration("1h30m")
    5400
    """
    total = 0
    for value, unit in _PART.findall(text):
        total += int(value) * _UNIT[unit]
    return total
