"""Size caps shared by every constructor and scan."""
from __future__ import annotations

import os

DEFAULT_MAX_POINTS = 1600  # a 40 x 40 window before subdivision
TABLE_LIMIT = 256  # largest N for which an N^3 median table is materialised


class LimitExceeded(RuntimeError):
    """A requested object is larger than the configured resource caps."""


def max_points() -> int:
    value = os.environ.get("MEDIANLAB_MAX_POINTS")
    if value:
        return int(value)
    return DEFAULT_MAX_POINTS


def check_points(count: int, what: str, factor: int = 1) -> None:
    cap = max_points() * factor
    if count > cap:
        raise LimitExceeded(
            f"{what} has {count} points, above the cap of {cap} (set MEDIANLAB_MAX_POINTS to raise it)"
        )
