"""Depth and period caps, overridable through ``ROUGHLAB_MAX_DEPTH``."""

from __future__ import annotations

import os

ENV_MAX_DEPTH = "ROUGHLAB_MAX_DEPTH"

DIGIT_CAP = 32
LEVEL_CAP = 12
TAKAGI_PERIOD_CAP = 64


def _override() -> int | None:
    raw = os.environ.get(ENV_MAX_DEPTH)
    if raw is None or not raw.strip():
        return None
    value = int(raw)
    if value < 1:
        raise ValueError(f"{ENV_MAX_DEPTH} must be a positive integer, got {raw!r}")
    return value


def digit_cap() -> int:
    """Maximum number of ternary digits examined for a Cantor point."""
    override = _override()
    return DIGIT_CAP if override is None else override


def level_cap() -> int:
    """Maximum level n accepted by the level-set enumeration."""
    override = _override()
    return LEVEL_CAP if override is None else override
