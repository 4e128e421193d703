"""Wire format: rationals as "num/den" strings, enclosures as endpoint pairs."""

from __future__ import annotations

import json
from fractions import Fraction

from .exact import Enclosure, format_rational


def q_out(q) -> str:
    return format_rational(Fraction(q))


def q_in(s: str) -> Fraction:
    return Fraction(s)


def enc_out(e: Enclosure) -> list[str]:
    return [q_out(e.lo), q_out(e.hi)]


def enc_in(pair) -> Enclosure:
    return Enclosure(q_in(pair[0]), q_in(pair[1]))


def dumps(doc) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
