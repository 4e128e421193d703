"""Ternary Cantor set combinatorics: membership, level sets, neighbourhoods, approach sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .config import digit_cap, level_cap
from .exact import CapacityError, DomainError, as_rational


class ExhaustionError(ValueError):
    """The point runs out of zero digits before the requested count."""


@dataclass(frozen=True)
class CantorPoint:
    """A point of the Cantor set given by ternary digits in {0, 2}.

    ``prefix`` is followed by ``period`` repeated forever; the default period
    ``(0,)`` describes a finite expansion.
    """

    prefix: tuple = ()
    period: tuple = (0,)

    def __post_init__(self):
        prefix = tuple(int(d) for d in self.prefix)
        period = tuple(int(d) for d in self.period)
        if not period:
            raise ValueError("period must be non-empty")
        if any(d not in (0, 2) for d in prefix + period):
            raise ValueError("Cantor digits must be 0 or 2")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    def digit(self, k: int) -> int:
        """The k-th ternary digit, 1-indexed."""
        if k < 1:
            raise IndexError("digits are 1-indexed")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.period[(k - len(self.prefix) - 1) % len(self.period)]

    def value_in_base(self, base: int, scale: Fraction = Fraction(1, 1)) -> Fraction:
        """Sum of ``scale * digit_k * base**-k`` over all digits, exactly."""
        head = sum(Fraction(d, base**k) for k, d in enumerate(self.prefix, 1))
        p = len(self.period)
        block = sum(Fraction(d, base**k) for k, d in enumerate(self.period, 1))
        tail = block / (1 - Fraction(1, base**p)) / base ** len(self.prefix)
        return scale * (head + tail)

    @property
    def value(self) -> Fraction:
        return self.value_in_base(3)

    @property
    def has_infinitely_many_zeros(self) -> bool:
        return 0 in self.period

    def mirrored(self) -> "CantorPoint":
        """The point 1 - c, digit by digit."""
        return CantorPoint(tuple(2 - d for d in self.prefix), tuple(2 - d for d in self.period))


def _cantor_digits(q: Fraction, cap: int) -> CantorPoint | None:
    if q == 1:
        return CantorPoint((), (2,))
    seen: dict[Fraction, int] = {}
    digits: list[int] = []
    r = q
    while r not in seen:
        if len(digits) >= cap:
            raise CapacityError(f"ternary expansion of {q} exceeds {cap} digits")
        seen[r] = len(digits)
        r *= 3
        d = math.floor(r)
        r -= d
        if d == 1:
            # only 0.xx1000... survives, rewritten as 0.xx0222...
            if r == 0:
                return CantorPoint(tuple(digits) + (0,), (2,))
            return None
        digits.append(d)
    start = seen[r]
    return CantorPoint(tuple(digits[:start]), tuple(digits[start:]))


def cantor_digits(q, cap: int | None = None) -> CantorPoint:
    """A {0,2}-digit expansion of ``q``; raises DomainError for non-members."""
    q = as_rational(q)
    if not 0 <= q <= 1:
        raise DomainError(f"{q} outside [0, 1]")
    point = _cantor_digits(q, digit_cap() if cap is None else cap)
    if point is None:
        raise DomainError(f"{q} is not in the Cantor set")
    return point


def cantor_contains(q, cap: int | None = None) -> bool:
    """True iff q has some ternary expansion using only the digits 0 and 2."""
    q = as_rational(q)
    if not 0 <= q <= 1:
        raise DomainError(f"{q} outside [0, 1]")
    return _cantor_digits(q, digit_cap() if cap is None else cap) is not None


# -- level sets and neighbourhoods ---------------------------------------------------


@dataclass(frozen=True)
class LevelSets:
    n: int
    D: tuple
    E: tuple


@lru_cache(maxsize=None)
def _levels(n: int) -> LevelSets:
    if n == 1:
        D = (Fraction(0), Fraction(1))
        return LevelSets(1, D, D)
    step = Fraction(1, 3 ** (n - 1))
    lefts = {sum((Fraction(d, 3**k) for k, d in enumerate(ds, 1)), Fraction(0))
             for ds in product((0, 2), repeat=n - 1)}
    D = tuple(sorted(lefts | {x + step for x in lefts}))
    previous = set(_levels(n - 1).D)
    return LevelSets(n, D, tuple(d for d in D if d not in previous))


def level_points(n: int) -> LevelSets:
    """D_n (level-n triadic Cantor points) and E_n = D_n minus D_(n-1)."""
    if n < 1:
        raise ValueError("level must be at least 1")
    if n > level_cap():
        raise CapacityError(f"level {n} exceeds cap {level_cap()}")
    return _levels(n)


def level_of(d) -> int:
    """The unique n with d in E_n."""
    d = as_rational(d)
    if d in (0, 1):
        return 1
    den = d.denominator
    k = 0
    while den % 3 == 0:
        den //= 3
        k += 1
    # a triadic rational with denominator 3^k needs at most k + 1 digits
    if den != 1 or not 0 < d < 1 or _cantor_digits(d, k + 2) is None:
        raise DomainError(f"{d} is not a triadic point of the Cantor set")
    return k + 1


def radius(n: int) -> Fraction:
    return (Fraction(1, 3 ** (n - 1)) + Fraction(1, 3 ** (n + 1))) / 2


def neighborhood(d, n: int) -> tuple[Fraction, Fraction]:
    """U_d = [0, 1] intersected with [d - rho_n, d + rho_n], for d in E_n."""
    d = as_rational(d)
    if level_of(d) != n:
        raise ValueError(f"{d} is not in E_{n}")
    rho = radius(n)
    return max(Fraction(0), d - rho), min(Fraction(1), d + rho)


def U(d) -> tuple[Fraction, Fraction]:
    """Neighbourhood of d at its own level."""
    return neighborhood(d, level_of(d))


def intervals_meet(a: tuple, b: tuple) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def interval_dist(q: Fraction, iv: tuple) -> Fraction:
    lo, hi = iv
    if q < lo:
        return lo - q
    if q > hi:
        return q - hi
    return Fraction(0)


# -- approach sequences ----------------------------------------------------------------


def _zero_positions(c: CantorPoint, k: int) -> list[int]:
    if not c.has_infinitely_many_zeros:
        found = [i for i, d in enumerate(c.prefix, 1) if d == 0]
        if len(found) < k:
            raise ExhaustionError(f"only {len(found)} zero digits available, {k} needed")
        return found[:k]
    out = []
    pos = 0
    while len(out) < k:
        pos += 1
        if c.digit(pos) == 0:
            out.append(pos)
    return out


def approach_sequence(c: CantorPoint, count: int) -> list[Fraction]:
    """Right approach d_1 > d_2 > ... > c of triadic Cantor points.

    With i_1 < i_2 < ... the positions of the zero digits of c:
    d_1 = 1, d_2k = 1 - sum_{j<k} 2/3^i_j - 1/3^i_k, d_2k+1 = d_2k - 1/3^i_k.
    """
    if count < 1:
        raise ValueError("count must be positive")
    positions = _zero_positions(c, count // 2)
    seq = [Fraction(1)]
    partial = Fraction(1)
    for i in positions:
        seq.append(partial - Fraction(1, 3**i))
        seq.append(partial - Fraction(2, 3**i))
        partial = seq[-1]
    return seq[:count]


def left_approach_sequence(c: CantorPoint, count: int) -> list[Fraction]:
    """Left approach, obtained by mirroring through x -> 1 - x."""
    return [1 - d for d in approach_sequence(c.mirrored(), count)]


@dataclass(frozen=True)
class ApproachRecord:
    m: int
    d_m: Fraction
    d_next: Fraction
    sup_u_next: Fraction
    threshold: Fraction
    holds: bool


def approach_inequality_check(c: CantorPoint, count: int) -> list[ApproachRecord]:
    """Exact check of sup U_{d_(m+1)} > c + (d_m - c)/4 for m = 1 .. count-1."""
    seq = approach_sequence(c, count)
    cv = c.value
    out = []
    for m in range(1, len(seq)):
        d_m, d_next = seq[m - 1], seq[m]
        sup_u = U(d_next)[1]
        threshold = cv + (d_m - cv) / 4
        out.append(ApproachRecord(m, d_m, d_next, sup_u, threshold, sup_u > threshold))
    return out
