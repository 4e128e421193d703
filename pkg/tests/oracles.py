"""Independent reference computations used by the tests.

Nothing here imports the package's own series, reductions or digit logic.
"""

from fractions import Fraction

import mpmath

mpmath.mp.dps = 60


def mp(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def dist_z(q: Fraction) -> Fraction:
    f = q - (q.numerator // q.denominator)
    return min(f, 1 - f)


def takagi_partial(x: Fraction, terms: int = 200) -> Fraction:
    """Brute partial sum; the omitted tail is at most 2^-terms."""
    return sum((Fraction(1, 2**n) * dist_z(2**n * x) for n in range(terms)), Fraction(0))


def takagi_mp(x: Fraction, terms: int = 200):
    return mp(takagi_partial(x, terms))


def cos_pi_mp(t: Fraction):
    return mpmath.cospi(mp(t))


def margin_mp(a: Fraction, b: int):
    a_ = mp(a)
    return mpmath.mpf(2) / 3 - 4 * a_ / (1 - a_) - mpmath.pi / (a_ * b - 1)


def cantor_member(q: Fraction, depth: int = 60) -> bool:
    """Follow the removed-middle-third construction; a point that lands
    exactly on a kept endpoint stays in the set forever."""
    for _ in range(depth):
        if q in (0, 1):
            return True
        if q <= Fraction(1, 3):
            q = 3 * q
        elif q >= Fraction(2, 3):
            q = 3 * q - 2
        else:
            return False
    return True


def level_endpoints(n: int) -> list[Fraction]:
    """Endpoints of the 2^(n-1) closed intervals left after n-1 removal steps."""
    intervals = [(Fraction(0), Fraction(1))]
    for _ in range(n - 1):
        nxt = []
        for lo, hi in intervals:
            w = (hi - lo) / 3
            nxt += [(lo, lo + w), (hi - w, hi)]
        intervals = nxt
    return sorted({e for iv in intervals for e in iv})


def weierstrass_quotient_mp(a: Fraction, b: int, s, r, x: Fraction, y: Fraction):
    """Finite sum evaluated with exact mod-2 reduction and mpmath cosines."""
    total = mpmath.mpf(0)
    for sj, rj in zip(s, r):
        tx = (b**sj * x) % 2
        ty = (b**sj * y) % 2
        total += rj * mp(a) ** sj * (mpmath.cospi(mp(ty)) - mpmath.cospi(mp(tx)))
    return abs(total) / abs(mp(y - x))
