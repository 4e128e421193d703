"""Takagi's function, its wrapped/radial/sum variants, and signed Weierstrass series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .config import TAKAGI_PERIOD_CAP
from .exact import (
    DEFAULT_EPS,
    CapacityError,
    DomainError,
    Enclosure,
    FunctionHandle,
    FunctionHandle2D,
    PiecewiseLinear,
    TightenTolerance,
    as_rational,
    cos_pi,
    dist_to_Z,
    frac,
    pi_enclosure,
    sqrt_enclosure,
)


def _check_unit(x: Fraction, what: str = "x") -> None:
    if not 0 <= x <= 1:
        raise DomainError(f"{what} = {x} outside [0, 1]")


# -- Takagi ----------------------------------------------------------------------


def takagi_exact(x, period_cap: int = TAKAGI_PERIOD_CAP) -> Fraction:
    """Exact T(x) = sum_{n>=0} 2^-n dist(2^n x, Z) for rational x in [0, 1].

    The doubling orbit of a rational is eventually periodic; the periodic
    part is summed as a geometric series.
    """
    x = as_rational(x)
    _check_unit(x)
    u = frac(x)
    total = Fraction(0)
    weight = Fraction(1)
    while u.denominator % 2 == 0:
        total += weight * dist_to_Z(u)
        weight /= 2
        u = frac(2 * u)
    if u == 0:
        return total
    start = u
    block = Fraction(0)
    w = Fraction(1)
    steps = 0
    while True:
        block += w * dist_to_Z(u)
        w /= 2
        u = frac(2 * u)
        steps += 1
        if u == start:
            break
        if steps >= period_cap:
            raise CapacityError(f"doubling orbit of {x} has period above {period_cap}")
    return total + weight * block / (1 - w)


def _takagi_terms(x: Fraction, eps: Fraction) -> Enclosure:
    # partial sum through n = N with 2^-(N+1) <= eps; the tail lies in [0, 2^-(N+1)]
    N = 0
    while Fraction(1, 2 ** (N + 1)) > eps:
        N += 1
    u = frac(x)
    total = Fraction(0)
    weight = Fraction(1)
    for _ in range(N + 1):
        if u == 0:
            return Enclosure.point(total)
        total += weight * dist_to_Z(u)
        weight /= 2
        u = frac(2 * u)
    if u == 0:
        return Enclosure.point(total)
    return Enclosure(total, total + weight)


def takagi_enclosure(x, eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of T(x) of width at most ``eps`` (hence at most ``2*eps``)."""
    x = as_rational(x)
    _check_unit(x)
    eps = as_rational(eps)
    if eps <= 0:
        raise DomainError("tolerance must be positive")
    return _takagi_terms(x, eps)


def wrapped_takagi(x, eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of T(frac(x)) for x >= 0."""
    x = as_rational(x)
    if x < 0:
        raise DomainError(f"x = {x} must be non-negative")
    return takagi_enclosure(frac(x), eps)


def takagi_modulus(delta) -> Fraction:
    """Declared modulus of continuity: |T(u) - T(v)| <= takagi_modulus(|u - v|).

    Uses 2*d*(1 + log2(1/d)) with the logarithm rounded up to an integer,
    and the trivial bound 2/3 once d >= 1.
    """
    d = as_rational(delta)
    if d < 0:
        raise DomainError("modulus argument must be non-negative")
    if d == 0:
        return Fraction(0)
    if d >= 1:
        return Fraction(2, 3)
    k = 0
    while Fraction(2**k) * d < 1:
        k += 1
    return min(Fraction(2, 3), 2 * d * (1 + k))


def takagi_partial_pl(depth: int) -> PiecewiseLinear:
    """The partial sum through n = depth as an exact piecewise-linear function on [0, 1]."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    den = 2 ** (depth + 1)
    xs = [Fraction(k, den) for k in range(den + 1)]
    ys = [sum(Fraction(1, 2**n) * dist_to_Z(2**n * x) for n in range(depth + 1)) for x in xs]
    return PiecewiseLinear(tuple(xs), tuple(ys))


def takagi_handle() -> FunctionHandle:
    return FunctionHandle(takagi_enclosure, (0, 1), takagi_modulus, "takagi")


def sum_takagi(x, y) -> Fraction:
    """Exact T(x) + T(y)."""
    return takagi_exact(x) + takagi_exact(y)


def sum_takagi_handle() -> FunctionHandle2D:
    def ev(x, y, eps):
        return takagi_enclosure(x, eps / 2) + takagi_enclosure(y, eps / 2)

    return FunctionHandle2D(ev, ((0, 1), (0, 1)), "sum_takagi")


def radial_takagi(x1, x2, eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of T(frac(sqrt(x1^2 + x2^2))) on [0, 1]^2.

    When the radius is irrational its enclosure is pushed through
    :func:`takagi_modulus`; T is 1-periodic and continuous on the line, so
    the bound holds across integer radii as well.
    """
    x1, x2 = as_rational(x1), as_rational(x2)
    _check_unit(x1, "x1")
    _check_unit(x2, "x2")
    eps = as_rational(eps)
    r2 = x1 * x1 + x2 * x2
    r_eps = eps
    while True:
        r = sqrt_enclosure(r2, r_eps)
        if r.is_exact:
            return wrapped_takagi(r.lo, eps)
        slack = takagi_modulus(r.width)
        if slack <= eps / 2:
            break
        r_eps /= 256
    return wrapped_takagi(r.lo, eps / 2).widen(slack)


def radial_takagi_handle() -> FunctionHandle2D:
    return FunctionHandle2D(radial_takagi, ((0, 1), (0, 1)), "radial_takagi")


# -- signed Weierstrass series ------------------------------------------------------


class ParameterRejected(ValueError):
    """Weierstrass parameters that fail a validity condition.

    ``condition`` is one of ``"b-even"``, ``"ab-not-above-1"`` or
    ``"margin-nonpositive"``.
    """

    def __init__(self, condition: str, message: str):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class WeierstrassParams:
    a: Fraction
    b: int
    margin: Enclosure

    @property
    def ab(self) -> Fraction:
        return self.a * self.b


def margin_enclosure(a, b, eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of 2/3 - 4a/(1-a) - pi/(ab-1), width at most 2*eps."""
    a = as_rational(a)
    ab1 = a * b - 1
    pi = pi_enclosure(as_rational(eps) * ab1)
    return Fraction(2, 3) - 4 * a / (1 - a) - pi / ab1


def weierstrass_margin(a, b: int, eps=DEFAULT_EPS) -> WeierstrassParams:
    """Validate (a, b) and certify a positive margin, or raise ParameterRejected."""
    a = as_rational(a)
    if not 0 < a < 1:
        raise DomainError(f"a = {a} outside (0, 1)")
    if int(b) != b or b < 1:
        raise DomainError(f"b = {b} must be a positive integer")
    b = int(b)
    if b % 2 == 0:
        raise ParameterRejected("b-even", f"b = {b} is even")
    if a * b <= 1:
        raise ParameterRejected("ab-not-above-1", f"a*b = {a * b} is not above 1")
    margin = margin_enclosure(a, b, eps)
    if margin.lo > 0:
        return WeierstrassParams(a, b, margin)
    if margin.hi <= 0:
        raise ParameterRejected("margin-nonpositive", f"margin {margin} is not positive")
    raise TightenTolerance(f"margin sign undecided at eps = {eps}; tighten eps", margin)


LEMMA_A = Fraction(1, 14)
LEMMA_B = 147


@lru_cache(maxsize=None)
def lemma_default(eps=Fraction(1, 10**15)) -> WeierstrassParams:
    """The shipped valid pair a = 1/14, b = 147."""
    return weierstrass_margin(LEMMA_A, LEMMA_B, eps)


@dataclass(frozen=True)
class SignSequence:
    """Finite prefix of bits in {0, 1}, extended by a constant ``tail`` bit."""

    bits: tuple
    tail: int = 0

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("sign sequence needs a non-empty prefix")
        if any(b not in (0, 1) for b in bits) or self.tail not in (0, 1):
            raise ValueError("sign bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __getitem__(self, j: int) -> int:
        return self.bits[j] if j < len(self.bits) else self.tail

    def flipped(self) -> "SignSequence":
        return SignSequence(tuple(1 - b for b in self.bits), 1 - self.tail)

    @classmethod
    def zeros(cls, n: int = 1) -> "SignSequence":
        return cls((0,) * n)

    @classmethod
    def alternating(cls, n: int) -> "SignSequence":
        return cls(tuple(j % 2 for j in range(n)))


def weierstrass_eval(p: WeierstrassParams, alpha: SignSequence, x, eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of sum_j (-1)^alpha(j) a^j cos(b^j pi x)."""
    x = as_rational(x)
    _check_unit(x)
    eps = as_rational(eps)
    a, b = p.a, p.b
    N = 0
    while a ** (N + 1) / (1 - a) > eps / 2:
        N += 1
    tail = a ** (N + 1) / (1 - a)
    eta = eps / (4 * (N + 1))
    total = Enclosure(-tail, tail)
    for j in range(N + 1):
        term = cos_pi(b**j * x, eta) * a**j
        total = total + (-term if alpha[j] else term)
    return total


def weierstrass_handle(p: WeierstrassParams, alpha: SignSequence) -> FunctionHandle:
    return FunctionHandle(lambda x, eps: weierstrass_eval(p, alpha, x, eps), (0, 1), None,
                          "weierstrass")
