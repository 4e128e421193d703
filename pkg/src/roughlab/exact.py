"""Exact rationals, rigorous enclosures and piecewise-linear functions.

Every certificate in the package is decided here: values are either exact
``Fraction`` objects or :class:`Enclosure` intervals with rational endpoints.
Transcendental quantities (pi, cos, sin, sqrt) only ever appear as
enclosures whose endpoints are rounded outward onto a dyadic grid.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

Rational = Fraction

DEFAULT_EPS = Fraction(1, 10**12)


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(RuntimeError):
    """A configured depth/period cap was exceeded."""


class TightenTolerance(ArithmeticError):
    """A three-valued comparison came out undecided at the given tolerance."""

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.detail = detail


class Verdict(str, enum.Enum):
    CERTIFIED = "certified"
    FAILED = "failed"
    UNDECIDED = "undecided"


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` / decimal strings to a Fraction.

    Binary floats are refused: they would smuggle rounding into certificates.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed rational: {value!r}") from exc
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def format_rational(q: Fraction) -> str:
    q = as_rational(q)
    return f"{q.numerator}/{q.denominator}"


def dist_to_Z(q) -> Fraction:
    """Distance from ``q`` to the nearest integer, in [0, 1/2]."""
    q = as_rational(q)
    frac = q - math.floor(q)
    return min(frac, 1 - frac)


def frac(q) -> Fraction:
    q = as_rational(q)
    return q - math.floor(q)


def bits_for(eps) -> int:
    """Number of dyadic fraction bits that resolves a tolerance ``eps``."""
    eps = as_rational(eps)
    if eps <= 0:
        raise DomainError("tolerance must be positive")
    k = max(0, eps.denominator.bit_length() - eps.numerator.bit_length() - 1)
    while Fraction(1, 1 << k) > eps:
        k += 1
    return max(32, k + 8)


def _floor_to(q: Fraction, bits: int) -> Fraction:
    return Fraction((q.numerator << bits) // q.denominator, 1 << bits)


def _ceil_to(q: Fraction, bits: int) -> Fraction:
    return Fraction(-((-q.numerator << bits) // q.denominator), 1 << bits)


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lo, hi]`` with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        if lo > hi:
            raise ValueError(f"empty enclosure [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, q) -> "Enclosure":
        q = as_rational(q)
        return cls(q, q)

    @classmethod
    def coerce(cls, value) -> "Enclosure":
        return value if isinstance(value, Enclosure) else cls.point(value)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, value) -> bool:
        if isinstance(value, Enclosure):
            return self.lo <= value.lo and value.hi <= self.hi
        q = as_rational(value)
        return self.lo <= q <= self.hi

    def intersects(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, r) -> "Enclosure":
        r = as_rational(r)
        return Enclosure(self.lo - r, self.hi + r)

    def snap(self, bits: int) -> "Enclosure":
        """Round outward onto the ``2**-bits`` grid."""
        return Enclosure(_floor_to(self.lo, bits), _ceil_to(self.hi, bits))

    def __add__(self, other):
        o = Enclosure.coerce(other)
        return Enclosure(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        o = Enclosure.coerce(other)
        return Enclosure(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return Enclosure.coerce(other) - self

    def __mul__(self, other):
        o = Enclosure.coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Enclosure(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Enclosure.coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("divisor enclosure contains zero")
        return self * Enclosure(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, other):
        return Enclosure.coerce(other) / self

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(0, max(-self.lo, self.hi))

    def square(self) -> "Enclosure":
        a = abs(self)
        return Enclosure(a.lo * a.lo, a.hi * a.hi)

    def __repr__(self):
        return f"Enclosure({self.lo}, {self.hi})"


def compare_gt(a, b) -> Verdict:
    """Three-valued ``a > b``: certified iff ``a.lo > b.hi``."""
    a, b = Enclosure.coerce(a), Enclosure.coerce(b)
    if a.lo > b.hi:
        return Verdict.CERTIFIED
    if a.hi <= b.lo:
        return Verdict.FAILED
    return Verdict.UNDECIDED


def compare_le(a, b) -> Verdict:
    """Three-valued ``a <= b``: certified iff ``a.hi <= b.lo``."""
    a, b = Enclosure.coerce(a), Enclosure.coerce(b)
    if a.hi <= b.lo:
        return Verdict.CERTIFIED
    if a.lo > b.hi:
        return Verdict.FAILED
    return Verdict.UNDECIDED


def compare_lt(a, b) -> Verdict:
    a, b = Enclosure.coerce(a), Enclosure.coerce(b)
    if a.hi < b.lo:
        return Verdict.CERTIFIED
    if a.lo >= b.hi:
        return Verdict.FAILED
    return Verdict.UNDECIDED


# -- transcendental enclosures ------------------------------------------------


def _atan_inv_bracket(k: int, bits: int) -> tuple[Fraction, Fraction]:
    """Bracket arctan(1/k) by consecutive partial sums of its alternating series."""
    tol = Fraction(1, 1 << (bits + 4))
    x = Fraction(1, k)
    x2 = x * x
    power = x
    total = x
    j = 0
    while True:
        j += 1
        power *= x2
        term = power / (2 * j + 1)
        nxt = total - term if j % 2 else total + term
        if term < tol:
            return (min(total, nxt), max(total, nxt))
        total = nxt


@lru_cache(maxsize=64)
def _pi_at_bits(bits: int) -> Enclosure:
    a_lo, a_hi = _atan_inv_bracket(5, bits)
    b_lo, b_hi = _atan_inv_bracket(239, bits)
    return Enclosure(16 * a_lo - 4 * b_hi, 16 * a_hi - 4 * b_lo).snap(bits + 2)


def pi_enclosure(eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of pi of width at most ``2*eps`` (Machin's formula)."""
    return _pi_at_bits(bits_for(eps))


def _cos_series(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    # Terms x^(2j)/(2j)! decrease from j >= 1 whenever x^2 <= 12.
    tol = Fraction(1, 1 << (bits + 4))
    x2 = x * x
    term = Fraction(1)
    total = Fraction(1)
    j = 0
    while True:
        j += 1
        term = term * x2 / ((2 * j - 1) * (2 * j))
        nxt = total - term if j % 2 else total + term
        if j >= 2 and term < tol:
            return (min(total, nxt), max(total, nxt))
        total = nxt


def _sin_series(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    # Valid for 0 <= x <= 1 where the terms decrease from the start.
    tol = Fraction(1, 1 << (bits + 4))
    x2 = x * x
    term = x
    total = x
    j = 0
    while True:
        j += 1
        term = term * x2 / ((2 * j) * (2 * j + 1))
        nxt = total - term if j % 2 else total + term
        if term < tol:
            return (min(total, nxt), max(total, nxt))
        total = nxt


@lru_cache(maxsize=65536)
def _cos_pi_reduced(t: Fraction, bits: int) -> Enclosure:
    """cos(pi*t) for 0 < t < 1/2."""
    pi = _pi_at_bits(bits + 2)
    theta = Enclosure(pi.lo * t, pi.hi * t).snap(bits + 4)
    if t <= Fraction(1, 4):
        lo, _ = _cos_series(theta.hi, bits + 4)
        _, hi = _cos_series(theta.lo, bits + 4)
    else:
        u = Fraction(1, 2) - t
        theta = Enclosure(pi.lo * u, pi.hi * u).snap(bits + 4)
        lo, _ = _sin_series(theta.lo, bits + 4)
        _, hi = _sin_series(theta.hi, bits + 4)
    return Enclosure(max(lo, Fraction(-1)), min(hi, Fraction(1))).snap(bits + 2)


def cos_pi(t, eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of cos(pi*t) for rational t, width <= 2*eps.

    The argument is reduced modulo 2 exactly, so huge ``t`` such as
    ``147**20 * x`` cost nothing extra. Multiples of 1/2 come back exact.
    """
    t = as_rational(t) % 2
    if t > 1:
        t = 2 - t
    sign = 1
    if t > Fraction(1, 2):
        t, sign = 1 - t, -1
    if t == 0:
        return Enclosure.point(sign)
    if t == Fraction(1, 2):
        return Enclosure.point(0)
    eps = as_rational(eps)
    bits = bits_for(eps)
    while True:
        enc = _cos_pi_reduced(t, bits)
        if enc.width <= 2 * eps:
            return enc if sign > 0 else -enc
        bits += 8


def _cos_range_small(r: Enclosure, bits: int) -> Enclosure:
    """Range of cos over ``r`` where ``r`` sits inside (-pi, pi) and |r| < 3."""
    lo_a, hi_a = _cos_series(r.lo, bits)
    lo_b, hi_b = _cos_series(r.hi, bits)
    if r.lo >= 0:
        out = Enclosure(lo_b, hi_a)
    elif r.hi <= 0:
        out = Enclosure(lo_a, hi_b)
    else:
        out = Enclosure(min(lo_a, lo_b), Fraction(1))
    return Enclosure(max(out.lo, Fraction(-1)), min(out.hi, Fraction(1)))


def cos_enclosure(x, eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of the range of cos over an enclosure (or at a rational point).

    Inputs are first rounded outward to the working dyadic grid, which keeps
    the operation inclusion-monotone for nested inputs.
    """
    bits = bits_for(eps)
    X = Enclosure.coerce(x).snap(bits)
    rough = _pi_at_bits(16)
    if X.width >= 2 * rough.lo:
        return Enclosure(-1, 1)
    if X.width > 1:
        pieces = math.ceil(X.width)
        step = X.width / pieces
        out = None
        for i in range(pieces):
            piece = Enclosure(X.lo + i * step, X.lo + (i + 1) * step)
            part = cos_enclosure(piece, eps)
            out = part if out is None else out.hull(part)
        return out
    k = round(X.mid / rough.mid)
    pi = _pi_at_bits(bits + abs(k).bit_length() + 4)
    r = (X - pi * k).snap(bits + 4)
    out = _cos_range_small(r, bits + 4)
    if k % 2:
        out = -out
    return out.snap(bits)


def sqrt_enclosure(x, eps=DEFAULT_EPS) -> Enclosure:
    """Enclosure of sqrt over a non-negative enclosure (or rational point).

    Perfect squares of rationals come back exact.
    """
    X = Enclosure.coerce(x)
    if X.lo < 0:
        raise DomainError("square root of a negative quantity")
    bits = bits_for(eps)

    def exact_root(q: Fraction):
        rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
        if rn * rn == q.numerator and rd * rd == q.denominator:
            return Fraction(rn, rd)
        return None

    def lower(q: Fraction) -> Fraction:
        r = exact_root(q)
        if r is not None:
            return r
        return Fraction(math.isqrt((q.numerator << (2 * bits)) // q.denominator), 1 << bits)

    def upper(q: Fraction) -> Fraction:
        r = exact_root(q)
        if r is not None:
            return r
        return Fraction(math.isqrt((q.numerator << (2 * bits)) // q.denominator) + 1, 1 << bits)

    return Enclosure(lower(X.lo), upper(X.hi))


# -- piecewise-linear functions -----------------------------------------------


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function over rational breakpoints."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        xs = tuple(as_rational(b) for b in self.breakpoints)
        ys = tuple(as_rational(v) for v in self.values)
        if not xs:
            raise ValueError("piecewise-linear function needs at least one breakpoint")
        if len(xs) != len(ys):
            raise ValueError("breakpoints and values differ in length")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "values", ys)

    @classmethod
    def constant(cls, c, lo=0, hi=1) -> "PiecewiseLinear":
        return cls((lo, hi), (c, c))

    @classmethod
    def identity(cls, lo=0, hi=1) -> "PiecewiseLinear":
        return cls((lo, hi), (lo, hi))

    @classmethod
    def sample(cls, xs: Iterable, fn: Callable[[Fraction], Fraction]) -> "PiecewiseLinear":
        xs = sorted({as_rational(x) for x in xs})
        return cls(tuple(xs), tuple(fn(x) for x in xs))

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    def __call__(self, x) -> Fraction:
        x = as_rational(x)
        xs = self.breakpoints
        if not xs[0] <= x <= xs[-1]:
            raise DomainError(f"{x} outside [{xs[0]}, {xs[-1]}]")
        i = bisect.bisect_left(xs, x)
        if xs[i] == x:
            return self.values[i]
        x0, x1 = xs[i - 1], xs[i]
        y0, y1 = self.values[i - 1], self.values[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def slopes(self) -> list[Fraction]:
        xs, ys = self.breakpoints, self.values
        return [(ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]

    def max_slope(self) -> Fraction:
        if len(self.breakpoints) < 2:
            raise ValueError("max slope of a single-point function is undefined")
        return max(abs(s) for s in self.slopes())

    def sup_norm(self) -> Fraction:
        return max(abs(v) for v in self.values)

    def restrict(self, lo, hi) -> "PiecewiseLinear":
        lo, hi = as_rational(lo), as_rational(hi)
        u, v = self.domain
        if not u <= lo <= hi <= v:
            raise DomainError(f"[{lo}, {hi}] not inside [{u}, {v}]")
        xs = [lo] + [b for b in self.breakpoints if lo < b < hi] + ([hi] if hi > lo else [])
        return PiecewiseLinear(tuple(xs), tuple(self(x) for x in xs))

    def _merged(self, other: "PiecewiseLinear") -> list[Fraction]:
        lo = max(self.domain[0], other.domain[0])
        hi = min(self.domain[1], other.domain[1])
        if lo > hi:
            raise DomainError("domains do not overlap")
        pts = {lo, hi}
        pts.update(b for b in self.breakpoints if lo <= b <= hi)
        pts.update(b for b in other.breakpoints if lo <= b <= hi)
        return sorted(pts)

    def __add__(self, other):
        if isinstance(other, PiecewiseLinear):
            xs = self._merged(other)
            return PiecewiseLinear(tuple(xs), tuple(self(x) + other(x) for x in xs))
        c = as_rational(other)
        return PiecewiseLinear(self.breakpoints, tuple(v + c for v in self.values))

    __radd__ = __add__

    def __neg__(self):
        return PiecewiseLinear(self.breakpoints, tuple(-v for v in self.values))

    def __sub__(self, other):
        return self + (-other if isinstance(other, PiecewiseLinear) else -as_rational(other))

    def scale(self, c) -> "PiecewiseLinear":
        c = as_rational(c)
        return PiecewiseLinear(self.breakpoints, tuple(c * v for v in self.values))

    def compose_affine(self, lo, hi) -> "PiecewiseLinear":
        """Return ``x -> self(r(x))`` on [lo, hi] where ``r`` maps [lo, hi] onto the domain."""
        lo, hi = as_rational(lo), as_rational(hi)
        u, v = self.domain
        xs = tuple(lo + (b - u) * (hi - lo) / (v - u) for b in self.breakpoints)
        return PiecewiseLinear(xs, self.values)

    def clamp(self, lower: "PiecewiseLinear", upper: "PiecewiseLinear") -> "PiecewiseLinear":
        """Pointwise ``max(lower, min(self, upper))``, exact, crossings inserted."""
        pts = set(self._merged(lower)) | set(self._merged(upper))
        lo = max(self.domain[0], lower.domain[0], upper.domain[0])
        hi = min(self.domain[1], lower.domain[1], upper.domain[1])
        pts = sorted(p for p in pts if lo <= p <= hi)
        crossings = set()
        for a, b in zip(pts, pts[1:]):
            for env in (lower, upper):
                da, db = self(a) - env(a), self(b) - env(b)
                if da * db < 0:
                    crossings.add(a + (b - a) * da / (da - db))
        xs = sorted(set(pts) | crossings)
        ys = [max(lower(x), min(self(x), upper(x))) for x in xs]
        return PiecewiseLinear(tuple(xs), tuple(ys))

    def handle(self, name: str = "pl") -> "FunctionHandle":
        return FunctionHandle(
            lambda x, eps: Enclosure.point(self(x)),
            domain=self.domain,
            modulus=None if len(self.breakpoints) < 2 else _lipschitz_modulus(self.max_slope()),
            name=name,
        )


def pl_eval(f: PiecewiseLinear, x) -> Fraction:
    return f(x)


def pl_max_slope(f: PiecewiseLinear) -> Fraction:
    return f.max_slope()


def _lipschitz_modulus(L: Fraction) -> Callable[[Fraction], Fraction]:
    return lambda delta: L * as_rational(delta)


# -- evaluable functions ---------------------------------------------------------


@dataclass(frozen=True)
class FunctionHandle:
    """A real function known through rational enclosures.

    ``evaluate(x, eps)`` must return an :class:`Enclosure` of width at most
    ``2*eps`` containing ``f(x)``. ``modulus`` optionally bounds
    ``|f(u) - f(v)|`` by ``modulus(|u - v|)``.
    """

    evaluate: Callable[[Fraction, Fraction], Enclosure]
    domain: tuple = (Fraction(0), Fraction(1))
    modulus: Callable[[Fraction], Fraction] | None = None
    name: str = "f"

    def __post_init__(self):
        lo, hi = (as_rational(d) for d in self.domain)
        object.__setattr__(self, "domain", (lo, hi))

    def __call__(self, x, eps=DEFAULT_EPS) -> Enclosure:
        x = as_rational(x)
        lo, hi = self.domain
        if not lo <= x <= hi:
            raise DomainError(f"{self.name}: {x} outside [{lo}, {hi}]")
        return self.evaluate(x, as_rational(eps))

    @classmethod
    def exact(cls, fn: Callable[[Fraction], Fraction], domain=(0, 1), name="f", modulus=None):
        return cls(lambda x, eps: Enclosure.point(fn(x)), domain, modulus, name)

    @classmethod
    def constant(cls, c, domain=(0, 1)) -> "FunctionHandle":
        c = as_rational(c)
        return cls(lambda x, eps: Enclosure.point(c), domain, lambda d: Fraction(0), f"const({c})")

    def shifted(self, c) -> "FunctionHandle":
        c = as_rational(c)
        ev = self.evaluate
        return FunctionHandle(lambda x, eps: ev(x, eps) + c, self.domain, self.modulus,
                              f"{self.name}+{c}")


@dataclass(frozen=True)
class FunctionHandle2D:
    """A function on a rational box known through enclosures."""

    evaluate: Callable[[Fraction, Fraction, Fraction], Enclosure]
    box: tuple = ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))
    name: str = "F"

    def __post_init__(self):
        box = tuple((as_rational(a), as_rational(b)) for a, b in self.box)
        object.__setattr__(self, "box", box)

    def in_domain(self, x, y) -> bool:
        (x0, x1), (y0, y1) = self.box
        return x0 <= x <= x1 and y0 <= y <= y1

    def __call__(self, x, y, eps=DEFAULT_EPS) -> Enclosure:
        x, y = as_rational(x), as_rational(y)
        if not self.in_domain(x, y):
            raise DomainError(f"{self.name}: ({x}, {y}) outside {self.box}")
        return self.evaluate(x, y, as_rational(eps))

    @classmethod
    def exact(cls, fn, box=((0, 1), (0, 1)), name="F") -> "FunctionHandle2D":
        return cls(lambda x, y, eps: Enclosure.point(fn(x, y)), box, name)

    @classmethod
    def constant(cls, c, box=((0, 1), (0, 1))) -> "FunctionHandle2D":
        c = as_rational(c)
        return cls(lambda x, y, eps: Enclosure.point(c), box, f"const({c})")


def sup_distance_grid(f: FunctionHandle, g: FunctionHandle, grid: Sequence, eps) -> Enclosure:
    """Enclosure of ``max_x |f(x) - g(x)|`` over the grid.

    The lower end is a certified lower bound on the true sup-norm distance.
    """
    grid = [as_rational(x) for x in grid]
    if not grid:
        raise ValueError("empty grid")
    lo = hi = None
    for x in grid:
        d = abs(f(x, eps) - g(x, eps))
        lo = d.lo if lo is None else max(lo, d.lo)
        hi = d.hi if hi is None else max(hi, d.hi)
    return Enclosure(lo, hi)
