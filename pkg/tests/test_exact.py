from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cos_pi_mp, dist_z, mp
from roughlab.exact import (
    DomainError,
    Enclosure,
    FunctionHandle,
    PiecewiseLinear,
    Verdict,
    as_rational,
    compare_gt,
    compare_le,
    compare_lt,
    cos_enclosure,
    cos_pi,
    dist_to_Z,
    format_rational,
    pi_enclosure,
    sqrt_enclosure,
    sup_distance_grid,
)
from roughlab.pathology import takagi_handle

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=10**6)
unit = st.fractions(min_value=0, max_value=1, max_denominator=10**6)


def test_dist_examples():
    assert dist_to_Z(F(1, 2)) == F(1, 2)
    assert dist_to_Z(2) == 0
    assert dist_to_Z(F(7, 3)) == F(1, 3)


@settings(max_examples=1000)
@given(rationals)
def test_dist_symmetric_and_periodic(q):
    d = dist_to_Z(q)
    assert d == dist_to_Z(-q) == dist_to_Z(q + 1)
    assert 0 <= d <= F(1, 2)
    assert d == dist_z(q)


def test_as_rational_parsing():
    assert as_rational("3/4") == F(3, 4)
    assert as_rational("0.125") == F(1, 8)
    assert as_rational(7) == F(7)
    with pytest.raises(TypeError):
        as_rational(0.5)
    with pytest.raises(TypeError):
        as_rational(True)
    with pytest.raises(ValueError):
        as_rational("1/x")
    assert format_rational(F(2, 3)) == "2/3"
    assert format_rational(F(4)) == "4/1"


def test_enclosure_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        Enclosure(1, 0)


def test_three_valued_comparisons():
    a, b = Enclosure(2, 3), Enclosure(0, 1)
    assert compare_gt(a, b) is Verdict.CERTIFIED
    assert compare_gt(b, a) is Verdict.FAILED
    assert compare_gt(Enclosure(0, 2), Enclosure(1, 3)) is Verdict.UNDECIDED
    assert compare_le(Enclosure(0, 1), 1) is Verdict.CERTIFIED
    assert compare_lt(Enclosure(0, 1), 1) is Verdict.UNDECIDED
    assert compare_lt(Enclosure(0, 1), 2) is Verdict.CERTIFIED


def _nested(draw_pair):
    lo, hi = sorted(draw_pair)
    return Enclosure(lo, hi)


intervals = st.tuples(rationals, rationals).map(_nested)


@settings(max_examples=300)
@given(intervals, intervals, rationals, st.fractions(min_value=0, max_value=5, max_denominator=100))
def test_arithmetic_is_inclusion_monotone(a, b, c, pad):
    wa, wb = a.widen(pad), b.widen(pad)
    for inner, outer in ((a + b, wa + wb), (a - b, wa - wb), (a * c, wa * c), (-a, -wa), (a * b, wa * wb)):
        assert outer.lo <= inner.lo and inner.hi <= outer.hi


@settings(max_examples=150, deadline=None)
@given(st.fractions(min_value=-8, max_value=8, max_denominator=1000),
       st.fractions(min_value=0, max_value=3, max_denominator=100),
       st.fractions(min_value=0, max_value=1, max_denominator=100))
def test_cos_enclosure_is_inclusion_monotone(x, w, pad):
    inner = Enclosure(x, x + w)
    outer = inner.widen(pad)
    eps = F(1, 10**9)
    ci, co = cos_enclosure(inner, eps), cos_enclosure(outer, eps)
    assert co.lo <= ci.lo and ci.hi <= co.hi
    # and it really contains the cosine at the ends
    for t in (inner.lo, inner.hi):
        assert mp(ci.lo) <= mpmath.cos(mp(t)) <= mp(ci.hi)


def test_pi_enclosure_against_reference():
    for k in (3, 12, 30, 60):
        eps = F(1, 10**k)
        p = pi_enclosure(eps)
        assert p.width <= 2 * eps
        assert mp(p.lo) <= mpmath.pi <= mp(p.hi)


@settings(max_examples=300, deadline=None)
@given(st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**5),
       st.sampled_from([F(1, 10**6), F(1, 10**12), F(1, 10**20)]))
def test_cos_pi_against_reference(t, eps):
    enc = cos_pi(t, eps)
    assert enc.width <= 2 * eps
    ref = cos_pi_mp(t)
    assert mp(enc.lo) <= ref <= mp(enc.hi)


def test_cos_pi_exact_at_half_integers():
    assert cos_pi(0) == Enclosure.point(1)
    assert cos_pi(1) == Enclosure.point(-1)
    assert cos_pi(F(5, 2)) == Enclosure.point(0)
    assert cos_pi(147**20) == Enclosure.point(1 if 147**20 % 2 == 0 else -1)


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=0, max_value=10**4, max_denominator=10**4))
def test_sqrt_against_reference(q):
    eps = F(1, 10**15)
    enc = sqrt_enclosure(q, eps)
    assert mp(enc.lo) <= mpmath.sqrt(mp(q)) <= mp(enc.hi)
    assert enc.width <= 2 * eps or enc.width <= F(1, 2**40)


def test_sqrt_perfect_squares_exact():
    assert sqrt_enclosure(F(9, 25)) == Enclosure.point(F(3, 5))
    with pytest.raises(DomainError):
        sqrt_enclosure(-1)


# -- piecewise-linear algebra -----------------------------------------------------------

TENT = PiecewiseLinear((0, F(1, 2), 1), (0, 1, 0))


def test_pl_examples():
    assert PiecewiseLinear.identity()(F(1, 3)) == F(1, 3)
    assert TENT(F(1, 4)) == F(1, 2)
    with pytest.raises(DomainError):
        PiecewiseLinear.identity()(2)
    assert PiecewiseLinear.identity().max_slope() == 1
    assert PiecewiseLinear.constant(5).max_slope() == 0
    assert TENT.max_slope() == 2
    with pytest.raises(ValueError):
        PiecewiseLinear((0,), (1,)).max_slope()


@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=50), min_size=2, max_size=12, unique=True),
       st.data())
def test_pl_reproduces_breakpoint_values(xs, data):
    xs = sorted(xs)
    ys = data.draw(st.lists(rationals, min_size=len(xs), max_size=len(xs)))
    f = PiecewiseLinear(tuple(xs), tuple(ys))
    assert [f(x) for x in xs] == [F(y) for y in ys]


def test_pl_algebra_and_clamp():
    g = TENT + PiecewiseLinear.identity()
    assert g(F(1, 4)) == F(3, 4) and g(1) == 1
    assert (TENT - TENT).sup_norm() == 0
    c = TENT.clamp(PiecewiseLinear.constant(F(1, 4)), PiecewiseLinear.constant(F(3, 4)))
    assert c(0) == F(1, 4) and c(F(1, 2)) == F(3, 4) and c(F(1, 4)) == F(1, 2)
    # crossings are inserted so the clamp stays exact
    assert F(3, 8) in c.breakpoints
    assert TENT.compose_affine(2, 4)(3) == 1


def test_function_handle_domain():
    h = FunctionHandle.exact(lambda x: x)
    with pytest.raises(DomainError):
        h(2)


def test_sup_distance_grid_examples():
    eps = F(1, 10**9)
    t = takagi_handle()
    d = sup_distance_grid(t, t, [F(k, 7) for k in range(8)], eps)
    assert d.lo <= 0 <= d.hi and d.width <= 4 * eps
    one = sup_distance_grid(FunctionHandle.constant(0), FunctionHandle.constant(1), [0, F(1, 2)], eps)
    assert one == Enclosure.point(1)
    third = sup_distance_grid(t, FunctionHandle.constant(0), [F(1, 3)], eps)
    assert third.contains(F(2, 3))
    with pytest.raises(ValueError):
        sup_distance_grid(t, t, [], eps)
