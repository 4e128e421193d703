import random
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import margin_mp, mp, takagi_partial
from roughlab.exact import CapacityError, DomainError, Enclosure, TightenTolerance, dist_to_Z, frac
from roughlab.pathology import (
    LEMMA_A,
    LEMMA_B,
    ParameterRejected,
    SignSequence,
    lemma_default,
    radial_takagi,
    sum_takagi,
    takagi_enclosure,
    takagi_exact,
    takagi_modulus,
    takagi_partial_pl,
    weierstrass_eval,
    weierstrass_margin,
    wrapped_takagi,
)

unit = st.fractions(min_value=0, max_value=1, max_denominator=2000)


@pytest.mark.parametrize("x, value", [(0, 0), (1, 0), (F(1, 2), F(1, 2)), (F(1, 4), F(1, 2)),
                                      (F(1, 3), F(2, 3)), (F(1, 7), F(22, 49))])
def test_takagi_exact_values(x, value):
    assert takagi_exact(x) == value
    # brute partial sum oracle, tail at most 2^-200
    assert abs(takagi_partial(F(x)) - value) <= F(1, 2**200)


def test_takagi_errors():
    with pytest.raises(DomainError):
        takagi_exact(F(3, 2))
    # 2 has order 486 modulo 729
    with pytest.raises(CapacityError):
        takagi_exact(F(1, 729))


@settings(max_examples=300)
@given(st.fractions(min_value=0, max_value=1, max_denominator=300))
def test_enclosure_contains_exact(x):
    try:
        exact = takagi_exact(x)
    except CapacityError:
        exact = None
    eps = F(1, 10**9)
    enc = takagi_enclosure(x, eps)
    assert enc.width <= 2 * eps
    if exact is not None:
        assert enc.contains(exact)
    assert abs(mp(enc.mid) - mp(takagi_partial(x))) <= 2 * mp(eps)


def test_enclosure_examples():
    assert takagi_enclosure(0, F(1, 2)).contains(0)
    e = takagi_enclosure(F(1, 3), F(1, 1000))
    assert e.contains(F(2, 3)) and e.width <= F(1, 500)
    assert takagi_enclosure(F(1, 4), F(1, 8)).contains(F(1, 2))


def test_wrapped_examples():
    assert wrapped_takagi(F(5, 4)).contains(F(1, 2))
    assert wrapped_takagi(3).contains(0)
    assert wrapped_takagi(1).contains(0)
    with pytest.raises(DomainError):
        wrapped_takagi(-1)


@settings(max_examples=200)
@given(unit)
def test_takagi_symmetry(x):
    assert takagi_enclosure(x).intersects(takagi_enclosure(1 - x))


@settings(max_examples=200)
@given(unit)
def test_takagi_self_similarity(x):
    rhs = takagi_enclosure(frac(2 * x)) * F(1, 2) + dist_to_Z(x)
    assert takagi_enclosure(x).intersects(rhs)


def test_takagi_modulus_holds_on_random_pairs():
    rng = random.Random(20240611)
    for _ in range(10_000):
        u = F(rng.randrange(0, 2**20 + 1), 2**20)
        v = F(rng.randrange(0, 2**20 + 1), 2**20)
        # dyadic arguments make takagi_exact a finite sum
        assert abs(takagi_exact(u) - takagi_exact(v)) <= takagi_modulus(abs(u - v))


def test_partial_sum_pl_matches_terms():
    p = takagi_partial_pl(5)
    for k in range(65):
        x = F(k, 64)
        assert p(x) == sum(F(1, 2**n) * dist_to_Z(2**n * x) for n in range(6))
    assert p.sup_norm() <= F(2, 3)


def test_sum_takagi_examples():
    assert sum_takagi(0, 0) == 0
    assert sum_takagi(F(1, 2), F(1, 2)) == 1
    assert sum_takagi(F(1, 3), F(1, 3)) == F(4, 3)


def test_radial_examples():
    eps = F(1, 10**9)
    assert radial_takagi(0, 0, eps).contains(0)
    assert radial_takagi(F(3, 5), F(4, 5), eps) == Enclosure.point(0)
    assert radial_takagi(F(1, 2), 0, eps).contains(F(1, 2))
    irr = radial_takagi(F(1, 2), F(1, 2), eps)
    assert irr.width <= 2 * eps
    r = mpmath.sqrt(mp(F(1, 2)))
    ref = sum(mpmath.mpf(2) ** -n * min(mpmath.frac(2**n * r), 1 - mpmath.frac(2**n * r)) for n in range(150))
    assert mp(irr.lo) <= ref <= mp(irr.hi)


# -- Weierstrass parameters --------------------------------------------------------------


def test_margin_preset():
    p = weierstrass_margin(LEMMA_A, LEMMA_B)
    assert F(28, 1000) < p.margin.lo and p.margin.hi < F(29, 1000)
    ref = margin_mp(LEMMA_A, LEMMA_B)
    assert mp(p.margin.lo) <= ref <= mp(p.margin.hi)
    assert lemma_default().margin.lo > 0


@pytest.mark.parametrize("a, b, condition", [(F(1, 2), 3, "margin-nonpositive"),
                                             (F(1, 14), 146, "b-even"),
                                             (F(1, 14), 13, "ab-not-above-1")])
def test_margin_rejections(a, b, condition):
    with pytest.raises(ParameterRejected) as info:
        weierstrass_margin(a, b)
    assert info.value.condition == condition


def test_margin_undecided_needs_tightening():
    # a rational a within about 1e-30 of the root of the margin for b = 147
    root = mpmath.findroot(lambda t: margin_mp_real(t, 147), 0.07)
    a = F(str(mpmath.nstr(root, 35)))
    with pytest.raises(TightenTolerance):
        weierstrass_margin(a, 147, F(1, 1000))
    # a far finer tolerance settles the sign one way or the other
    try:
        weierstrass_margin(a, 147, F(1, 10**60))
    except ParameterRejected as exc:
        assert exc.condition == "margin-nonpositive"


def margin_mp_real(a, b):
    return mpmath.mpf(2) / 3 - 4 * a / (1 - a) - mpmath.pi / (a * b - 1)


def test_weierstrass_examples():
    p = lemma_default()
    eps = F(1, 10**12)
    assert weierstrass_eval(p, SignSequence.zeros(), 0, eps).contains(F(14, 13))
    assert weierstrass_eval(p, SignSequence.alternating(40), 0, eps).contains(F(14, 15))
    assert weierstrass_eval(p, SignSequence.zeros(), 1, eps).contains(F(-14, 13))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=20), st.integers(0, 1), unit)
def test_sign_flip_is_exact_negation(bits, tail, x):
    p = lemma_default()
    alpha = SignSequence(tuple(bits), tail)
    eps = F(1, 10**10)
    a = weierstrass_eval(p, alpha, x, eps)
    b = weierstrass_eval(p, alpha.flipped(), x, eps)
    assert b.lo == -a.hi and b.hi == -a.lo


@settings(max_examples=40, deadline=None)
@given(unit)
def test_weierstrass_nesting(x):
    p = lemma_default()
    eps = F(1, 10**8)
    fine = weierstrass_eval(p, SignSequence.zeros(), x, eps / 2)
    coarse = weierstrass_eval(p, SignSequence.zeros(), x, eps).widen(eps)
    assert coarse.lo <= fine.lo and fine.hi <= coarse.hi
    assert fine.width <= eps
