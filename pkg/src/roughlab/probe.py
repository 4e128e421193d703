"""Difference-quotient probes: Weierstrass-lemma witnesses, Lipschitz witnesses,
directional ladders, Banach-set scans and the radial metric constants.

A certified witness is a proof. A scan that finds nothing only reports what
happened at its resolution.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import (
    DEFAULT_EPS,
    Enclosure,
    FunctionHandle,
    FunctionHandle2D,
    TightenTolerance,
    Verdict,
    as_rational,
    compare_gt,
    compare_lt,
    cos_pi,
    sqrt_enclosure,
)
from .pathology import WeierstrassParams
from .serial import enc_in, enc_out, q_in, q_out


class PreconditionError(ValueError):
    pass


class RangeError(ValueError):
    pass


class DegenerateGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class WitnessReport:
    x: Fraction
    probe: Fraction
    quotient: Enclosure
    required_bound: Enclosure
    verdict: Verdict

    def to_json(self) -> dict:
        return {
            "x": q_out(self.x),
            "probe": q_out(self.probe),
            "quotient": enc_out(self.quotient),
            "requiredBound": enc_out(self.required_bound),
            "verdict": self.verdict.value,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "WitnessReport":
        return cls(q_in(doc["x"]), q_in(doc["probe"]), enc_in(doc["quotient"]),
                   enc_in(doc["requiredBound"]), Verdict(doc["verdict"]))


# -- Weierstrass lemma witness --------------------------------------------------------


def lemma_window(x, b: int, s_m: int) -> tuple[int, Fraction]:
    """(w, y): w is the integer with x*b^s_m - w in (-1/2, 1/2], y = (w - 1)/b^s_m."""
    x = as_rational(x)
    scaled = x * b**s_m
    # ceil(t - 1/2) is the unique w with t - w in (-1/2, 1/2]
    w = math.ceil(scaled - Fraction(1, 2))
    return w, Fraction(w - 1, b**s_m)


def lemma_prefix_length(p: WeierstrassParams, m: int, eps=DEFAULT_EPS) -> int:
    """Least L >= m such that, with s_j = j, the series tail divided by |y_m - x| is at most eps.

    Uses |y_m - x| > 1/(2 b^m).
    """
    eps = as_rational(eps)
    L = m
    while 2 * p.a ** (L + 1) / (1 - p.a) * 2 * p.b**m > eps:
        L += 1
    return L


def lemma_witness(p: WeierstrassParams, x, s: Sequence[int], r: Sequence[int], m: int,
                  eps=DEFAULT_EPS) -> WitnessReport:
    """Certify |sum_j r_j a^s_j (cos(b^s_j pi y) - cos(b^s_j pi x))| / |y - x| > (ab)^s_m * margin.

    ``s`` and ``r`` are the supplied prefixes (1-indexed by m); the rest of
    the series is enclosed by 2 a^(s_last + 1) / ((1 - a)|y - x|).
    """
    x = as_rational(x)
    eps = as_rational(eps)
    if x == 0:
        raise PreconditionError("x must be positive")
    if not 0 < x <= 1:
        raise PreconditionError(f"x = {x} outside (0, 1]")
    s = [int(v) for v in s]
    r = [int(v) for v in r]
    if not s or any(v < 1 for v in s) or any(b <= a for a, b in zip(s, s[1:])):
        raise PreconditionError("s must be an increasing list of positive integers")
    if len(r) != len(s) or any(v not in (-1, 1) for v in r):
        raise PreconditionError("r must hold one sign in {-1, +1} per entry of s")
    if not 1 <= m <= len(s):
        raise PreconditionError(f"m = {m} outside the supplied prefix 1..{len(s)}")
    a, b = p.a, p.b
    _, y = lemma_window(x, b, s[m - 1])
    if y < 0:
        raise RangeError(f"y_{m} = {y} is negative; use a larger m")
    gap = x - y
    eta = eps * gap / (4 * len(s))
    total = Enclosure.point(0)
    for sj, rj in zip(s, r):
        diff = (cos_pi(b**sj * y, eta) - cos_pi(b**sj * x, eta)) * a**sj
        total = total + (diff if rj > 0 else -diff)
    tail = 2 * a ** (s[-1] + 1) / (1 - a)
    quotient = abs(total.widen(tail)) / gap
    bound = p.margin * (a * b) ** s[m - 1]
    verdict = compare_gt(quotient, bound)
    if verdict is Verdict.UNDECIDED:
        raise TightenTolerance(f"witness undecided at eps = {eps}; tighten eps", (x, m))
    return WitnessReport(x, y, quotient, bound, verdict)


# -- Lipschitz witness --------------------------------------------------------------


def dyadic_probe_grid(x, depth: int = 40, domain=(0, 1)) -> list[Fraction]:
    """x + 2^-j and x - 2^-j for j = 1 .. depth, kept inside the domain, coarse to fine."""
    x = as_rational(x)
    lo, hi = (as_rational(v) for v in domain)
    out = []
    for j in range(1, depth + 1):
        h = Fraction(1, 2**j)
        out += [y for y in (x + h, x - h) if lo <= y <= hi]
    return out


def lipschitz_witness(f: FunctionHandle, x, M, grid: Sequence, eps=DEFAULT_EPS) -> WitnessReport | None:
    """First y in the grid with certified |f(x) - f(y)| > M|x - y|, or None.

    A returned report proves x is not a Lipschitz point with constant M; None
    only means nothing was found at this resolution.
    """
    x, M, eps = as_rational(x), as_rational(M), as_rational(eps)
    fx = f(x, eps)
    for y in grid:
        y = as_rational(y)
        if y == x:
            continue
        dx = abs(x - y)
        delta = abs(f(y, eps) - fx)
        if compare_gt(delta, M * dx) is Verdict.CERTIFIED:
            return WitnessReport(x, y, delta / dx, Enclosure.point(M), Verdict.CERTIFIED)
    return None


# -- directional ladders ------------------------------------------------------------------


@dataclass(frozen=True)
class LadderSample:
    h: Fraction
    quotient: Enclosure | None
    skipped: bool = False


@dataclass(frozen=True)
class LadderReport:
    """Exploratory difference quotients (F(p + h v) - F(p)) / (h |v|); no verdict."""

    point: tuple
    direction: tuple
    samples: tuple

    @property
    def trend(self) -> dict:
        lows = [abs(s.quotient).lo for s in self.samples if not s.skipped]
        return {
            "maxAbsQuotientLo": q_out(max(lows)) if lows else None,
            "nondecreasing": all(b >= a for a, b in zip(lows, lows[1:])),
            "nonincreasing": all(b <= a for a, b in zip(lows, lows[1:])),
            "used": len(lows),
            "skipped": sum(1 for s in self.samples if s.skipped),
        }

    def to_json(self) -> dict:
        return {
            "point": [q_out(c) for c in self.point],
            "direction": [enc_out(c) for c in self.direction],
            "samples": [
                {"h": q_out(s.h), "quotient": None if s.skipped else enc_out(s.quotient),
                 "skipped": s.skipped}
                for s in self.samples
            ],
            "trend": self.trend,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LadderReport":
        samples = tuple(
            LadderSample(q_in(s["h"]), None if s["skipped"] else enc_in(s["quotient"]), s["skipped"])
            for s in doc["samples"]
        )
        return cls(tuple(q_in(c) for c in doc["point"]),
                   tuple(enc_in(c) for c in doc["direction"]), samples)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h_num", "h_den", "q_lo", "q_hi"])
        for s in self.samples:
            if s.skipped:
                w.writerow([s.h.numerator, s.h.denominator, "", ""])
            else:
                w.writerow([s.h.numerator, s.h.denominator, q_out(s.quotient.lo), q_out(s.quotient.hi)])
        return buf.getvalue()


def directional_scan_2d(F: FunctionHandle2D, p, v, ladder: Sequence, eps=DEFAULT_EPS) -> LadderReport:
    """Difference quotients of F at p along v (normalised by an enclosure of |v|)."""
    px, py = (as_rational(c) for c in p)
    vx, vy = (as_rational(c) for c in v)
    eps = as_rational(eps)
    hs = [as_rational(h) for h in ladder]
    if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("ladder must be positive and strictly decreasing")
    if vx == 0 and vy == 0:
        raise ValueError("direction must be non-zero")
    norm = sqrt_enclosure(vx * vx + vy * vy, eps)
    base = F(px, py, eps)
    samples = []
    for h in hs:
        qx, qy = px + h * vx, py + h * vy
        if not F.in_domain(qx, qy):
            samples.append(LadderSample(h, None, True))
            continue
        samples.append(LadderSample(h, (F(qx, qy, eps) - base) / (norm * h)))
    direction = (Enclosure.point(vx) / norm, Enclosure.point(vy) / norm)
    return LadderReport((px, py), direction, tuple(samples))


def radial_ratio_bounds(slope, intercept, alpha, beta) -> tuple[Enclosure, Enclosure]:
    """Enclosures of c = alpha sqrt(a^2+1) / sqrt(beta^2 (a^2+1) - b^2) and
    d = beta sqrt(a^2+1) / sqrt(alpha^2 (a^2+1) - b^2) for the line y = a x + b."""
    a, b = as_rational(slope), as_rational(intercept)
    alpha, beta = as_rational(alpha), as_rational(beta)
    if not 0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta")
    k = a * a + 1
    if alpha * alpha * k <= b * b:
        raise DegenerateGeometryError(f"alpha^2 (a^2 + 1) = {alpha * alpha * k} <= b^2 = {b * b}")
    eps = Fraction(1, 10**30)
    root_k = sqrt_enclosure(k, eps)
    c = root_k * alpha / sqrt_enclosure(beta * beta * k - b * b, eps)
    d = root_k * beta / sqrt_enclosure(alpha * alpha * k - b * b, eps)
    return c, d


# -- Banach-set membership scans ------------------------------------------------------


@dataclass(frozen=True)
class BanachCandidate:
    x: Fraction
    y: Fraction
    v: tuple
    samples: int


@dataclass(frozen=True)
class BanachScanReport:
    n: int
    corner: tuple
    f_type: bool
    candidate: BanachCandidate | None
    points_examined: int
    approximate: bool = True

    @property
    def found(self) -> bool:
        return self.candidate is not None

    def to_json(self) -> dict:
        c = self.candidate
        return {
            "n": self.n,
            "corner": list(self.corner),
            "type": "F" if self.f_type else "E",
            "approximate": self.approximate,
            "pointsExamined": self.points_examined,
            "candidate": None if c is None else {
                "x": q_out(c.x), "y": q_out(c.y), "v": [q_out(t) for t in c.v], "samples": c.samples,
            },
        }


def box_range(n: int, side: int) -> tuple[Fraction, Fraction]:
    return (Fraction(0), 1 - Fraction(1, n + 1)) if side == 0 else (Fraction(1, n + 1), Fraction(1))


def unit_vectors(n: int, resolution: int) -> list[tuple[Fraction, Fraction]]:
    """Rational unit vectors ((1 - t^2)/(1 + t^2), 2t/(1 + t^2)), t on a grid of [-1, 1],
    keeping v_1 >= 1/(n+1)."""
    out = []
    for k in range(resolution + 1):
        t = Fraction(-1) + Fraction(2 * k, resolution)
        v = ((1 - t * t) / (1 + t * t), 2 * t / (1 + t * t))
        if v[0] >= Fraction(1, n + 1) and v not in out:
            out.append(v)
    return out


def banach_membership_scan(f: FunctionHandle2D, n: int, corner=(0, 0), xy_resolution: int = 4,
                           v_resolution: int = 8, h_samples: int = 8, eps=DEFAULT_EPS,
                           f_type: bool = False) -> BanachScanReport:
    """Look for a grid point of R_n and a direction where every sampled h in (0, 1/n)
    gives certified |f(p + h v) - f(p)| < n h.

    The h samples are 1/(n 2^k), k = 1 .. h_samples, tried smallest first.
    Samples leaving the domain are skipped; a candidate needs at least one.
    """
    if n < 1 or xy_resolution < 1 or v_resolution < 1 or h_samples < 1:
        raise ValueError("n and all resolutions must be positive")
    eps = as_rational(eps)
    (x0, x1), (y0, y1) = box_range(n, corner[0]), box_range(n, corner[1])
    xs = [x0 + (x1 - x0) * Fraction(k, xy_resolution) for k in range(xy_resolution + 1)]
    ys = [y0 + (y1 - y0) * Fraction(k, xy_resolution) for k in range(xy_resolution + 1)]
    vs = [(Fraction(0), Fraction(1))] if f_type else unit_vectors(n, v_resolution)
    hs = [Fraction(1, n * 2**k) for k in range(h_samples, 0, -1)]
    examined = 0
    for x in xs:
        for y in ys:
            if not f.in_domain(x, y):
                continue
            base = f(x, y, eps)
            for v in vs:
                examined += 1
                used = 0
                for h in hs:
                    qx, qy = x + h * v[0], y + h * v[1]
                    if not f.in_domain(qx, qy):
                        continue
                    if compare_lt(abs(f(qx, qy, eps) - base), n * h) is not Verdict.CERTIFIED:
                        used = -1
                        break
                    used += 1
                if used > 0:
                    return BanachScanReport(n, tuple(corner), f_type, BanachCandidate(x, y, v, used), examined)
    return BanachScanReport(n, tuple(corner), f_type, None, examined)
