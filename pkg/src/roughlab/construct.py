"""Finite-depth versions of the constructions: sandwich interpolation, gluing,
strip extension and the escape perturbation.

All certificates are finitary: they assert their inequalities at the listed
grid points (or pieces) only, and say so.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cantor import (
    U,
    cantor_contains,
    cantor_digits,
    interval_dist,
    intervals_meet,
    level_of,
    level_points,
)
from .exact import (
    DEFAULT_EPS,
    DomainError,
    Enclosure,
    FunctionHandle,
    FunctionHandle2D,
    PiecewiseLinear,
    TightenTolerance,
    Verdict,
    as_rational,
    compare_le,
    compare_lt,
    dist_to_Z,
    format_rational,
    sqrt_enclosure,
    sup_distance_grid,
)
from .pathology import takagi_partial_pl


class ConstructionError(RuntimeError):
    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.detail = detail


class GlueSpecError(ValueError):
    pass


def _cached(handle: FunctionHandle) -> FunctionHandle:
    memo: dict = {}
    ev = handle.evaluate

    def evaluate(x, eps):
        key = (x, eps)
        if key not in memo:
            memo[key] = ev(x, eps)
        return memo[key]

    return FunctionHandle(evaluate, handle.domain, handle.modulus, handle.name)


def triadic_grid(level: int) -> list[Fraction]:
    """All k / 3**level in [0, 1]."""
    den = 3**level
    return [Fraction(k, den) for k in range(den + 1)]


# -- admissible families ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AdmissibleFamily:
    """Functions f_d indexed by d in D_depth.

    Fixture families also carry ``unit_shifts``: f_d = base + scale * unit_shifts[d].
    """

    depth: int
    members: Mapping
    scale: Fraction | None = None
    base: FunctionHandle | None = None
    unit_shifts: Mapping | None = None

    @property
    def points(self) -> list[Fraction]:
        return sorted(self.members)


def unit_shift(d) -> Fraction:
    """Sum of 9^-k over the positions k where the {0,2}-expansion of d has a 2."""
    return cantor_digits(d).value_in_base(9, Fraction(1, 2))


def make_admissible_family(base: FunctionHandle, depth: int, theta) -> AdmissibleFamily:
    """Fixture family f_d = base + theta * unit_shift(d).

    Two points first differing at digit k satisfy |d - d'| >= 3^-k while the
    shifts differ by at most theta * (9/8) * 9^-k, so theta <= 8/9 gives
    ||f_d - f_d'|| <= (d - d')^2.
    """
    theta = as_rational(theta)
    if theta < 0:
        raise ValueError("theta must be non-negative")
    base = _cached(base)
    shifts = {d: unit_shift(d) for d in level_points(depth).D}
    members = {d: _cached(base.shifted(theta * s)) for d, s in shifts.items()}
    return AdmissibleFamily(depth, members, theta, base, shifts)


@dataclass(frozen=True)
class ConditionRecord:
    condition: int
    d: Fraction
    d2: Fraction
    norm: Enclosure
    bound: Fraction
    strict: bool
    verdict: Verdict


@dataclass(frozen=True)
class FamilyReport:
    records: tuple
    theta_star: Fraction | None = None

    @property
    def ok(self) -> bool:
        return all(r.verdict is Verdict.CERTIFIED for r in self.records)

    def failures(self) -> list[ConditionRecord]:
        return [r for r in self.records if r.verdict is Verdict.FAILED]


def _quadratic_inf(d: Fraction, d2: Fraction, iv: tuple) -> Fraction:
    """min over x in iv of (d - x)^2 + (d2 - x)^2."""
    x = min(max((d + d2) / 2, iv[0]), iv[1])
    return (d - x) ** 2 + (d2 - x) ** 2


def condition_bounds(points: Sequence[Fraction]) -> list[tuple[int, Fraction, Fraction, Fraction, bool]]:
    """(condition, d, d', bound, strict) for every pair the four conditions constrain."""
    pts = sorted(points)
    nbhd = {d: U(d) for d in pts}
    lvl = {d: level_of(d) for d in pts}
    out = []
    for i, d in enumerate(pts):
        for d2 in pts[i + 1:]:
            out.append((1, d, d2, (d - d2) ** 2, False))
            meet = intervals_meet(nbhd[d], nbhd[d2])
            if not meet:
                continue
            overlap = (max(nbhd[d][0], nbhd[d2][0]), min(nbhd[d][1], nbhd[d2][1]))
            out.append((2, d, d2, _quadratic_inf(d, d2, overlap), True))
            if lvl[d] == lvl[d2]:
                out.append((3, d, d2, interval_dist(d, nbhd[d2]) ** 2 / 5, True))
            else:
                low, high = (d, d2) if lvl[d] < lvl[d2] else (d2, d)
                out.append((4, low, high, interval_dist(low, nbhd[high]) ** 2 / 5, True))
    return out


def search_theta(bounds, shifts, iterations: int = 48) -> Fraction:
    def feasible(theta):
        for cond, d, d2, bound, strict in bounds:
            norm = theta * abs(shifts[d] - shifts[d2])
            if (norm >= bound) if strict else (norm > bound):
                return False
        return True

    lo, hi = Fraction(0), Fraction(1)
    if feasible(hi):
        return hi
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def check_family_conditions(fam: AdmissibleFamily, grid: Sequence, eps=DEFAULT_EPS) -> FamilyReport:
    """Certify the four closeness conditions over the grid.

    Norms are grid sup-distances; a FAILED verdict is a proof (the grid
    lower bound already exceeds the bound), a CERTIFIED one holds at the grid.
    For fixture families the report also carries theta*, the largest
    binary-searched scale at which every condition holds exactly.
    """
    grid = sorted({as_rational(x) for x in grid})
    pts = fam.points
    bounds = condition_bounds(pts)
    for cond, d, d2, _, _ in bounds:
        if cond == 2:
            a, b = U(d), U(d2)
            lo, hi = max(a[0], b[0]), min(a[1], b[1])
            if sum(1 for x in grid if lo <= x <= hi) < 2:
                raise ValueError(f"grid has fewer than 2 points in U_{d} and U_{d2}")
    members = {d: _cached(fam.members[d]) for d in pts}
    norms: dict = {}
    records = []
    for cond, d, d2, bound, strict in bounds:
        if (d, d2) not in norms:
            norms[(d, d2)] = sup_distance_grid(members[d], members[d2], grid, eps)
        norm = norms[(d, d2)]
        verdict = compare_lt(norm, bound) if strict else compare_le(norm, bound)
        if verdict is Verdict.UNDECIDED:
            raise TightenTolerance(f"condition {cond} undecided for pair ({d}, {d2}); tighten eps",
                                   (cond, d, d2))
        records.append(ConditionRecord(cond, d, d2, norm, bound, strict, verdict))
    theta_star = None
    if fam.unit_shifts is not None:
        theta_star = search_theta(bounds, fam.unit_shifts)
    return FamilyReport(tuple(records), theta_star)


# -- sandwich construction --------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichRecord:
    d: Fraction
    x: Fraction
    gap: Enclosure
    bound: Fraction
    verdict: Verdict


@dataclass(frozen=True)
class SandwichCertificate:
    """Grid evidence that |f_d(x) - g(x)| <= (x - d)^2 for every d in D_depth, x in U_d.

    Holds at the grid points only.
    """

    depth: int
    grid: tuple
    g: PiecewiseLinear
    records: tuple
    level_checks: tuple = ()

    @property
    def valid(self) -> bool:
        return all(r.verdict is Verdict.CERTIFIED for r in self.records)

    def failed_records(self) -> list[SandwichRecord]:
        return [r for r in self.records if r.verdict is not Verdict.CERTIFIED]

    def decay_holds(self) -> bool:
        """|f_d(x) - g(x)| / |x - d| <= |x - d| on every record off the diagonal."""
        return all(r.gap.hi / abs(r.x - r.d) <= abs(r.x - r.d) for r in self.records if r.x != r.d)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "grid": [format_rational(x) for x in self.grid],
            "g": {
                "breakpoints": [format_rational(x) for x in self.g.breakpoints],
                "values": [format_rational(v) for v in self.g.values],
            },
            "levelChecks": [{"level": n, "ok": ok} for n, ok in self.level_checks],
            "records": [
                {
                    "d": format_rational(r.d),
                    "x": format_rational(r.x),
                    "boundNum": str(r.bound.numerator),
                    "boundDen": str(r.bound.denominator),
                    "encLoNum": str(r.gap.lo.numerator),
                    "encLoDen": str(r.gap.lo.denominator),
                    "encHiNum": str(r.gap.hi.numerator),
                    "encHiDen": str(r.gap.hi.denominator),
                    "verdict": r.verdict.value,
                }
                for r in self.records
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SandwichCertificate":
        def q(num, den):
            return Fraction(int(num), int(den))

        records = tuple(
            SandwichRecord(
                Fraction(r["d"]),
                Fraction(r["x"]),
                Enclosure(q(r["encLoNum"], r["encLoDen"]), q(r["encHiNum"], r["encHiDen"])),
                q(r["boundNum"], r["boundDen"]),
                Verdict(r["verdict"]),
            )
            for r in doc["records"]
        )
        g = PiecewiseLinear(tuple(Fraction(x) for x in doc["g"]["breakpoints"]),
                            tuple(Fraction(v) for v in doc["g"]["values"]))
        checks = tuple((c["level"], c["ok"]) for c in doc.get("levelChecks", []))
        return cls(doc["depth"], tuple(Fraction(x) for x in doc["grid"]), g, records, checks)


def _interpolate_missing(xs: list[Fraction], vals: list) -> list[Fraction]:
    known = [i for i, v in enumerate(vals) if v is not None]
    if not known:
        return [Fraction(0)] * len(vals)
    out = list(vals)
    for i, v in enumerate(vals):
        if v is not None:
            continue
        k = bisect.bisect_left(known, i)
        if k == 0:
            out[i] = vals[known[0]]
        elif k == len(known):
            out[i] = vals[known[-1]]
        else:
            a, b = known[k - 1], known[k]
            w = (xs[i] - xs[a]) / (xs[b] - xs[a])
            out[i] = (1 - w) * vals[a] + w * vals[b]
    return out


def _sandwich_records(points, xs, table, total, factor=Fraction(1)) -> list[SandwichRecord]:
    records = []
    for d in points:
        lo, hi = U(d)
        for i, x in enumerate(xs):
            if lo <= x <= hi:
                gap = abs(table[d][i] - total[i])
                bound = factor * (x - d) ** 2
                records.append(SandwichRecord(d, x, gap, bound, compare_le(gap, bound)))
    return records


def build_g(fam: AdmissibleFamily, grid: Sequence, eps=DEFAULT_EPS) -> SandwichCertificate:
    """Build g = g_1 + ... + g_N level by level on the grid and certify it.

    Level n: on each U_d (d in E_n) g_n follows f_d - (g_1 + ... + g_(n-1)),
    ramping linearly across overlaps of two such neighbourhoods; elsewhere it
    is interpolated, then every value is clamped into the envelope
    [max_d f_d - (x-d)^2 - S, min_d f_d + (x-d)^2 - S] over d in D_n with x in U_d.

    After each level the running sum is rechecked against every D_n point and,
    with a factor 1/5 on the bound, every E_n point; ``level_checks`` holds one
    (n, all certified) pair per level.
    """
    xs = sorted({as_rational(x) for x in grid})
    if not xs or xs[0] != 0 or xs[-1] != 1:
        raise ValueError("grid must contain 0 and 1")
    pts = fam.points
    expected = set(level_points(fam.depth).D)
    if set(pts) != expected:
        raise ValueError(f"family must be indexed by D_{fam.depth}")
    members = {d: fam.members[d] for d in pts}
    table = {d: [members[d](x, eps) for x in xs] for d in pts}
    nbhd = {d: U(d) for d in pts}
    total = [Fraction(0)] * len(xs)
    checks = []
    for n in range(1, fam.depth + 1):
        levels = level_points(n)
        new_points = levels.E
        tilde: list = [None] * len(xs)
        for i, x in enumerate(xs):
            cover = [d for d in new_points if nbhd[d][0] <= x <= nbhd[d][1]]
            if not cover:
                continue
            targets = [table[d][i].mid - total[i] for d in cover]
            if len(cover) == 1:
                tilde[i] = targets[0]
            elif len(cover) == 2:
                lo = max(nbhd[cover[0]][0], nbhd[cover[1]][0])
                hi = min(nbhd[cover[0]][1], nbhd[cover[1]][1])
                w = (x - lo) / (hi - lo) if hi > lo else Fraction(1, 2)
                tilde[i] = (1 - w) * targets[0] + w * targets[1]
            else:
                raise ConstructionError(f"{len(cover)} level-{n} neighbourhoods overlap at {x}", x)
        values = _interpolate_missing(xs, tilde)
        step = []
        for i, x in enumerate(xs):
            lower = upper = None
            arg_lo = arg_hi = None
            for d in levels.D:
                if nbhd[d][0] <= x <= nbhd[d][1]:
                    r2 = (x - d) ** 2
                    lo_d = table[d][i].hi - r2 - total[i]
                    hi_d = table[d][i].lo + r2 - total[i]
                    if lower is None or lo_d > lower:
                        lower, arg_lo = lo_d, d
                    if upper is None or hi_d < upper:
                        upper, arg_hi = hi_d, d
            v = values[i]
            if lower is not None:
                if lower > upper:
                    raise ConstructionError(
                        f"envelope empty at x = {x} (binding d = {arg_lo} and {arg_hi})",
                        (x, arg_lo, arg_hi),
                    )
                v = min(max(v, lower), upper)
            step.append(v)
        total = [s + v for s, v in zip(total, step)]
        level_records = _sandwich_records(levels.D, xs, table, total)
        level_records += _sandwich_records(levels.E, xs, table, total, Fraction(1, 5))
        checks.append((n, all(r.verdict is Verdict.CERTIFIED for r in level_records)))
    records = _sandwich_records(pts, xs, table, total)
    g = PiecewiseLinear(tuple(xs), tuple(total))
    return SandwichCertificate(fam.depth, tuple(xs), g, tuple(records), tuple(checks))


# -- gluing ----------------------------------------------------------------------------------


def default_glue_breakpoints(count: int) -> tuple:
    """(a_n, b_n, c_n) at the quartiles of (1/(n+2), 1/(n+1)) for n = 1 .. count+1."""
    out = []
    for n in range(1, count + 2):
        lo, hi = Fraction(1, n + 2), Fraction(1, n + 1)
        w = hi - lo
        out.append((lo + w / 4, lo + w / 2, lo + 3 * w / 4))
    return tuple(out)


def _check_breakpoints(breakpoints) -> None:
    for n, (a, b, c) in enumerate(breakpoints, 1):
        if not Fraction(1, n + 2) < a < b < c < Fraction(1, n + 1):
            raise GlueSpecError(f"breakpoints of block {n} not ordered inside (1/{n + 2}, 1/{n + 1})")


def make_pinned_roughener(breakpoints, depth: int = 6) -> PiecewiseLinear:
    """Rescaled partial-sum Takagi copies vanishing at every b_n and c_n.

    On [c_1, 1], each [b_n, c_n] and each [c_(n+1), b_n] the function is the
    depth-``depth`` Takagi partial sum composed with the increasing linear
    bijection onto [0, 1], divided by its maximum so the sup-norm is 1; it is
    zero on [0, c_(N+1)].
    """
    breakpoints = tuple(tuple(as_rational(v) for v in t) for t in breakpoints)
    _check_breakpoints(breakpoints)
    base = takagi_partial_pl(depth)
    norm = base.sup_norm()
    base = base.scale(1 / norm)
    N = len(breakpoints) - 1
    spans = [(breakpoints[0][2], Fraction(1))]
    for n in range(N):
        b, c = breakpoints[n][1], breakpoints[n][2]
        c_next = breakpoints[n + 1][2]
        spans += [(b, c), (c_next, b)]
    points: dict = {Fraction(0): Fraction(0)}
    for lo, hi in spans:
        piece = base.compose_affine(lo, hi)
        points.update(zip(piece.breakpoints, piece.values))
    xs = sorted(points)
    return PiecewiseLinear(tuple(xs), tuple(points[x] for x in xs))


def _value(member, x: Fraction, eps: Fraction) -> Fraction:
    if isinstance(member, PiecewiseLinear):
        return member(x)
    return member(x, eps).mid


@dataclass(frozen=True, eq=False)
class GlueSpec:
    count: int
    breakpoints: tuple
    members: tuple
    limit: object
    roughener: PiecewiseLinear

    def __post_init__(self):
        bps = tuple(tuple(as_rational(v) for v in t) for t in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if len(bps) != self.count + 1:
            raise GlueSpecError("need count + 1 breakpoint triples (the last supplies c_(N+1))")
        if len(self.members) != self.count:
            raise GlueSpecError("need exactly count members")
        _check_breakpoints(bps)
        z = self.roughener
        if z.domain != (0, 1):
            raise GlueSpecError("roughener must live on [0, 1]")
        if z.sup_norm() > 1:
            raise GlueSpecError("roughener sup-norm exceeds 1")
        for n, (_, b, c) in enumerate(bps, 1):
            pins = (c,) if n == len(bps) else (b, c)
            for p in pins:
                if z(p) != 0:
                    raise GlueSpecError(f"roughener not pinned: z({p}) = {z(p)}")


def make_glue_spec(members: Sequence, limit, roughener_depth: int = 6, breakpoints=None) -> GlueSpec:
    count = len(members)
    bps = default_glue_breakpoints(count) if breakpoints is None else breakpoints
    z = make_pinned_roughener(bps, roughener_depth)
    return GlueSpec(count, bps, tuple(members), limit, z)


@dataclass(frozen=True)
class JunctionRecord:
    x: Fraction
    left: Fraction
    right: Fraction

    @property
    def match(self) -> bool:
        return self.left == self.right


@dataclass(frozen=True)
class ConstancyRecord:
    n: int
    x: Fraction
    difference: Fraction


@dataclass(frozen=True)
class GlueReport:
    junctions: tuple
    constancy: tuple

    @property
    def continuous(self) -> bool:
        return all(j.match for j in self.junctions)

    @property
    def constant_on_blocks(self) -> bool:
        return all(c.difference == 0 for c in self.constancy)

    @property
    def ok(self) -> bool:
        return self.continuous and self.constant_on_blocks


def glue_translation(spec: GlueSpec, grid: Sequence, eps=DEFAULT_EPS) -> tuple[PiecewiseLinear, GlueReport]:
    """Assemble the translation h from the members, the ramps and the roughener.

    h = f_1(c_1) on [c_1, 1], f_n on [a_n, b_n], f_n - z/n on [b_n, c_n],
    f_(n+1) + ramp_n on [c_(n+1), a_n] and the limit on [0, c_(N+1)], where
    f_(N+1) is taken to be the limit.
    """
    eps = as_rational(eps)
    grid = sorted({as_rational(x) for x in grid})
    N = spec.count
    bps = spec.breakpoints
    z = spec.roughener
    fs = list(spec.members) + [spec.limit]

    def f(k):  # 1-indexed member, k = N + 1 is the limit
        return fs[k - 1]

    def extra_points(member, lo, hi):
        pts = {x for x in grid if lo < x < hi}
        if isinstance(member, PiecewiseLinear):
            pts.update(b for b in member.breakpoints if lo < b < hi)
        return pts

    pieces = []  # (lo, hi, points, evaluator)
    c_last = bps[N][2]
    limit = spec.limit
    pieces.append((Fraction(0), c_last, extra_points(limit, 0, c_last),
                   lambda x: _value(limit, x, eps)))
    for n in range(N, 0, -1):
        a, b, c = bps[n - 1]
        c_next = bps[n][2]
        fn, fnext = f(n), f(n + 1)
        jump = _value(fn, a, eps) - _value(fnext, a, eps)

        def on_j(x, fnext=fnext, jump=jump, lo=c_next, hi=a):
            return _value(fnext, x, eps) + jump * (x - lo) / (hi - lo)

        def on_i1(x, fn=fn):
            return _value(fn, x, eps)

        def on_i2(x, fn=fn, n=n):
            return _value(fn, x, eps) - z(x) / n

        pieces.append((c_next, a, extra_points(fnext, c_next, a), on_j))
        pieces.append((a, b, extra_points(fn, a, b), on_i1))
        pieces.append((b, c, extra_points(fn, b, c) | {p for p in z.breakpoints if b < p < c}, on_i2))
    c1 = bps[0][2]
    top = _value(f(1), c1, eps)
    pieces.append((c1, Fraction(1), set(), lambda x: top))

    points: dict = {}
    junctions = []
    prev_right = None
    for lo, hi, extra, ev in pieces:
        left_val = ev(lo)
        if prev_right is not None:
            junctions.append(JunctionRecord(lo, prev_right, left_val))
        points[lo] = left_val
        for x in sorted(extra):
            points[x] = ev(x)
        prev_right = ev(hi)
        points[hi] = prev_right
    bad = [j for j in junctions if not j.match]
    if bad:
        raise ConstructionError(f"discontinuity at x = {bad[0].x}", bad)
    xs = sorted(points)
    h = PiecewiseLinear(tuple(xs), tuple(points[x] for x in xs))

    constancy = []
    for n in range(1, N + 1):
        a, b, _ = bps[n - 1]
        for x in grid:
            if a <= x <= b:
                constancy.append(ConstancyRecord(n, x, _value(f(n), x, eps) - h(x)))
    return h, GlueReport(tuple(junctions), tuple(constancy))


# -- strip extension ------------------------------------------------------------------------


def strip_points(depth: int) -> list[Fraction]:
    """Endpoints of the 2^depth intervals of the level-depth Cantor approximation."""
    return list(level_points(depth + 1).D)


def tietze_strip_extension(family: Mapping, depth: int, y_grid: Sequence | None = None) -> FunctionHandle2D:
    """Extend F(c, y) = phi_c(c, y) from the represented Cantor points to [0, 1]^2.

    Between consecutive represented points the extension is linear in x.
    With ``y_grid`` the values are tabulated on the grid rows and linear in y
    between them.
    """
    keys = sorted(as_rational(c) for c in family)
    missing = set(strip_points(depth)) - set(keys)
    if missing:
        raise ValueError(f"family lacks represented points {sorted(missing)[:4]}")
    for c in keys:
        if not cantor_contains(c):
            raise ValueError(f"{c} is not a Cantor point")
    phis = {as_rational(c): phi for c, phi in family.items()}
    rows = None
    if y_grid is not None:
        rows = sorted({as_rational(y) for y in y_grid})
        table = {c: [phis[c](c, y, DEFAULT_EPS) for y in rows] for c in keys}

    def column(c: Fraction, y: Fraction, eps: Fraction) -> Enclosure:
        if rows is None:
            return phis[c](c, y, eps)
        j = bisect.bisect_left(rows, y)
        if j < len(rows) and rows[j] == y:
            return table[c][j]
        if j == 0 or j == len(rows):
            raise DomainError(f"y = {y} outside the tabulated rows")
        w = (y - rows[j - 1]) / (rows[j] - rows[j - 1])
        return table[c][j - 1] * (1 - w) + table[c][j] * w

    def evaluate(x: Fraction, y: Fraction, eps: Fraction) -> Enclosure:
        i = bisect.bisect_left(keys, x)
        if i < len(keys) and keys[i] == x:
            return column(x, y, eps)
        lo, hi = keys[i - 1], keys[i]
        w = (x - lo) / (hi - lo)
        return column(lo, y, eps) * (1 - w) + column(hi, y, eps) * w

    y_box = (0, 1) if rows is None else (rows[0], rows[-1])
    return FunctionHandle2D(evaluate, ((0, 1), y_box), "strip_extension")


# -- escape perturbation ------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangulatedSurface:
    """Continuous piecewise-linear function on a rectangular grid.

    Each cell [x_i, x_(i+1)] x [y_j, y_(j+1)] is split along its rising
    diagonal; ``values[i][j]`` is the value at (xs[i], ys[j]).
    """

    xs: tuple
    ys: tuple
    values: tuple

    def __post_init__(self):
        xs = tuple(as_rational(x) for x in self.xs)
        ys = tuple(as_rational(y) for y in self.ys)
        vals = tuple(tuple(as_rational(v) for v in row) for row in self.values)
        if len(xs) < 2 or len(ys) < 2:
            raise ValueError("need at least a 2 x 2 grid")
        if any(b <= a for a, b in zip(xs, xs[1:])) or any(b <= a for a, b in zip(ys, ys[1:])):
            raise ValueError("grid coordinates must increase")
        if len(vals) != len(xs) or any(len(row) != len(ys) for row in vals):
            raise ValueError("values must be len(xs) x len(ys)")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "values", vals)

    @classmethod
    def plane(cls, gx, gy, c=0, cells: int = 1) -> "TriangulatedSurface":
        gx, gy, c = as_rational(gx), as_rational(gy), as_rational(c)
        pts = [Fraction(k, cells) for k in range(cells + 1)]
        return cls(pts, pts, [[c + gx * x + gy * y for y in pts] for x in pts])

    @classmethod
    def random(cls, rng: random.Random, cells: int, max_slope) -> "TriangulatedSurface":
        """Random surface rescaled so that max |g_x| + |g_y| equals ``max_slope``."""
        pts = [Fraction(k, cells) for k in range(cells + 1)]
        raw = cls(pts, pts, [[Fraction(rng.randint(-64, 64), 64) for _ in pts] for _ in pts])
        slope = raw.max_slope()
        if slope == 0:
            return raw
        k = as_rational(max_slope) / slope
        return cls(pts, pts, [[k * v for v in row] for row in raw.values])

    @property
    def domain(self):
        return (self.xs[0], self.xs[-1]), (self.ys[0], self.ys[-1])

    def _cell(self, coords, q):
        i = bisect.bisect_right(coords, q) - 1
        return min(max(i, 0), len(coords) - 2)

    def __call__(self, x, y) -> Fraction:
        x, y = as_rational(x), as_rational(y)
        (x0, x1), (y0, y1) = self.domain
        if not (x0 <= x <= x1 and y0 <= y <= y1):
            raise DomainError(f"({x}, {y}) outside the surface")
        i, j = self._cell(self.xs, x), self._cell(self.ys, y)
        u = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i])
        v = (y - self.ys[j]) / (self.ys[j + 1] - self.ys[j])
        v00, v10 = self.values[i][j], self.values[i + 1][j]
        v01, v11 = self.values[i][j + 1], self.values[i + 1][j + 1]
        if v <= u:
            return v00 + (v10 - v00) * u + (v11 - v10) * v
        return v00 + (v11 - v01) * u + (v01 - v00) * v

    def pieces(self):
        """Yield (i, j, triangle, g_x, g_y) for every linear piece."""
        for i in range(len(self.xs) - 1):
            dx = self.xs[i + 1] - self.xs[i]
            for j in range(len(self.ys) - 1):
                dy = self.ys[j + 1] - self.ys[j]
                v00, v10 = self.values[i][j], self.values[i + 1][j]
                v01, v11 = self.values[i][j + 1], self.values[i + 1][j + 1]
                yield i, j, "lower", (v10 - v00) / dx, (v11 - v10) / dy
                yield i, j, "upper", (v11 - v01) / dx, (v01 - v00) / dy

    def max_slope(self) -> Fraction:
        """max over pieces of |g_x| + |g_y|, an upper bound on every directional slope."""
        return max(abs(gx) + abs(gy) for *_, gx, gy in self.pieces())

    def handle(self) -> FunctionHandle2D:
        return FunctionHandle2D(lambda x, y, eps: Enclosure.point(self(x, y)), self.domain, "surface")


@dataclass(frozen=True)
class PieceSlopeRecord:
    i: int
    j: int
    triangle: str
    gx: Fraction
    gy: Fraction
    lower_slope: Fraction
    verdict: Verdict


@dataclass(frozen=True)
class EscapeReport:
    n: int
    eps: Fraction
    axis: str
    slope_bound: Fraction
    m: int
    m_minimal: bool
    sup_distance: Fraction
    pieces: tuple

    @property
    def ok(self) -> bool:
        return (self.m_minimal and self.sup_distance <= self.eps / 2
                and all(p.verdict is Verdict.CERTIFIED for p in self.pieces))


def _escape_inequality(m: int, eps: Fraction, n: int, M: Fraction, axis: str) -> bool:
    if axis == "x":
        return Fraction(m, n + 1) * eps / 2 > M + n
    return m * eps / 2 > M + n


def escape_perturbation(g: TriangulatedSurface, eps, n: int, axis: str = "x"):
    """f = g + (eps/2) dist(m x, Z) with m least such that (m/(n+1))(eps/2) > M + n.

    M is max |g_x| + |g_y| over the pieces. Every piece is certified to have
    directional slope above n for all unit v with v_1 >= 1/(n+1), checked at
    the extremal vector v_1 = 1/(n+1). With ``axis="y"`` the perturbation is
    dist(m y, Z), m*eps/2 > M + n, and the certified direction is (0, 1).
    Returns (f, m, report).
    """
    eps = as_rational(eps)
    if eps <= 0 or n < 1:
        raise ValueError("need eps > 0 and n >= 1")
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    M = g.max_slope()
    scale = Fraction(2, 1) / eps * ((n + 1) if axis == "x" else 1)
    m = math.floor((M + n) * scale) + 1
    minimal = m == 1 or not _escape_inequality(m - 1, eps, n, M, axis)
    assert _escape_inequality(m, eps, n, M, axis)
    amp = eps / 2

    if axis == "x":
        v1 = Fraction(1, n + 1)
        v2_hi = sqrt_enclosure(1 - v1 * v1).hi
    records = []
    for i, j, tri, gx, gy in g.pieces():
        if axis == "x":
            # increasing in v_1 because amp*m > |g_x|, so v_1 = 1/(n+1) is extremal
            lower = (amp * m - abs(gx)) * v1 - abs(gy) * v2_hi
        else:
            lower = amp * m - abs(gy)
        records.append(PieceSlopeRecord(i, j, tri, gx, gy, lower,
                                        Verdict.CERTIFIED if lower > n else Verdict.FAILED))

    def value(x, y):
        t = x if axis == "x" else y
        return g(x, y) + amp * dist_to_Z(m * t)

    f = FunctionHandle2D(lambda x, y, e: Enclosure.point(value(x, y)), g.domain, "escape")
    # dist(m t, Z) reaches 1/2 at t = 1/(2m), inside [0, 1]
    report = EscapeReport(n, eps, axis, M, m, minimal, amp / 2, tuple(records))
    return f, m, report
