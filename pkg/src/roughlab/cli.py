"""Command-line front end.

Exit codes: 0 success, 1 usage or domain error, 2 a certified failure is
present, 3 some verdict is undecided at the requested tolerance.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction

from . import construct, pathology, probe
from .exact import (
    CapacityError,
    DomainError,
    FunctionHandle,
    FunctionHandle2D,
    PiecewiseLinear,
    TightenTolerance,
    Verdict,
    as_rational,
)
from .serial import dumps, enc_out, q_out

EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_UNDECIDED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def rational(token: str) -> Fraction:
    try:
        return as_rational(token)
    except (ValueError, TypeError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"malformed rational: {token!r}") from None


def _pair(token: str) -> tuple[int, int]:
    parts = token.split(",")
    if len(parts) != 2 or any(p.strip() not in ("0", "1") for p in parts):
        raise argparse.ArgumentTypeError(f"corner must be i,j with i, j in {{0, 1}}: {token!r}")
    return int(parts[0]), int(parts[1])


# -- fixtures shared by several commands ---------------------------------------------------


def _base_handle(spec: str) -> FunctionHandle:
    if spec == "zero":
        return FunctionHandle.constant(0)
    if spec.startswith("takagi-partial:"):
        return pathology.takagi_partial_pl(int(spec.split(":", 1)[1])).handle("takagi_partial")
    raise UsageError(f"unknown base {spec!r} (use zero or takagi-partial:K)")


def _family(args) -> construct.AdmissibleFamily:
    base = _base_handle(args.base)
    theta = args.theta
    if theta is None:
        probe_fam = construct.make_admissible_family(base, args.depth, 0)
        theta = construct.search_theta(construct.condition_bounds(probe_fam.points), probe_fam.unit_shifts)
    return construct.make_admissible_family(base, args.depth, theta)


def _fn_2d(name: str) -> FunctionHandle2D:
    if name == "sum-takagi":
        return pathology.sum_takagi_handle()
    if name == "radial-takagi":
        return pathology.radial_takagi_handle()
    raise UsageError(f"unknown 2D function {name!r}")


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


# -- commands ---------------------------------------------------------------------------


def cmd_eval(args):
    fn = args.fn
    if fn in ("takagi", "wrapped-takagi"):
        _need(args, "x")
        x = args.x
        if fn == "wrapped-takagi":
            if x < 0:
                raise DomainError(f"x = {x} must be non-negative")
            x = x - (x.numerator // x.denominator)
        try:
            return {"fn": fn, "x": q_out(args.x), "value": q_out(pathology.takagi_exact(x))}, EXIT_OK
        except CapacityError:
            enc = pathology.takagi_enclosure(x, args.eps)
            return {"fn": fn, "x": q_out(args.x), "enclosure": enc_out(enc)}, EXIT_OK
    if fn in ("sum-takagi", "radial-takagi"):
        _need(args, "x", "y")
        enc = _fn_2d(fn)(args.x, args.y, args.eps)
        return {"fn": fn, "x": q_out(args.x), "y": q_out(args.y), "enclosure": enc_out(enc)}, EXIT_OK
    if fn == "margin":
        _need(args, "a", "b")
        try:
            p = pathology.weierstrass_margin(args.a, args.b, args.eps)
        except pathology.ParameterRejected as exc:
            return {"fn": fn, "rejected": exc.condition, "message": str(exc)}, EXIT_FAILED
        return {"fn": fn, "a": q_out(p.a), "b": p.b, "margin": enc_out(p.margin)}, EXIT_OK
    if fn == "weierstrass":
        _need(args, "x")
        p = pathology.lemma_default() if args.a is None else pathology.weierstrass_margin(args.a, args.b, args.eps)
        bits = tuple(int(c) for c in (args.signs or "0"))
        enc = pathology.weierstrass_eval(p, pathology.SignSequence(bits), args.x, args.eps)
        return {"fn": fn, "x": q_out(args.x), "enclosure": enc_out(enc)}, EXIT_OK
    if fn == "radial-ratio":
        _need(args, "slope", "intercept", "alpha", "beta")
        c, d = probe.radial_ratio_bounds(args.slope, args.intercept, args.alpha, args.beta)
        return {"fn": fn, "c": enc_out(c), "d": enc_out(d)}, EXIT_OK
    raise UsageError(f"unknown function {fn!r}")


def cmd_family(args):
    fam = _family(args)
    report = construct.check_family_conditions(fam, construct.triadic_grid(args.grid_level), args.eps)
    doc = {
        "depth": fam.depth,
        "theta": q_out(fam.scale),
        "thetaStar": q_out(report.theta_star),
        "ok": report.ok,
        "records": [
            {"condition": r.condition, "d": q_out(r.d), "d2": q_out(r.d2), "norm": enc_out(r.norm),
             "bound": q_out(r.bound), "strict": r.strict, "verdict": r.verdict.value}
            for r in report.records
        ],
    }
    return doc, EXIT_OK if report.ok else EXIT_FAILED


def cmd_build_g(args):
    fam = _family(args)
    cert = construct.build_g(fam, construct.triadic_grid(args.grid_level), args.eps)
    doc = cert.to_json()
    doc["theta"] = q_out(fam.scale)
    doc["valid"] = cert.valid
    doc["decay"] = cert.decay_holds()
    return doc, EXIT_OK if cert.valid and cert.decay_holds() else EXIT_FAILED


def cmd_glue(args):
    members = [PiecewiseLinear.constant(Fraction(1, n)) for n in range(1, args.count + 1)]
    spec = construct.make_glue_spec(members, PiecewiseLinear.constant(0), args.roughener_depth)
    h, report = construct.glue_translation(spec, construct.triadic_grid(args.grid_level), args.eps)
    doc = {
        "count": spec.count,
        "breakpoints": [[q_out(v) for v in t] for t in spec.breakpoints],
        "h": {"breakpoints": [q_out(x) for x in h.breakpoints], "values": [q_out(v) for v in h.values]},
        "junctions": [{"x": q_out(j.x), "left": q_out(j.left), "right": q_out(j.right), "match": j.match}
                      for j in report.junctions],
        "constancyPoints": len(report.constancy),
        "continuous": report.continuous,
        "constantOnBlocks": report.constant_on_blocks,
    }
    return doc, EXIT_OK if report.ok else EXIT_FAILED


def cmd_extend(args):
    pts = construct.strip_points(args.depth)
    family = {c: FunctionHandle2D.exact(lambda x, y, c=c: c * y + x) for c in pts}
    ys = [Fraction(k, args.y_points - 1) for k in range(args.y_points)]
    F = construct.tietze_strip_extension(family, args.depth, ys)
    xs = construct.triadic_grid(args.depth + 1)
    rows = [{"x": q_out(x), "values": [enc_out(F(x, y, args.eps)) for y in ys]} for x in xs]
    return {"depth": args.depth, "representedPoints": [q_out(c) for c in pts],
            "y": [q_out(y) for y in ys], "rows": rows}, EXIT_OK


def cmd_perturb(args):
    rng = random.Random(args.seed)
    if args.random_cells:
        g = construct.TriangulatedSurface.random(rng, args.random_cells, args.max_slope)
    else:
        g = construct.TriangulatedSurface.plane(args.slope_x, args.slope_y)
    _, m, report = construct.escape_perturbation(g, args.eps_pert, args.n, args.axis)
    doc = {
        "n": report.n, "eps": q_out(report.eps), "axis": report.axis, "m": m,
        "slopeBound": q_out(report.slope_bound), "mMinimal": report.m_minimal,
        "supDistance": q_out(report.sup_distance),
        "pieces": [{"i": p.i, "j": p.j, "triangle": p.triangle, "gx": q_out(p.gx), "gy": q_out(p.gy),
                    "lowerSlope": q_out(p.lower_slope), "verdict": p.verdict.value} for p in report.pieces],
        "ok": report.ok,
    }
    return doc, EXIT_OK if report.ok else EXIT_FAILED


def cmd_witness(args):
    if args.preset == "lemma-default":
        p = pathology.lemma_default()
    else:
        _need(args, "a", "b")
        p = pathology.weierstrass_margin(args.a, args.b, args.eps)
    L = probe.lemma_prefix_length(p, args.m, args.eps)
    signs = [1] * L
    if args.signs:
        if any(c not in "+-" for c in args.signs):
            raise UsageError(f"signs must use + and -: {args.signs!r}")
        given = [1 if c == "+" else -1 for c in args.signs]
        signs = (given + [given[-1]] * L)[:L]
    report = probe.lemma_witness(p, args.x, list(range(1, L + 1)), signs, args.m, args.eps)
    doc = report.to_json()
    doc["m"] = args.m
    return doc, EXIT_OK if report.verdict is Verdict.CERTIFIED else EXIT_FAILED


def cmd_lipschitz(args):
    if args.fn == "takagi":
        f = pathology.takagi_handle()
    elif args.fn == "identity":
        f = PiecewiseLinear.identity().handle("identity")
    else:
        raise UsageError(f"unknown function {args.fn!r}")
    report = probe.lipschitz_witness(f, args.x, args.M, probe.dyadic_probe_grid(args.x, args.depth), args.eps)
    if report is None:
        return {"x": q_out(args.x), "M": q_out(args.M), "found": False, "approximate": True}, EXIT_OK
    doc = report.to_json()
    doc["found"] = True
    return doc, EXIT_OK


def _ladder(args, F, p, v):
    hs = [Fraction(1, 2**k) for k in range(args.kmin, args.kmax + 1)]
    return probe.directional_scan_2d(F, p, v, hs, args.eps)


def cmd_scan2d(args):
    rep = _ladder(args, _fn_2d(args.fn), (args.px, args.py), (args.vx, args.vy))
    return rep, EXIT_OK


def cmd_ladder(args):
    rep = _ladder(args, pathology.sum_takagi_handle(), (args.px, args.py), (1, 1))
    return rep, EXIT_OK


def cmd_banach(args):
    rep = probe.banach_membership_scan(_fn_2d(args.fn), args.n, args.corner, args.xy_res, args.v_res,
                                       args.h_samples, args.eps, args.f_type)
    return rep.to_json(), EXIT_OK


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", help="write to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized inputs")
    common.add_argument("--eps", type=rational, default=Fraction(1, 10**12), help="tolerance")

    parser = _Parser(prog="roughlab", description="Certified probes of rough functions.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, handler, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(handler=handler)
        return sp

    sp = add("eval", cmd_eval, "evaluate a function exactly or by enclosure")
    sp.add_argument("--fn", required=True,
                    choices=("takagi", "wrapped-takagi", "sum-takagi", "radial-takagi", "margin",
                             "weierstrass", "radial-ratio"))
    for name in ("x", "y", "a", "slope", "intercept", "alpha", "beta"):
        sp.add_argument("--" + name, type=rational)
    sp.add_argument("--b", type=int)
    sp.add_argument("--signs", help="sign bits as a 0/1 string")

    for name, handler, text in (("family", cmd_family, "check the closeness conditions of a fixture family"),
                                ("build-g", cmd_build_g, "build g and its sandwich certificate")):
        sp = add(name, handler, text)
        sp.add_argument("--depth", type=int, default=4)
        sp.add_argument("--theta", type=rational, help="family scale (default: the searched maximum)")
        sp.add_argument("--base", default="takagi-partial:4")
        sp.add_argument("--grid-level", type=int, default=6)

    sp = add("glue", cmd_glue, "glue constant-shift members into a translation")
    sp.add_argument("--count", type=int, default=6)
    sp.add_argument("--grid-level", type=int, default=5)
    sp.add_argument("--roughener-depth", type=int, default=6)

    sp = add("extend", cmd_extend, "extend a strip family from represented Cantor points")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--y-points", type=int, default=5)

    sp = add("perturb", cmd_perturb, "escape perturbation of a piecewise-linear surface")
    sp.add_argument("--slope-x", type=rational, default=Fraction(0))
    sp.add_argument("--slope-y", type=rational, default=Fraction(0))
    sp.add_argument("--random-cells", type=int, default=0)
    sp.add_argument("--max-slope", type=rational, default=Fraction(10))
    sp.add_argument("--eps-pert", type=rational, default=Fraction(1))
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--axis", choices=("x", "y"), default="x")

    sp = add("witness", cmd_witness, "certify a Weierstrass-lemma witness")
    sp.add_argument("--preset", choices=("lemma-default", "none"), default="lemma-default")
    sp.add_argument("--a", type=rational)
    sp.add_argument("--b", type=int)
    sp.add_argument("--x", type=rational, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--signs", help="sign prefix as a +/- string, extended by its last sign")

    sp = add("lipschitz", cmd_lipschitz, "search a non-Lipschitz witness on a dyadic probe grid")
    sp.add_argument("--fn", choices=("takagi", "identity"), default="takagi")
    sp.add_argument("--x", type=rational, required=True)
    sp.add_argument("--M", type=rational, required=True)
    sp.add_argument("--depth", type=int, default=40)

    for name, handler, text in (("scan2d", cmd_scan2d, "directional difference-quotient ladder"),
                                ("ladder", cmd_ladder, "diagonal ladder of T(x) + T(y)")):
        sp = add(name, handler, text)
        if name == "scan2d":
            sp.add_argument("--fn", choices=("sum-takagi", "radial-takagi"), default="sum-takagi")
            sp.add_argument("--vx", type=rational, default=Fraction(1))
            sp.add_argument("--vy", type=rational, default=Fraction(1))
        sp.add_argument("--px", type=rational, default=Fraction(1, 3))
        sp.add_argument("--py", type=rational, default=Fraction(1, 3))
        sp.add_argument("--kmin", type=int, default=3)
        sp.add_argument("--kmax", type=int, default=12)

    sp = add("banach", cmd_banach, "approximate Banach-set membership scan")
    sp.add_argument("--fn", choices=("sum-takagi", "radial-takagi"), default="sum-takagi")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--corner", type=_pair, default=(0, 0))
    sp.add_argument("--xy-res", type=int, default=2)
    sp.add_argument("--v-res", type=int, default=4)
    sp.add_argument("--h-samples", type=int, default=4)
    sp.add_argument("--f-type", action="store_true")
    return parser


def _render(result, fmt: str) -> str:
    if isinstance(result, probe.LadderReport):
        return result.to_csv() if fmt == "csv" else dumps(result.to_json())
    if fmt == "csv":
        raise UsageError("csv output is only available for ladder reports (scan2d, ladder)")
    return dumps(result)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        result, code = args.handler(args)
        text = _render(result, args.format)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except TightenTolerance as exc:
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (DomainError, CapacityError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except construct.ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
