"""Command-line front end: ``twocyc <command> [options]``.

Every command prints a JSON report (or a text rendering with ``--format
text``) carrying its exact inputs, the package version and the budget.
Exit codes: 0 success/certified, 1 usage error, 2 inconclusive or budget
exceeded, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
import time
from pathlib import Path
from typing import Callable

from gmpy2 import mpq

from . import __version__
from . import reports
from .ideals import BudgetExceeded, default_budget

log = logging.getLogger("twocyc")

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_VIOLATION = 0, 1, 2, 3
CORE_MAX_D = 7
CORE_MAX_K = 17


class UsageError(Exception):
    pass


class InvariantViolation(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with 2, which we reserve
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- helpers -------------------------------------------------------------------


def _ring_for(d: int):
    from .stability import family_ring

    return family_ring(d)


def _parse_ideal(text: str, d: int):
    """``W3-6``, ``V3,5,7``, ``V3-11`` or explicit polynomials separated by ``;``."""
    from .polyalg.poly import parse_poly
    from .stability import constants_table

    text = text.strip()
    m = re.fullmatch(r"([WV])\s*(\d+)\s*(?:-\s*(\d+)|((?:\s*,\s*\d+)*))", text)
    ring = _ring_for(d)
    if m:
        kind, first = m.group(1), int(m.group(2))
        if m.group(3):
            idx = list(range(first, int(m.group(3)) + 1))
        else:
            idx = [first] + [int(x) for x in re.findall(r"\d+", m.group(4) or "")]
        if kind == "V":
            idx = [k for k in idx if k % 2]
        top = max(idx)
        table = constants_table(d, max(top, 3))
        return [table.V(k) if kind == "V" else table.W[k] for k in idx], f"{kind}{idx}"
    return [parse_poly(p, ring) for p in text.split(";") if p.strip()], text


def _parse_poly_arg(text: str, d: int):
    """A polynomial, or a name like ``W13`` / ``V7``."""
    from .polyalg.poly import parse_poly
    from .stability import constants_table

    m = re.fullmatch(r"\s*([WV])(\d+)\s*", text)
    if m:
        k = int(m.group(2))
        table = constants_table(d, max(k, 3))
        return table.V(k) if m.group(1) == "V" else table.W[k]
    return parse_poly(text, _ring_for(d))


def _budget(args) -> float:
    b = getattr(args, "budget", None)
    if b is not None and b <= 0:
        raise UsageError("--budget must be positive")
    return b if b is not None else default_budget()


def _check_core(args, d: int | None = None, k: int | None = None) -> None:
    if getattr(args, "extended", False):
        return
    if d is not None and d > CORE_MAX_D:
        raise UsageError(f"degree {d} exceeds the core limit {CORE_MAX_D}; pass --extended")
    if k is not None and k > CORE_MAX_K:
        raise UsageError(f"index {k} exceeds the core limit {CORE_MAX_K}; pass --extended")


# --- commands ----------------------------------------------------------------------
# each returns (result dict, status, text rendering or None)


def cmd_constants(args):
    from .stability import constants_report, constants_table, relations, render_table

    d = args.d
    kmax = args.kmax or min(2 * d + 1, d * d)
    if kmax < 3:
        raise UsageError("--kmax must be at least 3")
    order = args.order or (d * d if d <= CORE_MAX_D else kmax)
    _check_core(args, d if order > kmax else None, kmax)
    table = constants_table(d, max(order, kmax, 3))
    budget = _budget(args)
    V, status, failure = {}, "ok", None
    try:
        for k in range(3, min(kmax, d * d) + 1, 2):
            V[k] = table.V(k, budget)
    except BudgetExceeded as exc:  # keep what was finished
        status, failure = "inconclusive", exc
    W = {j: table.W[j] for j in range(3, min(order, table.order) + 1)}
    res = constants_report(d, W, V)
    text = render_table(d, W, V)
    if failure is not None:
        res.update(error=str(failure), progress=failure.progress, partial=True)
        return res, status, text + f"\n[partial: {failure}]\n"
    if args.relations:
        rels = {}
        lines = ["", "Relations W_j = sum c_k V_k:", ""]
        top = max(V)
        for j in range(3, min(order, top) + 1):
            quots, rem = relations(table, j, top)
            # the division remainder is not canonical; membership is decided by the normal form
            member = not table.basis(top + 1, budget).normal_form(table.W[j])
            rels[str(j)] = {
                "V": {str(k): str(q) for k, q in sorted(quots.items())},
                "remainder": str(rem),
                "in_ideal": member,
            }
            body = " + ".join(f"({q})*V_{k}" for k, q in sorted(quots.items())) or "0"
            tail = "" if not rem else f" + r, r = {rem}" + (" (r in <V>)" if member else "")
            lines.append(f"  W_{j} = {body}{tail}")
        res["relations"] = rels
        text += "\n".join(lines) + "\n"
    return res, "ok", text


def cmd_reduce(args):
    from .ideals import groebner

    gens, label = _parse_ideal(args.ideal, args.d)
    p = _parse_poly_arg(args.poly, args.d)
    gb = groebner(gens, ring=_ring_for(args.d), budget=_budget(args))
    nf = gb.normal_form(p)
    return {"ideal": label, "poly": str(p), "normal_form": str(nf), "member": not nf}, "ok", f"{nf}\n"


def cmd_groebner(args):
    from .ideals import groebner

    gens, label = _parse_ideal(args.ideal, args.d)
    gb = groebner(gens, ring=_ring_for(args.d), budget=_budget(args), complete=True)
    if args.basis_out:
        Path(args.basis_out).write_text(gb.to_text())
    if not gb.s_pairs_reduce():
        raise InvariantViolation("an S-polynomial of the final basis does not reduce to zero")
    basis = [str(g) for g in gb.generators]
    return {"ideal": label, "order": "grevlex", "ring": list(gb.ring.names), "basis": basis}, "ok", gb.to_text()


def cmd_member(args):
    from .ideals import groebner, power_member

    gens, label = _parse_ideal(args.ideal, args.d)
    p = _parse_poly_arg(args.poly, args.d)
    gb = groebner(gens, ring=_ring_for(args.d), budget=_budget(args))
    n = power_member(p, gb, args.nmax)
    res = {"ideal": label, "poly": str(p), "member": n == 1, "power": n, "n_max": args.nmax}
    text = f"member: {n == 1}; smallest power in ideal: {n if n else f'none up to {args.nmax}'}\n"
    return res, "ok", text


def cmd_upper(args):
    from .ideals import check_upper_hypotheses

    _check_core(args, args.d)
    r = check_upper_hypotheses(args.d, k_limit=args.klimit, budget=_budget(args))
    res = {"d": r.d, "m": r.m, "cyclicity_bound": r.cyclicity_bound, "failed_at": r.failed_at, "checks": r.checks}
    status = "ok" if r.m is not None else "inconclusive"
    text = f"m = {r.m}; cyclicity \u2264 {r.cyclicity_bound}\n" if r.m else f"hypotheses fail at k = {r.failed_at}\n"
    return res, status, text


def cmd_lrad(args):
    from .ideals import check_lrad

    _check_core(args, args.d)
    r = check_lrad(args.d, args.nmax, k_limit=args.klimit, budget=_budget(args))
    res = {"d": r.d, "ell": r.ell, "n_max": r.n_max, "max_weak_order": r.max_weak_order, "exponents": r.exponents}
    status = "ok" if r.ell is not None else "inconclusive"
    needs = {j: n for j, n in r.exponents.items() if n != 1}
    text = f"ell = {r.ell}; maximum weak-point order {r.max_weak_order}; powers > 1: {needs}\n"
    return res, status, text


def cmd_certify(args):
    from .certify import CertificateError, certify_lower
    from .polyalg.quadext import parse_point

    pt = parse_point(args.point)
    try:
        c = certify_lower(pt, args.d, args.kmax, _budget(args))
    except CertificateError as exc:
        res = {"kind": "lower_bound", "d": args.d, "point": [str(v) for v in pt], "order": None, "matrix": [],
               "determinant": None, "certified": False, "verdict": str(exc), "proposition": ""}
        return res, "inconclusive", f"{exc}\n"
    return _cert_out(c, "ok" if c.certified else "inconclusive")


def _cert_out(c, status):
    j = c.to_json()
    rows = "\n".join("    [" + ", ".join(r) + "]" for r in j["matrix"])
    text = (
        f"{c.kind} d={c.d} point=({', '.join(j['point'])})\n"
        f"  order: {c.order}\n  values: {j['values']}\n  matrix:\n{rows}\n"
        f"  determinant: {j['determinant']}\n  verdict: {c.verdict}\n"
    )
    return j, status, text


def cmd_even(args):
    from .certify import even_construction

    c = even_construction(args.n)
    if not all(c.extra["checks"].values()):
        raise InvariantViolation(f"even construction checks failed: {c.extra['checks']}")
    return _cert_out(c, "ok")


def cmd_odd(args):
    from .certify import odd_4m3_construction

    c = odd_4m3_construction(args.m)
    if c.order is None:
        raise InvariantViolation("leading coefficient of f(f(x)) - x differs from the closed form")
    return _cert_out(c, "ok")


def cmd_involution(args):
    from .certify import d9_construction, inverse_series, involution_truncate, solve_b7

    res: dict = {"d": args.d}
    B = involution_truncate([mpq(v) for v in args.b.replace(",", " ").split()] if args.b else None, args.d)
    res["B"] = {str(j): str(p) for j, p in enumerate(B, start=2)}
    res["inverse"] = str(inverse_series(args.d))
    text = "\n".join(f"B_{j} = {p}" for j, p in enumerate(B, start=2)) + f"\ng^-1 = {res['inverse']}\n"
    if args.solve_b7:
        s = solve_b7()
        res["b7"] = {"numerator": str(s.numerator), "denominator": str(s.denominator)}
        text += f"{s}\n"
    if args.check_d9:
        rows = d9_construction()
        res["d9"] = rows
        text += "".join(f"xi={r['xi']}: max|W_j<17|={r['max_lower_W']} W17={r['W17']} det={r['determinant']}\n" for r in rows)
    return res, "ok", text


def _read_text(path: str | None) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    return Path(path).read_text()


def cmd_sturm(args):
    from .realroots import isolate_roots, parse_unipoly, sturm_count

    p = parse_unipoly(_read_text(args.file), args.var)
    if not p:
        raise UsageError("the zero polynomial has no finite root count")
    n = sturm_count(p)
    width = mpq(args.width) if args.width else None
    ivs = isolate_roots(p, width=width)
    if len(ivs) != n:
        raise InvariantViolation("root isolation disagrees with the Sturm count")
    res = {
        "degree": p.degree,
        "count": n,
        "intervals": [{"lo": str(r.lo), "hi": str(r.hi), "approx": r.midpoint()} for r in ivs],
    }
    text = f"{n} distinct real roots\n" + "".join(f"  ({r.lo}, {r.hi}]  ~ {r.midpoint():.15g}\n" for r in ivs)
    return res, "ok", text


def cmd_resultant(args):
    from .polyalg.poly import Ring, parse_poly
    from .realroots import UniPoly, resultant

    names = sorted(set(re.findall(r"[A-Za-z_]\w*", args.p + " " + args.q)) - {args.var})
    ring = Ring([args.var] + names)
    P = UniPoly.from_multipoly(parse_poly(args.p, ring), args.var)
    Q = UniPoly.from_multipoly(parse_poly(args.q, ring), args.var)
    r = resultant(P, Q)
    out = r.restrict(Ring(names)) if names else r.constant_term()
    return {"var": args.var, "p": args.p, "q": args.q, "resultant": str(out)}, "ok", f"{out}\n"


def _map_from_args(args):
    from .dynamics import ConcreteMap

    return ConcreteMap.parse(args.coeffs, linear=args.linear)


def _figure_path(args) -> str | None:
    """PNG target: --plot if given, else next to the JSON (--out) or CSV output."""
    if args.plot:
        return args.plot
    anchor = getattr(args, "out", None) or getattr(args, "csv", None)
    return str(Path(anchor).with_suffix(".png")) if anchor else None


def cmd_orbits(args):
    from .dynamics import count_2periodic

    fmap = _map_from_args(args)
    window = tuple(float(v) for v in args.window.split(",")) if args.window else None
    rep = count_2periodic(
        fmap, window, grid=args.grid, tol=args.tol, dps=args.dps, mode="global" if args.global_ else "local"
    )
    res = rep.to_json()
    res["map"] = fmap.describe()
    figure = _figure_path(args)
    if args.csv or figure:
        from .plotting import displacement_samples, plot_orbits, write_samples_csv

        lo, hi = rep.window
        if rep.mode == "global":
            lo, hi = hi * 1e-6, hi
        lo = lo if lo > 0 else hi * 1e-12
        if args.csv:
            xs, ys = displacement_samples(fmap, lo, hi)
            res["csv"] = str(write_samples_csv(args.csv, xs, ys))
        if figure:
            res["plot"] = str(plot_orbits(fmap, rep, figure))
    status = "ok"
    if rep.stable_under_refinement is False or rep.dropped:
        status = "inconclusive"
    if rep.sturm_points is not None and rep.sturm_points != 2 * rep.count:
        status = "inconclusive"
    text = f"{rep.count} two-periodic orbits, fixed points {rep.fixed_points}\n" + "".join(
        f"  {{{o.x}, {o.y}}} residual {o.residual:.2e}\n" for o in rep.orbits
    )
    return res, status, text


def cmd_staircase(args):
    from .dynamics import staircase
    from .polyalg.quadext import parse_point

    pt = parse_point(args.point)
    r = staircase(args.d, pt, x1=args.x1, ratio=args.ratio, grid=args.grid, tol=args.tol)
    res = r.to_json()
    figure = _figure_path(args)
    if figure:
        from .dynamics import ConcreteMap
        from .plotting import plot_orbits

        res["plot"] = str(plot_orbits(ConcreteMap([mpq(v) for v in r.steps[-1].params]), r.final, figure))
    text = "".join(f"step {s.flips}: {s.orbits} orbits at {s.roots}\n" for s in r.steps)
    return res, "ok" if r.ok else "inconclusive", text


def cmd_half_return(args):
    from .dynamics import HalfReturnProbe, fit_half_return, half_return, half_return_quadrature

    fit = fit_half_return(args.ell, args.sigma, args.c)
    res = fit.to_json()
    if args.x0:
        probe = HalfReturnProbe(args.ell, args.sigma, args.c)
        xs = [float(v) for v in args.x0.split(",")]
        res["table"] = [
            {"x0": x, "ode": half_return(probe, x), "quadrature": half_return_quadrature(probe, x)} for x in xs
        ]
    if args.csv:
        from .plotting import write_samples_csv

        res["csv"] = str(write_samples_csv(args.csv, fit.xs, fit.values, ("x", "half_return")))
    figure = _figure_path(args)
    if figure:
        from .plotting import plot_half_return

        res["plot"] = str(plot_half_return(fit, figure))
    lin, s, c = fit.fitted
    text = f"Pi_+(x) = {lin:.12g} x + {s:.12g} x^{2 * args.ell + 1} + {c:.12g} x^{4 * args.ell + 1} + ...\n"
    text += f"errors {fit.errors()}; quadrature gap {fit.max_quadrature_gap:.2e}; full-turn gap {fit.full_turn_gap:.2e}\n"
    return res, "ok", text


# --- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twocyc", description="2-cyclicity of orientation-reversing maps f(x) = -x + sum a_j x^j")
    p.add_argument("--version", action="version", version=f"twocyc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, budget=True):
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--out", help="also write the JSON report to this file")
        sp.add_argument("--verify", metavar="REPORT", help="re-run the inputs stored in REPORT and compare")
        sp.add_argument("--extended", action="store_true", help="lift the core size limits")
        sp.add_argument("-v", "--verbose", action="store_true")
        if budget:
            sp.add_argument("--budget", type=float, help="wall-clock seconds per Groebner run (env TWOCYC_BUDGET)")
        return sp

    s = common(sub.add_parser("constants", help="stability and reduced constants"))
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--kmax", type=int)
    s.add_argument("--order", type=int, help="print W_j up to this index (default d^2 for d <= 7)")
    s.add_argument("--relations", action="store_true")
    s.set_defaults(func=cmd_constants)

    for name, func, hlp in (
        ("reduce", cmd_reduce, "normal form modulo an ideal"),
        ("member", cmd_member, "ideal (power) membership"),
        ("groebner", cmd_groebner, "reduced Groebner basis"),
    ):
        s = common(sub.add_parser(name, help=hlp))
        s.add_argument("--d", type=int, required=True)
        s.add_argument("--ideal", required=True, help="W3-6, V3,5,7 or 'poly; poly'")
        if name != "groebner":
            s.add_argument("--poly", required=True, help="polynomial text or W13 / V7")
        else:
            s.add_argument("--basis-out", help="write the basis in text format")
        if name == "member":
            s.add_argument("--nmax", type=int, default=4)
        s.set_defaults(func=func)

    s = common(sub.add_parser("upper", help="upper-bound hypotheses (returns m)"))
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--klimit", type=int)
    s.set_defaults(func=cmd_upper)

    s = common(sub.add_parser("lrad", help="radical-power hypothesis (returns ell)"))
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--nmax", type=int, default=4)
    s.add_argument("--klimit", type=int)
    s.set_defaults(func=cmd_lrad)

    s = common(sub.add_parser("certify", help="lower-bound certificate at a point"))
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--point", required=True, help="comma separated exact values, e.g. 1,-1,(9+sqrt(55))/2")
    s.add_argument("--kmax", type=int)
    s.set_defaults(func=cmd_certify)

    s = common(sub.add_parser("even-construct", help="d = 2n construction"), budget=False)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_even)

    s = common(sub.add_parser("odd-construct", help="d = 4m+3 construction"), budget=False)
    s.add_argument("--m", type=int, required=True)
    s.set_defaults(func=cmd_odd)

    s = common(sub.add_parser("involution", help="coefficients of g(-g^-1) truncated at degree d"), budget=False)
    s.add_argument("--d", type=int, default=5)
    s.add_argument("--b", help="numeric b2..bd (default: symbolic)")
    s.add_argument("--solve-b7", action="store_true", help="isolate b7 from W11 of the degree-9 truncation")
    s.add_argument("--check-d9", action="store_true", help="numerically check the degree-9 construction at P's roots")
    s.set_defaults(func=cmd_involution)

    s = common(sub.add_parser("sturm", help="real roots of a univariate polynomial"), budget=False)
    s.add_argument("--file", help="'c0 c1 ... cn' or symbolic text; '-' or omitted reads stdin")
    s.add_argument("--var", default="x")
    s.add_argument("--width", help="refine isolating intervals to this width (rational)")
    s.set_defaults(func=cmd_sturm)

    s = common(sub.add_parser("resultant", help="resultant of two polynomials in --var"), budget=False)
    s.add_argument("--p", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--var", default="x")
    s.set_defaults(func=cmd_resultant)

    s = common(sub.add_parser("orbits", help="count 2-periodic orbits of a concrete map"), budget=False)
    s.add_argument("--coeffs", required=True, help="a2 a3 ... ad (rationals, space or comma separated)")
    s.add_argument("--linear", type=int, choices=(-1, 1), default=-1)
    s.add_argument("--window", help="lo,hi (local mode, default 0,1)")
    s.add_argument("--global", dest="global_", action="store_true")
    s.add_argument("--grid", type=int, default=10_000)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--dps", type=int, default=60)
    s.add_argument("--csv", help="write (x, h(x)) samples")
    s.add_argument("--plot", help="write a PNG of h(x)")
    s.set_defaults(func=cmd_orbits)

    s = common(sub.add_parser("staircase", help="realize the lower bound numerically"), budget=False)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--point", required=True)
    s.add_argument("--x1", type=float, default=0.05)
    s.add_argument("--ratio", type=float, default=1e-2)
    s.add_argument("--grid", type=int, default=10_000)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--plot")
    s.set_defaults(func=cmd_staircase)

    s = common(sub.add_parser("half-return", help="half-return map of the polar model"), budget=False)
    s.add_argument("--ell", type=int, required=True)
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--x0", help="comma separated initial radii to tabulate")
    s.add_argument("--csv")
    s.add_argument("--plot")
    s.set_defaults(func=cmd_half_return)
    return p


_NOT_INPUTS = {"func", "format", "out", "verify", "verbose", "csv", "plot", "basis_out"}


def _inputs(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in _NOT_INPUTS}


def run(args) -> tuple[dict, int, str | None]:
    started = time.perf_counter()
    budget = getattr(args, "budget", None)
    try:
        result, status, text = args.func(args)
    except BudgetExceeded as exc:
        result, status, text = {"error": str(exc), "progress": exc.progress}, "inconclusive", f"{exc}\n"
    report = reports.make_report(
        args.command, _inputs(args), result, status=status,
        budget=budget if budget is not None else (default_budget() if hasattr(args, "budget") else None),
        elapsed=round(time.perf_counter() - started, 3),
    )
    reports.validate(report)
    return report, reports.STATUS_EXIT[status], text


def _verify(args) -> int:
    stored = reports.load(args.verify)
    if stored.get("command") != args.command:
        raise UsageError(f"{args.verify} is a '{stored.get('command')}' report")
    ns = vars(args).copy()
    ns.update(stored["inputs"])
    again, _, _ = run(argparse.Namespace(**ns))
    a, b = reports.comparable(again), reports.comparable(stored)
    diff = sorted(k for k in set(a["result"]) | set(b["result"]) if a["result"].get(k) != b["result"].get(k))
    agree = not diff and a["status"] == b["status"]
    print(f"verify {args.verify}: " + ("agrees" if agree else f"DISAGREES on {diff or ['status']}"))
    return EXIT_OK if agree else EXIT_VIOLATION


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        if args.verify:
            return _verify(args)
        report, code, text = run(args)
    except UsageError as exc:
        print(f"twocyc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as exc:
        print(f"twocyc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, AssertionError) as exc:
        print(f"twocyc: invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    if args.out:
        reports.dump(report, args.out)
    if args.format == "text" and text is not None:
        sys.stdout.write(text)
    else:
        print(reports.dump(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
