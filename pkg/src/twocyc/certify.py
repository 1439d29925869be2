"""Cyclicity certificates and the explicit weak-point constructions.

A lower bound ``m - 1`` for the 2-cyclicity at a point ``a*`` follows when
``V_3 = ... = V_{2m-1} = 0``, ``V_{2m+1} != 0`` and the gradients of
``V_3, ..., V_{2m-1}`` with respect to ``a_2, ..., a_m`` are linearly
independent there.  Everything here is exact (rationals or one quadratic
radical).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from . import __version__
from .polyalg.poly import MultiPoly, Ring
from .polyalg.quadext import QuadExt
from .polyalg.series import TruncSeries, series_compose, series_reverse
from .stability import (
    as_point,
    constants_table,
    evaluate,
    family_ring,
    stability_constants,
    weak_point_order,
)

LOWER = "gradient independence of the vanishing reduced constants"
LOWER_W = "gradient independence of the vanishing stability constants"
WEAK = "first non-vanishing stability constant"


class CertificateError(ValueError):
    """The point does not satisfy the preconditions of a certificate."""


@dataclass
class Certificate:
    kind: str  # lower_bound | upper_bound | weak_point_order
    d: int
    point: list[QuadExt]
    order: int | None
    matrix: list[list[QuadExt]] = field(default_factory=list)
    determinant: QuadExt | None = None
    verdict: str = ""
    proposition: str = ""
    values: dict[int, QuadExt] = field(default_factory=dict)
    budget: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        if self.kind != "lower_bound":
            return self.order is not None
        return self.determinant is not None and bool(self.determinant)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "point": [str(v) for v in self.point],
            "order": self.order,
            "values": {str(k): str(v) for k, v in sorted(self.values.items())},
            "matrix": [[str(v) for v in row] for row in self.matrix],
            "determinant": None if self.determinant is None else str(self.determinant),
            "certified": self.certified,
            "verdict": self.verdict,
            "proposition": self.proposition,
            "budget": self.budget,
            "version": __version__,
            **({"extra": self.extra} if self.extra else {}),
        }


def gradient(p: MultiPoly, variables: Sequence[str]) -> list[MultiPoly]:
    """Partial derivatives of ``p`` in the given order (a prefix of the ring)."""
    return [p.diff(v) for v in variables]


def determinant(matrix: Sequence[Sequence]) -> QuadExt:
    """Exact determinant by fraction-field Gaussian elimination."""
    n = len(matrix)
    if n == 0:
        return QuadExt(1)
    if any(len(row) != n for row in matrix):
        raise ValueError("determinant of a non-square matrix")
    m = [[QuadExt.lift(v) for v in row] for row in matrix]
    det = QuadExt(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return QuadExt(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        pv = m[c][c]
        det = det * pv
        inv = pv.inverse()
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] * inv
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


def gradient_matrix(polys: Sequence[MultiPoly], variables: Sequence[str], point: Sequence[QuadExt]) -> list[list[QuadExt]]:
    """Rows are ``d/d variables[i]``, columns the gradients of ``polys[j]``."""
    cols = [[evaluate(g, point) for g in gradient(p, variables)] for p in polys]
    return [[cols[j][i] for j in range(len(polys))] for i in range(len(variables))]


def certify_lower(point: Sequence, d: int, k_max: int | None = None, budget: float | None = None) -> Certificate:
    """Lower bound for the cyclicity at ``point`` from the reduced constants."""
    wp = weak_point_order(point, d, k_max, budget)
    if wp.index is None:
        raise CertificateError(
            f"all reduced constants up to V_{max(wp.values)} vanish; no finite weak-point order detected"
        )
    m = (wp.index - 1) // 2
    if m > d:
        raise CertificateError(f"order {m - 1} needs gradients in a2..a{m}, beyond the degree-{d} ring")
    table = constants_table(d, max(wp.values))
    polys = [table.V(k, budget) for k in range(3, 2 * m, 2)]
    names = [f"a{j}" for j in range(2, m + 1)]
    mat = gradient_matrix(polys, names, wp.point)
    det = determinant(mat)
    if det:
        verdict = f"cyclicity {m - 1}"
    else:
        verdict = f"upper bound {m - 1} only (gradients dependent)"
    return Certificate(
        "lower_bound", d, wp.point, m - 1, mat, det, verdict, LOWER, dict(wp.values), budget,
        {"witness_index": wp.index, "witness_sign": wp.witness.sign()},
    )


def even_construction(n: int) -> Certificate:
    """``d = 2n`` at ``a* = (0, ..., 0, 1)``: weak point of order ``2n - 2``.

    Checks ``W_{4n-1}(a*) = -2n`` and the exact position of the single nonzero
    entry of each gradient ``grad W_{2k+1}(a*)``, ``k = 1..2n-2``, over
    ``a_2..a_{2n-1}``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    d = 2 * n
    W = stability_constants(d, 4 * n - 1)
    pt = as_point([0] * (d - 2) + [1], d)
    values = {j: evaluate(W[j], pt) for j in range(3, 4 * n, 2)}
    checks: dict[str, bool] = {}
    checks["vanishing"] = all(not values[j] for j in range(3, 4 * n - 1, 2))
    checks["leading"] = values[4 * n - 1] == -2 * n
    names = [f"a{j}" for j in range(2, 2 * n)]
    polys = [W[2 * k + 1] for k in range(1, 2 * n - 1)]
    mat = gradient_matrix(polys, names, pt)
    expected_ok = True
    for col, k in enumerate(range(1, 2 * n - 1)):
        if k <= n - 1:
            pos, val = 2 * k, -2
        else:
            pos, val = 2 * (k - n) + 1, -2 * (k + 1)
        want = [QuadExt(val if i + 1 == pos else 0) for i in range(len(names))]
        expected_ok &= [mat[i][col] for i in range(len(names))] == want
    checks["gradient_positions"] = expected_ok
    det = determinant(mat)
    ok = all(checks.values()) and bool(det)
    return Certificate(
        "lower_bound", d, pt, 2 * n - 2, mat, det,
        f"cyclicity >= {2 * n - 2}" if ok else "construction check failed",
        LOWER_W, values, None, {"checks": checks},
    )


def odd_4m3_series(m: int) -> TruncSeries:
    """``f(x) = -x + x^(2m+2) - (m+1) x^(4m+3)`` composed with itself through ``x^(8m+5)``."""
    d = 4 * m + 3
    order = 8 * m + 5
    f = TruncSeries({1: -1, 2 * m + 2: 1, d: -(m + 1)}, order)
    return series_compose(f, f, order)


def odd_4m3_construction(m: int) -> Certificate:
    if m < 0:
        raise ValueError("m must be non-negative")
    d = 4 * m + 3
    ff = odd_4m3_series(m)
    lead = 8 * m + 5
    expected = mpq((m + 1) * (5 * m + 4) * (4 * m + 3), 3)
    vanish = all(not ff[j] for j in range(2, lead)) and ff[1] == 1
    coeffs = [mpq(0)] * (d - 1)
    coeffs[2 * m] = mpq(1)  # a_{2m+2}
    coeffs[-1] = mpq(-(m + 1))
    ok = vanish and ff[lead] == expected
    return Certificate(
        "weak_point_order", d, [QuadExt(c) for c in coeffs], d - 2 if ok else None,
        verdict=f"weak point of order {d - 2}" if ok else "construction check failed",
        proposition=WEAK, values={lead: QuadExt(ff[lead])},
        extra={"expected": str(expected), "coefficient": str(ff[lead])},
    )


def involution_ring(d: int) -> Ring:
    return Ring.family("b", 2, d)


def involution_truncate(b: Sequence | None, d: int) -> list:
    """Coefficients ``[B_2, ..., B_d]`` of the degree-``d`` truncation of ``g(-g^{-1}(x))``.

    ``b`` lists ``b_2..b_d`` (rationals or polynomials); ``None`` uses the
    symbolic parameters ``b2..bd``.
    """
    if b is None:
        ring = involution_ring(d)
        b = [MultiPoly.var(ring, n) for n in ring.names]
        zero = MultiPoly.zero(ring)
        one = MultiPoly.const(ring, 1)
    else:
        if len(b) != d - 1:
            raise ValueError(f"need {d - 1} values b2..b{d}")
        sample = next((v for v in b if isinstance(v, MultiPoly)), None)
        if sample is not None:
            zero, one = MultiPoly.zero(sample.ring), MultiPoly.const(sample.ring, 1)
            b = [v if isinstance(v, MultiPoly) else MultiPoly.const(sample.ring, v) for v in b]
        else:
            zero, one = mpq(0), mpq(1)
            b = [mpq(v) for v in b]
    g = TruncSeries({1: one, **{j: b[j - 2] for j in range(2, d + 1)}}, d, zero)
    ginv = series_reverse(g, d)
    h = series_compose(g, -ginv, d)
    if h[1] != -1:
        raise AssertionError("g(-g^{-1}) must start with -x")
    return [h[j] for j in range(2, d + 1)]


def inverse_series(d: int) -> TruncSeries:
    """Symbolic ``g^{-1}`` for ``g = x + b2 x^2 + ... + bd x^d``."""
    ring = involution_ring(d)
    g = TruncSeries({1: MultiPoly.const(ring, 1), **{j: MultiPoly.var(ring, f"b{j}") for j in range(2, d + 1)}}, d)
    return series_reverse(g, d)


def involution_constants(d: int, order: int) -> dict[int, MultiPoly]:
    """Stability constants ``W_j(b)`` of ``h_d`` through ``x^order``."""
    B = involution_truncate(None, d)
    ring = involution_ring(d)
    h = TruncSeries({1: MultiPoly.const(ring, -1), **{j: B[j - 2] for j in range(2, d + 1)}}, order)
    hh = series_compose(h, h, order)
    return {j: hh[j] for j in range(3, order + 1)}


@dataclass
class RationalSolution:
    """``var = numerator / denominator`` with both in the same ring."""

    var: str
    numerator: MultiPoly
    denominator: MultiPoly

    def __str__(self) -> str:
        return f"{self.var} = ({self.numerator}) / ({self.denominator})"


def solve_linear(p: MultiPoly, var: str) -> RationalSolution:
    """Solve ``p = 0`` for a variable in which ``p`` is linear.

    The result is scaled so the numerator has integer coefficients with
    content 1 and the denominator's leading coefficient is positive.
    """
    from math import gcd, lcm

    i = p.ring.index(var)
    if any(e[i] > 1 for e in p.terms):
        raise CertificateError(f"{var} enters non-linearly")
    A = MultiPoly(p.ring, {e[:i] + (0,) + e[i + 1 :]: c for e, c in p.terms.items() if e[i] == 1})
    C = MultiPoly(p.ring, {e: c for e, c in p.terms.items() if e[i] == 0})
    if not A:
        raise CertificateError(f"coefficient of {var} vanishes")
    num, den = -C, A
    coeffs = list(num.terms.values()) + list(den.terms.values())
    L = lcm(*(int(c.denominator) for c in coeffs))
    G = gcd(*(int(c * L) for c in num.terms.values())) if num else 1
    s = mpq(L, G)
    if den.leading_coefficient() < 0:
        s = -s
    return RationalSolution(var, num.scale(s), den.scale(s))


def solve_b7(budget: float | None = None) -> RationalSolution:
    """Isolate ``b7`` from ``W_11(b) = 0`` for the degree-9 involution truncation."""
    W = involution_constants(9, 11)
    for j in range(3, 11):
        if W[j]:
            raise AssertionError(f"W_{j} of the truncated involution should vanish")
    return solve_linear(W[11], "b7")


def d9_point(xi, b5=0, b8=0, b9=0) -> list:
    """Numeric ``a* = (B_2, ..., B_9)`` of the degree-9 construction at a root ``xi``.

    Uses ``b2 = 1, b3 = 0, b4 = xi`` and the shipped formulas for ``b6`` and
    ``b7``; ``xi`` may be any number type supporting field operations.
    """
    from importlib import resources
    import json

    data = json.loads(resources.files("twocyc").joinpath("data/d9_formulas.json").read_text())
    r = Ring(["b5", "x"])
    from .polyalg.poly import parse_poly

    n6 = parse_poly(data["b6_numerator"], r).evaluate([b5, xi])
    d6 = parse_poly(data["b6_denominator"], r).evaluate([b5, xi])
    b6 = n6 / d6
    rb = involution_ring(9)
    num7 = parse_poly(data["b7_numerator"], rb)
    den7 = parse_poly(data["b7_denominator"], rb)
    vals = [1, 0, xi, b5, b6, 0, b8, b9]
    b7 = num7.evaluate(vals) / den7.evaluate(vals)
    vals[5] = b7
    B = involution_truncate(None, 9)
    return [p.evaluate(vals) for p in B]


def d9_construction(dps: int = 80, k_max: int = 17) -> list[dict]:
    """Numerical check of the degree-9 involution construction at every real root of P.

    For each root ``xi`` (isolated exactly, then refined to ``2^-(4*dps)``) the
    map ``h_9`` is built with ``b2=1, b3=0, b4=xi, b5=b8=b9=0`` and the shipped
    ``b6``, ``b7`` formulas.  Reports the largest ``|W_j|`` for ``j < k_max``,
    ``W_{k_max}`` and the gradient determinant of ``V_3..V_15`` over ``a2..a8``.
    This is floating point evidence at ``dps`` digits, not an exact proof.
    """
    import mpmath

    from .realroots import isolate_roots, load_p16

    out = []
    with mpmath.workdps(dps):
        P = load_p16()
        table = constants_table(9, k_max)
        Vs = [table.V(k) for k in range(3, 16, 2)]
        names = [f"a{j}" for j in range(2, 9)]
        grads = [[v.diff(n) for n in names] for v in Vs]
        for r in isolate_roots(P, width=mpq(1, 2 ** (4 * dps))):
            xi = mpmath.mpf(int(r.hi.numerator)) / int(r.hi.denominator)
            a = [_to_mpf(v) for v in d9_point(xi)]
            coeffs = [mpmath.mpf(0), mpmath.mpf(-1)] + a
            ff = _numeric_selfcompose(coeffs, k_max)
            small = max(abs(ff[j]) for j in range(3, k_max))
            pt = {f"a{j}": a[j - 2] for j in range(2, 10)}
            vals = [pt[n] for n in table.ring.names]
            M = mpmath.matrix([[_num_eval(grads[c][i], vals) for c in range(7)] for i in range(7)])
            out.append({
                "xi": mpmath.nstr(xi, 20),
                "max_lower_W": mpmath.nstr(small, 5),
                f"W{k_max}": mpmath.nstr(ff[k_max], 15),
                "determinant": mpmath.nstr(mpmath.det(M), 15),
            })
    return out


def _num_eval(p: MultiPoly, vals):
    total = 0
    for e, c in p.terms.items():
        t = mpmath_rat(c)
        for v, k in zip(vals, e):
            if k:
                t *= v**k
        total += t
    return total


def mpmath_rat(c):
    import mpmath

    return mpmath.mpf(int(c.numerator)) / int(c.denominator)


def _to_mpf(v):
    import mpmath

    return v if isinstance(v, mpmath.mpf) else mpmath_rat(mpq(v))


def _numeric_selfcompose(c: list, order: int) -> list:
    """Coefficients of ``f(f(x))`` through ``x^order`` for a numeric polynomial ``f``."""
    n = order
    f = (list(c) + [0] * (n + 1))[: n + 1]
    res = [0] * (n + 1)
    pw = f[:]
    for k in range(1, len(c)):
        if k > 1:
            nxt = [0] * (n + 1)
            for i, x in enumerate(pw):
                if x:
                    for j, y in enumerate(f):
                        if i + j > n:
                            break
                        if y:
                            nxt[i + j] += x * y
            pw = nxt
        if c[k]:
            for j in range(n + 1):
                res[j] += c[k] * pw[j]
    return res
