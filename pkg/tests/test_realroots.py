from __future__ import annotations

import hashlib
from importlib import resources

import numpy as np
import sympy
from gmpy2 import mpq
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from twocyc.polyalg import MultiPoly, Ring, parse_poly
from twocyc.realroots import (
    UniPoly,
    isolate_roots,
    load_p16,
    p16_checksum,
    parse_unipoly,
    refine,
    resultant,
    squarefree_part,
    sturm_count,
)

P16_SHA256 = "a7a7f09a51a8cf08317a2b9eeade19bb618c8dad94a46a9e1814587cb14f2009"

small = st.integers(-6, 6)
unipolys = st.lists(small, min_size=2, max_size=5).map(lambda cs: UniPoly([mpq(c) for c in cs]))


def U(*cs):
    return UniPoly([mpq(c) for c in cs])


def sylvester_det(p: UniPoly, q: UniPoly):
    """Resultant straight from the Sylvester matrix (independent of any PRS)."""
    m, n = p.degree, q.degree
    pc = [sympy.Rational(int(c.numerator), int(c.denominator)) for c in reversed(p.coeffs)]
    qc = [sympy.Rational(int(c.numerator), int(c.denominator)) for c in reversed(q.coeffs)]
    rows = [[0] * i + pc + [0] * (n - 1 - i) for i in range(n)]
    rows += [[0] * i + qc + [0] * (m - 1 - i) for i in range(m)]
    return sympy.Matrix(rows).det()


def sympy_poly(p: UniPoly):
    x = sympy.Symbol("x")
    return sympy.Poly([sympy.Rational(int(c.numerator), int(c.denominator)) for c in reversed(p.coeffs)], x)


# --- Sturm ----------------------------------------------------------------------------


def test_trivial_counts():
    assert sturm_count(U(1, 0, 1)) == 0
    assert sturm_count(U(0, -1, 0, 1)) == 3
    assert sturm_count(U(1, -2, 1)) == 1
    assert sturm_count(U(0, -1, 0, 1), 0, 2) == 1  # (0, 2] holds only 1


def test_p16_data_file():
    text = resources.files("twocyc").joinpath("data/P16.poly").read_text()
    body = "".join(l.strip() for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#"))
    assert hashlib.sha256(body.encode()).hexdigest() == P16_SHA256
    assert p16_checksum() == P16_SHA256


def test_p16_has_eight_simple_real_roots():
    P = load_p16()
    assert P.degree == 16
    assert sturm_count(P) == 8
    assert squarefree_part(P).degree == 16
    ivs = isolate_roots(P)
    assert len(ivs) == 8
    ref = sorted(float(r) for r in sympy.real_roots(sympy_poly(P)))
    assert all(r.lo < x <= r.hi for r, x in zip(ivs, ref))


@settings(max_examples=60, deadline=None)
@given(st.lists(small, min_size=4, max_size=5))
def test_sturm_matches_sympy_on_random_cubics_quartics(cs):
    p = UniPoly([mpq(c) for c in cs])
    assume(p.degree >= 3)
    assert sturm_count(p) == len(set(sympy.real_roots(sympy_poly(p))))


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=4, max_size=5))
def test_sturm_matches_refined_sign_changes(cs):
    p = UniPoly([mpq(c) for c in cs])
    assume(p.degree >= 3)
    coeffs = [float(c) for c in reversed(squarefree_part(p).coeffs)]
    history = []
    n = 256
    while n <= 2**20:
        grid = np.linspace(-40.0, 40.0, n + 1)
        s = np.sign(np.polyval(coeffs, grid))
        history.append(int(np.sum(s[:-1] * s[1:] < 0) + np.sum(s == 0)))
        if len(history) >= 3 and len(set(history[-3:])) == 1:
            break
        n *= 4
    assert sturm_count(p) == history[-1]


def test_isolation_examples():
    ivs = isolate_roots(U(-2, 0, 1), width=mpq(1, 2**20))
    assert len(ivs) == 2
    for r, s in zip(ivs, (-1, 1)):
        assert r.width <= mpq(1, 2**20)
        assert r.lo < s * 1.4142135623730951 <= r.hi or abs(r.midpoint() - s * 2**0.5) < 1e-6
    assert len(isolate_roots(U(1, -2, 1))) == 1


@settings(max_examples=40, deadline=None)
@given(unipolys)
def test_isolating_intervals_disjoint_single_change(p):
    assume(p.degree >= 1)
    q = squarefree_part(p)
    ivs = isolate_roots(p)
    for a, b in zip(ivs, ivs[1:]):
        assert a.hi <= b.lo
    for r in ivs:
        if r.lo == r.hi:  # exactly located rational root
            assert q(r.lo) == 0
            continue
        assert sturm_count(q, r.lo, r.hi) == 1
        finer = refine(q, r, 1e-6)
        assert finer.width <= mpq(1, 10**6)
        assert q(finer.lo) == 0 if finer.lo == finer.hi else sturm_count(q, finer.lo, finer.hi) == 1


# --- resultants ---------------------------------------------------------------------------


def test_resultant_examples():
    assert resultant(U(-1, 0, 1), U(-1, 1)) == 0
    assert resultant(U(-2, 0, 1), U(-3, 0, 1)) == 1
    assert resultant(U(-2, 0, 1), U(1, 3, 0, 5)) == -337
    R = Ring(["x", "a", "b"])
    p = UniPoly.from_multipoly(parse_poly("x - a", R), "x")
    q = UniPoly.from_multipoly(parse_poly("x - b", R), "x")
    assert resultant(p, q) == parse_poly("a - b", R)


def test_discriminant_of_depressed_cubic():
    R = Ring(["x", "a", "b"])
    f = UniPoly.from_multipoly(parse_poly("x^3 + a*x + b", R), "x")
    assert resultant(f, f.derivative()) == parse_poly("4*a^3 + 27*b^2", R)


@settings(max_examples=50, deadline=None)
@given(unipolys, unipolys)
def test_resultant_antisymmetry_and_sylvester(p, q):
    assume(p.degree >= 1 and q.degree >= 1)
    r = resultant(p, q)
    assert resultant(q, p) == (-1) ** (p.degree * q.degree) * r
    assert r == sylvester_det(p, q)


def test_resultant_sign_case():
    # Res(x + 1, x^3) = q(-1) = -1
    assert resultant(U(1, 1), U(0, 0, 0, 1)) == -1 == sylvester_det(U(1, 1), U(0, 0, 0, 1))


@settings(max_examples=40, deadline=None)
@given(unipolys, unipolys, unipolys)
def test_resultant_multiplicative(p, q, r):
    assume(p.degree >= 1 and q.degree >= 1 and r.degree >= 1)
    assert resultant(p, q * r) == resultant(p, q) * resultant(p, r)


def test_parse_unipoly_formats():
    assert parse_unipoly("-2 0 1") == U(-2, 0, 1)
    assert parse_unipoly("x^2 - 2") == U(-2, 0, 1)
    assert parse_unipoly("t^3 - t", var="t") == U(0, -1, 0, 1)
