from __future__ import annotations

import random

import pytest
import sympy
from gmpy2 import mpq

from twocyc.ideals import (
    BudgetExceeded,
    GroebnerBasis,
    check_lrad,
    check_upper_hypotheses,
    groebner,
    ideal_equal,
    ideal_member,
    normal_form,
    power_member,
)
from twocyc.polyalg import MultiPoly, Ring, parse_poly
from twocyc.stability import constants_table


def sym(p: MultiPoly):
    syms = sympy.symbols(p.ring.names)
    return sympy.Add(*[
        sympy.Rational(int(c.numerator), int(c.denominator)) * sympy.Mul(*[s**e for s, e in zip(syms, exp)])
        for exp, c in p.terms.items()
    ])


def sympy_basis(polys, ring):
    gb = sympy.groebner([sym(p) for p in polys], *sympy.symbols(ring.names), order="grevlex")
    return gb


def random_poly(ring, rng, terms=4, deg=3):
    out = {}
    for _ in range(terms):
        exp = tuple(rng.randint(0, deg) for _ in ring.names)
        out[exp] = mpq(rng.randint(-9, 9), rng.randint(1, 5))
    return MultiPoly(ring, out)


@pytest.fixture(scope="module")
def t4():
    return constants_table(4)


@pytest.fixture(scope="module")
def t6():
    return constants_table(6)


def test_empty_and_principal():
    R = Ring(["a2", "a3"])
    assert len(groebner([], ring=R)) == 0
    gb = groebner([parse_poly("a2", R)])
    assert [str(g) for g in gb] == ["a2"]


def test_hand_elimination():
    R = Ring(["a2", "a3"])
    gb = groebner([parse_poly("a2^2 - a3", R), parse_poly("a3", R)])
    assert ideal_member(parse_poly("a2^2", R), gb)
    assert not ideal_member(parse_poly("a2", R), gb)


def test_d4_basis_matches_sympy(t4):
    vs = [t4.V(k) for k in (3, 5, 7)]
    ours = groebner(vs, complete=True)
    ref = sympy_basis(vs, t4.ring)
    ours_s = {sympy.expand(sym(g)) for g in ours}
    gens = sympy.symbols(t4.ring.names)
    ref_s = {sympy.expand(g / sympy.Poly(g, *gens).LC(order="grevlex")) for g in ref.exprs}
    assert ours_s == ref_s
    assert ours.s_pairs_reduce()


def test_d4_kills_higher_constants(t4):
    gb = groebner([t4.V(k) for k in (3, 5, 7)])
    for j in range(8, 17):
        assert normal_form(t4.W[j], gb) == 0


def test_nf_examples(t4):
    gb3 = groebner([t4.W[3]])
    assert normal_form(t4.W[4], gb3) == 0
    assert normal_form(t4.W[5], gb3) == parse_poly("-6*a2*a4 + 4*a3^2", t4.ring)
    assert normal_form(MultiPoly.zero(t4.ring), gb3) == 0


def test_membership_examples(t4, t6):
    gb = groebner([t6.V(k) for k in (3, 5, 7, 9, 11)])
    assert not ideal_member(t6.W[13], gb)
    assert ideal_member(t6.V(7), gb)
    gb4 = groebner([t4.V(k) for k in (3, 5, 7)])
    assert ideal_member(t4.W[10], gb4)


def test_nf_invariant_under_ideal_shift(t4):
    rng = random.Random(7)
    gens = [t4.V(3), t4.V(5)]
    gb = groebner(gens)
    for _ in range(20):
        p = random_poly(t4.ring, rng)
        q = random_poly(t4.ring, rng, terms=2, deg=2)
        g = rng.choice(gens)
        nf = normal_form(p, gb)
        assert normal_form(p + q * g, gb) == nf
        assert normal_form(nf, gb) == nf


def test_ideal_equal_examples(t4):
    R = t4.ring
    W = t4.W
    assert ideal_equal(groebner([W[3]]), groebner([t4.V(3)]))
    a2 = MultiPoly.var(R, "a2")
    assert not ideal_equal(groebner([a2]), groebner([a2**2]))
    assert ideal_equal(groebner([W[3], W[4], W[5]]), groebner([t4.V(3), t4.V(5)]))


def test_ideal_equal_is_equivalence(t4):
    W = t4.W
    corpus = [
        groebner([W[3]]),
        groebner([t4.V(3)]),
        groebner([W[3], W[4], W[5]]),
        groebner([t4.V(3), t4.V(5)]),
        groebner([t4.V(3), t4.V(5), t4.V(7)]),
    ]
    for a in corpus:
        assert ideal_equal(a, a)
        for b in corpus:
            assert ideal_equal(a, b) == ideal_equal(b, a)
            for c in corpus:
                if ideal_equal(a, b) and ideal_equal(b, c):
                    assert ideal_equal(a, c)


def test_deterministic_and_text_round_trip(t4):
    vs = [t4.V(k) for k in (3, 5, 7)]
    a = groebner(vs, complete=True)
    b = groebner(vs, complete=True)
    assert a.to_text() == b.to_text()
    c = GroebnerBasis.from_text(a.to_text())
    c.compute()
    assert [str(g) for g in c] == [str(g) for g in a]


def test_budget_exceeded_reports_progress(t6):
    with pytest.raises(BudgetExceeded) as err:
        groebner([t6.V(k) for k in (3, 5, 7, 9, 11)], budget=1e-9, complete=True)
    assert "completed_degree" in err.value.progress


def test_power_member(t6):
    gb = groebner([t6.V(k) for k in (3, 5, 7, 9, 11)])
    assert power_member(t6.W[13], gb) == 2
    assert power_member(t6.V(5), gb) == 1
    assert power_member(t6.W[13], gb, n_max=1) is None


def test_d6_profile_against_sympy(t6):
    """Independent check of which W_j need a square at d=6."""
    vs = [t6.V(k) for k in (3, 5, 7, 9, 11)]
    ref = sympy_basis(vs, t6.ring)
    assert not ref.contains(sym(t6.W[13]))
    assert ref.contains(sympy.expand(sym(t6.W[13]) ** 2))
    assert ref.contains(sym(t6.W[17]))


def test_upper_small_degrees():
    assert check_upper_hypotheses(3).m == 2
    r = check_upper_hypotheses(4)
    assert r.m == 3 and r.cyclicity_bound == 2
    assert all(c["chain"] for c in r.checks)


def test_lrad_d2():
    r = check_lrad(2)
    assert r.ell == 1
    # W_4 = a2^3 is already a multiple of W_3 = -2 a2^2
    assert r.exponents == {3: 1, 4: 1}


def test_upper_d6():
    assert check_upper_hypotheses(6).m == 6


def test_lrad_d5_d6():
    r5 = check_lrad(5, 4)
    assert r5.ell == 4
    assert {j for j, n in r5.exponents.items() if n != 1} == {11}
    r6 = check_lrad(6, 4)
    assert r6.ell == 5
    assert {j for j, n in r6.exponents.items() if n != 1} == {13, 14, 15, 16}
    assert r6.exponents[17] == 1
