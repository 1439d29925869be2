"""Sparse multivariate polynomials with exact rational coefficients.

Coefficients are ``gmpy2.mpq`` values, exponents are tuples aligned with the
variable list of a :class:`Ring`.  Terms are ordered by the graded reverse
lexicographic order with the first ring variable largest.
"""

from __future__ import annotations

import re
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

Rat = type(mpq())


def to_rat(value) -> Rat:
    """Convert ints, fractions, mpq and ``"p/q"`` strings to an exact rational."""
    if isinstance(value, Rat):
        return value
    if isinstance(value, str):
        return mpq(value.strip())
    if isinstance(value, (int, Rational)):
        return mpq(value)
    if type(value).__name__ in ("mpz", "mpq"):
        return mpq(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


class RingMismatch(ValueError):
    pass


class Ring:
    """Ordered list of variable names, optionally with positive integer weights.

    Variables earlier in the list are larger in the monomial order.  Weights are
    only used to grade polynomials (quasi-homogeneity, degree truncation in
    Groebner computations); they do not change the monomial order.
    """

    __slots__ = ("names", "weights", "_index")

    def __init__(self, names: Sequence[str], weights: Sequence[int] | None = None):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        if weights is not None:
            weights = tuple(int(w) for w in weights)
            if len(weights) != len(self.names) or any(w <= 0 for w in weights):
                raise ValueError("weights must be positive, one per variable")
        self.weights = weights
        self._index = {n: i for i, n in enumerate(self.names)}

    @classmethod
    def family(cls, prefix: str, lo: int, hi: int) -> Ring:
        """Ring ``prefix<lo> .. prefix<hi>`` with weight ``j - 1`` on ``prefix<j>``."""
        idx = range(lo, hi + 1)
        return cls([f"{prefix}{j}" for j in idx], [j - 1 for j in idx])

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"variable {name!r} not in ring {self.names}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Ring)
            and self.names == other.names
            and self.weights == other.weights
        )

    def __hash__(self) -> int:
        return hash((self.names, self.weights))

    def __repr__(self) -> str:
        return f"Ring({', '.join(self.names)})"

    def weighted_degree(self, exp: tuple[int, ...]) -> int:
        if self.weights is None:
            return sum(exp)
        return sum(w * e for w, e in zip(self.weights, exp))

    def header(self) -> str:
        w = "" if self.weights is None else " weights " + ",".join(map(str, self.weights))
        return f"ring {','.join(self.names)}{w}"


@lru_cache(maxsize=1 << 16)
def grevlex_key(exp: tuple[int, ...]) -> tuple[int, ...]:
    """Sort key: larger key means larger monomial under grevlex."""
    return (sum(exp),) + tuple(-e for e in reversed(exp))


@lru_cache(maxsize=1 << 16)
def heap_key(exp: tuple[int, ...]) -> tuple[int, ...]:
    # min-heap key popping the grevlex-largest monomial first
    return (-sum(exp),) + exp[::-1]


def grevlex_cmp(m1: Sequence[int], m2: Sequence[int]) -> int:
    """Compare exponent vectors under grevlex; returns -1, 0 or 1."""
    if len(m1) != len(m2):
        raise RingMismatch("exponent vectors of different length")
    k1, k2 = grevlex_key(tuple(m1)), grevlex_key(tuple(m2))
    return (k1 > k2) - (k1 < k2)


def divides(m: tuple[int, ...], n: tuple[int, ...]) -> bool:
    return all(a <= b for a, b in zip(m, n))


def mono_mul(m: tuple[int, ...], n: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(a + b for a, b in zip(m, n))


def mono_div(n: tuple[int, ...], m: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(a - b for a, b in zip(n, m))


def mono_lcm(m: tuple[int, ...], n: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(a if a > b else b for a, b in zip(m, n))


class MultiPoly:
    """Immutable polynomial over the rationals in the variables of ``ring``."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[tuple[int, ...], object] | None = None):
        self.ring = ring
        clean: dict[tuple[int, ...], Rat] = {}
        n = ring.nvars
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for {ring}")
            c = to_rat(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
                if not clean[exp]:
                    del clean[exp]
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, ring: Ring, terms: dict) -> MultiPoly:
        # terms must already be canonical: exact mpq, nonzero, right length
        p = object.__new__(cls)
        p.ring = ring
        p.terms = terms
        p._hash = None
        return p

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, ring: Ring) -> MultiPoly:
        return cls._raw(ring, {})

    @classmethod
    def const(cls, ring: Ring, c) -> MultiPoly:
        c = to_rat(c)
        return cls._raw(ring, {(0,) * ring.nvars: c} if c else {})

    @classmethod
    def var(cls, ring: Ring, name: str) -> MultiPoly:
        exp = [0] * ring.nvars
        exp[ring.index(name)] = 1
        return cls._raw(ring, {tuple(exp): mpq(1)})

    @classmethod
    def monomial(cls, ring: Ring, exp: Sequence[int], c=1) -> MultiPoly:
        return cls(ring, {tuple(exp): c})

    # basic queries ------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> Rat:
        return self.terms.get((0,) * self.ring.nvars, mpq(0))

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Rat]]:
        """Terms in decreasing grevlex order."""
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    def leading_monomial(self) -> tuple[int, ...]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self.terms, key=grevlex_key)

    def leading_coefficient(self) -> Rat:
        return self.terms[self.leading_monomial()]

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def weighted_degree(self) -> int:
        return max((self.ring.weighted_degree(e) for e in self.terms), default=-1)

    def is_weighted_homogeneous(self) -> bool:
        return len({self.ring.weighted_degree(e) for e in self.terms}) <= 1

    def variables(self) -> list[str]:
        used = [False] * self.ring.nvars
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used[i] = True
        return [n for n, u in zip(self.ring.names, used) if u]

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        try:
            return MultiPoly.const(self.ring, other)
        except TypeError:
            return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for e, c in small.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return MultiPoly._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        return MultiPoly._raw(self.ring, {e: -c for e, c in self.terms.items()})

    def __pos__(self) -> MultiPoly:
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, c) -> MultiPoly:
        c = to_rat(c)
        if not c:
            return MultiPoly.zero(self.ring)
        return MultiPoly._raw(self.ring, {e: v * c for e, v in self.terms.items()})

    def mul_term(self, exp: tuple[int, ...], c) -> MultiPoly:
        """Multiply by the single term ``c * x^exp``."""
        if not c:
            return MultiPoly.zero(self.ring)
        return MultiPoly._raw(
            self.ring, {mono_mul(e, exp): v * c for e, v in self.terms.items()}
        )

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        if other.ring != self.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[tuple[int, ...], Rat] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                v = get(e)
                out[e] = ca * cb if v is None else v + ca * cb
        return MultiPoly._raw(self.ring, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, MultiPoly):
            return self.divexact(other)
        return self.scale(1 / to_rat(other))

    def __pow__(self, n: int) -> MultiPoly:
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = MultiPoly.const(self.ring, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def divexact(self, other: MultiPoly) -> MultiPoly:
        """Quotient of an exact division; raises ``ValueError`` otherwise."""
        other = self._coerce(other)
        if not other:
            raise ZeroDivisionError("division by the zero polynomial")
        lm = other.leading_monomial()
        lc = other.terms[lm]
        rest = self
        quot: dict[tuple[int, ...], Rat] = {}
        while rest:
            m = rest.leading_monomial()
            if not divides(lm, m):
                raise ValueError("polynomial division is not exact")
            q = mono_div(m, lm)
            c = rest.terms[m] / lc
            quot[q] = c
            rest = rest - other.mul_term(q, c)
        return MultiPoly._raw(self.ring, quot)

    # comparisons --------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.ring == other.ring and self.terms == other.terms
        try:
            c = to_rat(other)
        except TypeError:
            return NotImplemented
        return self.terms == ({(0,) * self.ring.nvars: c} if c else {})

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    # calculus and substitution -----------------------------------------
    def diff(self, name: str) -> MultiPoly:
        i = self.ring.index(name)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                e2 = e[:i] + (k - 1,) + e[i + 1 :]
                out[e2] = c * k
        return MultiPoly._raw(self.ring, out)

    def evaluate(self, values: Mapping[str, object] | Sequence[object]):
        """Evaluate at a full point; values may be any ring elements (QuadExt, mpf, ...)."""
        if isinstance(values, Mapping):
            vals = [values[n] for n in self.ring.names]
        else:
            vals = list(values)
            if len(vals) != self.ring.nvars:
                raise ValueError(f"expected {self.ring.nvars} values, got {len(vals)}")
        powers: list[dict[int, object]] = [{} for _ in vals]

        def pw(i: int, k: int):
            cache = powers[i]
            if k not in cache:
                cache[k] = vals[i] ** k
            return cache[k]

        total = 0
        for e, c in self.terms.items():
            t = c
            for i, k in enumerate(e):
                if k:
                    t = t * pw(i, k)
            total = total + t
        return total

    def subs(self, values: Mapping[str, object]) -> MultiPoly:
        """Substitute rational numbers for some variables, keeping the ring."""
        idx = {self.ring.index(n): to_rat(v) for n, v in values.items()}
        out: dict[tuple[int, ...], Rat] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            for i, v in idx.items():
                if e[i]:
                    c = c * v ** e[i]
                    e2[i] = 0
            if c:
                t = tuple(e2)
                out[t] = out.get(t, 0) + c
        return MultiPoly._raw(self.ring, {e: c for e, c in out.items() if c})

    def compose(self, images: Mapping[str, MultiPoly], ring: Ring) -> MultiPoly:
        """Substitute polynomials (over ``ring``) for the variables of this polynomial."""
        gens = [images[n] if n in images else MultiPoly.var(ring, n) for n in self.ring.names]
        cache: dict[tuple[int, int], MultiPoly] = {}
        total = MultiPoly.zero(ring)
        for e, c in self.terms.items():
            t = MultiPoly.const(ring, c)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in cache:
                        cache[(i, k)] = gens[i] ** k
                    t = t * cache[(i, k)]
            total = total + t
        return total

    def embed(self, ring: Ring) -> MultiPoly:
        """Map into a ring containing all variables of this polynomial's ring."""
        pos = [ring.index(n) for n in self.ring.names]
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * ring.nvars
            for i, k in zip(pos, e):
                e2[i] = k
            out[tuple(e2)] = c
        return MultiPoly._raw(ring, out)

    def restrict(self, ring: Ring) -> MultiPoly:
        """Map into ``ring`` by setting variables absent from it to zero."""
        keep = [(i, ring.index(n)) for i, n in enumerate(self.ring.names) if n in ring]
        kept = {i for i, _ in keep}
        out: dict[tuple[int, ...], Rat] = {}
        for e, c in self.terms.items():
            if any(k for i, k in enumerate(e) if i not in kept):
                continue
            e2 = [0] * ring.nvars
            for i, j in keep:
                e2[j] = e[i]
            out[tuple(e2)] = c
        return MultiPoly._raw(ring, out)

    def monic(self) -> MultiPoly:
        if not self.terms:
            return self
        return self.scale(1 / self.leading_coefficient())

    # text format --------------------------------------------------------
    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"MultiPoly({format_poly(self)!r})"


def format_term(exp: tuple[int, ...], c: Rat, names: Sequence[str]) -> str:
    factors = []
    for n, k in zip(names, exp):
        if k == 1:
            factors.append(n)
        elif k:
            factors.append(f"{n}^{k}")
    a = abs(c)
    if not factors:
        return str(a)
    if a != 1:
        factors.insert(0, str(a))
    return " * ".join(factors)


def format_poly(p: MultiPoly) -> str:
    """Render as ``c * a2^e2 * a3^e3`` terms, decreasing grevlex order."""
    if not p.terms:
        return "0"
    parts = []
    for i, (e, c) in enumerate(p.sorted_terms()):
        body = format_term(e, c, p.ring.names)
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*^]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:pos + 20]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def parse_poly(text: str, ring: Ring) -> MultiPoly:
    """Parse the text format produced by :func:`format_poly`.

    Accepts sums of products of rationals (``p/q``) and powers ``name^k``
    (``**`` also accepted).  Parentheses are not part of the format.
    """
    toks = _tokenize(text)
    if not toks:
        raise ValueError("empty polynomial text")
    terms: dict[tuple[int, ...], Rat] = {}
    i = 0
    n = ring.nvars

    def expect_factor(i):
        if i >= len(toks):
            raise ValueError("unexpected end of polynomial text")
        kind, val = toks[i]
        if kind == "num":
            return ("c", mpq(val)), i + 1
        if kind == "name":
            k = 1
            if i + 1 < len(toks) and toks[i + 1][1] in ("^", "**"):
                if i + 2 >= len(toks) or toks[i + 2][0] != "num" or "/" in toks[i + 2][1]:
                    raise ValueError(f"bad exponent after {val}")
                k = int(toks[i + 2][1])
                return ("v", val, k), i + 3
            return ("v", val, k), i + 1
        raise ValueError(f"unexpected token {val!r}")

    first = True
    while i < len(toks):
        sign = 1
        if toks[i][0] == "op" and toks[i][1] in "+-":
            sign = -1 if toks[i][1] == "-" else 1
            i += 1
        elif not first:
            raise ValueError(f"expected + or - before {toks[i][1]!r}")
        first = False
        coeff = mpq(sign)
        exp = [0] * n
        f, i = expect_factor(i)
        while True:
            if f[0] == "c":
                coeff *= f[1]
            else:
                exp[ring.index(f[1])] += f[2]
            if i < len(toks) and toks[i][1] == "*":
                f, i = expect_factor(i + 1)
            else:
                break
        key = tuple(exp)
        terms[key] = terms.get(key, 0) + coeff
    return MultiPoly(ring, terms)


def ring_from_header(line: str) -> Ring:
    """Inverse of :meth:`Ring.header`."""
    parts = line.split()
    if len(parts) < 2 or parts[0] != "ring":
        raise ValueError(f"not a ring header: {line!r}")
    names = [s for s in parts[1].split(",") if s]
    weights = None
    if len(parts) >= 4 and parts[2] == "weights":
        weights = [int(s) for s in parts[3].split(",")]
    return Ring(names, weights)


def polys_from_lines(lines: Iterable[str], ring: Ring) -> list[MultiPoly]:
    return [parse_poly(s, ring) for s in lines if s.strip() and not s.lstrip().startswith("#")]
