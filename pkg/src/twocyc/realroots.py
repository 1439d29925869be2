"""Univariate polynomials: Sturm counting, root isolation and resultants."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from gmpy2 import mpq

from .polyalg.poly import MultiPoly, Rat, Ring, parse_poly, to_rat


def _exact_div(c, d):
    if isinstance(c, MultiPoly):
        return c.divexact(d) if isinstance(d, MultiPoly) else c.scale(1 / to_rat(d))
    return c / d


class UniPoly:
    """Dense univariate polynomial, ``coeffs[i]`` multiplies ``x^i``.

    Coefficients are exact rationals, or :class:`MultiPoly` values when the
    polynomial lives over a polynomial ring (used for resultants).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [c if isinstance(c, MultiPoly) else to_rat(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def from_multipoly(cls, p: MultiPoly, var: str) -> UniPoly:
        """Collect ``p`` by powers of ``var``; coefficients stay in ``p``'s ring."""
        i = p.ring.index(var)
        buckets: dict[int, dict] = {}
        for e, c in p.terms.items():
            k = e[i]
            buckets.setdefault(k, {})[e[:i] + (0,) + e[i + 1 :]] = c
        n = max(buckets, default=-1)
        return cls([MultiPoly(p.ring, buckets.get(k, {})) for k in range(n + 1)])

    @property
    def degree(self) -> int:
        """Degree; ``-1`` stands for the zero polynomial."""
        return len(self.coeffs) - 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    @property
    def lc(self):
        return self.coeffs[-1]

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({' '.join(str(c) for c in self.coeffs) or '0'})"

    def _zero(self):
        for c in self.coeffs:
            if isinstance(c, MultiPoly):
                return MultiPoly.zero(c.ring)
        return mpq(0)

    def __add__(self, other: UniPoly) -> UniPoly:
        n = max(len(self.coeffs), len(other.coeffs))
        z = self._zero() if self.coeffs else other._zero()
        a = list(self.coeffs) + [z] * (n - len(self.coeffs))
        b = list(other.coeffs) + [z] * (n - len(other.coeffs))
        return UniPoly([x + y for x, y in zip(a, b)])

    def __neg__(self) -> UniPoly:
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other: UniPoly) -> UniPoly:
        return self + (-other)

    def __mul__(self, other) -> UniPoly:
        if not isinstance(other, UniPoly):
            return UniPoly([c * other for c in self.coeffs])
        if not self or not other:
            return UniPoly([])
        z = self._zero()
        out = [z] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] = out[i + j] + a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> UniPoly:
        """Multiply by ``x^k``."""
        return UniPoly([self._zero()] * k + list(self.coeffs)) if self else self

    def derivative(self) -> UniPoly:
        return UniPoly([c * i for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def monic(self) -> UniPoly:
        return UniPoly([c / self.lc for c in self.coeffs])

    def divmod(self, other: UniPoly) -> tuple[UniPoly, UniPoly]:
        """Euclidean division over the rationals."""
        if not other:
            raise ZeroDivisionError("division by zero polynomial")
        r = list(self.coeffs)
        q = [mpq(0)] * max(len(r) - len(other.coeffs) + 1, 0)
        lc = other.lc
        db = other.degree
        while len(r) - 1 >= db and r:
            k = len(r) - 1 - db
            c = r[-1] / lc
            q[k] = c
            for i, b in enumerate(other.coeffs):
                r[i + k] -= c * b
            while r and not r[-1]:
                r.pop()
        return UniPoly(q), UniPoly(r)

    def __mod__(self, other: UniPoly) -> UniPoly:
        return self.divmod(other)[1]

    def sign_at(self, x) -> int:
        v = self(x)
        return (v > 0) - (v < 0)

    def sign_at_infinity(self, positive: bool = True) -> int:
        if not self:
            return 0
        s = (self.lc > 0) - (self.lc < 0)
        return s if positive or self.degree % 2 == 0 else -s


def prem(a: UniPoly, b: UniPoly) -> UniPoly:
    """Pseudo-remainder: ``lc(b)^(deg a - deg b + 1) * a = q*b + r``."""
    if not b:
        raise ZeroDivisionError("pseudo-division by zero polynomial")
    r = a
    db = b.degree
    delta = a.degree - db + 1
    lc = b.lc
    while r and r.degree >= db:
        k = r.degree - db
        t = r.lc
        r = r * lc - b.shift(k) * t
        # the product above kills the leading term
        delta -= 1
    if delta > 0:
        r = r * (lc**delta)
    return r


def gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd over the rationals."""
    while b:
        a, b = b, a % b
    return a.monic() if a else a


def squarefree_part(p: UniPoly) -> UniPoly:
    if p.degree <= 0:
        return p
    g = gcd(p, p.derivative())
    if g.degree == 0:
        return p
    return p.divmod(g)[0]


def sturm_sequence(p: UniPoly) -> list[UniPoly]:
    seq = [p, p.derivative()]
    while seq[-1]:
        r = -(seq[-2] % seq[-1])
        if not r:
            break
        seq.append(r)
    return [s for s in seq if s]


def _variations(signs: Sequence[int]) -> int:
    nz = [s for s in signs if s]
    return sum(1 for u, v in zip(nz, nz[1:]) if u != v)


def _var_at(seq: Sequence[UniPoly], x) -> int:
    if x == float("inf"):
        return _variations([s.sign_at_infinity(True) for s in seq])
    if x == float("-inf"):
        return _variations([s.sign_at_infinity(False) for s in seq])
    return _variations([s.sign_at(x) for s in seq])


def sturm_count(p: UniPoly, lo=None, hi=None) -> int:
    """Number of distinct real roots in ``(lo, hi]`` (whole line by default)."""
    if not p:
        raise ValueError("the zero polynomial has infinitely many roots")
    q = squarefree_part(p)
    if q.degree <= 0:
        return 0
    seq = sturm_sequence(q)
    a = float("-inf") if lo is None else to_rat(lo)
    b = float("inf") if hi is None else to_rat(hi)
    return _var_at(seq, a) - _var_at(seq, b)


def cauchy_bound(p: UniPoly) -> Rat:
    """Every real root satisfies ``|x| < 1 + max |c_i / c_n|``."""
    lc = p.lc
    return 1 + max((abs(c / lc) for c in p.coeffs[:-1]), default=mpq(0))


@dataclass(frozen=True)
class RootInterval:
    """``lo < root <= hi`` (``lo == hi`` marks an exactly located rational root)."""

    lo: Rat
    hi: Rat

    @property
    def width(self) -> Rat:
        return self.hi - self.lo

    def midpoint(self) -> float:
        return float((self.lo + self.hi) / 2)


def isolate_roots(p: UniPoly, width=None) -> list[RootInterval]:
    """Disjoint intervals, one per distinct real root, in increasing order."""
    if not p:
        raise ValueError("cannot isolate roots of the zero polynomial")
    q = squarefree_part(p)
    if q.degree <= 0:
        return []
    seq = sturm_sequence(q)
    B = cauchy_bound(q)
    out: list[RootInterval] = []
    stack = [(-B, B, _var_at(seq, -B), _var_at(seq, B))]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        n = vlo - vhi
        if n == 0:
            continue
        if n == 1:
            out.append(RootInterval(lo, hi))
            continue
        mid = (lo + hi) / 2
        vmid = _var_at(seq, mid)
        stack.append((mid, hi, vmid, vhi))
        stack.append((lo, mid, vlo, vmid))
    out.sort(key=lambda r: r.lo)
    if width is not None:
        out = [refine(q, r, width) for r in out]
    return out


def refine(q: UniPoly, r: RootInterval, width) -> RootInterval:
    """Bisect an isolating interval of the squarefree ``q`` down to ``width``."""
    width = mpq(width) if isinstance(width, float) else to_rat(width)
    lo, hi = r.lo, r.hi
    if q.sign_at(hi) == 0:
        return RootInterval(hi, hi)
    s_hi = q.sign_at(hi)
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = q.sign_at(mid)
        if s == 0:
            return RootInterval(mid, mid)
        if s == s_hi:
            hi = mid
        else:
            lo = mid
    return RootInterval(lo, hi)


def resultant(p: UniPoly, q: UniPoly):
    """Resultant by the subresultant pseudo-remainder sequence.

    Works over any exact integral domain (rationals or ``MultiPoly``); all
    divisions performed are exact.
    """
    if not p or not q:
        return p._zero() if p else q._zero()
    a, b = p, q
    s = 1
    if a.degree < b.degree:
        a, b = b, a
        if a.degree % 2 and b.degree % 2:
            s = -1
    if b.degree == 0:
        return s * b.lc ** a.degree
    g = 1
    h = 1
    while True:
        delta = a.degree - b.degree
        if a.degree % 2 and b.degree % 2:
            s = -s
        r = prem(a, b)
        a = b
        if not r:
            return a._zero()
        div = g * h**delta
        b = UniPoly([_exact_div(c, div) for c in r.coeffs])
        g = a.lc
        if delta == 0:
            h = h
        elif delta == 1:
            h = g
        else:
            h = _exact_div(g**delta, h ** (delta - 1))
        if b.degree <= 0:
            break
    da = a.degree
    if da == 1:
        h = b.lc
    else:
        h = _exact_div(b.lc**da, h ** (da - 1))
    return s * h


def parse_unipoly(text: str, var: str = "x") -> UniPoly:
    """Either ``"c0 c1 ... cn"`` (ascending) or a symbolic polynomial in ``var``."""
    body = " ".join(
        line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")
    ).strip()
    if not body:
        raise ValueError("empty polynomial")
    toks = body.split()
    if all(_is_number(t) for t in toks):
        return UniPoly(mpq(t) for t in toks)
    ring = Ring([var])
    p = parse_poly(body, ring)
    n = p.total_degree()
    return UniPoly([p.terms.get((k,), 0) for k in range(n + 1)])


def _is_number(tok: str) -> bool:
    try:
        mpq(tok)
        return True
    except (ValueError, TypeError):
        return False


def load_p16() -> UniPoly:
    """The shipped degree-16 polynomial of the degree-9 construction."""
    text = resources.files("twocyc").joinpath("data/P16.poly").read_text()
    return parse_unipoly(text)


def p16_checksum() -> str:
    import hashlib

    text = resources.files("twocyc").joinpath("data/P16.poly").read_text()
    body = "".join(line for line in text.splitlines() if not line.startswith("#"))
    return hashlib.sha256(body.encode()).hexdigest()
