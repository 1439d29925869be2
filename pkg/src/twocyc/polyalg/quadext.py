"""Exact arithmetic in a real quadratic field Q(sqrt(D))."""

from __future__ import annotations

import re
from math import isqrt

from gmpy2 import mpq

from .poly import Rat, to_rat


def _squarefree(n: int) -> bool:
    if n < 2:
        return n == 1
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


class QuadExt:
    """``p + q*sqrt(D)`` with rational ``p, q`` and squarefree ``D > 1``.

    Rational numbers are represented with ``q == 0``; their ``D`` is a
    placeholder and adapts to the other operand.  Mixing two genuinely
    irrational elements with different ``D`` raises ``ValueError``.
    """

    __slots__ = ("p", "q", "D")

    def __init__(self, p=0, q=0, D: int = 1):
        D = int(D)
        self.p = to_rat(p)
        self.q = to_rat(q)
        if self.q and (D < 2 or not _squarefree(D)):
            raise ValueError(f"D={D} must be a squarefree integer > 1")
        self.D = D if self.q else (D if D >= 1 else 1)

    @classmethod
    def lift(cls, x) -> QuadExt:
        if isinstance(x, QuadExt):
            return x
        return cls(to_rat(x), 0, 1)

    def _common(self, other: QuadExt) -> int:
        if not other.q:
            return self.D
        if not self.q:
            return other.D
        if self.D != other.D:
            raise ValueError(f"mixed discriminants {self.D} and {other.D}")
        return self.D

    def _wrap(self, other):
        try:
            return QuadExt.lift(other)
        except TypeError:
            return NotImplemented

    def __add__(self, other):
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.p + o.p, self.q + o.q, self._common(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.p, -self.q, self.D)

    def __sub__(self, other):
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.p - o.p, self.q - o.q, self._common(o))

    def __rsub__(self, other):
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        D = self._common(o)
        return QuadExt(self.p * o.p + self.q * o.q * D, self.p * o.q + self.q * o.p, D)

    __rmul__ = __mul__

    def conjugate(self) -> QuadExt:
        return QuadExt(self.p, -self.q, self.D)

    def norm(self) -> Rat:
        return self.p * self.p - self.q * self.q * self.D

    def inverse(self) -> QuadExt:
        n = self.norm()
        if not n:
            raise ZeroDivisionError("inverse of zero in quadratic field")
        return QuadExt(self.p / n, -self.q / n, self.D)

    def __truediv__(self, other):
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int) -> QuadExt:
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadExt(1, 0, self.D)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def sign(self) -> int:
        """Exact sign, comparing ``p^2`` with ``q^2 D`` when the parts disagree."""
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sq == 0 or sp == sq:
            return sp if sp else sq
        if sp == 0:
            return sq
        return sp if self.p * self.p > self.q * self.q * self.D else sq

    def __bool__(self) -> bool:
        return bool(self.p) or bool(self.q)

    def __eq__(self, other) -> bool:
        o = self._wrap(other)
        if o is NotImplemented:
            return NotImplemented
        if not self.q and not o.q:
            return self.p == o.p
        return self.p == o.p and self.q == o.q and self.D == o.D

    def __hash__(self) -> int:
        if not self.q:
            return hash(self.p)
        return hash((self.p, self.q, self.D))

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - other).sign() >= 0

    def is_rational(self) -> bool:
        return not self.q

    def to_mpf(self, ctx=None):
        import mpmath

        ctx = ctx or mpmath.mp
        p = ctx.mpf(int(self.p.numerator)) / int(self.p.denominator)
        if not self.q:
            return p
        q = ctx.mpf(int(self.q.numerator)) / int(self.q.denominator)
        return p + q * ctx.sqrt(self.D)

    def __float__(self) -> float:
        return float(self.to_mpf())

    def __str__(self) -> str:
        if not self.q:
            return str(self.p)
        q = abs(self.q)
        rad = f"sqrt({self.D})" if q == 1 else f"{q}*sqrt({self.D})"
        if not self.p:
            return ("-" if self.q < 0 else "") + rad
        return f"{self.p}{'-' if self.q < 0 else '+'}{rad}"

    def __repr__(self) -> str:
        return f"QuadExt({self})"


_QTOK = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<sqrt>sqrt|√)|(?P<op>[-+*/()]))")


def parse_quad(text: str) -> QuadExt:
    """Parse expressions like ``-(23+3*sqrt(55))/2`` or ``9/2 + √55/2``."""
    toks: list[tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _QTOK.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse number near {text[pos:pos + 20]!r}")
        toks.append((m.lastgroup, m.group(m.lastgroup)))
        pos = m.end()
    i = 0

    def peek():
        return toks[i][1] if i < len(toks) else None

    def expr():
        nonlocal i
        v = term()
        while peek() in ("+", "-"):
            op = toks[i][1]
            i += 1
            w = term()
            v = v + w if op == "+" else v - w
        return v

    def term():
        nonlocal i
        v = unary()
        while peek() in ("*", "/"):
            op = toks[i][1]
            i += 1
            w = unary()
            v = v * w if op == "*" else v / w
        return v

    def unary():
        nonlocal i
        if peek() in ("-", "+"):
            op = toks[i][1]
            i += 1
            v = unary()
            return -v if op == "-" else v
        return atom()

    def atom():
        nonlocal i
        if i >= len(toks):
            raise ValueError(f"unexpected end of {text!r}")
        kind, val = toks[i]
        if kind == "num":
            i += 1
            return QuadExt(mpq(val), 0, 1)
        if kind == "sqrt":
            i += 1
            paren = peek() == "("
            if paren:
                i += 1
            if i >= len(toks) or toks[i][0] != "num" or "." in toks[i][1]:
                raise ValueError("sqrt needs an integer argument")
            n = int(toks[i][1])
            i += 1
            if paren:
                if peek() != ")":
                    raise ValueError("missing ) after sqrt argument")
                i += 1
            return sqrt_int(n)
        if val == "(":
            i += 1
            v = expr()
            if peek() != ")":
                raise ValueError("missing )")
            i += 1
            return v
        raise ValueError(f"unexpected token {val!r} in {text!r}")

    v = expr()
    if i != len(toks):
        raise ValueError(f"trailing input in {text!r}")
    return v


def sqrt_int(n: int) -> QuadExt:
    """``sqrt(n)`` for a non-negative integer, pulling out square factors."""
    if n < 0:
        raise ValueError("negative radicand")
    r = isqrt(n)
    if r * r == n:
        return QuadExt(r, 0, 1)
    outside, inside = 1, n
    k = 2
    while k * k <= inside:
        while inside % (k * k) == 0:
            inside //= k * k
            outside *= k
        k += 1
    return QuadExt(0, outside, inside)


def parse_point(text: str) -> list[QuadExt]:
    """Comma separated list of exact numbers; commas inside parentheses are not allowed."""
    return [parse_quad(s) for s in text.split(",")]
