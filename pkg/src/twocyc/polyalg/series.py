"""Truncated power series without constant term.

Coefficients may be :class:`MultiPoly` values or exact rationals; anything
supporting ``+``, ``-`` and ``*`` with a zero element works.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from gmpy2 import mpq

from .poly import MultiPoly, to_rat


def _is_zero(c) -> bool:
    return not c


class TruncSeries:
    """``sum_{k=1}^{order} c_k x^k``; coefficients beyond ``order`` are unknown.

    ``coeffs[k]`` is the coefficient of ``x^k``; ``coeffs[0]`` is always zero.
    """

    __slots__ = ("coeffs", "order", "zero")

    def __init__(self, coeffs: Sequence | Mapping[int, object], order: int, zero=None):
        if order < 1:
            raise ValueError("truncation order must be positive")
        if isinstance(coeffs, Mapping):
            items = dict(coeffs)
        else:
            items = dict(enumerate(coeffs))
        if zero is None:
            sample = next((c for c in items.values() if isinstance(c, MultiPoly)), None)
            zero = MultiPoly.zero(sample.ring) if sample is not None else mpq(0)
        if items.get(0):
            raise ValueError("series must fix the origin (no constant term)")
        if isinstance(zero, MultiPoly):
            conv = lambda c: c if isinstance(c, MultiPoly) else MultiPoly.const(zero.ring, c)
        elif type(zero).__name__ == "mpq":
            conv = to_rat
        else:
            conv = lambda c: c
        out = [zero] * (order + 1)
        for k, c in items.items():
            if k < 0:
                raise ValueError("negative power in series")
            if 0 < k <= order:
                out[k] = conv(c)
        self.coeffs = tuple(out)
        self.order = order
        self.zero = zero

    @classmethod
    def x(cls, order: int, zero=None) -> TruncSeries:
        one = 1 if zero is None or not isinstance(zero, MultiPoly) else MultiPoly.const(zero.ring, 1)
        return cls({1: one}, order, zero)

    def __getitem__(self, k: int):
        if k > self.order:
            raise IndexError(f"coefficient x^{k} beyond truncation order {self.order}")
        return self.coeffs[k] if k >= 0 else self.zero

    def degree(self) -> int:
        """Largest power with a nonzero stored coefficient (0 for the zero series)."""
        for k in range(self.order, 0, -1):
            if not _is_zero(self.coeffs[k]):
                return k
        return 0

    def valuation(self) -> int:
        for k in range(1, self.order + 1):
            if not _is_zero(self.coeffs[k]):
                return k
        return self.order + 1

    def truncate(self, order: int) -> TruncSeries:
        if order > self.order:
            raise ValueError("cannot raise truncation order of a series")
        return TruncSeries(self.coeffs[: order + 1], order, self.zero)

    def pad(self, order: int) -> TruncSeries:
        """Treat the series as a polynomial and extend with zero coefficients."""
        return TruncSeries(self.coeffs, max(order, self.order), self.zero)

    def __add__(self, other: TruncSeries) -> TruncSeries:
        n = min(self.order, other.order)
        return TruncSeries([self.coeffs[k] + other.coeffs[k] for k in range(n + 1)], n, self.zero)

    def __sub__(self, other: TruncSeries) -> TruncSeries:
        n = min(self.order, other.order)
        return TruncSeries([self.coeffs[k] - other.coeffs[k] for k in range(n + 1)], n, self.zero)

    def __neg__(self) -> TruncSeries:
        return TruncSeries([-c for c in self.coeffs], self.order, self.zero)

    def scale(self, c) -> TruncSeries:
        return TruncSeries([v * c for v in self.coeffs], self.order, self.zero)

    def __mul__(self, other: TruncSeries) -> TruncSeries:
        n = min(self.order, other.order)
        return TruncSeries(_mul_lists(self.coeffs, other.coeffs, n, self.zero), n, self.zero)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TruncSeries)
            and self.order == other.order
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __hash__(self) -> int:
        return hash((self.order, self.coeffs))

    def __str__(self) -> str:
        parts = []
        for k in range(1, self.order + 1):
            c = self.coeffs[k]
            if _is_zero(c):
                continue
            xs = "x" if k == 1 else f"x^{k}"
            if c == 1:
                parts.append(xs)
            elif c == -1:
                parts.append(f"-{xs}")
            else:
                parts.append(f"({c})*{xs}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(x^{self.order + 1})"

    __repr__ = __str__


def _mul_lists(a: Sequence, b: Sequence, n: int, zero) -> list:
    out = [zero] * (n + 1)
    nz_b = [(j, c) for j, c in enumerate(b[: n + 1]) if not _is_zero(c)]
    for i in range(1, n + 1):
        ai = a[i] if i < len(a) else zero
        if _is_zero(ai):
            continue
        for j, bj in nz_b:
            if i + j > n:
                break
            out[i + j] = out[i + j] + ai * bj
    return out


def series_compose(outer: TruncSeries, inner: TruncSeries, order: int | None = None) -> TruncSeries:
    """Coefficients of ``outer(inner(x))`` through ``x^order``.

    Powers of ``inner`` are built incrementally and truncated after each
    product; powers beyond the last nonzero coefficient of ``outer`` are skipped.
    """
    if order is None:
        order = min(outer.order, inner.order)
    if order > outer.order or order > inner.order:
        raise ValueError(
            f"order {order} exceeds available truncation ({outer.order}, {inner.order})"
        )
    zero = outer.zero
    top = min(outer.degree(), order)
    result = [zero] * (order + 1)
    if top == 0:
        return TruncSeries(result, order, zero)
    val = inner.valuation()
    power = list(inner.coeffs[: order + 1])
    for k in range(1, top + 1):
        if k > 1:
            if k * val > order:
                break
            power = _mul_lists(power, inner.coeffs, order, zero)
        ok = outer.coeffs[k]
        if _is_zero(ok):
            continue
        for j in range(k * val, order + 1):
            pj = power[j]
            if not _is_zero(pj):
                result[j] = result[j] + ok * pj
    return TruncSeries(result, order, zero)


def series_reverse(g: TruncSeries, order: int | None = None) -> TruncSeries:
    """Compositional inverse of ``g = x + ...`` by order-by-order solving.

    With ``h = x + sum c_k x^k``, the coefficient of ``x^n`` in ``g(h(x))`` is
    ``c_n`` plus terms in ``c_2..c_{n-1}``; each ``c_n`` is fixed so it vanishes.
    """
    if order is None:
        order = g.order
    if order > g.order:
        raise ValueError("order exceeds truncation of g")
    if g.coeffs[1] != 1:
        raise ValueError("series reversion needs leading coefficient 1")
    zero = g.zero
    one = g.coeffs[1]
    h = [zero] * (order + 1)
    h[1] = one
    for n in range(2, order + 1):
        comp = series_compose(g.truncate(n), TruncSeries(h[: n + 1], n, zero), n)
        h[n] = -comp.coeffs[n]
    return TruncSeries(h, order, zero)


def poly_series(coeffs: Mapping[int, object], order: int, zero=None) -> TruncSeries:
    """Series of a polynomial given as ``{power: coefficient}``."""
    return TruncSeries(coeffs, order, zero)
