"""Stability constants W_j of f_a o f_a and their reduced forms V_k.

For ``f_a(x) = -x + sum_{j=2}^d a_j x^j`` the self-composition is
``x + sum_{j>=3} W_j(a) x^j``.  The reduced constant ``V_k`` is the grevlex
normal form of ``W_k`` modulo ``<W_3, ..., W_{k-1}>`` (all previous indices,
both parities).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from gmpy2 import mpq

from .ideals import GroebnerBasis, groebner
from .polyalg.poly import MultiPoly, Ring
from .polyalg.quadext import QuadExt
from .polyalg.series import TruncSeries, series_compose

log = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def family_ring(d: int, prefix: str = "a") -> Ring:
    """Ring ``a2 > a3 > ... > ad`` with quasi-homogeneous weights ``1, ..., d-1``."""
    if d < 2:
        raise ValueError("degree must be at least 2")
    return Ring.family(prefix, 2, d)


@dataclass(frozen=True)
class MapFamily:
    d: int
    ring: Ring
    series: TruncSeries

    @classmethod
    def generic(cls, d: int, order: int | None = None) -> MapFamily:
        ring = family_ring(d)
        order = order or d * d
        coeffs = {1: MultiPoly.const(ring, -1)}
        for j in range(2, d + 1):
            if j <= order:
                coeffs[j] = MultiPoly.var(ring, f"a{j}")
        return cls(d, ring, TruncSeries(coeffs, order, MultiPoly.zero(ring)))


def stability_constants(d: int, order: int | None = None) -> dict[int, MultiPoly]:
    """``{j: W_j}`` for ``3 <= j <= order`` (default ``d**2``, the full expansion)."""
    fam = MapFamily.generic(d, order)
    ff = series_compose(fam.series, fam.series, fam.series.order)
    if ff[1] != 1 or ff[2]:
        raise AssertionError("f o f must start with x + 0*x^2")
    return {j: ff[j] for j in range(3, fam.series.order + 1)}


def quasi_weight_check(p: MultiPoly, j: int) -> bool:
    """True iff every monomial of ``p`` has weight ``j - 1`` with ``w(a_i) = i - 1``."""
    weights = [int(n[1:]) - 1 for n in p.ring.names]
    return all(sum(w * e for w, e in zip(weights, exp)) == j - 1 for exp in p.terms)


class ConstantsTable:
    """W_j of the degree-``d`` family and lazily computed reduced constants.

    ``V(k)`` uses a Groebner basis of ``<W_3, ..., W_{k-1}>`` built only up to
    the weighted degree ``k - 1`` of ``W_k``.
    """

    def __init__(self, d: int, order: int | None = None):
        self.d = d
        self.ring = family_ring(d)
        self.order = order or d * d
        self.W: dict[int, MultiPoly] = stability_constants(d, self.order)
        self._V: dict[int, MultiPoly] = {}
        self._bases: dict[int, GroebnerBasis] = {}

    def ensure_order(self, order: int) -> None:
        if order > self.order:
            self.W = stability_constants(self.d, order)
            self.order = order

    def basis(self, k: int, budget: float | None = None) -> GroebnerBasis:
        """Groebner basis of ``<W_3, ..., W_{k-1}>``."""
        if k not in self._bases:
            self.ensure_order(k - 1)
            gens = [self.W[j] for j in range(3, k)]
            self._bases[k] = groebner(gens, ring=self.ring, budget=budget)
        else:
            # cached bases are shared; each caller brings its own budget
            self._bases[k].set_budget(budget)
        return self._bases[k]

    def reduce(self, k: int, budget: float | None = None) -> MultiPoly:
        """Normal form of ``W_k`` modulo ``<W_3..W_{k-1}>`` (any parity)."""
        self.ensure_order(k)
        if k == 3:
            return self.W[3]
        return self.basis(k, budget).normal_form(self.W[k])

    def V(self, k: int, budget: float | None = None) -> MultiPoly:
        if k < 3 or k % 2 == 0:
            raise ValueError("reduced constants are indexed by odd k >= 3")
        if k not in self._V:
            self._V[k] = self.reduce(k, budget)
            log.debug("d=%d V_%d has %d terms", self.d, k, len(self._V[k]))
        return self._V[k]

    def reduced_constants(self, k_max: int, budget: float | None = None) -> dict[int, MultiPoly]:
        return {k: self.V(k, budget) for k in range(3, k_max + 1, 2)}


_TABLES: dict[int, ConstantsTable] = {}


def constants_table(d: int, order: int | None = None) -> ConstantsTable:
    """Shared table for degree ``d``; grows its expansion order on request."""
    order = order or d * d
    t = _TABLES.get(d)
    if t is None:
        t = _TABLES[d] = ConstantsTable(d, order)
    else:
        t.ensure_order(order)
    return t


def generic_table(k_max: int) -> ConstantsTable:
    """Table in the ring ``a2..a_{k_max}`` expanded to ``x^{k_max}``.

    There every ``V_k`` with ``k <= k_max`` keeps all of its printed terms.
    """
    return constants_table(k_max, order=k_max)


def reduced_constants(d: int, k_max: int, budget: float | None = None) -> dict[int, MultiPoly]:
    order = max(k_max, 3)
    return constants_table(d, order).reduced_constants(k_max, budget)


def specialize(p: MultiPoly, d: int) -> MultiPoly:
    """Set ``a_j = 0`` for ``j > d`` and move ``p`` into the degree-``d`` ring."""
    return p.restrict(family_ring(d))


def as_point(point: Sequence, d: int) -> list[QuadExt]:
    if len(point) != d - 1:
        raise ValueError(f"a point of the degree-{d} family has {d - 1} coordinates, got {len(point)}")
    pts = [QuadExt.lift(v) for v in point]
    radicals = {p.D for p in pts if p.q}
    if len(radicals) > 1:
        raise ValueError(f"point mixes quadratic fields {sorted(radicals)}")
    return pts


def evaluate(p: MultiPoly, point: Sequence[QuadExt]) -> QuadExt:
    return QuadExt.lift(p.evaluate(point))


@dataclass
class WeakPoint:
    """First non-vanishing reduced constant at a parameter point."""

    d: int
    point: list[QuadExt]
    values: dict[int, QuadExt] = field(default_factory=dict)
    index: int | None = None  # 2m+1

    @property
    def order(self) -> int | None:
        """Weak-point order ``m - 1``; ``None`` when every computed constant vanishes."""
        return None if self.index is None else (self.index - 1) // 2 - 1

    @property
    def witness(self) -> QuadExt | None:
        return None if self.index is None else self.values[self.index]


def weak_point_order(point: Sequence, d: int, k_max: int | None = None, budget: float | None = None) -> WeakPoint:
    """Evaluate V_3, V_5, ... exactly until one is nonzero."""
    pts = as_point(point, d)
    k_max = k_max or min(2 * d + 1, d * d)
    table = constants_table(d, order=max(k_max, 3))
    wp = WeakPoint(d, pts)
    for k in range(3, k_max + 1, 2):
        v = evaluate(table.V(k, budget), pts)
        wp.values[k] = v
        if v:
            wp.index = k
            break
    return wp


def divide(p: MultiPoly, divisors: Sequence[MultiPoly]) -> tuple[list[MultiPoly], MultiPoly]:
    """Multivariate division by an ordered list (first divisor tried first)."""
    ring = p.ring
    quots = [MultiPoly.zero(ring) for _ in divisors]
    lts = [(g.leading_monomial(), g.leading_coefficient()) for g in divisors]
    rem = MultiPoly.zero(ring)
    rest = p
    while rest:
        m = rest.leading_monomial()
        c = rest.terms[m]
        for i, (lm, lc) in enumerate(lts):
            if all(a <= b for a, b in zip(lm, m)):
                q = tuple(b - a for a, b in zip(lm, m))
                quots[i] = quots[i] + MultiPoly.monomial(ring, q, c / lc)
                rest = rest - divisors[i].mul_term(q, c / lc)
                break
        else:
            rem = rem + MultiPoly.monomial(ring, m, c)
            rest = rest - MultiPoly.monomial(ring, m, c)
    return quots, rem


def relations(table: ConstantsTable, j: int, k_max: int | None = None) -> tuple[dict[int, MultiPoly], MultiPoly]:
    """Write ``W_j`` as ``sum_k c_k V_k + r`` by division by ``V_{k_max}, ..., V_5, V_3``."""
    k_top = k_max or (j if j % 2 else j - 1)
    ks = [k for k in range(k_top, 2, -1) if k % 2 and table.V(k)]
    quots, rem = divide(table.W[j], [table.V(k) for k in ks])
    return {k: q for k, q in zip(ks, quots) if q}, rem


def render_table(d: int, W: dict[int, MultiPoly], V: dict[int, MultiPoly]) -> str:
    lines = [f"Reduced stability constants, degree {d} (grevlex, a2 > a3 > ...):", ""]
    for k in sorted(V):
        lines.append(f"  V_{k} = {V[k]}")
    if W:
        lines += ["", "Stability constants f(f(x)) = x + sum W_j x^j:", ""]
        for j in sorted(W):
            lines.append(f"  W_{j} = {W[j]}")
    return "\n".join(lines) + "\n"


def constants_report(d: int, W: dict[int, MultiPoly], V: dict[int, MultiPoly]) -> dict:
    return {
        "d": d,
        "ring": list(family_ring(d).names),
        "W": {str(j): str(p) for j, p in sorted(W.items())},
        "V": {str(k): str(p) for k, p in sorted(V.items())},
    }


def rational_point(values: Sequence) -> list[QuadExt]:
    return [QuadExt(mpq(v), 0, 1) if not isinstance(v, QuadExt) else v for v in values]
