"""Groebner bases under grevlex, normal forms and ideal membership tests.

The Buchberger engine uses the Gebauer-Moeller pair criteria and selects the
pair with the smallest lcm.  When every generator is homogeneous for the ring
weights, pairs are processed by increasing weighted degree; the basis can then
be built lazily up to the degree actually needed, which is what makes the
stability-constant ideals (quasi-homogeneous in many variables) tractable.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Iterable, Sequence

from gmpy2 import mpq

from .polyalg.poly import (
    MultiPoly,
    Ring,
    RingMismatch,
    divides,
    grevlex_key,
    heap_key,
    mono_div,
    mono_lcm,
    mono_mul,
    parse_poly,
    ring_from_header,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 600.0


def default_budget() -> float:
    """Wall-clock seconds per Groebner run; ``TWOCYC_BUDGET`` overrides."""
    env = os.environ.get("TWOCYC_BUDGET")
    return float(env) if env else DEFAULT_BUDGET


class BudgetExceeded(RuntimeError):
    """A Groebner computation ran past its wall-clock budget.

    ``progress`` describes how far it got; callers turn this into an
    inconclusive verdict rather than an answer.
    """

    def __init__(self, message: str, progress: dict | None = None):
        super().__init__(message)
        self.progress = progress or {}


def _reduce(terms: dict, basis: Sequence[tuple[tuple, dict]]) -> dict:
    """Full reduction of ``terms`` by monic ``basis`` entries ``(lm, terms)``."""
    p = dict(terms)
    heap = [(heap_key(m), m) for m in p]
    heap.sort()
    r: dict = {}
    while heap:
        _, m = heappop(heap)
        c = p.get(m)
        if c is None:
            continue
        for lm, g in basis:
            if all(a <= b for a, b in zip(lm, m)):
                q = tuple(b - a for a, b in zip(lm, m))
                for e, gc in g.items():
                    e2 = tuple(x + y for x, y in zip(e, q))
                    v = p.get(e2)
                    if v is None:
                        p[e2] = -c * gc
                        heappush(heap, (heap_key(e2), e2))
                    else:
                        v = v - c * gc
                        if v:
                            p[e2] = v
                        else:
                            del p[e2]
                break
        else:
            r[m] = c
            del p[m]
    return r


def _monic(terms: dict) -> tuple[tuple, dict]:
    lm = max(terms, key=grevlex_key)
    lc = terms[lm]
    if lc != 1:
        inv = 1 / lc
        terms = {e: c * inv for e, c in terms.items()}
    return lm, terms


class _Engine:
    """Incremental Buchberger state; ``advance(D)`` completes all work up to degree D."""

    def __init__(self, ring: Ring, gens: Sequence[MultiPoly], budget: float):
        self.ring = ring
        self.budget = budget
        self.homogeneous = ring.weights is not None and all(
            g.is_weighted_homogeneous() for g in gens
        )
        self.polys: list[dict] = []
        self.lms: list[tuple] = []
        self.active: list[int] = []
        self.pairs: dict[tuple[int, int], tuple] = {}
        self.pending: list[tuple] = []
        for n, g in enumerate(gens):
            if g:
                deg = g.weighted_degree() if self.homogeneous else -1
                heappush(self.pending, (deg, n, g.terms))
        self.done = -1
        self.complete = not self.pending
        self.elapsed = 0.0
        self.reductions = 0

    def _deg(self, mono: tuple) -> int:
        return self.ring.weighted_degree(mono) if self.homogeneous else sum(mono)

    def _basis(self) -> list[tuple[tuple, dict]]:
        return [(self.lms[i], self.polys[i]) for i in self.active]

    def _add(self, terms: dict) -> None:
        lm, terms = _monic(terms)
        h = len(self.polys)
        self.polys.append(terms)
        self.lms.append(lm)
        self._update(h)

    def _update(self, h: int) -> None:
        lms = self.lms
        lh = lms[h]
        cands = [(g, mono_lcm(lms[g], lh)) for g in self.active]
        kept: list[tuple[int, tuple]] = []
        for idx, (g1, l1) in enumerate(cands):
            disjoint = all(not (a and b) for a, b in zip(lms[g1], lh))
            if disjoint:
                kept.append((g1, l1))
                continue
            rest = cands[idx + 1 :]
            if any(divides(l2, l1) for _, l2 in rest) or any(divides(l2, l1) for _, l2 in kept):
                continue
            kept.append((g1, l1))
        new_pairs = [
            (g, l) for g, l in kept if not all(not (a and b) for a, b in zip(lms[g], lh))
        ]
        for (g1, g2), key in list(self.pairs.items()):
            l12 = key[2]
            if (
                divides(lh, l12)
                and mono_lcm(lms[g1], lh) != l12
                and mono_lcm(lh, lms[g2]) != l12
            ):
                del self.pairs[(g1, g2)]
        for g, l in new_pairs:
            self.pairs[(g, h)] = (self._deg(l), grevlex_key(l), l)
        self.active = [g for g in self.active if not divides(lh, lms[g])] + [h]

    def _next(self, max_degree: int | None):
        best_pair = min(self.pairs.items(), key=lambda kv: (kv[1][0], kv[1][1], kv[0]), default=None)
        gen = self.pending[0] if self.pending else None
        if gen is not None and (best_pair is None or gen[0] <= best_pair[1][0]):
            if max_degree is not None and gen[0] > max_degree:
                return None
            heappop(self.pending)
            return ("gen", gen[2])
        if best_pair is None:
            return None
        (i, j), key = best_pair
        if max_degree is not None and key[0] > max_degree:
            return None
        del self.pairs[(i, j)]
        return ("pair", i, j, key[2])

    def advance(self, max_degree: int | None = None) -> None:
        if max_degree is not None and not self.homogeneous:
            raise ValueError("degree truncation needs weighted-homogeneous generators")
        if self.complete or (max_degree is not None and max_degree <= self.done):
            return
        start = time.monotonic()
        while True:
            item = self._next(max_degree)
            if item is None:
                break
            if time.monotonic() - start + self.elapsed > self.budget:
                self.elapsed += time.monotonic() - start
                raise BudgetExceeded(
                    f"Groebner budget of {self.budget:g}s exceeded",
                    {
                        "basis_size": len(self.active),
                        "pending_pairs": len(self.pairs),
                        "completed_degree": self.done,
                    },
                )
            if item[0] == "gen":
                s = item[1]
            else:
                _, i, j, l = item
                fi, fj = self.polys[i], self.polys[j]
                qi, qj = mono_div(l, self.lms[i]), mono_div(l, self.lms[j])
                s = {}
                for e, c in fi.items():
                    s[mono_mul(e, qi)] = c
                for e, c in fj.items():
                    e2 = mono_mul(e, qj)
                    v = s.get(e2, 0) - c
                    if v:
                        s[e2] = v
                    else:
                        s.pop(e2, None)
            self.reductions += 1
            r = _reduce(s, self._basis()) if s else {}
            if r:
                self._add(r)
        self.elapsed += time.monotonic() - start
        if not self.pairs and not self.pending:
            self.complete = True
        if max_degree is not None:
            self.done = max(self.done, max_degree)


@dataclass(eq=False)
class GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``sources`` under grevlex.

    For weighted-homogeneous sources the basis may be *truncated*: it is then
    exact for every polynomial of weighted degree at most ``degree`` and is
    extended on demand by :meth:`ensure_degree`.
    """

    ring: Ring
    sources: tuple[MultiPoly, ...]
    order: str = "grevlex"
    budget: float = field(default_factory=default_budget)
    _engine: _Engine = field(init=False, repr=False)
    _cache: tuple | None = field(init=False, default=None, repr=False)

    def __post_init__(self):
        if self.order != "grevlex":
            raise ValueError(f"unsupported monomial order {self.order!r}")
        self._engine = _Engine(self.ring, self.sources, self.budget)

    @property
    def homogeneous(self) -> bool:
        return self._engine.homogeneous

    @property
    def complete(self) -> bool:
        return self._engine.complete

    @property
    def degree(self) -> int | None:
        """Weighted degree up to which the basis is valid; ``None`` when complete."""
        return None if self._engine.complete else self._engine.done

    def ensure_degree(self, degree: int | None) -> None:
        if degree is None or not self.homogeneous:
            self._engine.advance(None)
        else:
            self._engine.advance(degree)

    def set_budget(self, budget: float | None) -> None:
        """Give the next extension of this basis a fresh wall-clock allowance."""
        self.budget = budget if budget is not None else default_budget()
        self._engine.budget = self.budget
        self._engine.elapsed = 0.0

    def compute(self) -> GroebnerBasis:
        """Run Buchberger to completion."""
        self._engine.advance(None)
        return self

    @property
    def generators(self) -> tuple[MultiPoly, ...]:
        """The reduced (inter-reduced, monic) basis computed so far, decreasing LM."""
        eng = self._engine
        key = (len(eng.polys), tuple(eng.active))
        if self._cache is not None and self._cache[0] == key:
            return self._cache[1]
        basis = eng._basis()
        out = []
        for k, (lm, g) in enumerate(basis):
            others = basis[:k] + basis[k + 1 :]
            tail = {e: c for e, c in g.items() if e != lm}
            red = _reduce(tail, others)
            red[lm] = mpq(1)
            out.append(MultiPoly._raw(self.ring, red))
        out.sort(key=lambda p: grevlex_key(p.leading_monomial()), reverse=True)
        result = tuple(out)
        self._cache = (key, result)
        return result

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def _prepare(self, p: MultiPoly) -> None:
        if p.ring != self.ring:
            raise RingMismatch(f"{p.ring} vs {self.ring}")
        if self.homogeneous and p:
            self.ensure_degree(p.weighted_degree())
        else:
            self.ensure_degree(None)

    def normal_form(self, p: MultiPoly) -> MultiPoly:
        self._prepare(p)
        if not p:
            return p
        return MultiPoly._raw(self.ring, _reduce(p.terms, self._engine._basis()))

    def contains(self, p: MultiPoly) -> bool:
        return not self.normal_form(p)

    def s_pairs_reduce(self) -> bool:
        """Re-check Buchberger's criterion on every pair of the current basis."""
        gens = self.generators
        basis = [(g.leading_monomial(), g.terms) for g in gens]
        limit = self.degree
        for i in range(len(basis)):
            for j in range(i + 1, len(basis)):
                (li, fi), (lj, fj) = basis[i], basis[j]
                l = mono_lcm(li, lj)
                if limit is not None and self.ring.weighted_degree(l) > limit:
                    continue
                s = {}
                for e, c in fi.items():
                    s[mono_mul(e, mono_div(l, li))] = c
                for e, c in fj.items():
                    e2 = mono_mul(e, mono_div(l, lj))
                    v = s.get(e2, 0) - c
                    if v:
                        s[e2] = v
                    else:
                        s.pop(e2, None)
                if s and _reduce(s, basis):
                    return False
        return True

    def to_text(self) -> str:
        lines = [f"# {self.ring.header()}", f"# order {self.order}"]
        if self.degree is not None:
            lines.append(f"# truncated-at {self.degree}")
        lines += [str(g) for g in self.generators]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, budget: float | None = None) -> GroebnerBasis:
        ring = None
        order = "grevlex"
        polys = []
        lines = text.splitlines()
        for line in lines:
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                body = s[1:].strip()
                if body.startswith("ring "):
                    ring = ring_from_header(body)
                elif body.startswith("order "):
                    order = body.split()[1]
                continue
            if ring is None:
                raise ValueError("basis text needs a '# ring ...' header before generators")
            polys.append(parse_poly(s, ring))
        if ring is None:
            raise ValueError("basis text needs a '# ring ...' header")
        return groebner(polys, order=order, ring=ring, budget=budget)


def groebner(
    gens: Iterable[MultiPoly],
    order: str = "grevlex",
    *,
    ring: Ring | None = None,
    budget: float | None = None,
    complete: bool = False,
) -> GroebnerBasis:
    """Groebner basis of ``gens``.

    For weighted-homogeneous input the computation is lazy (extended to the
    degree each query needs); ``complete=True`` forces the full basis.
    """
    gens = tuple(gens)
    if ring is None:
        if not gens:
            raise ValueError("empty generator list needs an explicit ring")
        ring = gens[0].ring
    for g in gens:
        if g.ring != ring:
            raise RingMismatch(f"generator ring {g.ring} differs from {ring}")
    gb = GroebnerBasis(ring, gens, order, budget if budget is not None else default_budget())
    if complete or not gb.homogeneous:
        gb.compute()
    return gb


def normal_form(p: MultiPoly, gb: GroebnerBasis) -> MultiPoly:
    return gb.normal_form(p)


def ideal_member(p: MultiPoly, gb: GroebnerBasis) -> bool:
    return gb.contains(p)


def ideal_equal(a: GroebnerBasis, b: GroebnerBasis) -> bool:
    """Equality of ideals by mutual membership of the source generators."""
    if a.ring != b.ring or a.order != b.order:
        raise RingMismatch("ideals live in different rings or orders")
    return all(b.contains(g) for g in a.sources) and all(a.contains(g) for g in b.sources)


def power_member(p: MultiPoly, gb: GroebnerBasis, n_max: int = 4) -> int | None:
    """Smallest ``n <= n_max`` with ``p**n`` in the ideal, or ``None``."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    q = p
    for n in range(1, n_max + 1):
        if gb.contains(q):
            return n
        if n < n_max:
            q = q * p
    return None


# ---------------------------------------------------------------------------
# hypotheses of the upper-bound and radical-power arguments


@dataclass
class UpperResult:
    d: int
    m: int | None
    failed_at: int | None
    checks: list[dict]

    @property
    def cyclicity_bound(self) -> int | None:
        return None if self.m is None else self.m - 1


def check_upper_hypotheses(d: int, *, k_limit: int | None = None, budget: float | None = None) -> UpperResult:
    """Verify the division-derivation hypotheses for the degree-``d`` family.

    For k = 1, 2, ... checks ``<W3..W_{2k+1}> = <W3..W_{2k+2}> = <V3..V_{2k+1}>``
    until ``<V3..V_{2k+1}>`` contains every ``W_j`` (j <= d^2); that k is ``m``.
    """
    from .stability import constants_table

    if d < 2:
        raise ValueError("degree must be at least 2")
    table = constants_table(d)
    top = d * d
    W = table.W
    k_limit = k_limit or (top - 1) // 2
    checks = []
    for k in range(1, k_limit + 1):
        vs = [table.V(2 * i + 1, budget=budget) for i in range(1, k + 1)]
        gb_v = groebner(vs, ring=table.ring, budget=budget)
        # W_j for j <= 2k+2 lie in <V3..V_{2k+1}> and conversely
        ws_odd = [W[j] for j in range(3, 2 * k + 2)]
        gb_w = groebner(ws_odd, ring=table.ring, budget=budget)
        w_in_v = all(gb_v.contains(W[j]) for j in range(3, min(2 * k + 2, top) + 1))
        v_in_w = all(gb_w.contains(v) for v in vs)
        terminal = w_in_v and all(gb_v.contains(W[j]) for j in range(2 * k + 3, top + 1))
        checks.append({"k": k, "chain": w_in_v and v_in_w, "terminal": terminal})
        log.info("upper d=%d k=%d chain=%s terminal=%s", d, k, w_in_v and v_in_w, terminal)
        if terminal and v_in_w:
            return UpperResult(d, k, None, checks)
        if not (w_in_v and v_in_w):
            return UpperResult(d, None, k, checks)
    return UpperResult(d, None, k_limit, checks)


@dataclass
class LradResult:
    d: int
    ell: int | None
    n_max: int
    exponents: dict[int, int | None]

    @property
    def max_weak_order(self) -> int | None:
        return None if self.ell is None else self.ell - 1


def check_lrad(d: int, n_max: int = 4, *, k_limit: int | None = None, budget: float | None = None) -> LradResult:
    """Smallest k such that every W_j (3 <= j <= d^2) has a power in <V3..V_{2k+1}>.

    Returns the exponent profile ``{j: n_j}`` for that k.
    """
    from .stability import constants_table

    table = constants_table(d)
    top = d * d
    k_limit = k_limit or (top - 1) // 2
    last: dict[int, int | None] = {}
    for k in range(1, k_limit + 1):
        vs = [table.V(2 * i + 1, budget=budget) for i in range(1, k + 1)]
        gb = groebner(vs, ring=table.ring, budget=budget)
        profile: dict[int, int | None] = {}
        ok = True
        for j in range(3, top + 1):
            n = power_member(table.W[j], gb, n_max)
            profile[j] = n
            if n is None:
                ok = False
                break
        last = profile
        log.info("lrad d=%d k=%d ok=%s", d, k, ok)
        if ok:
            return LradResult(d, k, n_max, profile)
    return LradResult(d, None, n_max, last)
