"""Numeric validation: 2-periodic orbits, the staircase bifurcation, half-return maps."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from gmpy2 import mpq

from .polyalg.poly import to_rat
from .polyalg.series import TruncSeries, series_compose
from .realroots import UniPoly, isolate_roots, sturm_count

log = logging.getLogger(__name__)

DEFAULT_GRID = 10_000
DEFAULT_TOL = 1e-10
DEFAULT_DPS = 60


def _mpf(c) -> mpmath.mpf:
    c = to_rat(c)
    return mpmath.mpf(int(c.numerator)) / int(c.denominator)


def _rat(x) -> mpq:
    """Exact rational value of a binary float or mpf."""
    if isinstance(x, mpmath.mpf):
        sign, man, exp, _ = x._mpf_
        if not man:
            return mpq(0)
        v = mpq(int(man) << int(exp)) if exp >= 0 else mpq(int(man), 1 << int(-exp))
        return -v if sign else v
    return mpq(x)


class ConcreteMap:
    """``f(x) = s*x + a_2 x^2 + ... + a_d x^d`` with exact rational coefficients.

    ``s = -1`` (the default) gives the orientation-reversing family.
    """

    def __init__(self, coeffs: Sequence, linear: int = -1):
        self.coeffs = [to_rat(c) for c in coeffs]
        while self.coeffs and not self.coeffs[-1]:
            self.coeffs.pop()
        self.linear = linear
        self.d = max(len(self.coeffs) + 1, 1)
        self._poly = UniPoly([0, linear] + self.coeffs)
        self._ff: UniPoly | None = None

    @classmethod
    def parse(cls, text: str, linear: int = -1) -> ConcreteMap:
        return cls([mpq(t) for t in text.replace(",", " ").split()], linear)

    @property
    def poly(self) -> UniPoly:
        return self._poly

    def composed(self) -> UniPoly:
        """Exact ``f(f(x))``."""
        if self._ff is None:
            n = max(self._poly.degree, 1) ** 2
            s = TruncSeries(dict(enumerate(self._poly.coeffs)), max(n, 1))
            ff = series_compose(s, s, max(n, 1))
            self._ff = UniPoly(ff.coeffs)
        return self._ff

    def displacement(self) -> tuple[UniPoly, int]:
        """``(f(f(x)) - x) / x^v`` and ``v``; the zero polynomial for an involution."""
        g = self.composed() - UniPoly([0, 1])
        if not g:
            return g, 0
        v = next(i for i, c in enumerate(g.coeffs) if c)
        return UniPoly(g.coeffs[v:]), v

    def fixed_point_poly(self) -> UniPoly:
        """``(f(x) - x) / x``."""
        g = self._poly - UniPoly([0, 1])
        return UniPoly(g.coeffs[1:])

    def __call__(self, x):
        return _horner(self._poly, x)

    def describe(self) -> str:
        parts = [f"{'-' if self.linear < 0 else ''}x"]
        for j, c in enumerate(self.coeffs, start=2):
            if c:
                parts.append(f"{'+' if c > 0 else '-'} {abs(c)}*x^{j}")
        return " ".join(parts)


def _horner(p: UniPoly, x, cache: dict | None = None):
    coeffs = [_mpf(c) for c in p.coeffs] if cache is None else cache
    acc = mpmath.mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass
class Orbit:
    x: str
    y: str
    residual: float  # |f(f(x)) - x| / |x|
    separation: float  # |f(x) - x| / |x|


@dataclass
class OrbitReport:
    orbits: list[Orbit] = field(default_factory=list)
    fixed_points: list[str] = field(default_factory=list)
    window: tuple[float, float] = (0.0, 0.0)
    grid: int = DEFAULT_GRID
    tol: float = DEFAULT_TOL
    dps: int = DEFAULT_DPS
    mode: str = "local"
    non_isolated: bool = False
    dropped: list[str] = field(default_factory=list)
    stable_under_refinement: bool | None = None
    sturm_points: int | None = None

    @property
    def count(self) -> int:
        return len(self.orbits)

    def to_json(self) -> dict:
        out = asdict(self)
        out["count"] = self.count
        out["window"] = list(self.window)
        return out


def _log_grid(lo: float, hi: float, n: int) -> list:
    return [mpmath.mpf(v) for v in np.geomspace(lo, hi, n)]


def _sign_changes(h_coeffs, grid) -> list[tuple]:
    vals = [_horner(None, x, h_coeffs) for x in grid]
    out = []
    for (x0, v0), (x1, v1) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if v0 == 0:
            out.append((x0, x0))
        elif v0 * v1 < 0:
            out.append((x0, x1))
    if vals and vals[-1] == 0:
        out.append((grid[-1], grid[-1]))
    return out


def _bisect(h_coeffs, lo, hi, rel: float):
    if lo == hi:
        return lo
    vlo = _horner(None, lo, h_coeffs)
    while abs(hi - lo) > rel * max(abs(lo), abs(hi)):
        mid = (lo + hi) / 2
        vm = _horner(None, mid, h_coeffs)
        if vm == 0:
            return mid
        if (vm > 0) == (vlo > 0):
            lo, vlo = mid, vm
        else:
            hi = mid
    return (lo + hi) / 2


def _scan(h: UniPoly, intervals: Sequence[tuple[float, float, int]], n: int, dps: int, rel: float) -> list:
    """Roots of ``h`` by sign scan on log grids; each interval is ``(lo, hi, sign)``."""
    roots = []
    with mpmath.workdps(dps):
        hc = [_mpf(c) for c in h.coeffs]
        for lo, hi, sgn in intervals:
            grid = _log_grid(lo, hi, n)
            if sgn < 0:
                grid = [-x for x in reversed(grid)]
            for a, b in _sign_changes(hc, grid):
                roots.append(_bisect(hc, a, b, rel))
    return roots


def _classify(fmap: ConcreteMap, roots: Sequence, tol: float, dps: int, report: OrbitReport) -> None:
    with mpmath.workdps(dps):
        fc = [_mpf(c) for c in fmap.poly.coeffs]
        seen: list = []
        for x in sorted(roots, key=lambda r: -r):
            y = _horner(None, x, fc)
            fy = _horner(None, y, fc)
            ax = abs(x)
            resid = float(abs(fy - x) / ax)
            sep = float(abs(y - x) / ax)
            if resid >= tol:
                report.dropped.append(mpmath.nstr(x, 17))
                continue
            if sep <= 10 * tol:
                report.fixed_points.append(mpmath.nstr(x, 17))
                continue
            if any(abs(x - s) <= 1e-9 * abs(x) for s in seen):
                continue
            rep, other = (x, y) if x >= y else (y, x)
            seen.extend([x, y])
            report.orbits.append(Orbit(mpmath.nstr(rep, 17), mpmath.nstr(other, 17), resid, sep))


def count_2periodic(
    fmap: ConcreteMap,
    window: tuple[float, float] | None = None,
    *,
    grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
    dps: int = DEFAULT_DPS,
    mode: str = "local",
    refine_check: bool = True,
) -> OrbitReport:
    """2-periodic orbits of ``fmap``.

    ``local``: roots of ``h = (f(f(x)) - x)/x^v`` on ``(lo, hi)`` with
    ``window = (lo, hi)``, ``lo > 0``; ``window = (0, delta0)`` scans down to
    ``delta0 * 1e-12``.  ``global``: the whole real line, bounded by the
    Cauchy bound of ``h``; the count is cross-checked by Sturm's theorem.
    """
    h, v = fmap.displacement()
    lo, hi = window or (0.0, 1.0)
    report = OrbitReport(window=(float(lo), float(hi)), grid=grid, tol=tol, dps=dps, mode=mode)
    if not h:
        report.non_isolated = True
        return report
    if h.degree == 0:
        return report
    if mode == "global":
        from .realroots import cauchy_bound

        B = float(cauchy_bound(h)) * 1.01
        low = B * 1e-14
        intervals = [(low, B, 1), (low, B, -1)]
        report.window = (-B, B)
    else:
        if lo < 0 or hi <= lo:
            raise ValueError("window must satisfy 0 <= lo < hi")
        low = lo if lo > 0 else hi * 1e-12
        intervals = [(low, hi, 1)]
    roots = _scan(h, intervals, grid, dps, 1e-14)
    _classify(fmap, roots, tol, dps, report)
    if mode == "global":
        # h omits the origin, which is always fixed
        report.sturm_points = _sturm_periodic_points(fmap)
        report.fixed_points = sorted(set(report.fixed_points) | {"0"}, key=float)
    if refine_check:
        again = count_2periodic(fmap, window, grid=4 * grid, tol=tol, dps=dps, mode=mode, refine_check=False)
        report.stable_under_refinement = again.count == report.count
    return report


def _sturm_periodic_points(fmap: ConcreteMap) -> int:
    """Distinct real points of exact period 2: roots of ``(f(f(x)) - x)`` not shared with ``f(x) - x``."""
    g = fmap.composed() - UniPoly([0, 1])
    fp = fmap.poly - UniPoly([0, 1])
    if not g or not fp:
        return 0
    q, r = g.divmod(fp)
    if r:
        raise AssertionError("f(x) - x must divide f(f(x)) - x")
    from .realroots import gcd as _gcd

    common = _gcd(q, fp)
    while common.degree > 0:
        q = q.divmod(common)[0]
        common = _gcd(q, fp)
    return sturm_count(q)


def revalidate(fmap: ConcreteMap, report: OrbitReport, factor: int = 2) -> list[tuple[float, float]]:
    """Re-bisect every orbit at ``factor`` times the precision.

    Returns ``(old_residual, new_residual)`` pairs.
    """
    h, _ = fmap.displacement()
    out = []
    dps = report.dps * factor
    with mpmath.workdps(dps):
        hc = [_mpf(c) for c in h.coeffs]
        fc = [_mpf(c) for c in fmap.poly.coeffs]
        for o in report.orbits:
            x = mpmath.mpf(o.x)
            w = x * mpmath.mpf(10) ** -12
            a, b = x - w, x + w
            if _horner(None, a, hc) * _horner(None, b, hc) > 0:
                out.append((o.residual, float("nan")))
                continue
            r = _bisect(hc, a, b, mpmath.mpf(10) ** (-(dps - 10)))
            y = _horner(None, r, fc)
            out.append((o.residual, float(abs(_horner(None, y, fc) - r) / abs(r))))
    return out


def orientation_preserving_null(coeffs: Sequence, window: float = 0.1, grid: int = 2000, tol: float = DEFAULT_TOL) -> dict:
    """``g(x) = x + sum c_j x^j``: no 2-periodic orbits where ``g`` is increasing."""
    gmap = ConcreteMap(coeffs, linear=1)
    deriv = gmap.poly.derivative()
    radius = float(window)
    for r in isolate_roots(deriv, width=mpq(1, 10**12)):
        m = abs(float(r.hi))
        if m > 0:
            radius = min(radius, abs(float(r.lo)), m)
    delta = radius * 0.99
    pos = count_2periodic(gmap, (0.0, delta), grid=grid, tol=tol, refine_check=False)
    neg_map = ConcreteMap([c * (-1) ** j for j, c in enumerate(gmap.coeffs, start=2)], linear=1)
    neg = count_2periodic(neg_map, (0.0, delta), grid=grid, tol=tol, refine_check=False)
    count = pos.count + neg.count
    return {
        "map": gmap.describe(),
        "monotone_radius": radius,
        "window": [-delta, delta],
        "orbits": count,
        "verdict": "no 2-periodic orbits" if count == 0 else f"{count} orbits found",
    }


# --- staircase --------------------------------------------------------------


@dataclass
class StaircaseStep:
    flips: int
    targets: list[str]
    params: list[str]
    orbits: int
    roots: list[str]


@dataclass
class StaircaseResult:
    d: int
    base: list[str]
    order: int
    steps: list[StaircaseStep]
    final: OrbitReport
    ok: bool

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "base": self.base,
            "order": self.order,
            "ok": self.ok,
            "steps": [asdict(s) for s in self.steps],
            "final": self.final.to_json(),
        }


def staircase(
    d: int,
    base: Sequence,
    *,
    x1: float = 0.05,
    ratio: float = 1e-2,
    dps: int = 120,
    grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
) -> StaircaseResult:
    """Realize ``m - 1`` small 2-periodic orbits near a certified weak point.

    Step ``i`` prescribes ``V_3, ..., V_{2m-1}`` so that the truncated
    displacement ``sum_k V_{2k+1} u^{k-1}`` (``u = x^2``) equals
    ``V_{2m+1}(a*) u^{m-1-i} prod_{j<=i} (u - x_j^2)``, i.e. the constants
    ``V_{2(m-i)+1}, ...`` have flipped sign in turn while lower ones stay 0.
    The targets are reached by Newton's method in ``a_2..a_m`` (the certificate
    guarantees an invertible Jacobian); roots are placed at
    ``x_{i+1} = ratio * x_i``.
    """
    from .certify import certify_lower
    from .stability import constants_table

    cert = certify_lower(base, d)
    if not cert.certified:
        raise ValueError("base point has no lower-bound certificate")
    m = cert.order + 1
    if any(p.q for p in cert.point):
        raise ValueError("staircase needs a rational base point")
    a_star = [p.p for p in cert.point]
    s = cert.values[2 * m + 1].p
    table = constants_table(d)
    Vs = [table.V(k) for k in range(3, 2 * m, 2)]
    names = [f"a{j}" for j in range(2, m + 1)]
    grads = [[v.diff(n) for n in names] for v in Vs]
    steps: list[StaircaseStep] = []
    xs = [x1 * ratio**i for i in range(m - 1)]
    final = OrbitReport()
    ok = True
    params = list(a_star)
    for i in range(1, m):
        with mpmath.workdps(dps):
            us = [mpmath.mpf(x) ** 2 for x in xs[:i]]
            # coefficients of s * u^{m-1-i} * prod (u - u_j), lowest first
            poly = [mpmath.mpf(1)]
            for u in us:
                poly = [(-u * poly[0])] + [poly[k - 1] - u * poly[k] for k in range(1, len(poly))] + [poly[-1]]
            poly = [mpmath.mpf(0)] * (m - 1 - i) + poly
            targets = [_mpf(s) * c for c in poly[: m - 1]]
            sol = _newton(Vs, grads, [_mpf(v) for v in a_star], targets, m - 1, dps)
        params = [_rat(v) for v in sol] + list(a_star[m - 1 :])
        fmap = ConcreteMap(params)
        lo = xs[i - 1] * ratio / 10
        rep = count_2periodic(
            fmap, (lo, x1 * 10), grid=grid, tol=tol, dps=max(dps, DEFAULT_DPS), refine_check=i == m - 1
        )
        steps.append(StaircaseStep(
            i, [mpmath.nstr(t, 8) for t in targets], [str(p) for p in params], rep.count, [o.x for o in rep.orbits]
        ))
        log.info("staircase step %d: %d orbits", i, rep.count)
        ok &= rep.count == i
        final = rep
    return StaircaseResult(d, [str(v) for v in a_star], m - 1, steps, final, ok and final.count == m - 1)


def _newton(Vs, grads, start, targets, n: int, dps: int, iters: int = 60):
    x = list(start)
    full = list(start)
    for _ in range(iters):
        pt = x + full[n:]
        F = mpmath.matrix([_num(Vs[k], pt) - targets[k] for k in range(n)])
        if mpmath.norm(F) == 0:
            break
        J = mpmath.matrix([[_num(grads[k][j], pt) for j in range(n)] for k in range(n)])
        dx = mpmath.lu_solve(J, F)
        x = [x[j] - dx[j] for j in range(n)]
        if mpmath.norm(dx) < mpmath.mpf(10) ** (-dps + 10):
            break
    return x


def _num(p, pt):
    total = mpmath.mpf(0)
    for e, c in p.terms.items():
        t = _mpf(c)
        for v, k in zip(pt, e):
            if k:
                t *= v**k
        total += t
    return total


# --- half-return map -----------------------------------------------------------


@dataclass(frozen=True)
class HalfReturnProbe:
    """Polar equation ``dr/dtheta = delta r^(2l+1) + gamma r^(4l+1)``."""

    ell: int
    sigma: float
    c: float
    rtol: float = 1e-12

    @property
    def delta(self) -> float:
        return -self.sigma / math.pi

    @property
    def gamma(self) -> float:
        return -(self.c + (2 * self.ell + 1) * self.sigma**2 / 2) / math.pi

    def rhs(self, r: float) -> float:
        p = r ** (2 * self.ell)
        return r * p * (self.delta + self.gamma * p)


def _flow(probe: HalfReturnProbe, x0: float, theta: float) -> float:
    """``r(theta; x0)`` integrating the deviation ``u = r - x0`` with DOP853."""
    from scipy.integrate import solve_ivp

    if probe.delta == 0 and probe.gamma == 0:
        return x0
    scale = abs(probe.rhs(x0)) * theta or 1e-300
    sol = solve_ivp(
        lambda t, u: [probe.rhs(x0 + u[0])],
        (0.0, theta),
        [0.0],
        method="DOP853",
        rtol=probe.rtol,
        atol=scale * probe.rtol * 1e-3,
    )
    if not sol.success:
        raise RuntimeError(f"integrator failed: {sol.message}")
    r = x0 + sol.y[0, -1]
    if not math.isfinite(r):
        raise RuntimeError("blow-up before the end of the turn")
    return r


def half_return(probe: HalfReturnProbe, x0: float) -> float:
    """``Pi_+(x0) = -r(pi; x0)``."""
    return -_flow(probe, x0, math.pi)


def full_return(probe: HalfReturnProbe, x0: float) -> float:
    return _flow(probe, x0, 2 * math.pi)


def half_return_quadrature(probe: HalfReturnProbe, x0: float) -> float:
    """Cross-check: solve ``int_{x0}^{r} ds / rhs(s) = pi`` for ``r``."""
    from scipy.integrate import quad
    from scipy.optimize import brentq

    if probe.delta == 0 and probe.gamma == 0:
        return -x0
    guess = _flow(probe, x0, math.pi)
    span = abs(guess - x0) or abs(x0) * 1e-12

    def travel(r: float) -> float:
        if r == x0:
            return -math.pi
        # substitute s = x0 + (r - x0) * w so the integrand is well scaled
        val, _ = quad(lambda w: (r - x0) / probe.rhs(x0 + (r - x0) * w), 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)
        return val - math.pi

    a, b = x0 + (guess - x0) * 0.5, x0 + (guess - x0) * 1.5
    if (travel(a) > 0) == (travel(b) > 0):
        a, b = x0 + (guess - x0) * 1e-3, x0 + (guess - x0) * 3
    r = brentq(travel, a, b, xtol=span * 1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return -r


@dataclass
class HalfReturnFit:
    ell: int
    sigma: float
    c: float
    xs: list[float]
    values: list[float]
    quadrature: list[float]
    coefficients: list[float]  # of x, x^(2l+1), x^(4l+1), ...
    max_quadrature_gap: float
    full_turn_gap: float

    @property
    def fitted(self) -> tuple[float, float, float]:
        return self.coefficients[0], self.coefficients[1], self.coefficients[2]

    def errors(self) -> dict[str, float]:
        lin, s, c = self.fitted
        return {
            "linear": abs(lin + 1),
            "sigma": abs(s - self.sigma) / abs(self.sigma) if self.sigma else abs(s),
            "c": abs(c - self.c) / abs(self.c) if self.c else abs(c),
        }

    def to_json(self) -> dict:
        out = asdict(self)
        out["errors"] = self.errors()
        return out


def fit_half_return(
    ell: int, sigma: float, c: float, *, n: int = 24, t_range: tuple[float, float] = (1e-4, 5e-3), degree: int = 5
) -> HalfReturnFit:
    """Fit ``Pi_+(x)/x`` as a polynomial in ``t = x^(2l)`` over a geometric ``t`` grid.

    The coefficients returned are those of ``x, x^(2l+1), x^(4l+1), ...``.
    """
    probe = HalfReturnProbe(ell, sigma, c)
    ts = np.geomspace(t_range[0], t_range[1], n)
    xs = ts ** (1.0 / (2 * ell))
    vals = [half_return(probe, float(x)) for x in xs]
    quadv = [half_return_quadrature(probe, float(x)) for x in xs]
    gap = max(abs(a - b) / abs(a) for a, b in zip(vals, quadv))
    # separate the -1 so the fit sees the small deviation
    dev = np.array([(v / x + 1.0) / t for v, x, t in zip(vals, xs, ts)])
    V = np.vander(ts, degree, increasing=True)
    coef, *_ = np.linalg.lstsq(V, dev, rcond=None)
    # the constant of Pi_+/x is recovered from the smallest-t sample
    lin = float(vals[0] / xs[0] - ts[0] * np.polyval(coef[::-1], ts[0]))
    coefficients = [lin] + [float(v) for v in coef]
    x_mid = float(xs[len(xs) // 2])
    full = full_return(probe, x_mid)
    twice = half_return(probe, half_return(probe, x_mid))
    return HalfReturnFit(
        ell, sigma, c, [float(x) for x in xs], vals, quadv, coefficients, gap, abs(full - twice) / abs(full)
    )
