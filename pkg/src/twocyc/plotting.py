"""Figures for orbit scans and half-return fits (written to files, never shown)."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import mpmath  # noqa: E402
import numpy as np  # noqa: E402

from .dynamics import ConcreteMap, HalfReturnFit, OrbitReport, _mpf  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.fontsize": 8,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def displacement_samples(fmap: ConcreteMap, lo: float, hi: float, n: int = 800, dps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """``(x, h(x))`` on a log grid, ``h = (f(f(x)) - x) / x^v``; ``h`` is returned as float."""
    h, _ = fmap.displacement()
    xs = np.geomspace(lo, hi, n)
    with mpmath.workdps(dps):
        hc = [_mpf(c) for c in h.coeffs]
        ys = []
        for x in xs:
            acc = mpmath.mpf(0)
            for c in reversed(hc):
                acc = acc * mpmath.mpf(x) + c
            ys.append(float(acc))
    return xs, np.array(ys)


def write_samples_csv(path: str | Path, xs: Sequence[float], ys: Sequence[float], header: Sequence[str] = ("x", "h")) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])
    return path


def plot_orbits(fmap: ConcreteMap, report: OrbitReport, path: str | Path, n: int = 800) -> Path:
    """``h(x)`` on the scan window (log ``x``, symlog ``y``) with the orbit points marked."""
    lo, hi = report.window
    if report.mode == "global":
        lo, hi = hi * 1e-6, hi
    lo = lo if lo > 0 else hi * 1e-12
    xs, ys = displacement_samples(fmap, lo, hi, n)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        nz = np.abs(ys[ys != 0])
        thresh = float(nz.min()) if nz.size else 1.0
        ax.plot(xs, ys, lw=1.2, color="C0", label=r"$h(x)$")
        ax.axhline(0.0, color="k", lw=0.6)
        roots = [float(o.x) for o in report.orbits if lo <= float(o.x) <= hi]
        if roots:
            ax.plot(roots, np.zeros(len(roots)), "o", color="C3", ms=5, label="2-periodic orbit")
        ax.set_xscale("log")
        ax.set_yscale("symlog", linthresh=max(thresh, 1e-300))
        ax.set_xlabel(r"$x$")
        ax.set_ylabel(r"$(f(f(x))-x)/x^v$")
        ax.set_title(fmap.describe(), fontsize=9)
        ax.legend(loc="best")
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_half_return(fit: HalfReturnFit, path: str | Path) -> Path:
    """Scaled deviation ``(Pi_+(x)/x + 1)/t`` against ``t = x^(2l)`` with the fitted polynomial."""
    xs = np.array(fit.xs)
    ts = xs ** (2 * fit.ell)
    dev = (np.array(fit.values) / xs + 1.0) / ts
    poly = np.array(fit.coefficients[1:])
    tt = np.geomspace(ts.min(), ts.max(), 200)
    model = np.polyval(poly[::-1], tt)
    with plt.rc_context(STYLE):
        fig, (ax, axr) = plt.subplots(2, 1, sharex=True, gridspec_kw={"height_ratios": [3, 1]})
        ax.plot(ts, dev, "o", ms=4, label="integrated")
        ax.plot(tt, model, "-", lw=1.0, label="fit")
        ax.set_ylabel(r"$(\Pi_+(x)/x+1)/x^{2\ell}$")
        ax.set_title(rf"$\ell={fit.ell},\ \sigma={fit.sigma:g},\ c={fit.c:g}$")
        ax.legend(loc="best")
        resid = dev - np.polyval(poly[::-1], ts)
        axr.plot(ts, resid, ".", ms=4, color="C2")
        axr.axhline(0.0, color="k", lw=0.6)
        axr.set_xscale("log")
        axr.set_xlabel(r"$t=x^{2\ell}$")
        axr.set_ylabel("residual")
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path
