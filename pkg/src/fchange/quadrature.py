"""Composite trapezoid rule that respects jump points of the integrand."""

from __future__ import annotations

import numpy as np


def _pieces(a: float, b: float, breaks, points: int):
    cuts = sorted({float(c) for c in breaks if a < c < b})
    edges = [a, *cuts, b]
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(2, int(np.ceil(points * (hi - lo) / (b - a))) + 1)
        yield np.linspace(lo, hi, k)


def integrate(f, a: float, b: float, breaks=(), points: int = 2001) -> float:
    """Trapezoid integral of a vectorized ``f`` over ``[a, b]``.

    The interval is split at ``breaks``; each piece gets its own nodes (at
    least ``points`` in total) and its endpoints are evaluated one ulp
    inside, so jumps at break points are integrated exactly.
    """
    if b <= a:
        return 0.0
    total = 0.0
    for x in _pieces(a, b, breaks, points):
        xe = x.copy()
        xe[0] = np.nextafter(x[0], x[-1])
        xe[-1] = np.nextafter(x[-1], x[0])
        y = np.asarray(f(xe), dtype=float)
        total += float(np.sum((y[1:] + y[:-1]) * np.diff(x)) / 2)
    return total
