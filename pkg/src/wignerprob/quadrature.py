"""Integration weights for sub-intervals of a uniform sample lattice.

Cell probabilities integrate sampled fields over rectangles whose edges need
not fall on grid nodes. The weights here integrate the piecewise Lagrange
interpolant (quintic by default) of the samples exactly over ``[a, b]``; they are
additive under splitting ``[a, c] = [a, b] + [b, c]`` up to rounding, which
makes partition sums reproduce the enclosing integral.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly


@lru_cache(maxsize=None)
def _lagrange_antiderivatives(order: int):
    nodes = np.arange(order + 1, dtype=float)
    out = []
    for q in range(order + 1):
        coeffs = np.array([1.0])
        for r in range(order + 1):
            if r != q:
                coeffs = npoly.polymul(coeffs, np.array([-nodes[r], 1.0]) / (nodes[q] - nodes[r]))
        out.append(npoly.polyint(coeffs))
    return out


def interval_weights(nodes: np.ndarray, a: float, b: float, order: int = 5) -> np.ndarray:
    """Weights ``w`` with ``sum(w * f(nodes)) ~ int_a^b f``.

    Each grid interval is integrated with the ``order + 1`` point stencil
    centred on it (shifted inward at the ends); ``order=1`` is the
    trapezoid rule on the clipped interval. ``[a, b]`` must lie inside the node range.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    h = (nodes[-1] - nodes[0]) / (n - 1)
    w = np.zeros(n)
    if b <= a:
        return w
    lo = (a - nodes[0]) / h
    hi = (b - nodes[0]) / h
    if lo < -1e-9 or hi > n - 1 + 1e-9:
        raise ValueError(f"interval [{a}, {b}] exceeds the lattice [{nodes[0]}, {nodes[-1]}]")
    lo, hi = max(lo, 0.0), min(hi, n - 1.0)
    first = min(int(np.floor(lo)), n - 2)
    last = min(int(np.ceil(hi)) - 1, n - 2)
    polys = _lagrange_antiderivatives(order)
    for i in range(first, last + 1):
        s, t = max(lo, i), min(hi, i + 1)
        if t <= s:
            continue
        start = min(max(i - (order - 1) // 2, 0), n - 1 - order)
        for q, anti in enumerate(polys):
            w[start + q] += (npoly.polyval(t - start, anti) - npoly.polyval(s - start, anti)) * h
    return w


def rectangle_weights(x_nodes, p_nodes, x_lo, x_hi, p_lo, p_hi, order: int = 5):
    """Separable weights over a rectangle as a pair ``(wx, wp)``."""
    return (interval_weights(x_nodes, x_lo, x_hi, order),
            interval_weights(p_nodes, p_lo, p_hi, order))


def gauss_legendre_panels(lo: float, hi: float, panel_width: float, points: int = 10):
    """Composite Gauss-Legendre nodes and weights on ``[lo, hi]``."""
    panels = max(1, int(np.ceil((hi - lo) / panel_width)))
    ref_x, ref_w = np.polynomial.legendre.leggauss(points)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
    w = (half[:, None] * ref_w[None, :]).ravel()
    return x, w
