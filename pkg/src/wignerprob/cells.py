"""Probabilities on phase-space cells bounded below by the quantum measure.

A :class:`Cell` is a closed rectangle ``[x_lo, x_hi] x [p_lo, p_hi]`` whose
area is at least ``hbar / 2``. A :class:`CellPartition` tiles a rectangular
coverage window with such cells. The probability of a cell is the integral
of the Wigner function over it; refining a partition is allowed only while
both halves keep the quantum measure.

Cell observables are obtained by Weyl quantisation of unit-height
indicators, so that ``Tr(U_k rho)`` equals the cell integral of ``W_rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import RefinementError, ValidationError
from .phasespace import ScalarField, expectation
from .quadrature import gauss_legendre_panels, interval_weights
from .states import PhysicsConfig, hermite_extent, hermite_functions

MEASURE_SLACK = 1e-12


@dataclass(frozen=True)
class Cell:
    x_lo: float
    x_hi: float
    p_lo: float
    p_hi: float
    id: str = "0"
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.x_hi > self.x_lo and self.p_hi > self.p_lo):
            raise ValidationError(f"cell {self.id!r} has non-increasing bounds")
        if self.measure < 0.5 * self.hbar - MEASURE_SLACK:
            raise RefinementError(
                f"cell {self.id!r} has measure {self.measure:.6g} below the quantum bound "
                f"hbar/2 = {0.5 * self.hbar:.6g}; distinguishable phase-space domains cannot be smaller")

    @property
    def measure(self) -> float:
        return (self.x_hi - self.x_lo) * (self.p_hi - self.p_lo)

    @property
    def bounds(self):
        return (self.x_lo, self.x_hi, self.p_lo, self.p_hi)

    def to_json_dict(self) -> dict:
        return {"id": self.id, "x_lo": self.x_lo, "x_hi": self.x_hi,
                "p_lo": self.p_lo, "p_hi": self.p_hi}


def _overlap_area(a: Cell, b: Cell) -> float:
    w = min(a.x_hi, b.x_hi) - max(a.x_lo, b.x_lo)
    h = min(a.p_hi, b.p_hi) - max(a.p_lo, b.p_lo)
    return max(w, 0.0) * max(h, 0.0)


@dataclass(frozen=True)
class CellPartition:
    """Interior-disjoint cells whose union is the ``coverage`` window."""

    cells: tuple
    coverage: tuple

    def __post_init__(self):
        cells = tuple(self.cells)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "coverage", tuple(float(v) for v in self.coverage))
        if not cells:
            raise ValidationError("partition needs at least one cell")
        ids = [c.id for c in cells]
        if len(set(ids)) != len(ids):
            raise ValidationError("cell ids must be unique")
        x0, x1, p0, p1 = self.coverage
        area = (x1 - x0) * (p1 - p0)
        scale = max(abs(x0), abs(x1), x1 - x0) * max(abs(p0), abs(p1), p1 - p0)
        slack = 1e-12 * scale
        for c in cells:
            if c.x_lo < x0 - slack or c.x_hi > x1 + slack or c.p_lo < p0 - slack or c.p_hi > p1 + slack:
                raise ValidationError(f"cell {c.id!r} leaves the coverage window")
        order = sorted(cells, key=lambda c: c.x_lo)
        for i, a in enumerate(order):
            for b in order[i + 1:]:
                if b.x_lo >= a.x_hi:
                    break
                if _overlap_area(a, b) > slack:
                    raise ValidationError(f"cells {a.id!r} and {b.id!r} overlap")
        total = sum(c.measure for c in cells)
        if abs(total - area) > 1e-9 * scale:
            raise ValidationError(f"cells cover area {total:.12g} of window area {area:.12g}")

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def cell(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise ValidationError(f"no cell with id {cell_id!r}")

    @classmethod
    def regular(cls, x_lo, x_hi, p_lo, p_hi, nx: int, n_p: int, hbar: float = 1.0):
        """``nx x n_p`` equal rectangles tiling the window, ids ``"i,j"``."""
        xs = np.linspace(x_lo, x_hi, nx + 1)
        ps = np.linspace(p_lo, p_hi, n_p + 1)
        cells = [Cell(xs[i], xs[i + 1], ps[j], ps[j + 1], f"{i},{j}", hbar)
                 for i in range(nx) for j in range(n_p)]
        return cls(tuple(cells), (x_lo, x_hi, p_lo, p_hi))

    def to_json_dict(self) -> dict:
        return {"coverage": list(self.coverage), "cells": [c.to_json_dict() for c in self.cells]}

    @classmethod
    def from_json_dict(cls, doc: dict, hbar: float = 1.0) -> "CellPartition":
        cells = tuple(Cell(c["x_lo"], c["x_hi"], c["p_lo"], c["p_hi"], str(c["id"]), hbar)
                      for c in doc["cells"])
        return cls(cells, tuple(doc["coverage"]))


def refine_partition(part: CellPartition, cell_id: str, axis: str) -> CellPartition:
    """Halve one cell along ``axis`` (``"x"`` or ``"p"``); children get ids ``id.0`` and ``id.1``.

    Refused with :class:`RefinementError` when the halves would fall below
    ``hbar / 2``; the bound itself is allowed.
    """
    parent = part.cell(cell_id)
    if axis not in ("x", "p"):
        raise ValidationError(f"axis must be 'x' or 'p', got {axis!r}")
    if parent.measure / 2.0 < 0.5 * parent.hbar - MEASURE_SLACK:
        raise RefinementError(
            f"refining cell {cell_id!r} (measure {parent.measure:.6g}) would create cells of "
            f"measure {parent.measure / 2:.6g} < hbar/2; phase-space domains cannot be smaller than hbar/2")
    if axis == "x":
        mid = 0.5 * (parent.x_lo + parent.x_hi)
        kids = (Cell(parent.x_lo, mid, parent.p_lo, parent.p_hi, f"{cell_id}.0", parent.hbar),
                Cell(mid, parent.x_hi, parent.p_lo, parent.p_hi, f"{cell_id}.1", parent.hbar))
    else:
        mid = 0.5 * (parent.p_lo + parent.p_hi)
        kids = (Cell(parent.x_lo, parent.x_hi, parent.p_lo, mid, f"{cell_id}.0", parent.hbar),
                Cell(parent.x_lo, parent.x_hi, mid, parent.p_hi, f"{cell_id}.1", parent.hbar))
    cells = []
    for c in part.cells:
        cells.extend(kids if c.id == cell_id else (c,))
    return CellPartition(tuple(cells), part.coverage)


# --- probabilities ----------------------------------------------------------


@dataclass(frozen=True)
class CellProbability:
    id: str
    value: float
    err_bound: float
    negative: bool


def _weights(field: ScalarField, x_lo, x_hi, p_lo, p_hi, order):
    grid = field.grid
    return (interval_weights(grid.x, x_lo, x_hi, order), interval_weights(grid.p, p_lo, p_hi, order))


def cell_probability(field: ScalarField, cell: Cell, method: str = "interp") -> CellProbability:
    """``P = int_cell W dx dp`` from a sampled Wigner field.

    ``method="interp"`` integrates the piecewise-quintic interpolant of the
    samples over the exact rectangle; the error bound is its distance to the
    cubic interpolant integral. ``method="riemann"`` sums grid samples inside
    the closed cell times ``dx dp``, matching :func:`expectation` with the
    cell indicator, and bounds the error by the samples on the cell boundary band.
    """
    if field.kind != "wigner":
        raise ValidationError(f"cell probabilities need a Wigner field, got {field.kind!r}")
    grid = field.grid
    if not grid.contains(*cell.bounds):
        raise ValidationError(f"cell {cell.id!r} {cell.bounds} exceeds the grid window")
    if method == "interp":
        wx, wp = _weights(field, *cell.bounds, 5)
        value = float(wx @ field.values @ wp)
        cx, cp = _weights(field, *cell.bounds, 3)
        err = abs(value - float(cx @ field.values @ cp)) + 1e-15
    elif method == "riemann":
        value = expectation(field, cell_indicator(cell))
        edge = np.abs(field.values).max() * (
            (cell.x_hi - cell.x_lo) * grid.dp + (cell.p_hi - cell.p_lo) * grid.dx) * 2
        err = float(edge)
    else:
        raise ValidationError(f"unknown method {method!r}")
    return CellProbability(cell.id, value, err, value < -err)


@dataclass(frozen=True)
class PartitionReport:
    probabilities: tuple
    total: float
    tail_mass: float
    min_probability: float

    def rows(self):
        return [(c.id, c.value, c.err_bound, c.negative) for c in self.probabilities]


def partition_probabilities(field: ScalarField, part: CellPartition, tail_tol: float = 1e-6,
                            method: str = "interp") -> PartitionReport:
    """Probability of every cell plus the field mass left outside the coverage window.

    Raises :class:`ValidationError` when more than ``tail_tol`` of the mass
    lies outside the partition. Negative cell values are reported, not
    rejected.
    """
    cov = Cell(*part.coverage, id="coverage", hbar=part.cells[0].hbar)
    if not field.grid.contains(*cov.bounds):
        raise ValidationError("partition coverage exceeds the field grid")
    grid = field.grid
    whole = interval_weights(grid.x, grid.x_min, grid.x_max) @ field.values @ \
        interval_weights(grid.p, grid.p_min, grid.p_max)
    inside = cell_probability(field, cov, method).value
    tail = float(whole - inside)
    if abs(tail) > tail_tol:
        raise ValidationError(f"partition misses field mass {tail:.3e} (> {tail_tol}); "
                              "enlarge the coverage window")
    probs = tuple(cell_probability(field, c, method) for c in part.cells)
    total = float(sum(p.value for p in probs))
    return PartitionReport(probs, total, tail, min(p.value for p in probs))


# --- indicators and Weyl quantisation ---------------------------------------


def indicator_functions(cell: Cell):
    """Unit-height indicators ``(X(x), Pi(p))`` of the closed cell edges."""
    x_lo, x_hi, p_lo, p_hi = cell.bounds

    def X(x):
        x = np.asarray(x, dtype=float)
        return ((x >= x_lo) & (x <= x_hi)).astype(float)

    def Pi(p):
        p = np.asarray(p, dtype=float)
        return ((p >= p_lo) & (p <= p_hi)).astype(float)

    return X, Pi


def cell_indicator(cell: Cell) -> Callable:
    """``f(x, p) = X(x) Pi(p)`` for use with :func:`expectation` or :func:`weyl_quantize`."""
    X, Pi = indicator_functions(cell)

    def f(x, p):
        return X(x) * Pi(p)

    f.window = cell.bounds
    return f


def default_window(cfg: PhysicsConfig):
    """Box outside which every ``W_mn`` with ``m, n < cutoff`` is negligible."""
    rx = hermite_extent(cfg.fock_cutoff, cfg.sigma_x)
    rp = hermite_extent(cfg.fock_cutoff, 1.0) * cfg.sigma_p
    return (-rx, rx, -rp, rp)


def weyl_quantize(f: Callable, cfg: PhysicsConfig, window: Sequence[float] | None = None,
                  panel: float | None = None, points: int = 10) -> np.ndarray:
    """Weyl-quantised operator of the phase-space function ``f(x, p)``.

    Matrix elements ``A_mn = int f(x, p) W_nm(x, p) dx dp`` use the
    Hermite-function integral for the cross-Wigner functions ``W_nm``,
    evaluated with composite Gauss-Legendre nodes over ``window``. ``f`` is
    assumed to vanish outside the window (for indicators the window is the
    cell itself, which keeps the integrand smooth). The ``p`` integral is
    carried out first, so the cost is one ``y`` quadrature per ``x`` node.
    """
    if window is None:
        window = getattr(f, "window", None) or default_window(cfg)
    x_lo, x_hi, p_lo, p_hi = (float(v) for v in window)
    n = cfg.fock_cutoff
    hbar, sigma = cfg.hbar, cfg.sigma
    reach = hermite_extent(n, sigma)
    k_band = hermite_extent(n, 1.0) / sigma
    x_nodes, x_w = gauss_legendre_panels(x_lo, x_hi, panel or 0.5 * cfg.sigma_x, points)
    y_half = 2.0 * (reach + max(abs(x_lo), abs(x_hi)))
    p_abs = max(abs(p_lo), abs(p_hi))
    k_total = k_band + p_abs / hbar
    dy = min(math.pi / k_total, reach / 64.0)
    ny = 2 * int(math.ceil(y_half / dy))
    y = np.linspace(-y_half, y_half, ny + 1)
    y_w = np.full(y.size, y[1] - y[0])
    y_w[[0, -1]] *= 0.5
    # p panels narrow enough to resolve exp(i p y / hbar) for |y| <= y_half
    p_panel = min(0.5 * cfg.sigma_p, 4.0 * hbar / y_half)
    p_nodes, p_w = gauss_legendre_panels(p_lo, p_hi, p_panel, points)
    phase = np.exp(1j * np.outer(y, p_nodes) / hbar)          # (ny, np)
    fvals = np.asarray(f(x_nodes[:, None], p_nodes[None, :]), dtype=float)
    fvals = np.broadcast_to(fvals, (x_nodes.size, p_nodes.size))
    A = np.zeros((n, n), dtype=complex)
    for i, x in enumerate(x_nodes):
        row = fvals[i] * p_w
        if not np.any(row):
            continue
        F = phase @ row * y_w                                  # int f(x,p) e^{ipy/hbar} dp, times y weight
        phi_minus = hermite_functions(n, x - 0.5 * y, sigma)   # (n, ny): phi_k(x - y/2)
        phi_plus = hermite_functions(n, x + 0.5 * y, sigma)
        # W_nm integrand: phi_n(x - y/2) phi_m(x + y/2); A_mn = sum ... -> phi_plus[m] F phi_minus[n]
        A += x_w[i] * (phi_plus * F) @ phi_minus.T
    A /= 2.0 * math.pi * hbar
    return A


def cell_operator(cell: Cell, cfg: PhysicsConfig) -> np.ndarray:
    """Weyl-quantised indicator ``U_k`` of a cell."""
    return weyl_quantize(cell_indicator(cell), cfg, window=cell.bounds)


def spectrum_excess(operator: np.ndarray) -> float:
    """How far the eigenvalues of a Hermitian operator stray outside ``[0, 1]``."""
    ev = np.linalg.eigvalsh(0.5 * (operator + operator.conj().T))
    return float(max(0.0, -ev.min(), ev.max() - 1.0))
