"""Absorbing-plate detector: readout uncertainties and the induced cell partition.

A plate of thickness ``L`` registers position uniformly over ``[x0, x0 + L]``
and momentum by mode index ``k``, with modes ``p_k = k * dp``. Two mode
spacings are in use: ``2 pi hbar / L`` (bound states of the plate, the
default) and ``pi hbar / (2 L)``; both are accepted, and any explicit
spacing works as long as the cell measure ``L * dp`` is at least ``hbar / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cells import Cell, CellPartition, cell_probability
from .errors import RefinementError, ValidationError
from .phasespace import PhaseGrid, ScalarField, wigner_field
from .quadrature import interval_weights
from .states import FockDensityMatrix, hermite_extent

SPACINGS = ("sec4", "sec5")


@dataclass(frozen=True)
class DetectorSpec:
    L: float
    hbar: float = 1.0
    x0: float = 0.0
    k_range: tuple | None = None

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValidationError(f"plate thickness must be positive, got {self.L}")
        if self.k_range is not None:
            lo, hi = self.k_range
            if int(lo) != lo or int(hi) != hi or hi < lo:
                raise ValidationError(f"k_range must be an integer interval, got {self.k_range}")

    def mode_spacing(self, which="sec4") -> float:
        """Momentum spacing by name (``"sec4"``: ``2 pi hbar / L``, ``"sec5"``: ``pi hbar / 2L``) or value."""
        if which == "sec4":
            return 2.0 * math.pi * self.hbar / self.L
        if which == "sec5":
            return math.pi * self.hbar / (2.0 * self.L)
        value = float(which)
        if not value > 0:
            raise ValidationError(f"mode spacing must be positive, got {which}")
        return value


@dataclass(frozen=True)
class DetectorUncertainties:
    sigma_x: float
    sigma_k: float
    sigma_p: float
    product: float


def detector_uncertainties(d: DetectorSpec) -> DetectorUncertainties:
    """Uniform-readout deviations: ``sigma_x = L / (2 sqrt 3)``, ``sigma_k = 1 / (2 sqrt 3)``,
    ``sigma_p = pi hbar / (sqrt 3 L)``, product ``(pi / 3)(hbar / 2)``."""
    sigma_x = d.L / (2.0 * math.sqrt(3.0))
    sigma_k = 1.0 / (2.0 * math.sqrt(3.0))
    sigma_p = math.pi * d.hbar / (math.sqrt(3.0) * d.L)
    return DetectorUncertainties(sigma_x, sigma_k, sigma_p, sigma_x * sigma_p)


def detector_partition(d: DetectorSpec, mode_spacing="sec4", k_range=None) -> CellPartition:
    """Cells ``[x0, x0 + L] x [dp (k - 1/2), dp (k + 1/2)]`` for ``k`` in ``k_range``.

    Refuses spacings whose cells would be smaller than ``hbar / 2``.
    """
    dp = d.mode_spacing(mode_spacing)
    if d.L * dp < 0.5 * d.hbar - 1e-12:
        raise RefinementError(f"mode spacing {dp:.6g} gives cells of measure {d.L * dp:.6g} "
                              f"< hbar/2 = {0.5 * d.hbar:.6g}")
    k_lo, k_hi = k_range or d.k_range or (-8, 8)
    cells = tuple(Cell(d.x0, d.x0 + d.L, dp * (k - 0.5), dp * (k + 0.5), f"k={k}", d.hbar)
                  for k in range(int(k_lo), int(k_hi) + 1))
    return CellPartition(cells, (d.x0, d.x0 + d.L, dp * (k_lo - 0.5), dp * (k_hi + 0.5)))


@dataclass(frozen=True)
class DetectorReadout:
    modes: tuple        # (k, p_k, P_k, err_bound)
    captured: float
    escaped: float
    uncertainties: DetectorUncertainties
    mode_spacing: float

    @property
    def total(self) -> float:
        return self.captured + self.escaped


def _mean_momentum(rho: FockDensityMatrix) -> tuple[float, float]:
    a = np.diag(np.sqrt(np.arange(1, rho.dim)), 1)
    mean_a = complex(np.einsum("mn,nm->", a, rho.entries))
    return 2 * rho.sigma_x * mean_a.real, 2 * rho.sigma_p * mean_a.imag


def detector_readout(rho: FockDensityMatrix, d: DetectorSpec, grid: PhaseGrid | None = None,
                     mode_spacing="sec4", field: ScalarField | None = None) -> DetectorReadout:
    """Per-mode cell probabilities on the plate strip plus the mass that misses it.

    Without an explicit ``k_range`` the modes are centred on the state's mean
    momentum index and cover its momentum support. Without a grid one is
    built that holds both the plate strip and the state. The escaped mass is
    integrated over the complement of the strip, independently of the modes.
    """
    dp = d.mode_spacing(mode_spacing)
    x_mean, p_mean = _mean_momentum(rho)
    reach = hermite_extent(rho.effective_dim(1e-16), 1.0)
    if d.k_range is not None:
        k_lo, k_hi = d.k_range
    else:
        k_mid = int(round(p_mean / dp))
        span = int(math.ceil(reach * rho.sigma_p / dp)) + 1
        k_lo, k_hi = k_mid - span, k_mid + span
    part = detector_partition(d, mode_spacing, (k_lo, k_hi))
    sx0, sx1, sp0, sp1 = part.coverage
    if grid is None:
        rx, rp = reach * rho.sigma_x, reach * rho.sigma_p
        x_lo, x_hi = min(sx0, x_mean - rx), max(sx1, x_mean + rx)
        p_lo, p_hi = min(sp0, p_mean - rp), max(sp1, p_mean + rp)
        n_x = int(min(1024, max(128, math.ceil((x_hi - x_lo) / (rho.sigma_x / 12)))))
        n_p = int(min(1024, max(128, math.ceil((p_hi - p_lo) / (rho.sigma_p / 12)))))
        grid = PhaseGrid(x_lo, x_hi, p_lo, p_hi, n_x, n_p, rho.hbar)
    if field is None:
        field = wigner_field(rho, grid)
    if not field.grid.contains(*part.coverage):
        raise ValidationError("grid does not contain the detector strip")
    modes = []
    for k, cell in zip(range(int(k_lo), int(k_hi) + 1), part.cells):
        pr = cell_probability(field, cell)
        modes.append((k, k * dp, pr.value, pr.err_bound))
    captured = float(sum(m[2] for m in modes))
    g = field.grid
    wx_all = interval_weights(g.x, g.x_min, g.x_max)
    wp_all = interval_weights(g.p, g.p_min, g.p_max)
    wx_in = interval_weights(g.x, sx0, sx1)
    wp_in = interval_weights(g.p, sp0, sp1)
    vals = field.values
    # complement of the strip: columns outside the plate, plus plate columns outside the mode range
    escaped = float((wx_all - wx_in) @ vals @ wp_all + wx_in @ vals @ (wp_all - wp_in))
    return DetectorReadout(tuple(modes), captured, escaped, detector_uncertainties(d), dp)
