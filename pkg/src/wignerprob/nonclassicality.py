"""Nonclassicality measures: Wigner negativity and excess phase-space size.

For a trial ladder scale ``s`` define ``b_s = x / (2 s) + i s p / hbar``. Its
eigenstates are coherent states of widths ``(s, hbar / 2s)``. The mean
excitation of the state around its own means,

    nbar(s) = <(b_s - beta)^dag (b_s - beta)>,   beta = <b_s>,

is zero only for such a coherent state. Minimising over ``s`` gives
``sigma_x sigma_p / hbar - 1/2`` for states without x-p correlation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from .errors import NumericalError, TruncationError, ValidationError
from .phasespace import ScalarField, displacement_matrix_lambda
from .states import (
    CoherentAmplitude,
    FockDensityMatrix,
    annihilation,
    basis_change,
    momentum_operator,
    position_operator,
)

CLASSICAL_THRESHOLD = 1e-6


def _operators(rho: FockDensityMatrix):
    """``x``, ``p``, ``x^2``, ``p^2``, ``{x,p}/2`` restricted to the basis of ``rho``.

    Built one level larger than ``rho`` so the quadratic products are exact
    matrix elements rather than truncated products.
    """
    n = rho.dim
    X = position_operator(n + 1, rho.sigma)
    P = momentum_operator(n + 1, rho.sigma, rho.hbar)
    cut = slice(0, n)
    return (X[cut, cut], P[cut, cut], (X @ X)[cut, cut], (P @ P)[cut, cut],
            (0.5 * (X @ P + P @ X))[cut, cut])


def _check_tail(rho: FockDensityMatrix):
    tail = float(rho.populations[-1])
    if tail > rho.tol:
        raise TruncationError(f"population {tail:.3e} in the last number state; moments unreliable",
                              required_cutoff=rho.dim + 8, tail_weight=tail)


@dataclass(frozen=True)
class Moments:
    sigma_x: float
    sigma_p: float
    mean_x: float
    mean_p: float
    cov_xp: float


def moments(rho: FockDensityMatrix) -> Moments:
    _check_tail(rho)
    X, P, X2, P2, XP = _operators(rho)
    mx, mp = rho.expect(X).real, rho.expect(P).real
    vx = rho.expect(X2).real - mx**2
    vp = rho.expect(P2).real - mp**2
    cov = rho.expect(XP).real - mx * mp
    return Moments(math.sqrt(max(vx, 0.0)), math.sqrt(max(vp, 0.0)), mx, mp, cov)


def state_deviations(rho: FockDensityMatrix):
    """``(sigma_x, sigma_p, mean_x, mean_p)`` from ladder-operator moments."""
    m = moments(rho)
    return m.sigma_x, m.sigma_p, m.mean_x, m.mean_p


def mean_excitation(rho: FockDensityMatrix, sigma: float) -> float:
    """``<(b - beta)^dag (b - beta)>`` with ``b`` at ladder scale ``sigma`` and ``beta = <b>``.

    Subtracting ``beta`` is the same as displacing the state to zero means.
    """
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValidationError(f"ladder scale must be positive, got {sigma}")
    _check_tail(rho)
    n = rho.dim
    X = position_operator(n + 1, rho.sigma)
    P = momentum_operator(n + 1, rho.sigma, rho.hbar)
    b = X / (2.0 * sigma) + 1j * sigma * P / rho.hbar
    beta = rho.expect(b[:n, :n])
    shifted = b - beta * np.eye(n + 1)
    number = (shifted.conj().T @ shifted)[:n, :n]
    return float(rho.expect(number).real)


def minimize_excitation(rho: FockDensityMatrix, xtol: float = 1e-10):
    """Minimise :func:`mean_excitation` over ``log sigma``; returns ``(sigma_opt, nbar_min)``.

    Golden-section search on a bracket around ``sigma_x`` of the state,
    widened geometrically until it contains the minimum.
    """
    sx = moments(rho).sigma_x
    centre = math.log(sx if sx > 0 else rho.sigma)

    def cost(log_s):
        return mean_excitation(rho, math.exp(log_s))

    lo, hi = centre - math.log(10.0), centre + math.log(10.0)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        f_lo, f_mid, f_hi = cost(lo), cost(mid), cost(hi)
        if f_mid <= f_lo and f_mid <= f_hi:
            break
        lo, hi = lo - math.log(10.0), hi + math.log(10.0)
    else:
        raise NumericalError("could not bracket the excitation minimum")
    res = optimize.minimize_scalar(cost, bracket=(lo, mid, hi), method="golden",
                                   options={"xtol": xtol})
    return math.exp(res.x), float(res.fun)


def closed_form_minimum(rho: FockDensityMatrix) -> float:
    """``sigma_x sigma_p / hbar - 1/2`` from the state's deviations."""
    m = moments(rho)
    return m.sigma_x * m.sigma_p / rho.hbar - 0.5


# --- displaced (shifted coherent) basis ------------------------------------


@dataclass(frozen=True)
class DisplacedExpansion:
    coefficients: np.ndarray     # psi_n = <alpha, sigma; n | psi>
    alpha: CoherentAmplitude
    deficit: float

    @property
    def psi0_sq(self) -> float:
        return float(abs(self.coefficients[0]) ** 2)

    @property
    def distance_sq(self) -> float:
        """``|| psi - <alpha|psi> alpha ||^2 = 1 - |psi_0|^2``."""
        return 1.0 - self.psi0_sq

    @property
    def phase_optimal_distance_sq(self) -> float:
        """``min_phi || psi - e^{i phi} alpha ||^2 = 2 (1 - |psi_0|)``."""
        return 2.0 * (1.0 - abs(self.coefficients[0]))

    @property
    def mean_number(self) -> float:
        n = np.arange(self.coefficients.size)
        return float(np.sum(n * np.abs(self.coefficients) ** 2))


def _pure_vector(rho: FockDensityMatrix) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho.entries)
    if vals[-1] < 1.0 - 1e-8:
        raise ValidationError(f"state is not pure (largest eigenvalue {vals[-1]:.6g})")
    v = vecs[:, -1]
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def displaced_expansion(state, alpha: CoherentAmplitude, sigma: float | None = None,
                        extra: int | None = None) -> DisplacedExpansion:
    """Coefficients of a pure state in the displaced number basis ``D(alpha)|n>`` at scale ``sigma``.

    ``state`` is a pure :class:`FockDensityMatrix` or a coefficient vector in
    the basis of ``alpha.sigma``. When ``sigma`` differs from the state's basis
    scale the vector is first re-expanded in the number basis at ``sigma``.
    """
    if isinstance(state, FockDensityMatrix):
        vec, basis_sigma = _pure_vector(state), state.sigma
    else:
        vec, basis_sigma = np.asarray(state, dtype=complex), alpha.sigma
    sigma = sigma or alpha.sigma
    if not math.isclose(alpha.sigma, sigma, rel_tol=1e-12):
        raise ValidationError("alpha must be expressed at the expansion scale sigma")
    a = complex(alpha.alpha)
    dim = vec.size
    big = dim + (extra if extra is not None else int(4 * abs(a) ** 2 + 12 * abs(a) + 32))
    if not math.isclose(basis_sigma, sigma, rel_tol=1e-12):
        ratio = max(sigma / basis_sigma, basis_sigma / sigma)
        big = int(big * ratio**2) + 16
        vec = basis_change(big, sigma, dim, basis_sigma) @ vec
    else:
        vec = np.concatenate([vec, np.zeros(big - dim, dtype=complex)])
    D = displacement_matrix_lambda(a, big)
    coeffs = D.conj().T @ vec
    deficit = max(0.0, 1.0 - float(np.sum(np.abs(coeffs) ** 2)))
    if deficit > 1e-8:
        raise TruncationError(f"displaced expansion misses weight {deficit:.3e}",
                              required_cutoff=2 * big, tail_weight=deficit)
    return DisplacedExpansion(coeffs, alpha, deficit)


# --- Wigner negativity -----------------------------------------------------


def negativity_measures(field: ScalarField):
    """``(min W, int (|W| - W) / 2 dx dp)`` for a Wigner field."""
    if field.kind != "wigner":
        raise ValidationError(f"negativity needs a Wigner field, got {field.kind!r}")
    vals = field.values
    volume = float(np.sum(np.abs(vals) - vals) * 0.5 * field.grid.dx * field.grid.dp)
    return float(vals.min()), volume


@dataclass(frozen=True)
class NonclassicalityReport:
    sigma_x_state: float
    sigma_p_state: float
    sigma_opt: float
    n_bar_min: float
    n_bar_closed_form: float
    negativity_min: float | None
    negativity_volume: float | None
    psi0_sq: float | None
    distance_sq: float | None

    @property
    def classical(self) -> bool:
        return self.n_bar_min < CLASSICAL_THRESHOLD

    def verdict(self) -> str:
        if self.classical:
            return f"classical (n_bar_min={self.n_bar_min:.3e})"
        parts = [f"nonclassical: n_bar_min={self.n_bar_min:.6g}",
                 f"sigma_opt={self.sigma_opt:.6g}"]
        if self.negativity_volume is not None:
            parts.append(f"negativity_volume={self.negativity_volume:.6g}")
            parts.append(f"W_min={self.negativity_min:.6g}")
        return ", ".join(parts)

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["classical"] = self.classical
        return doc


def nonclassicality_report(rho: FockDensityMatrix, field: ScalarField | None = None) -> NonclassicalityReport:
    """Collect deviations, the excitation minimum, Wigner negativity and the coherent distance."""
    m = moments(rho)
    s_opt, nbar = minimize_excitation(rho)
    closed = m.sigma_x * m.sigma_p / rho.hbar - 0.5
    neg_min = neg_vol = None
    if field is not None:
        neg_min, neg_vol = negativity_measures(field)
    psi0 = dist = None
    if rho.purity > 1.0 - 1e-8:
        alpha = CoherentAmplitude.from_means(m.mean_x, m.mean_p, s_opt, rho.hbar)
        exp = displaced_expansion(rho, alpha, s_opt)
        psi0, dist = exp.psi0_sq, exp.distance_sq
    return NonclassicalityReport(m.sigma_x, m.sigma_p, s_opt, nbar, closed, neg_min, neg_vol, psi0, dist)
