"""Single-mode states in a truncated Fock basis and in position representation.

Conventions
-----------
The number basis is built from the ladder operator at length scale ``sigma``::

    a = x / (2 sigma_x) + i p / (2 sigma_p),   sigma_x = sigma,  sigma_p = hbar / (2 sigma)

so that ``x = sigma_x (a + a^dag)`` and ``p = -i sigma_p (a - a^dag)``. A
coherent state ``|alpha>`` then has mean position ``2 sigma_x Re(alpha)`` and
mean momentum ``2 sigma_p Im(alpha)``; its position and momentum deviations are
``sigma_x`` and ``sigma_p`` with ``sigma_x sigma_p = hbar / 2``.

Every Fock-basis object carries an explicit cutoff. Constructors compute the
weight that would fall beyond it and raise :class:`TruncationError` instead of
silently renormalising a badly truncated state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .errors import TruncationError, ValidationError

DEFAULT_SIGMA = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class PhysicsConfig:
    """Units and truncation settings shared by a computation.

    Args:
        hbar: Reduced Planck constant in the chosen action units.
        sigma: Length scale of the number basis (equal to ``sigma_x``).
        fock_cutoff: Dimension ``N`` of the truncated number basis.
        tol_trace: Tolerance for trace, positivity and truncation checks.
    """

    hbar: float = 1.0
    sigma: float = DEFAULT_SIGMA
    fock_cutoff: int = 48
    tol_trace: float = 1e-10

    def __post_init__(self):
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 2:
            raise ValidationError(f"fock_cutoff must be an integer >= 2, got {self.fock_cutoff}")
        if not self.tol_trace > 0:
            raise ValidationError("tol_trace must be positive")

    @property
    def sigma_x(self) -> float:
        return self.sigma

    @property
    def sigma_p(self) -> float:
        return self.hbar / (2.0 * self.sigma)

    def with_cutoff(self, fock_cutoff: int) -> "PhysicsConfig":
        return PhysicsConfig(self.hbar, self.sigma, fock_cutoff, self.tol_trace)


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """Density matrix in the number basis at scale ``sigma``.

    The stored matrix is Hermitian by construction: the input is replaced by
    its Hermitian part, which makes ``rho[m, n] == conj(rho[n, m])`` hold
    bit for bit. Trace and positivity are checked against ``tol``.

    ``tail_weight`` records the probability that was lost to truncation when
    the state was built (and renormalised away).
    """

    entries: np.ndarray
    hbar: float = 1.0
    sigma: float = DEFAULT_SIGMA
    tol: float = 1e-10
    tail_weight: float = 0.0

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
        if rho.shape[0] < 1:
            raise ValidationError("density matrix must be non-empty")
        if not np.all(np.isfinite(rho)):
            raise ValidationError("density matrix has non-finite entries")
        rho = 0.5 * (rho + rho.conj().T)
        trace = np.trace(rho).real
        if abs(trace - 1.0) > self.tol:
            raise ValidationError(f"trace {trace!r} differs from 1 by more than {self.tol}")
        lowest = np.linalg.eigvalsh(rho)[0]
        if lowest < -self.tol:
            raise ValidationError(f"density matrix is not positive: smallest eigenvalue {lowest:.3e}")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def sigma_x(self) -> float:
        return self.sigma

    @property
    def sigma_p(self) -> float:
        return self.hbar / (2.0 * self.sigma)

    @property
    def populations(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.entries, self.entries)))

    def effective_dim(self, threshold: float = 1e-20) -> int:
        """Smallest ``d`` such that populations at index ``>= d`` are below ``threshold``."""
        above = np.nonzero(self.populations > threshold)[0]
        return int(above[-1]) + 1 if above.size else 1

    def expect(self, operator: np.ndarray) -> complex:
        """``Tr(A rho)`` for an operator given in the same basis."""
        op = np.asarray(operator)
        return complex(np.einsum("mn,nm->", op, self.entries))

    def mix(self, other: "FockDensityMatrix", weight: float = 0.5) -> "FockDensityMatrix":
        """Convex combination ``weight * self + (1 - weight) * other``."""
        if other.dim != self.dim or other.hbar != self.hbar or other.sigma != self.sigma:
            raise ValidationError("can only mix states sharing dimension, hbar and sigma")
        if not 0.0 <= weight <= 1.0:
            raise ValidationError("mixing weight must lie in [0, 1]")
        return FockDensityMatrix(weight * self.entries + (1.0 - weight) * other.entries,
                                 self.hbar, self.sigma, self.tol)

    def padded(self, dim: int) -> "FockDensityMatrix":
        """The same state embedded in a larger number basis."""
        if dim < self.dim:
            raise ValidationError("padding cannot shrink the basis")
        rho = np.zeros((dim, dim), dtype=complex)
        rho[: self.dim, : self.dim] = self.entries
        return FockDensityMatrix(rho, self.hbar, self.sigma, self.tol, self.tail_weight)

    @classmethod
    def from_vector(cls, coeffs, hbar=1.0, sigma=DEFAULT_SIGMA, tol=1e-10, tail_weight=0.0):
        c = np.asarray(coeffs, dtype=complex)
        return cls(np.outer(c, c.conj()), hbar, sigma, tol, tail_weight)

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "hbar": self.hbar,
            "sigma": self.sigma,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict, tol: float = 1e-10) -> "FockDensityMatrix":
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc["im"], dtype=float)
        if re.shape != (doc["dim"], doc["dim"]) or im.shape != re.shape:
            raise ValidationError("density document has inconsistent dimensions")
        return cls(re + 1j * im, float(doc["hbar"]), float(doc.get("sigma", DEFAULT_SIGMA)), tol)


@dataclass(frozen=True)
class CoherentAmplitude:
    """Complex amplitude of a coherent state together with its ladder scale."""

    alpha: complex
    sigma: float = DEFAULT_SIGMA

    def mean_x(self) -> float:
        return 2.0 * self.sigma * complex(self.alpha).real

    def mean_p(self, hbar: float = 1.0) -> float:
        return 2.0 * (hbar / (2.0 * self.sigma)) * complex(self.alpha).imag

    @classmethod
    def from_means(cls, mean_x: float, mean_p: float, sigma: float, hbar: float = 1.0):
        sigma_p = hbar / (2.0 * sigma)
        return cls(complex(mean_x / (2.0 * sigma), mean_p / (2.0 * sigma_p)), sigma)


@dataclass(frozen=True)
class PositionWavefunction:
    """A normalised wavefunction ``psi(x)`` with the scales needed to integrate it.

    ``x_extent`` bounds the region (around ``x_center``) outside which
    ``|psi|^2`` is negligible; ``p_extent`` bounds the momentum content in
    the same sense around ``p_center``. Quadratures in this package size
    their lattices from these two numbers.
    """

    func: Callable[[np.ndarray], np.ndarray]
    sigma: float
    hbar: float = 1.0
    x_extent: float = 12.0
    p_extent: float = 12.0
    x_center: float = 0.0
    p_center: float = 0.0
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=complex)

    @property
    def sigma_x(self) -> float:
        return self.sigma

    @property
    def sigma_p(self) -> float:
        return self.hbar / (2.0 * self.sigma)

    def x_lattice(self, points_per_sigma: int = 24):
        """Uniform lattice covering the support, for trapezoid-type quadrature."""
        lo = self.x_center - self.x_extent
        hi = self.x_center + self.x_extent
        dx_band = math.pi * self.hbar / (abs(self.p_center) + self.p_extent) / 2.0
        dx = min(self.sigma / points_per_sigma, dx_band)
        n = int(math.ceil((hi - lo) / dx)) + 1
        return np.linspace(lo, hi, n)

    def norm(self) -> float:
        x = self.x_lattice()
        return float(np.sum(np.abs(self(x)) ** 2) * (x[1] - x[0]))

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


# --- ladder algebra -------------------------------------------------------


def annihilation(dim: int) -> np.ndarray:
    """Matrix of ``a`` in the number basis: ``<n-1|a|n> = sqrt(n)``."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def position_operator(dim: int, sigma: float) -> np.ndarray:
    a = annihilation(dim)
    return sigma * (a + a.conj().T)


def momentum_operator(dim: int, sigma: float, hbar: float = 1.0) -> np.ndarray:
    a = annihilation(dim)
    return -1j * (hbar / (2.0 * sigma)) * (a - a.conj().T)


def hermite_functions(nmax: int, x, sigma: float) -> np.ndarray:
    """Oscillator eigenfunctions ``phi_0 .. phi_{nmax-1}`` at length scale ``sigma``.

    Uses the normalised three-term recurrence, which never forms factorials
    and stays accurate for indices in the hundreds. Returns an array of shape
    ``(nmax,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    xi = x / (math.sqrt(2.0) * sigma)
    out = np.empty((nmax,) + x.shape)
    out[0] = (2.0 * math.pi * sigma**2) ** -0.25 * np.exp(-0.5 * xi**2)
    if nmax > 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_extent(n: int, sigma: float) -> float:
    """Half-width beyond which ``phi_k``, ``k <= n``, is below ~1e-11."""
    return sigma * (math.sqrt(4.0 * n + 2.0) + 10.0)


# --- Fock-basis constructors ---------------------------------------------


def fock_state(n: int, cfg: PhysicsConfig) -> FockDensityMatrix:
    """Projector onto the number state ``|n>``."""
    if int(n) != n or not 0 <= n < cfg.fock_cutoff:
        raise ValidationError(f"Fock index must satisfy 0 <= n < {cfg.fock_cutoff}, got n={n}")
    rho = np.zeros((cfg.fock_cutoff, cfg.fock_cutoff), dtype=complex)
    rho[n, n] = 1.0
    return FockDensityMatrix(rho, cfg.hbar, cfg.sigma, cfg.tol_trace)


def coherent_coefficients(alpha: complex, dim: int) -> np.ndarray:
    """``<n|alpha>`` for ``n < dim`` via the ratio recurrence ``c_n = c_{n-1} alpha / sqrt(n)``."""
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def required_cutoff_coherent(alpha: complex, tol: float) -> int:
    """Smallest cutoff whose Poisson tail weight is at most ``tol``."""
    mean = abs(alpha) ** 2
    n = max(2, int(mean) + 1)
    while stats.poisson.sf(n - 1, mean) > tol:
        n += 1
    return n


def coherent_state(alpha: CoherentAmplitude | complex, cfg: PhysicsConfig) -> FockDensityMatrix:
    """Coherent state ``|alpha>`` truncated at ``cfg.fock_cutoff``.

    Raises :class:`TruncationError` when the Poisson weight beyond the cutoff
    exceeds ``cfg.tol_trace``; the error carries the cutoff that would work.
    """
    if isinstance(alpha, CoherentAmplitude):
        if not math.isclose(alpha.sigma, cfg.sigma, rel_tol=1e-12):
            raise ValidationError("CoherentAmplitude sigma must match the basis sigma")
        alpha = alpha.alpha
    alpha = complex(alpha)
    tail = float(stats.poisson.sf(cfg.fock_cutoff - 1, abs(alpha) ** 2))
    if tail > cfg.tol_trace:
        need = required_cutoff_coherent(alpha, cfg.tol_trace)
        raise TruncationError(
            f"coherent state alpha={alpha} loses weight {tail:.3e} beyond cutoff "
            f"{cfg.fock_cutoff}; need fock_cutoff >= {need}",
            required_cutoff=need, tail_weight=tail)
    c = coherent_coefficients(alpha, cfg.fock_cutoff)
    c /= np.linalg.norm(c)
    return FockDensityMatrix.from_vector(c, cfg.hbar, cfg.sigma, cfg.tol_trace, tail)


# --- position-representation constructors -------------------------------


def _ground(x, sigma):
    return (2.0 * math.pi * sigma**2) ** -0.25 * np.exp(-(x**2) / (4.0 * sigma**2))


def vacuum_wavefunction(sigma: float, hbar: float = 1.0) -> PositionWavefunction:
    """Gaussian ground state ``(2 pi sigma^2)^(-1/4) exp(-x^2 / 4 sigma^2)``."""
    return PositionWavefunction(
        lambda x: _ground(x, sigma), sigma, hbar,
        x_extent=12.0 * sigma, p_extent=12.0 * hbar / (2.0 * sigma),
        kind="vacuum", params={"sigma": sigma, "hbar": hbar})


def fock_wavefunction(n: int, sigma: float, hbar: float = 1.0) -> PositionWavefunction:
    if n < 0:
        raise ValidationError("Fock index must be non-negative")
    extent = hermite_extent(n, 1.0)
    return PositionWavefunction(
        lambda x: hermite_functions(n + 1, x, sigma)[n], sigma, hbar,
        x_extent=extent * sigma, p_extent=extent * hbar / (2.0 * sigma),
        kind="fock", params={"n": n, "sigma": sigma, "hbar": hbar})


def coherent_wavefunction(alpha: complex, sigma: float, hbar: float = 1.0) -> PositionWavefunction:
    """``<x|alpha>`` with the phase convention of :func:`coherent_state`."""
    amp = CoherentAmplitude(complex(alpha), sigma)
    x0, p0 = amp.mean_x(), amp.mean_p(hbar)
    phase0 = -x0 * p0 / (2.0 * hbar)

    def psi(x):
        return np.exp(1j * (p0 * x / hbar + phase0)) * _ground(x - x0, sigma)

    return PositionWavefunction(
        psi, sigma, hbar, x_extent=12.0 * sigma, p_extent=12.0 * hbar / (2.0 * sigma),
        x_center=x0, p_center=p0, kind="coherent",
        params={"alpha_re": amp.alpha.real, "alpha_im": amp.alpha.imag, "sigma": sigma, "hbar": hbar})


def cat_normalization(a: float, sigma: float) -> float:
    """Denominator ``sqrt(2 (1 + exp(-a^2 / 2 sigma^2)))`` of the even cat state."""
    return math.sqrt(2.0 * (1.0 + math.exp(-(a**2) / (2.0 * sigma**2))))


def cat_state(a: float, sigma: float, cfg: PhysicsConfig | None = None) -> PositionWavefunction:
    """Even superposition of Gaussians centred at ``+a`` and ``-a``."""
    hbar = cfg.hbar if cfg is not None else 1.0
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if not a >= 0:
        raise ValidationError(f"cat separation must be non-negative, got {a}")
    norm = cat_normalization(a, sigma)

    def psi(x):
        return (_ground(x - a, sigma) + _ground(x + a, sigma)) / norm

    return PositionWavefunction(
        psi, sigma, hbar, x_extent=a + 12.0 * sigma, p_extent=12.0 * hbar / (2.0 * sigma),
        kind="cat", params={"a": a, "sigma": sigma, "hbar": hbar})


def momentum_density(psi: PositionWavefunction, p) -> np.ndarray:
    """``|phi(p)|^2`` with ``phi(p) = (2 pi hbar)^(-1/2) int psi(x) exp(-i p x / hbar) dx``."""
    p = np.asarray(p, dtype=float)
    x = psi.x_lattice()
    dx = x[1] - x[0]
    # chunk over p to bound memory
    out = np.empty(p.shape)
    flat_p, flat_out = p.ravel(), out.ravel()
    values = psi(x)
    for start in range(0, flat_p.size, 256):
        pp = flat_p[start:start + 256]
        kern = np.exp(-1j * np.outer(pp, x) / psi.hbar)
        amp = kern @ values * dx / math.sqrt(2.0 * math.pi * psi.hbar)
        flat_out[start:start + 256] = np.abs(amp) ** 2
    return out


def wavefunction_to_density(psi: PositionWavefunction, cfg: PhysicsConfig) -> FockDensityMatrix:
    """Project a wavefunction onto the number basis at scale ``cfg.sigma``.

    ``c_n = int phi_n(x) psi(x) dx`` by trapezoid quadrature on a lattice
    that covers both the wavefunction and the Hermite functions up to the
    cutoff. The completeness deficit ``1 - sum |c_n|^2`` is stored as
    ``tail_weight``; above ``cfg.tol_trace`` a :class:`TruncationError` is raised.
    """
    n = cfg.fock_cutoff
    reach = hermite_extent(n, cfg.sigma)
    lo = min(psi.x_center - psi.x_extent, -reach)
    hi = max(psi.x_center + psi.x_extent, reach)
    p_band = max(abs(psi.p_center) + psi.p_extent, hermite_extent(n, 1.0) * cfg.sigma_p)
    dx = min(cfg.sigma / 24.0, math.pi * cfg.hbar / p_band / 2.0)
    x = np.linspace(lo, hi, int(math.ceil((hi - lo) / dx)) + 1)
    w = np.full(x.size, x[1] - x[0])
    w[[0, -1]] *= 0.5
    phi = hermite_functions(n, x, cfg.sigma)
    c = phi @ (w * psi(x))
    captured = float(np.sum(np.abs(c) ** 2))
    deficit = max(0.0, 1.0 - captured)
    if deficit > cfg.tol_trace:
        need = n
        while need < 4096:
            need = int(need * 1.5) + 1
            trial = hermite_functions(need, x, cfg.sigma) @ (w * psi(x))
            if 1.0 - np.sum(np.abs(trial) ** 2) <= cfg.tol_trace:
                break
        raise TruncationError(
            f"wavefunction has completeness deficit {deficit:.3e} at cutoff {n}; "
            f"need fock_cutoff >= {need}", required_cutoff=need, tail_weight=deficit)
    c /= math.sqrt(captured)
    return FockDensityMatrix.from_vector(c, cfg.hbar, cfg.sigma, cfg.tol_trace, deficit)


def basis_change(dim_to: int, sigma_to: float, dim_from: int, sigma_from: float) -> np.ndarray:
    """Overlaps ``<phi_m^(sigma_to) | phi_n^(sigma_from)>`` as a ``dim_to x dim_from`` matrix."""
    reach = max(hermite_extent(dim_to, sigma_to), hermite_extent(dim_from, sigma_from))
    band = max(hermite_extent(dim_to, 1.0) / sigma_to, hermite_extent(dim_from, 1.0) / sigma_from)
    dx = min(sigma_to, sigma_from) / 24.0
    dx = min(dx, math.pi / band)
    x = np.linspace(-reach, reach, int(math.ceil(2 * reach / dx)) + 1)
    w = np.full(x.size, x[1] - x[0])
    w[[0, -1]] *= 0.5
    return (hermite_functions(dim_to, x, sigma_to) * w) @ hermite_functions(dim_from, x, sigma_from).T
