"""Exit criteria for the toolkit, runnable from the CLI (``verify --all``) and from pytest.

Each ``criterion_*`` function returns a :class:`CriterionResult` with the
worst measured deviation next to its fixed tolerance. Units are ``hbar = 1``,
``sigma = 1/sqrt 2`` and the five reference states are the vacuum, Fock 1,
Fock 3, the coherent state ``alpha = 1`` and the even cat with ``a = 3 sigma``,
all at cutoff 48.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cells import (
    Cell,
    CellPartition,
    cell_operator,
    cell_probability,
    partition_probabilities,
    refine_partition,
)
from .detector import DetectorSpec, detector_partition, detector_uncertainties
from .errors import RefinementError
from .nonclassicality import (
    CoherentAmplitude,
    closed_form_minimum,
    displaced_expansion,
    mean_excitation,
    minimize_excitation,
    moments,
    negativity_measures,
)
from .phasespace import PhaseGrid, marginal_p, marginal_x, wigner_direct, wigner_from_weyl
from .smoothing import SmoothingKernel, gaussian_smooth, husimi, verify_husimi_identity
from .states import (
    PhysicsConfig,
    cat_state,
    coherent_state,
    coherent_wavefunction,
    fock_state,
    fock_wavefunction,
    momentum_density,
    vacuum_wavefunction,
    wavefunction_to_density,
)

CUTOFF = 48


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{status}] {self.number}. {self.name} ({self.seconds:.2f}s): {info}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def _timed(number, name, fn):
    start = time.perf_counter()
    passed, details = fn()
    return CriterionResult(number, name, bool(passed), details, time.perf_counter() - start)


@lru_cache(maxsize=1)
def reference_states(cutoff: int = CUTOFF):
    """``{name: (rho, psi)}`` for the five reference states."""
    cfg = PhysicsConfig(fock_cutoff=cutoff)
    s, h = cfg.sigma, cfg.hbar
    cat = cat_state(3.0 * s, s, cfg)
    return {
        "vacuum": (fock_state(0, cfg), vacuum_wavefunction(s, h)),
        "fock1": (fock_state(1, cfg), fock_wavefunction(1, s, h)),
        "fock3": (fock_state(3, cfg), fock_wavefunction(3, s, h)),
        "coherent1": (coherent_state(1.0, cfg), coherent_wavefunction(1.0, s, h)),
        "cat3": (wavefunction_to_density(cat, cfg), cat),
    }


def reference_grid(name: str, nx: int = 256) -> PhaseGrid:
    cfg = PhysicsConfig()
    rho = reference_states()[name][0]
    return PhaseGrid.auto(cfg, rho.effective_dim(1e-14), nx, nx)


def fock1_closed_form(grid: PhaseGrid, sigma_x: float, sigma_p: float) -> np.ndarray:
    X, P = grid.mesh()
    r2 = X**2 / sigma_x**2 + P**2 / sigma_p**2
    return (r2 - 1.0) * np.exp(-0.5 * r2) / (math.pi * grid.hbar)


# --- criteria ------------------------------------------------------------------


def criterion_fock1_closed_form():
    def run():
        cfg = PhysicsConfig()
        sx, sp = cfg.sigma_x, cfg.sigma_p
        grid = PhaseGrid(-6 * sx, 6 * sx, -6 * sp, 6 * sp, 256, 256, cfg.hbar)
        w = wigner_from_weyl(fock_state(1, cfg), grid)
        gap = float(np.abs(w.values - fock1_closed_form(grid, sx, sp)).max())
        # sign changes between neighbours must straddle the ellipse r = 1
        X, P = grid.mesh()
        r = np.sqrt(X**2 / sx**2 + P**2 / sp**2)
        step = math.hypot(grid.dx / sx, grid.dp / sp)
        worst = 0.0
        for axis in (0, 1):
            a = np.take(w.values, range(w.values.shape[axis] - 1), axis=axis)
            b = np.take(w.values, range(1, w.values.shape[axis]), axis=axis)
            ra = np.take(r, range(r.shape[axis] - 1), axis=axis)
            flips = np.sign(a) != np.sign(b)
            worst = max(worst, float(np.abs(ra[flips] - 1.0).max()))
        inside_negative = bool(np.all(w.values[r < 1 - step] < 0))
        ok = gap <= 1e-6 and worst <= step and inside_negative
        return ok, {"max_abs_err": gap, "zero_set_offset": worst, "cell": step,
                    "negative_inside": inside_negative}

    res = _timed(1, "Fock-1 Wigner closed form and zero ellipse", run)
    res.passed = res.passed and res.seconds < 10.0
    return res


def criterion_route_equivalence():
    def run():
        worst = {}
        for name, (rho, psi) in reference_states().items():
            grid = reference_grid(name)
            a = wigner_from_weyl(rho, grid)
            b = wigner_direct(psi, grid)
            worst[name] = float(np.abs(a.values - b.values).max())
        return max(worst.values()) <= 1e-6, worst

    res = _timed(2, "Weyl-inversion vs position-integral Wigner routes", run)
    res.passed = res.passed and res.seconds < 60.0
    return res


def criterion_normalization_marginals():
    def run():
        mass_err = marg_neg = marg_err = 0.0
        for name, (rho, psi) in reference_states().items():
            grid = reference_grid(name)
            w = wigner_from_weyl(rho, grid)
            fields = [w, husimi(rho, grid), gaussian_smooth(w, SmoothingKernel.matched(rho))]
            mass_err = max(mass_err, *(abs(f.mass - 1.0) for f in fields))
            x, mx = marginal_x(w, tol=np.inf)
            p, mp = marginal_p(w, tol=np.inf)
            marg_neg = max(marg_neg, -mx.min(), -mp.min(), 0.0)
            marg_err = max(marg_err,
                           float(np.abs(mx - np.abs(psi(x)) ** 2).max()),
                           float(np.abs(mp - momentum_density(psi, p)).max()))
        ok = mass_err <= 1e-6 and marg_neg <= 1e-8 and marg_err <= 1e-6
        return ok, {"mass_err": mass_err, "marginal_negativity": marg_neg, "marginal_err": marg_err}

    return _timed(3, "Normalisation and marginals", run)


def criterion_husimi_identity():
    def run():
        gap = 0.0
        smin = np.inf
        for name, (rho, _) in reference_states().items():
            rep = verify_husimi_identity(rho, reference_grid(name))
            gap = max(gap, rep.discrepancy)
            smin = min(smin, rep.smoothed_min)
        rho1 = reference_states()["fock1"][0]
        w1 = wigner_from_weyl(rho1, reference_grid("fock1"))
        sub = gaussian_smooth(w1, SmoothingKernel.matched(rho1, 1.0 / math.sqrt(2.0)))
        ok = gap <= 1e-6 and smin >= -1e-10 and sub.min < -1e-6
        return ok, {"max_discrepancy": gap, "smoothed_min": float(smin), "fock1_min_at_hbar/4": sub.min}

    return _timed(4, "Husimi identity at measure hbar/2", run)


def _test_cells(hbar=1.0):
    return [
        Cell(-0.5, 0.5, -0.5, 0.5, "centre", hbar),
        Cell(0.0, 1.5, -1.0, 0.0, "quadrant", hbar),
        Cell(-2.0, -0.25, -0.3, 0.3, "strip", hbar),
        Cell(-1.0, 1.0, 0.2, 1.4, "upper", hbar),
        Cell(0.7, 2.2, -0.6, 0.9, "offset", hbar),
    ]


def criterion_cells():
    def run():
        cfg32 = PhysicsConfig(fock_cutoff=32)
        states = {
            "fock1": fock_state(1, cfg32),
            "coherent": coherent_state(0.6 + 0.4j, cfg32),
            "cat3": wavefunction_to_density(cat_state(3 * cfg32.sigma, cfg32.sigma, cfg32), cfg32),
        }
        sum_err = trace_err = 0.0
        for name, rho in states.items():
            grid = PhaseGrid.auto(cfg32, rho.effective_dim(1e-14), 256, 256)
            w = wigner_from_weyl(rho, grid)
            part = CellPartition.regular(grid.x_min, grid.x_max, grid.p_min, grid.p_max, 6, 5)
            rep = partition_probabilities(w, part)
            sum_err = max(sum_err, abs(rep.total - 1.0))
            for cell in _test_cells():
                U = cell_operator(cell, cfg32)
                trace_err = max(trace_err, abs(rho.expect(U).real - cell_probability(w, cell).value))
        refused = False
        try:
            refine_partition(CellPartition((Cell(0, 0.9, 0, 1.0, "a"),), (0, 0.9, 0, 1.0)), "a", "x")
        except RefinementError:
            refused = True
        ok = sum_err <= 1e-6 and trace_err <= 1e-4 and refused
        return ok, {"sum_err": sum_err, "trace_vs_cell_err": trace_err, "sub_quantum_refused": refused}

    return _timed(5, "Cell probabilities, refinement guard, Weyl cell operators", run)


def criterion_detector():
    def run():
        worst = 0.0
        above = True
        for L in (0.5, 2.0 * math.sqrt(3.0), 7.25):
            u = detector_uncertainties(DetectorSpec(L))
            expect = (L / (2 * math.sqrt(3)), math.pi / (math.sqrt(3) * L), math.pi / 6)
            worst = max(worst, abs(u.sigma_x - expect[0]), abs(u.sigma_p - expect[1]),
                        abs(u.product - expect[2]), abs(u.sigma_k - 1 / (2 * math.sqrt(3))))
            above = above and u.product > 0.5
            detector_partition(DetectorSpec(L), "sec5")
        return worst <= 1e-15 and above, {"max_formula_err": worst, "product_exceeds_hbar/2": above}

    return _timed(6, "Detector uncertainties", run)


def criterion_nonclassicality():
    def run():
        cfg = PhysicsConfig(fock_cutoff=CUTOFF)
        coh = max(abs(minimize_excitation(coherent_state(a, cfg))[1]) for a in (0.0, 1.0, 0.5 - 1.2j))
        fock = max(abs(minimize_excitation(fock_state(n, cfg))[1] - n) for n in (1, 2, 3))
        closed = expansion = 0.0
        for name, (rho, _) in reference_states().items():
            s_opt, nbar = minimize_excitation(rho)
            closed = max(closed, abs(nbar - closed_form_minimum(rho)))
            m = moments(rho)
            for s in (0.5 * s_opt, s_opt, 1.7 * s_opt):
                alpha = CoherentAmplitude.from_means(m.mean_x, m.mean_p, s, rho.hbar)
                exp = displaced_expansion(rho, alpha, s)
                expansion = max(expansion, abs(exp.mean_number - mean_excitation(rho, s)))
        ok = coh <= 1e-8 and fock <= 1e-6 and closed <= 1e-8 and expansion <= 1e-8
        return ok, {"coherent_nbar": coh, "fock_nbar_err": fock, "closed_form_err": closed,
                    "expansion_err": expansion}

    return _timed(7, "Excess-size nonclassicality measure", run)


def fringe_period(values: np.ndarray, p: np.ndarray) -> float:
    """Mean spacing between sign changes of a 1-D profile, doubled (one period = two crossings)."""
    s = np.sign(values)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    crossings = p[idx] - values[idx] * (p[idx + 1] - p[idx]) / (values[idx + 1] - values[idx])
    return float(2.0 * np.mean(np.diff(crossings)))


def criterion_cat_figure():
    def run():
        cfg = PhysicsConfig()
        a = 3.0 * cfg.sigma
        rho = reference_states()["cat3"][0]
        grid = PhaseGrid(-a - 6 * cfg.sigma_x, a + 6 * cfg.sigma_x,
                         -4 * cfg.sigma_p, 4 * cfg.sigma_p, 257, 257, cfg.hbar)
        w = wigner_from_weyl(rho, grid)
        x, p = grid.x, grid.p
        centre = int(np.argmin(np.abs(x)))
        right, left = x > 0, x < 0
        col_mass = w.values.sum(axis=1)
        lobe_right = float((x[right] * col_mass[right]).sum() / col_mass[right].sum())
        lobe_left = float((x[left] * col_mass[left]).sum() / col_mass[left].sum())
        peaks_positive = bool(w.values[x > 0.5 * a].max() > 0 and w.values[x < -0.5 * a].max() > 0)
        lobes_ok = abs(lobe_right - a) < 0.05 * cfg.sigma and abs(lobe_left + a) < 0.05 * cfg.sigma and peaks_positive
        # restrict to where the band is well above round-off
        band = np.abs(p) <= 3 * cfg.sigma_p
        period = fringe_period(w.values[centre, band], p[band])
        expected = math.pi * cfg.hbar / a
        _, volume = negativity_measures(w)
        ok = lobes_ok and abs(period / expected - 1) <= 0.05 and volume > 0.05
        return ok, {"lobe_centroids": (round(lobe_left, 4), round(lobe_right, 4)), "period": period,
                    "expected_period": expected, "negativity_volume": volume}

    return _timed(8, "Cat-state lobes, fringes and negativity", run)


CRITERIA = (
    criterion_fock1_closed_form,
    criterion_route_equivalence,
    criterion_normalization_marginals,
    criterion_husimi_identity,
    criterion_cells,
    criterion_detector,
    criterion_nonclassicality,
    criterion_cat_figure,
)


def run_all(echo=print):
    results = []
    for crit in CRITERIA:
        res = crit()
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
