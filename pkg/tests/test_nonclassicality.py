import math

import numpy as np
import pytest

from wignerprob.errors import ValidationError
from wignerprob.nonclassicality import (
    closed_form_minimum,
    displaced_expansion,
    mean_excitation,
    minimize_excitation,
    negativity_measures,
    nonclassicality_report,
    state_deviations,
)
from wignerprob.phasespace import PhaseGrid, displace_state, wigner_from_weyl
from wignerprob.states import (
    CoherentAmplitude,
    PhysicsConfig,
    cat_state,
    coherent_state,
    fock_state,
    wavefunction_to_density,
)

CFG = PhysicsConfig()
SX, SP = CFG.sigma_x, CFG.sigma_p

# moments of the even cat at a = 3 sigma, from sigma_x^2 = sigma^2 + a^2 / (1 + e^{-a^2/2 sigma^2})
# and sigma_p^2 = sigma_p0^2 (1 - (a/sigma)^2 e^{-a^2/2sigma^2} / (1 + e^{-a^2/2sigma^2}))
CAT3_NBAR_MIN = 0.993491749654906
# cat (a = 3 sigma) Wigner negativity volume from a fine-grid quadrature of the closed form
CAT3_NEGATIVITY_VOLUME = 0.240208


@pytest.fixture(scope="module")
def cat3():
    return wavefunction_to_density(cat_state(3 * CFG.sigma, CFG.sigma, CFG), CFG)


def test_cat_oracle_formula():
    s, a = CFG.sigma, 3 * CFG.sigma
    e = math.exp(-(a**2) / (2 * s**2))
    vx = s**2 + a**2 / (1 + e)
    vp = SP**2 * (1 - (a / s) ** 2 * e / (1 + e))
    assert math.sqrt(vx * vp) - 0.5 == pytest.approx(CAT3_NBAR_MIN, abs=1e-14)


def test_deviations():
    sx, sp, mx, mp = state_deviations(coherent_state(0.7 - 0.2j, CFG))
    assert sx * sp == pytest.approx(0.5, abs=1e-10)
    assert mx == pytest.approx(2 * SX * 0.7) and mp == pytest.approx(-2 * SP * 0.2)
    for n in (1, 2, 5):
        sx, sp, mx, mp = state_deviations(fock_state(n, CFG))
        assert sx * sp == pytest.approx(n + 0.5, abs=1e-10)
    assert state_deviations(fock_state(0, CFG))[2:] == (0.0, 0.0)


def test_mean_excitation_examples():
    assert abs(mean_excitation(coherent_state(1.1 + 0.4j, CFG), CFG.sigma)) < 1e-10
    assert mean_excitation(fock_state(1, CFG), CFG.sigma) == pytest.approx(1.0, abs=1e-10)
    assert mean_excitation(fock_state(0, CFG), 2 * CFG.sigma) == pytest.approx(9 / 16, abs=1e-8)
    with pytest.raises(ValidationError):
        mean_excitation(fock_state(0, CFG), -1.0)


def test_minimum_examples(cat3):
    s_opt, nbar = minimize_excitation(coherent_state(0.5j, CFG))
    assert abs(nbar) < 1e-8
    assert s_opt == pytest.approx(CFG.sigma, rel=1e-4)
    for n in (1, 2, 3):
        assert minimize_excitation(fock_state(n, CFG))[1] == pytest.approx(n, abs=1e-6)
    s_opt, nbar = minimize_excitation(cat3)
    assert nbar == pytest.approx(CAT3_NBAR_MIN, abs=1e-8)
    assert nbar == pytest.approx(closed_form_minimum(cat3), abs=1e-8)


def test_excitation_convex_in_log_sigma(cat3):
    for rho in (fock_state(2, CFG), cat3, coherent_state(0.9, CFG)):
        logs = np.linspace(math.log(0.3), math.log(3.0), 41)
        vals = np.array([mean_excitation(rho, math.exp(t)) for t in logs])
        assert np.diff(vals, 2).min() >= -1e-8
        assert np.argmin(vals) not in (0, vals.size - 1)


def test_minimum_invariant_under_displacement(cat3):
    base = minimize_excitation(cat3)[1]
    moved = displace_state(cat3, 0.8, -0.6, dim_out=80)
    assert minimize_excitation(moved)[1] == pytest.approx(base, abs=1e-8)


def test_minimum_invariant_under_hbar_scaling():
    cfg2 = PhysicsConfig(hbar=3.0, sigma=math.sqrt(1.5))
    a = minimize_excitation(fock_state(2, CFG).mix(fock_state(0, CFG), 0.3))
    b = minimize_excitation(fock_state(2, cfg2).mix(fock_state(0, cfg2), 0.3))
    assert b[1] == pytest.approx(a[1], abs=1e-8)
    assert b[0] / a[0] == pytest.approx(math.sqrt(3.0), rel=1e-5)


def test_self_expansion():
    alpha = CoherentAmplitude(0.6 - 0.8j, CFG.sigma)
    exp = displaced_expansion(coherent_state(alpha, CFG), alpha)
    assert abs(exp.coefficients[0]) == pytest.approx(1.0, abs=1e-10)
    assert np.abs(exp.coefficients[1:]).max() < 1e-10
    assert exp.distance_sq < 1e-10


def test_expansion_cross_route_and_distances(cat3):
    s = 1.3 * CFG.sigma
    alpha = CoherentAmplitude.from_means(0.0, 0.0, s)
    exp = displaced_expansion(cat3, alpha, s)
    assert exp.mean_number == pytest.approx(mean_excitation(cat3, s), abs=1e-8)
    psi0 = abs(exp.coefficients[0])
    assert exp.phase_optimal_distance_sq == pytest.approx(2 * (1 - psi0))
    assert 0.0 <= exp.distance_sq <= 1.0 + 1e-12
    # the distance to the best-phase coherent state bounds the projection residual from above
    assert exp.distance_sq <= exp.phase_optimal_distance_sq + 1e-15


def test_expansion_rejects_mixed_state():
    mixed = fock_state(0, CFG).mix(fock_state(1, CFG))
    with pytest.raises(ValidationError, match="not pure"):
        displaced_expansion(mixed, CoherentAmplitude(0.0, CFG.sigma))


def test_negativity_measures(cat3):
    grid = PhaseGrid.symmetric(8 * SX, 8 * SP, 129, 129)
    mn, vol = negativity_measures(wigner_from_weyl(fock_state(0, CFG), grid))
    assert mn >= -1e-9 and vol <= 1e-9
    mn, vol = negativity_measures(wigner_from_weyl(fock_state(1, CFG), grid))
    assert mn == pytest.approx(-1 / math.pi, abs=1e-6)
    # Fock 1: int (|W| - W)/2 over the ellipse r < 1 is (2 e^{-1/2} - 1)
    assert vol == pytest.approx(2 * math.exp(-0.5) - 1, abs=1e-3)
    _, vol = negativity_measures(wigner_from_weyl(coherent_state(1.0 - 0.5j, CFG), grid))
    assert vol <= 1e-9
    cat_grid = PhaseGrid.symmetric(3 * CFG.sigma + 6 * SX, 6 * SP, 401, 401)
    _, vol = negativity_measures(wigner_from_weyl(cat3, cat_grid))
    assert vol == pytest.approx(CAT3_NEGATIVITY_VOLUME, abs=2e-4)


def test_report_and_verdict(cat3):
    grid = PhaseGrid.symmetric(3 * CFG.sigma + 6 * SX, 6 * SP, 128, 128)
    rep = nonclassicality_report(cat3, wigner_from_weyl(cat3, grid))
    assert not rep.classical
    assert rep.verdict().startswith("nonclassical")
    assert rep.n_bar_min >= -1e-10
    assert rep.n_bar_min == pytest.approx(rep.n_bar_closed_form, abs=1e-8)
    # negativity implies excess phase-space size
    assert rep.negativity_volume > 1e-6 and rep.n_bar_min > 1e-6
    coh = nonclassicality_report(coherent_state(1.0, CFG))
    assert coh.classical and coh.verdict().startswith("classical")
    doc = rep.to_json_dict()
    assert doc["classical"] is False and set(doc) >= {"n_bar_min", "distance_sq", "psi0_sq"}
