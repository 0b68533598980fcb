import math

import numpy as np
import pytest

from wignerprob.errors import ValidationError
from wignerprob.phasespace import PhaseGrid, wigner_from_weyl
from wignerprob.smoothing import SmoothingKernel, gaussian_smooth, husimi, verify_husimi_identity
from wignerprob.states import PhysicsConfig, coherent_state, fock_state

CFG = PhysicsConfig()
SX, SP = CFG.sigma_x, CFG.sigma_p
WIDE = PhaseGrid.symmetric(10 * SX, 10 * SP, 161, 161)


def test_kernel_flags():
    assert SmoothingKernel.matched(CFG).quantum
    assert SmoothingKernel(SX, SP).measure == pytest.approx(0.5)
    assert not SmoothingKernel(1.0, 1.0).quantum
    with pytest.raises(ValidationError):
        SmoothingKernel(0.0, 1.0)


def test_smoothed_vacuum_closed_form():
    w = wigner_from_weyl(fock_state(0, CFG), WIDE)
    s = gaussian_smooth(w, SmoothingKernel(SX, SP))
    X, P = WIDE.mesh()
    expected = np.exp(-X**2 / (4 * SX**2) - P**2 / (4 * SP**2)) / (2 * math.pi)
    assert np.abs(s.values - expected).max() < 1e-12
    assert s.values[80, 80] == pytest.approx(1 / (2 * math.pi), abs=1e-12)
    assert s.meta["kernel"]["quantum"] is True


def test_narrow_kernel_is_identity():
    w = wigner_from_weyl(fock_state(1, CFG), WIDE)
    s = gaussian_smooth(w, SmoothingKernel(SX / 50, SP / 50))
    assert np.abs(s.values - w.values).max() < 1e-3


def test_husimi_vacuum_origin():
    q = husimi(fock_state(0, CFG), WIDE)
    assert q.values[80, 80] == pytest.approx(1 / (2 * math.pi), abs=1e-15)
    assert q.mass == pytest.approx(1.0, abs=1e-8)


def test_husimi_peaks_on_coherent_means():
    alpha = 0.8 - 0.5j
    grid = PhaseGrid.symmetric(8 * SX, 8 * SP, 161, 161)
    q = husimi(coherent_state(alpha, CFG), grid)
    i, j = np.unravel_index(np.argmax(q.values), q.values.shape)
    assert grid.x[i] == pytest.approx(2 * SX * alpha.real, abs=grid.dx)
    assert grid.p[j] == pytest.approx(2 * SP * alpha.imag, abs=grid.dp)
    assert q.max == pytest.approx(1 / (2 * math.pi), abs=1e-3)


@pytest.mark.parametrize("n", [0, 1, 3])
def test_husimi_identity(n):
    rep = verify_husimi_identity(fock_state(n, CFG), WIDE)
    assert rep.quantum and rep.passed
    assert rep.discrepancy <= 1e-6
    assert rep.smoothed_min >= -1e-10


def test_identity_fails_off_quantum_measure():
    rep = verify_husimi_identity(fock_state(1, CFG), WIDE, SmoothingKernel(1.0, 1.0))
    assert not rep.quantum
    assert not rep.passed


def test_sub_quantum_smoothing_stays_negative():
    w = wigner_from_weyl(fock_state(1, CFG), WIDE)
    s = gaussian_smooth(w, SmoothingKernel.matched(CFG, 1 / math.sqrt(2)))
    assert s.min < -1e-6
    # Gaussian integrals of W_1 against the kernel of variance sigma^2/2 give -2/(9 pi hbar) at the origin
    assert s.values[80, 80] == pytest.approx(-2 / (9 * math.pi), abs=1e-12)


def test_super_quantum_smoothing_positive():
    w = wigner_from_weyl(fock_state(3, CFG), WIDE)
    s = gaussian_smooth(w, SmoothingKernel.matched(CFG, 1.3))
    assert s.min >= -1e-10


def test_smoothing_commutes_with_mixing():
    a, b = fock_state(1, CFG), coherent_state(0.5j, CFG)
    k = SmoothingKernel.matched(CFG)
    mixed = gaussian_smooth(wigner_from_weyl(a.mix(b, 0.25), WIDE), k).values
    parts = 0.25 * gaussian_smooth(wigner_from_weyl(a, WIDE), k).values + \
        0.75 * gaussian_smooth(wigner_from_weyl(b, WIDE), k).values
    assert np.abs(mixed - parts).max() < 1e-15


def test_kernel_too_wide_rejected():
    grid = PhaseGrid.symmetric(SX, SP, 32, 32)
    w = wigner_from_weyl(fock_state(0, CFG), PhaseGrid.symmetric(6 * SX, 6 * SP, 32, 32))
    with pytest.raises(ValidationError):
        gaussian_smooth(w, SmoothingKernel(10 * SX, SP))
    assert grid.nx == 32


def test_smoothing_rejects_non_wigner():
    q = husimi(fock_state(0, CFG), WIDE)
    with pytest.raises(ValidationError):
        gaussian_smooth(q, SmoothingKernel.matched(CFG))
