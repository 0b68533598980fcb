import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerprob.detector import DetectorSpec, detector_partition, detector_readout, detector_uncertainties
from wignerprob.errors import RefinementError, ValidationError
from wignerprob.phasespace import displace_state
from wignerprob.states import PhysicsConfig, coherent_state, fock_state

CFG = PhysicsConfig()


def test_uncertainties_at_unit_sigma():
    u = detector_uncertainties(DetectorSpec(2 * math.sqrt(3)))
    assert u.sigma_x == pytest.approx(1.0, abs=1e-15)
    assert u.sigma_k == pytest.approx(1 / (2 * math.sqrt(3)))


@settings(max_examples=30)
@given(L=st.floats(1e-3, 1e3), hbar=st.floats(0.1, 10))
def test_product_independent_of_thickness(L, hbar):
    u = detector_uncertainties(DetectorSpec(L, hbar))
    assert u.product == pytest.approx(math.pi / 6 * hbar, rel=1e-14)
    assert u.product > hbar / 2


def test_partition_spacings():
    d = DetectorSpec(3.0)
    sec5 = detector_partition(d, "sec5")
    assert all(c.measure == pytest.approx(math.pi / 2) for c in sec5)
    sec4 = detector_partition(d, "sec4")
    assert all(c.measure == pytest.approx(2 * math.pi) for c in sec4)
    with pytest.raises(RefinementError):
        detector_partition(d, 1 / (4 * d.L))
    assert detector_partition(d, 0.5 / d.L).cells[0].measure == pytest.approx(0.5)


def test_invalid_plate():
    with pytest.raises(ValidationError):
        DetectorSpec(0.0)
    with pytest.raises(ValidationError):
        DetectorSpec(1.0).mode_spacing("-2")


def test_vacuum_inside_wide_plate():
    # about 10 sigma_x wide; the default spacing 2 pi hbar / L is then comparable to sigma_p
    d = DetectorSpec(7.2, x0=-3.6)
    r = detector_readout(fock_state(0, CFG), d)
    assert r.escaped < 1e-6
    probs = sorted((m[2] for m in r.modes), reverse=True)
    centre = [m[2] for m in r.modes if m[0] == 0][0]
    assert centre == probs[0]
    assert centre > 1.9 * probs[1]


def test_vacuum_at_plate_edge():
    r = detector_readout(fock_state(0, CFG), DetectorSpec(12.0, x0=0.0))
    assert r.captured == pytest.approx(0.5, abs=1e-3)
    assert r.total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("spacing", ["sec4", "sec5"])
def test_fock1_bookkeeping(spacing):
    r = detector_readout(fock_state(1, CFG), DetectorSpec(3.0, x0=-1.5), mode_spacing=spacing)
    assert r.total == pytest.approx(1.0, abs=1e-6)
    assert r.mode_spacing == pytest.approx(DetectorSpec(3.0).mode_spacing(spacing))


def test_readout_translation_covariance():
    rho = coherent_state(0.4 + 0.3j, CFG)
    shift = 1.7
    moved = displace_state(rho, shift, 0.0)
    kr = (-3, 3)
    a = detector_readout(rho, DetectorSpec(2.0, x0=-1.0, k_range=kr))
    b = detector_readout(moved, DetectorSpec(2.0, x0=-1.0 + shift, k_range=kr))
    assert np.abs(np.array([m[2] for m in a.modes]) - np.array([m[2] for m in b.modes])).max() < 1e-6
    assert abs(a.escaped - b.escaped) < 1e-6
