"""A plate of thickness L as a position-momentum detector.

Uniform position readout over the plate and momentum modes spaced by
2 pi hbar / L give deviations whose product is (pi/3)(hbar/2) for every L,
slightly above the quantum bound. The readout of a state is the set of
Wigner-cell probabilities of the plate strip.
"""

import math

from _common import output_dir
from wignerprob import io
from wignerprob.detector import DetectorSpec, detector_readout, detector_uncertainties
from wignerprob.states import PhysicsConfig, coherent_state

for L in (0.5, 2 * math.sqrt(3), 10.0):
    u = detector_uncertainties(DetectorSpec(L))
    print(f"L = {L:7.4f}: sigma_x = {u.sigma_x:.4f}, sigma_p = {u.sigma_p:.4f}, "
          f"product = {u.product:.6f} (hbar/2 = 0.5)")

cfg = PhysicsConfig()
rho = coherent_state(0.0 + 1.2j, cfg)
for spacing in ("sec4", "sec5"):
    r = detector_readout(rho, DetectorSpec(4.0, x0=-2.0), mode_spacing=spacing)
    top = sorted(r.modes, key=lambda m: -m[2])[:3]
    print(f"\nmode spacing {spacing} ({r.mode_spacing:.4f}): captured {r.captured:.6f}, "
          f"escaped {r.escaped:.2e}")
    for k, pk, prob, _ in top:
        print(f"  k = {k:+d}  p_k = {pk:+.4f}  P_k = {prob:.6f}")
    io.write_readout_csv(output_dir() / f"readout_{spacing}.csv", r)
