"""Gaussian smoothing of the Wigner function and the Husimi function.

Smoothing with half-widths (sigma_x, sigma_p), whose product is hbar/2,
turns any Wigner function into the Husimi function, which is never
negative. Smoothing with a smaller measure leaves the negative region of the
first excited state in place.
"""

import math

from _common import output_dir
from wignerprob import io
from wignerprob.phasespace import PhaseGrid, wigner_from_weyl
from wignerprob.smoothing import SmoothingKernel, gaussian_smooth, verify_husimi_identity
from wignerprob.states import PhysicsConfig, fock_state

cfg = PhysicsConfig()
grid = PhaseGrid.symmetric(10 * cfg.sigma_x, 10 * cfg.sigma_p, 161, 161)
rho = fock_state(1, cfg)
w = wigner_from_weyl(rho, grid)

print(f"Fock 1: min W = {w.min:+.5f}  (closed form -1/(pi hbar) = {-1 / math.pi:+.5f})")
for scale in (0.5, 1 / math.sqrt(2), 0.9, 1.0, 1.5):
    k = SmoothingKernel.matched(cfg, scale)
    s = gaussian_smooth(w, k)
    print(f"  measure {k.measure:.4f} hbar{' (quantum)' if k.quantum else '          '}: min = {s.min:+.3e}")

rep = verify_husimi_identity(rho, grid, wigner=w)
print(f"smoothed Wigner vs coherent-state Husimi: max gap {rep.discrepancy:.2e}")
io.write_ppm(output_dir() / "fock1_husimi.ppm", gaussian_smooth(w, SmoothingKernel.matched(cfg)))
