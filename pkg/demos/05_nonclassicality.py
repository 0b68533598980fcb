"""How far is a state from the nearest coherent state?

For each ladder scale s the mean excitation around the state's own means is
computed; the minimum over s equals sigma_x sigma_p / hbar - 1/2. It
vanishes only for coherent states. Wigner negativity is printed alongside.
"""

from wignerprob.nonclassicality import mean_excitation, minimize_excitation, nonclassicality_report
from wignerprob.phasespace import PhaseGrid, wigner_from_weyl
from wignerprob.states import PhysicsConfig, cat_state, coherent_state, fock_state, vacuum_wavefunction, wavefunction_to_density

cfg = PhysicsConfig()
states = {
    "coherent 1+0.5i": coherent_state(1 + 0.5j, cfg),
    "0.6|0><0|+0.4|1><1|": fock_state(0, cfg).mix(fock_state(1, cfg), 0.6),
    "Fock 1": fock_state(1, cfg),
    "Fock 3": fock_state(3, cfg),
    "cat a = 3 sigma": wavefunction_to_density(cat_state(3 * cfg.sigma, cfg.sigma, cfg), cfg),
}
print(f"{'state':<20}{'n_bar_min':>12}{'sx sp/hbar-1/2':>16}{'neg. volume':>13}{'1-|psi0|^2':>12}")
for name, rho in states.items():
    grid = PhaseGrid.auto(cfg, rho.effective_dim(1e-14), 160, 160, x_pad=3 * cfg.sigma)
    rep = nonclassicality_report(rho, wigner_from_weyl(rho, grid))
    dist = "mixed" if rep.distance_sq is None else f"{rep.distance_sq:.6f}"
    print(f"{name:<20}{rep.n_bar_min:>12.6f}{rep.n_bar_closed_form:>16.6f}"
          f"{rep.negativity_volume:>13.6f}{dist:>12}  {'classical' if rep.classical else ''}")
print("\nthe mixture has no Wigner negativity yet a positive excess size: "
      "negativity implies excess, not the converse.")

# a Gaussian of width 2 sigma looks excited at the basis scale but is coherent at its own scale
wide = wavefunction_to_density(vacuum_wavefunction(2 * cfg.sigma), cfg)
s_opt, nbar = minimize_excitation(wide)
print(f"\nvacuum of width 2 sigma: n_bar(sigma) = {mean_excitation(wide, cfg.sigma):.4f} (9/16), "
      f"minimum {nbar:.1e} at sigma_opt = {s_opt / cfg.sigma:.4f} sigma")
