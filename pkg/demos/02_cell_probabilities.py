"""Probabilities on phase-space cells no smaller than hbar/2.

A Wigner function cannot be read as a probability density point by point.
Integrated over rectangles it gives numbers that sum to one. This script
tiles phase space for the first excited state and lists the cell values.
Then it halves cells until the hbar/2 floor stops the refinement.
"""

from _common import output_dir
from wignerprob import io
from wignerprob.cells import Cell, CellPartition, cell_operator, cell_probability, partition_probabilities, refine_partition, spectrum_excess
from wignerprob.errors import RefinementError
from wignerprob.phasespace import PhaseGrid, wigner_from_weyl
from wignerprob.states import PhysicsConfig, fock_state

cfg = PhysicsConfig()
rho = fock_state(1, cfg)
grid = PhaseGrid.auto(cfg, 1, 201, 201)
w = wigner_from_weyl(rho, grid)

part = CellPartition.regular(grid.x_min, grid.x_max, grid.p_min, grid.p_max, 4, 4)
report = partition_probabilities(w, part)
print("Fock 1 on a 4 x 4 tiling (cell measure "
      f"{part.cells[0].measure:.3f} hbar):")
for cid, value, err, neg in report.rows():
    print(f"  cell {cid:>4}  P = {value:+.6f}  (err < {err:.1e}){'  negative' if neg else ''}")
print(f"  sum = {report.total:.9f}")
io.write_probability_csv(output_dir() / "fock1_cells.csv", report)

central = Cell(-cfg.sigma_x, cfg.sigma_x, -cfg.sigma_p, cfg.sigma_p, "central")
print(f"\ncentral cell [-sx,sx]x[-sp,sp], measure {central.measure:.2f} hbar: "
      f"P = {cell_probability(w, central).value:+.6f}")
print("  a rectangle of measure 2 hbar can still carry negative 'probability'.")

U = cell_operator(central, cfg.with_cutoff(32))
print(f"  its Weyl-quantised indicator has eigenvalues up to {spectrum_excess(U):.3f} outside [0, 1]")

cells = CellPartition((central,), central.bounds)
cid = "central"
while True:
    try:
        cells = refine_partition(cells, cid, "x" if cid.count(".") % 2 == 0 else "p")
    except RefinementError as exc:
        print(f"\nrefinement stopped: {exc}")
        break
    cid = cid + ".0"
    print(f"split -> {cid} has measure {cells.cell(cid).measure:.3f} hbar")
