import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerprob.cells import (
    Cell,
    CellPartition,
    cell_indicator,
    cell_operator,
    cell_probability,
    indicator_functions,
    partition_probabilities,
    refine_partition,
    spectrum_excess,
    weyl_quantize,
)
from wignerprob.errors import RefinementError, ValidationError
from wignerprob.phasespace import PhaseGrid, expectation, wigner_from_weyl
from wignerprob.states import (
    PhysicsConfig,
    cat_state,
    coherent_state,
    fock_state,
    momentum_operator,
    position_operator,
    wavefunction_to_density,
)

CFG = PhysicsConfig()
SX, SP = CFG.sigma_x, CFG.sigma_p
GRID = PhaseGrid.symmetric(8 * SX, 8 * SP, 160, 160)

# dblquad of the closed-form Fock-1 Wigner function over [-sx, sx] x [-sp, sp]
FOCK1_CENTRAL_CELL = -0.19469854146167448


@pytest.fixture(scope="module")
def fields():
    cat = wavefunction_to_density(cat_state(3 * CFG.sigma, CFG.sigma, CFG), CFG)
    cat_grid = PhaseGrid.symmetric(3 * CFG.sigma + 8 * SX, 8 * SP, 200, 160)
    return {
        "vacuum": wigner_from_weyl(fock_state(0, CFG), GRID),
        "fock1": wigner_from_weyl(fock_state(1, CFG), GRID),
        "cat3": wigner_from_weyl(cat, cat_grid),
    }


def test_cell_measure_bound():
    assert Cell(0, 1, 0, 0.5).measure == 0.5
    with pytest.raises(RefinementError):
        Cell(0, 1, 0, 0.49)
    with pytest.raises(ValidationError):
        Cell(1, 0, 0, 1)


def test_refinement_examples():
    part = CellPartition((Cell(0, 2, 0, 1, "a"),), (0, 2, 0, 1))
    halves = refine_partition(part, "a", "x")
    assert [c.measure for c in halves] == [1.0, 1.0]
    assert [c.id for c in halves] == ["a.0", "a.1"]
    quarters = refine_partition(halves, "a.0", "p")
    assert [c.measure for c in quarters] == [0.5, 0.5, 1.0]
    with pytest.raises(RefinementError):
        refine_partition(quarters, "a.0.0", "x")
    with pytest.raises(RefinementError):
        refine_partition(CellPartition((Cell(0, 0.9, 0, 1, "b"),), (0, 0.9, 0, 1)), "b", "p")


def test_partition_validation():
    with pytest.raises(ValidationError):
        CellPartition((Cell(0, 1, 0, 1, "a"), Cell(0.5, 1.5, 0, 1, "b")), (0, 1.5, 0, 1))
    with pytest.raises(ValidationError):
        CellPartition((Cell(0, 1, 0, 1, "a"),), (0, 2, 0, 1))


def test_whole_window_is_one(fields):
    w = fields["fock1"]
    whole = Cell(GRID.x_min, GRID.x_max, GRID.p_min, GRID.p_max)
    assert cell_probability(w, whole).value == pytest.approx(1.0, abs=1e-6)


def test_vacuum_half_plane(fields):
    half = Cell(0.0, GRID.x_max, GRID.p_min, GRID.p_max)
    assert cell_probability(fields["vacuum"], half).value == pytest.approx(0.5, abs=1e-6)


def test_fock1_central_cell_oracle(fields):
    cell = Cell(-SX, SX, -SP, SP)
    pr = cell_probability(fields["fock1"], cell)
    assert pr.value == pytest.approx(FOCK1_CENTRAL_CELL, abs=1e-6)
    assert pr.negative
    assert pr.err_bound < 1e-5


def test_riemann_route_is_coarser(fields):
    cell = Cell(-SX, SX, -SP, SP)
    pr = cell_probability(fields["fock1"], cell, method="riemann")
    assert abs(pr.value - FOCK1_CENTRAL_CELL) <= pr.err_bound


def test_vacuum_partition_non_negative(fields):
    part = CellPartition.regular(GRID.x_min, GRID.x_max, GRID.p_min, GRID.p_max, 7, 5)
    rep = partition_probabilities(fields["vacuum"], part)
    assert rep.min_probability >= -1e-9
    assert rep.total == pytest.approx(1.0, abs=1e-6)


def test_cat_mirror_split(fields):
    g = fields["cat3"].grid
    part = CellPartition((Cell(g.x_min, 0, g.p_min, g.p_max, "L"), Cell(0, g.x_max, g.p_min, g.p_max, "R")),
                         (g.x_min, g.x_max, g.p_min, g.p_max))
    rep = partition_probabilities(fields["cat3"], part)
    for pr in rep.probabilities:
        assert pr.value == pytest.approx(0.5, abs=1e-6)


def test_partition_missing_mass_rejected(fields):
    part = CellPartition.regular(-SX, SX, -SP, SP, 1, 1)
    with pytest.raises(ValidationError, match="misses field mass"):
        partition_probabilities(fields["vacuum"], part)


@settings(max_examples=20, deadline=None)
@given(cell=st.tuples(st.integers(0, 3), st.integers(0, 3)), axis=st.sampled_from(["x", "p"]))
def test_refinement_is_additive(fields, cell, axis):
    part = CellPartition.regular(GRID.x_min, GRID.x_max, GRID.p_min, GRID.p_max, 4, 4)
    cid = f"{cell[0]},{cell[1]}"
    fine = refine_partition(part, cid, axis)
    w = fields["fock1"]
    parent = cell_probability(w, part.cell(cid))
    kids = [cell_probability(w, fine.cell(f"{cid}.{k}")) for k in (0, 1)]
    assert abs(parent.value - sum(k.value for k in kids)) <= parent.err_bound + sum(k.err_bound for k in kids) + 1e-12


def test_indicators_closed_and_bounded(fields):
    cell = Cell(-1.0, 0.5, -0.25, 1.0)
    X, Pi = indicator_functions(cell)
    assert X(-1.0) == 1 and X(0.5) == 1 and X(0.51) == 0
    assert Pi(-0.25) == 1 and Pi(1.0) == 1
    f = cell_indicator(cell)
    vac = fields["vacuum"]
    assert expectation(vac, f) <= 1.0
    assert expectation(vac, f) == cell_probability(vac, cell, method="riemann").value


def test_quantize_unity_and_position():
    cfg = PhysicsConfig(fock_cutoff=16)
    one = weyl_quantize(lambda x, p: np.ones(np.broadcast(x, p).shape), cfg)
    assert np.abs(one - np.eye(16)).max() < 1e-4
    X = weyl_quantize(lambda x, p: x + 0 * p, cfg)
    assert np.abs(X - position_operator(16, cfg.sigma)).max() < 1e-6
    P = weyl_quantize(lambda x, p: p + 0 * x, cfg)
    assert np.abs(P - momentum_operator(16, cfg.sigma)).max() < 1e-6


def test_cell_operator_matches_cell_integral():
    cfg = PhysicsConfig(fock_cutoff=32)
    cell = Cell(-0.4, 0.9, -0.5, 0.6)
    rho = coherent_state(0.3 - 0.2j, cfg)
    U = cell_operator(cell, cfg)
    assert np.abs(U - U.conj().T).max() < 1e-10
    w = wigner_from_weyl(rho, PhaseGrid.auto(cfg, 4, 200, 200))
    assert rho.expect(U).real == pytest.approx(cell_probability(w, cell).value, abs=1e-4)
    # the Weyl image of an indicator is not a projection; the excess is measured, not assumed
    excess = spectrum_excess(U)
    assert 0.0 <= excess < 0.5


def test_partition_json_roundtrip():
    part = refine_partition(CellPartition.regular(-2, 2, -1, 1, 2, 2), "0,1", "x")
    back = CellPartition.from_json_dict(part.to_json_dict())
    assert [c.bounds for c in back] == [c.bounds for c in part]
    assert [c.id for c in back] == [c.id for c in part]
    assert math.isclose(sum(c.measure for c in back), 8.0)
