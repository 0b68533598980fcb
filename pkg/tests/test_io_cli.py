import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from wignerprob import io
from wignerprob.cli import main
from wignerprob.errors import ValidationError
from wignerprob.phasespace import PhaseGrid, wigner_from_weyl
from wignerprob.states import PhysicsConfig, fock_state

CFG = PhysicsConfig()


@pytest.mark.parametrize("text,kind,params", [
    ("vacuum", "fock", {"n": 0}),
    ("fock:3", "fock", {"n": 3}),
    ("coherent:1+0i", "coherent", {"alpha_re": 1.0, "alpha_im": 0.0}),
    ("coherent:0.5-1.5i", "coherent", {"alpha_re": 0.5, "alpha_im": -1.5}),
    ("cat:3", "cat", {"a_over_sigma": 3.0}),
])
def test_parse_state(text, kind, params):
    assert io.parse_state(text) == {"kind": kind, "params": params}


@pytest.mark.parametrize("bad", ["fock:x", "squeezed:1", "coherent:abc"])
def test_parse_state_rejects(bad):
    with pytest.raises(ValidationError):
        io.parse_state(bad)


def test_field_csv_roundtrip(tmp_path):
    grid = PhaseGrid.auto(CFG, 1, 24, 20)
    w = wigner_from_weyl(fock_state(1, CFG), grid)
    path = tmp_path / "w.csv"
    io.write_field_csv(path, w)
    assert path.read_text().splitlines()[0] == "x,p,value"
    back = io.read_field_csv(path)
    assert np.array_equal(back.values, w.values)
    assert back.grid.nx == 24 and back.grid.n_p == 20


def test_ppm_orientation(tmp_path):
    grid = PhaseGrid(-1, 1, -1, 1, 10, 8)
    vals = np.zeros((10, 8))
    vals[9, 7] = 1.0            # x max, p max -> top right pixel
    vals[0, 0] = -1.0           # x min, p min -> bottom left pixel
    from wignerprob.phasespace import ScalarField
    io.write_ppm(tmp_path / "f.ppm", ScalarField(grid, vals))
    img = io.read_ppm(tmp_path / "f.ppm")
    assert img.shape == (8, 10, 3)
    assert tuple(img[0, 9]) == (255, 0, 0)
    assert tuple(img[7, 0]) == (0, 0, 255)
    assert tuple(img[3, 3]) == (255, 255, 255)


def test_density_json_roundtrip_reproduces_field(tmp_path):
    rho = fock_state(2, CFG).mix(fock_state(0, CFG), 0.4)
    io.save_density(tmp_path / "rho.json", rho)
    back = io.load_density(tmp_path / "rho.json")
    grid = PhaseGrid.auto(CFG, 3, 48, 48)
    assert np.abs(wigner_from_weyl(back, grid).values - wigner_from_weyl(rho, grid).values).max() <= 1e-12


def test_cli_wigner_fock1(tmp_path, capsys):
    out = tmp_path / "w.csv"
    assert main(["wigner", "--state", "fock:1", "--grid", "auto", "--out", str(out)]) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    # the auto grid has an even node count, so the origin sits between nodes
    assert data[:, 2].min() == pytest.approx(-1 / math.pi, abs=2e-3)
    odd = tmp_path / "odd.csv"
    assert main(["wigner", "--state", "fock:1", "--grid", "-4,4,-4,4,81,81", "--out", str(odd)]) == 0
    assert np.loadtxt(odd, delimiter=",", skiprows=1)[:, 2].min() == pytest.approx(-1 / math.pi, abs=1e-6)


def test_cli_nonclass_verdicts(capsys):
    assert main(["nonclass", "--state", "coherent:1+0i"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("classical")
    assert float(line.split("=")[1].rstrip(")")) < 1e-6
    assert main(["nonclass", "--state", "fock:1"]) == 0
    assert capsys.readouterr().out.startswith("nonclassical")


def test_cli_state_roundtrip(tmp_path, capsys):
    doc = tmp_path / "cat.json"
    assert main(["state", "--state", "cat:2", "--out", str(doc)]) == 0
    saved = json.loads(doc.read_text())
    assert saved["kind"] == "density" and saved["units"]["hbar"] == 1.0
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    grid = "-5,5,-4,4,40,32"
    assert main(["wigner", "--state", "cat:2", "--grid", grid, "--out", str(a)]) == 0
    assert main(["wigner", "--state", str(doc), "--grid", grid, "--out", str(b)]) == 0
    va = np.loadtxt(a, delimiter=",", skiprows=1)
    vb = np.loadtxt(b, delimiter=",", skiprows=1)
    assert np.abs(va - vb).max() <= 1e-12


def test_cli_json_manifest_has_units(tmp_path):
    out = tmp_path / "q.json"
    assert main(["husimi", "--state", "fock:2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["kind"] == "husimi"
    assert doc["units"] == pytest.approx({"hbar": 1.0, "sigma": 1 / math.sqrt(2),
                                          "sigma_x": 1 / math.sqrt(2), "sigma_p": 1 / math.sqrt(2)})
    assert doc["stats"]["min"] >= 0


def test_cli_smooth_records_kernel(tmp_path):
    out = tmp_path / "s.json"
    assert main(["smooth", "--state", "fock:1", "--format", "json", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["kernel"]["quantum"] is True


def test_cli_cells_and_partition(tmp_path, capsys):
    part = tmp_path / "part.json"
    from wignerprob.cells import CellPartition
    io.save_partition(part, CellPartition.regular(-6, 6, -6, 6, 3, 3))
    out = tmp_path / "p.csv"
    assert main(["cells", "--state", "fock:1", "--grid", "-6,6,-6,6,120,120",
                 "--partition", str(part), "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id", "P", "err_bound", "negative_flag"]
    assert rows[1][0] == "0,0"
    assert sum(float(r[1]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-6)


def test_cli_detector(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["detector", "--state", "vacuum", "--plate-L", "6", "--plate-x0", "-3",
                 "--mode-spacing", "sec5", "--out", str(out)]) == 0
    summary = json.loads((tmp_path / "d.json").read_text())
    assert summary["product"] == pytest.approx(math.pi / 6)
    assert summary["captured"] + summary["escaped"] == pytest.approx(1.0, abs=1e-6)
    assert out.read_text().startswith("k,p_k,P_k")


def test_cli_weyl_origin(capsys):
    assert main(["weyl", "--state", "fock:3", "--at", "0,0"]) == 0
    assert "0.159154943092" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["wigner", "--state", "bogus"]) == 2
    assert main(["detector", "--plate-L", "1", "--mode-spacing", "0.1"]) == 2
    assert main(["wigner", "--grid", "1,2,3"]) == 2
    assert main(["state", "--state", "coherent:6+0i", "--cutoff", "16"]) == 3
    assert main(["wigner", "--state", "vacuum", "--out", str(tmp_path / "no" / "w.csv")]) == 4
    assert main(["wigner", "--state", str(tmp_path / "missing.json")]) == 4
    broken = tmp_path / "broken.json"
    broken.write_text('{"kind": "density", "params": {"dim": 2}}')
    assert main(["wigner", "--state", str(broken)]) == 2
    broken.write_text("{not json")
    assert main(["wigner", "--state", str(broken)]) == 2


def test_console_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "wignerprob.cli", "nonclass", "--state", "vacuum"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("classical")
