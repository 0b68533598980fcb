"""File formats: JSON documents for states, partitions and manifests; CSV tables; PPM heatmaps."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .cells import CellPartition, PartitionReport
from .errors import ValidationError
from .phasespace import PhaseGrid, ScalarField
from .states import (
    FockDensityMatrix,
    PhysicsConfig,
    cat_state,
    coherent_state,
    coherent_wavefunction,
    fock_state,
    fock_wavefunction,
    vacuum_wavefunction,
    wavefunction_to_density,
)


def units_block(cfg: PhysicsConfig) -> dict:
    return {"hbar": cfg.hbar, "sigma": cfg.sigma, "sigma_x": cfg.sigma_x, "sigma_p": cfg.sigma_p}


def write_json(path, doc: dict):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


# --- states -----------------------------------------------------------------


def parse_state(text: str) -> dict:
    """Parse ``fock:N``, ``vacuum``, ``coherent:RE+IMi`` or ``cat:A`` (``A`` in units of sigma).

    Returns the ``{kind, params}`` document of a named state.
    """
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "vacuum":
            return {"kind": "fock", "params": {"n": 0}}
        if kind == "fock":
            return {"kind": "fock", "params": {"n": int(arg)}}
        if kind == "coherent":
            z = complex(arg.replace("i", "j").replace(" ", ""))
            return {"kind": "coherent", "params": {"alpha_re": z.real, "alpha_im": z.imag}}
        if kind == "cat":
            return {"kind": "cat", "params": {"a_over_sigma": float(arg)}}
    except ValueError as exc:
        raise ValidationError(f"cannot parse state {text!r}: {exc}") from None
    raise ValidationError(f"unknown state {text!r}; expected fock:N, vacuum, coherent:A+Bi or cat:A")


def build_state(doc: dict, cfg: PhysicsConfig):
    """``(rho, psi)`` for a named-state document; ``psi`` is ``None`` for mixed states."""
    kind, params = doc["kind"], doc.get("params", {})
    if kind == "fock":
        n = int(params["n"])
        psi = vacuum_wavefunction(cfg.sigma, cfg.hbar) if n == 0 else fock_wavefunction(n, cfg.sigma, cfg.hbar)
        return fock_state(n, cfg), psi
    if kind == "coherent":
        alpha = complex(params["alpha_re"], params.get("alpha_im", 0.0))
        return coherent_state(alpha, cfg), coherent_wavefunction(alpha, cfg.sigma, cfg.hbar)
    if kind == "cat":
        a = float(params["a_over_sigma"]) * cfg.sigma
        psi = cat_state(a, cfg.sigma, cfg)
        return wavefunction_to_density(psi, cfg), psi
    if kind == "density":
        return FockDensityMatrix.from_json_dict(params, cfg.tol_trace), None
    raise ValidationError(f"unknown state kind {kind!r}")


def save_density(path, rho: FockDensityMatrix):
    write_json(path, rho.to_json_dict())


def load_density(path, tol: float = 1e-10) -> FockDensityMatrix:
    return FockDensityMatrix.from_json_dict(read_json(path), tol)


# --- fields -----------------------------------------------------------------


def field_rows(field: ScalarField):
    x, p = field.grid.x, field.grid.p
    for i, xv in enumerate(x):
        for j, pv in enumerate(p):
            yield xv, pv, field.values[i, j]


def write_field_csv(path, field: ScalarField):
    """CSV with header ``x,p,value``, x in the outer loop, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "p", "value"])
        for row in field_rows(field):
            w.writerow([f"{v:.17g}" for v in row])


def read_field_csv(path, kind: str = "wigner", hbar: float = 1.0) -> ScalarField:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    xs, ps = np.unique(data[:, 0]), np.unique(data[:, 1])
    grid = PhaseGrid(xs[0], xs[-1], ps[0], ps[-1], xs.size, ps.size, hbar)
    return ScalarField(grid, data[:, 2].reshape(xs.size, ps.size), kind)


def field_manifest(field: ScalarField, cfg: PhysicsConfig | None = None) -> dict:
    doc = {"grid": field.grid.to_json_dict(), "kind": field.kind, "stats": field.stats()}
    if "kernel" in field.meta:
        doc["kernel"] = field.meta["kernel"]
    if cfg is not None:
        doc["units"] = units_block(cfg)
    return doc


# --- partitions and reports -------------------------------------------------


def save_partition(path, part: CellPartition):
    write_json(path, part.to_json_dict())


def load_partition(path, hbar: float = 1.0) -> CellPartition:
    return CellPartition.from_json_dict(read_json(path), hbar)


def write_probability_csv(path, report: PartitionReport):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "P", "err_bound", "negative_flag"])
        for cid, value, err, neg in report.rows():
            w.writerow([cid, f"{value:.17g}", f"{err:.3e}", int(neg)])


def write_readout_csv(path, readout):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "p_k", "P_k"])
        for k, pk, prob, _ in readout.modes:
            w.writerow([k, f"{pk:.17g}", f"{prob:.17g}"])


# --- heatmaps ---------------------------------------------------------------


def diverging_rgb(values: np.ndarray, scale: float | None = None) -> np.ndarray:
    """Blue-white-red palette: white at zero, saturated at ``+-scale`` (default ``max |v|``)."""
    v = np.asarray(values, dtype=float)
    scale = scale or float(np.abs(v).max()) or 1.0
    t = np.clip(v / scale, -1.0, 1.0)
    rgb = np.ones(v.shape + (3,))
    pos, neg = t > 0, t < 0
    rgb[pos, 1] -= t[pos]
    rgb[pos, 2] -= t[pos]
    rgb[neg, 0] += t[neg]
    rgb[neg, 1] += t[neg]
    return np.round(rgb * 255).astype(np.uint8)


def write_ppm(path, field: ScalarField, scale: float | None = None):
    """Binary PPM (P6): columns are x increasing, rows are p decreasing from the top."""
    img = diverging_rgb(field.values.T[::-1], scale)
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_ppm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    header = raw.split(b"\n", 3)
    if header[0] != b"P6":
        raise ValidationError("not a binary PPM file")
    w, h = (int(v) for v in header[1].split())
    return np.frombuffer(header[3], dtype=np.uint8).reshape(h, w, 3)
