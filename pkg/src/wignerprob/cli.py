"""Command-line front end. Every subcommand is a thin wrapper around the library.

Exit codes: 0 success, 2 validation error, 3 numerical tolerance failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import io
from .acceptance import run_all
from .cells import CellPartition, partition_probabilities
from .detector import DetectorSpec, detector_readout
from .errors import NumericalError, ValidationError
from .nonclassicality import nonclassicality_report
from .phasespace import PhaseGrid, weyl_function, wigner_direct, wigner_from_weyl
from .smoothing import SmoothingKernel, gaussian_smooth, husimi
from .states import DEFAULT_SIGMA, PhysicsConfig

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _floats(text: str, count: int, what: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"{what} must be {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count or not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"{what} must be {count} finite comma-separated numbers, got {text!r}")
    return vals


def _config(args) -> PhysicsConfig:
    return PhysicsConfig(hbar=args.hbar, sigma=args.sigma if args.sigma else DEFAULT_SIGMA * math.sqrt(args.hbar),
                         fock_cutoff=args.cutoff)


def _state(args, cfg):
    spec = args.state
    if spec.endswith(".json"):
        doc = io.read_json(spec)
        if "kind" not in doc:
            doc = {"kind": "density", "params": doc}
        return io.build_state(doc, cfg), doc
    doc = io.parse_state(spec)
    return io.build_state(doc, cfg), doc


def _grid(args, cfg, rho) -> PhaseGrid:
    if args.grid == "auto":
        x0, p0 = 0.0, 0.0
        pad = 0.0
        if rho is not None:
            from .nonclassicality import moments
            m = moments(rho)
            x0, p0 = m.mean_x, m.mean_p
            pad = 2.0 * m.sigma_x
        return PhaseGrid.auto(cfg, rho.effective_dim(1e-14) if rho is not None else 0,
                              x_center=x0, p_center=p0, x_pad=pad)
    x_lo, x_hi, p_lo, p_hi, nx, n_p = _floats(args.grid, 6, "--grid")
    if int(nx) != nx or int(n_p) != n_p:
        raise ValidationError("grid sample counts must be integers")
    return PhaseGrid(x_lo, x_hi, p_lo, p_hi, int(nx), int(n_p), cfg.hbar)


def _format(args, default="csv"):
    if args.format:
        return args.format
    if args.out:
        suffix = Path(args.out).suffix.lstrip(".").lower()
        if suffix in ("csv", "json", "ppm"):
            return suffix
    return default


def _emit_field(args, cfg, field):
    fmt = _format(args)
    if not args.out:
        print(json.dumps(io.field_manifest(field, cfg), indent=2))
        return
    if fmt == "csv":
        io.write_field_csv(args.out, field)
    elif fmt == "json":
        io.write_json(args.out, io.field_manifest(field, cfg))
    elif fmt == "ppm":
        io.write_ppm(args.out, field)
    else:
        raise ValidationError(f"unsupported format {fmt!r} for fields")
    stats = field.stats()
    print(f"{field.kind}: min={stats['min']:.6g} max={stats['max']:.6g} mass={stats['mass']:.9f} -> {args.out}")


# --- subcommands -----------------------------------------------------------


def cmd_state(args):
    cfg = _config(args)
    (rho, _), doc = _state(args, cfg)
    if args.out:
        # a document that --state FILE.json reads back
        io.write_json(args.out, {"kind": "density", "params": rho.to_json_dict(), "source": doc,
                                 "units": io.units_block(cfg), "tail_weight": rho.tail_weight})
        print(f"dim={rho.dim} purity={rho.purity:.12g} -> {args.out}")
    else:
        print(json.dumps({"state": doc, "dim": rho.dim, "purity": rho.purity,
                          "tail_weight": rho.tail_weight}, indent=2))


def cmd_wigner(args):
    cfg = _config(args)
    (rho, psi), _ = _state(args, cfg)
    grid = _grid(args, cfg, rho)
    if args.route == "direct":
        if psi is None:
            raise ValidationError("the direct route needs a pure named state")
        field = wigner_direct(psi, grid)
    else:
        field = wigner_from_weyl(rho, grid)
    _emit_field(args, cfg, field)


def cmd_weyl(args):
    cfg = _config(args)
    (rho, _), doc = _state(args, cfg)
    P, Q = _floats(args.at, 2, "--at")
    pt = weyl_function(rho, (P, Q))
    out = {"state": doc, "units": io.units_block(cfg), "P": P, "Q": Q,
           "re": pt.value.real, "im": pt.value.imag}
    if args.out:
        io.write_json(args.out, out)
    print(f"weyl({P:g}, {Q:g}) = {pt.value.real:.12g} {pt.value.imag:+.12g}i")


def cmd_smooth(args):
    cfg = _config(args)
    (rho, _), _ = _state(args, cfg)
    grid = _grid(args, cfg, rho)
    if args.kernel:
        sx, sp = _floats(args.kernel, 2, "--kernel")
        kernel = SmoothingKernel(sx, sp, cfg.hbar)
    else:
        kernel = SmoothingKernel.matched(cfg)
    _emit_field(args, cfg, gaussian_smooth(wigner_from_weyl(rho, grid), kernel))


def cmd_husimi(args):
    cfg = _config(args)
    (rho, _), _ = _state(args, cfg)
    _emit_field(args, cfg, husimi(rho, _grid(args, cfg, rho)))


def cmd_cells(args):
    cfg = _config(args)
    (rho, _), _ = _state(args, cfg)
    grid = _grid(args, cfg, rho)
    field = wigner_from_weyl(rho, grid)
    if args.partition:
        part = io.load_partition(args.partition, cfg.hbar)
    else:
        part = CellPartition.regular(grid.x_min, grid.x_max, grid.p_min, grid.p_max, 8, 8, cfg.hbar)
    report = partition_probabilities(field, part)
    if args.out:
        io.write_probability_csv(args.out, report)
    else:
        for row in report.rows():
            print(",".join(str(v) for v in row))
    n_neg = sum(1 for p in report.probabilities if p.negative)
    print(f"cells={len(part)} total={report.total:.9f} min_P={report.min_probability:.6g} "
          f"negative_cells={n_neg}", file=sys.stderr)


def cmd_detector(args):
    cfg = _config(args)
    (rho, _), _ = _state(args, cfg)
    spacing = args.mode_spacing
    d = DetectorSpec(args.plate_L, cfg.hbar, args.plate_x0)
    grid = None if args.grid == "auto" else _grid(args, cfg, rho)
    readout = detector_readout(rho, d, grid, spacing)
    u = readout.uncertainties
    summary = {"units": io.units_block(cfg), "L": d.L, "mode_spacing": readout.mode_spacing,
               "sigma_x": u.sigma_x, "sigma_k": u.sigma_k, "sigma_p": u.sigma_p,
               "product": u.product, "captured": readout.captured, "escaped": readout.escaped}
    if args.out:
        io.write_readout_csv(args.out, readout)
        io.write_json(Path(args.out).with_suffix(".json"), summary)
    print(json.dumps(summary, indent=2))


def cmd_nonclass(args):
    cfg = _config(args)
    (rho, _), doc = _state(args, cfg)
    field = wigner_from_weyl(rho, _grid(args, cfg, rho))
    report = nonclassicality_report(rho, field)
    if args.out:
        io.write_json(args.out, {"state": doc, "units": io.units_block(cfg), **report.to_json_dict()})
    print(report.verdict())


def cmd_verify(args):
    results = run_all()
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_NUMERICAL if failed else EXIT_OK


COMMANDS = {
    "state": cmd_state, "wigner": cmd_wigner, "weyl": cmd_weyl, "smooth": cmd_smooth,
    "husimi": cmd_husimi, "cells": cmd_cells, "detector": cmd_detector,
    "nonclass": cmd_nonclass, "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", default="vacuum",
                        help="fock:N | vacuum | coherent:RE+IMi | cat:A (A in units of sigma) | file.json")
    common.add_argument("--grid", default="auto", help="auto | x0,x1,p0,p1,nx,np")
    common.add_argument("--hbar", type=float, default=1.0)
    common.add_argument("--sigma", type=float, default=None,
                        help="ladder length scale (default sqrt(hbar/2), so sigma_x = sigma_p)")
    common.add_argument("--cutoff", type=int, default=48)
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json", "ppm"))

    parser = argparse.ArgumentParser(prog="wignerprob", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("state", parents=[common], help="build a state and export it as JSON")
    w = sub.add_parser("wigner", parents=[common], help="Wigner field")
    w.add_argument("--route", choices=("weyl", "direct"), default="weyl")
    q = sub.add_parser("weyl", parents=[common], help="Weyl function at one point")
    q.add_argument("--at", default="0,0", help="P,Q")
    s = sub.add_parser("smooth", parents=[common], help="Gaussian-smoothed Wigner field")
    s.add_argument("--kernel", help="sx,sp (default sigma_x,sigma_p)")
    sub.add_parser("husimi", parents=[common], help="Husimi field")
    c = sub.add_parser("cells", parents=[common], help="cell probabilities for a partition")
    c.add_argument("--partition", help="partition JSON (default: 8x8 tiling of the grid)")
    d = sub.add_parser("detector", parents=[common], help="plate-detector readout")
    d.add_argument("--plate-L", type=float, default=4.0)
    d.add_argument("--plate-x0", type=float, default=-2.0)
    d.add_argument("--mode-spacing", default="sec4", help="sec4 (2 pi hbar/L) | sec5 (pi hbar/2L) | value")
    sub.add_parser("nonclass", parents=[common], help="nonclassicality verdict")
    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--all", action="store_true", help="run every criterion (the default)")
    return parser


# flags whose comma-separated values may start with a minus sign
_LIST_FLAGS = ("--grid", "--at", "--kernel")


def _join_list_flags(argv):
    """Rewrite ``--grid -4,4,...`` as ``--grid=-4,4,...`` so argparse does not read it as a flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _LIST_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_list_flags(argv))
    try:
        code = COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: malformed input document ({type(exc).__name__}: {exc})", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
