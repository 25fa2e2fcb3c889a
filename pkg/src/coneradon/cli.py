"""Command line driver: ``coneradon <command> ...``.

Exit codes: 0 success, 1 invalid input, 2 NaN or Inf in a computed output.
Errors go to stderr with a first line ``ERROR <code>: <message>``.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import _kernels
from .config import load_config
from .core import ConeSinogramGrid, VolumeField, VolumeGrid, field_l2_error
from .errors import ConeRadonError, ConfigError, NumericalError, WeightError
from .fileio import read_field, read_sinogram, write_field, write_sinogram
from .forward import forward_project, lemma_deviation
from .fourier_slice import check_slice_identity, random_slice_samples
from .phantom import rasterize
from .reconstruct import METHODS, ReconstructionConfig, reconstruct
from .transforms import FilterConfig, WINDOWS


class _UsageError(ConeRadonError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _check_finite(name: str, values) -> None:
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        bad = int(np.size(arr) - np.count_nonzero(np.isfinite(arr)))
        raise NumericalError(f"{bad} non-finite value(s) in {name}")


def _pair(text: str):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def _add_volume_flags(sp):
    g = sp.add_argument_group("volume grid (overrides the config)")
    g.add_argument("--x-extent", type=_pair, metavar="LO,HI")
    g.add_argument("--y-extent", type=_pair, metavar="LO,HI")
    g.add_argument("--n-x", type=int)
    g.add_argument("--n-y", type=int)


def _add_sino_flags(sp):
    g = sp.add_argument_group("sinogram grid (overrides the config)")
    g.add_argument("--u-extent", type=_pair, metavar="LO,HI")
    g.add_argument("--n-u", type=int)
    g.add_argument("--theta-min", type=float)
    g.add_argument("--theta-max", type=float)
    g.add_argument("--n-theta", type=int)


def _add_csv_flags(sp):
    sp.add_argument("--csv", metavar="PATH", help="also export one slice of the field as CSV")
    sp.add_argument("--csv-axis", type=int, default=-1, help="axis held fixed (default: y)")
    sp.add_argument("--csv-index", type=int, help="index along that axis (default: middle)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="coneradon", description="Conical Radon transform: phantoms, projection, reconstruction.")
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, help="cap on parallel worker threads")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("phantom", parents=[common], help="rasterize a configured phantom into a field file")
    sp.add_argument("config")
    sp.add_argument("-o", "--output", required=True)
    _add_volume_flags(sp)
    _add_csv_flags(sp)

    sp = sub.add_parser("forward", parents=[common], help="project a configured phantom into a sinogram file")
    sp.add_argument("config")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--p", type=float)
    _add_sino_flags(sp)

    sp = sub.add_parser("reconstruct", parents=[common], help="reconstruct a field from a sinogram file")
    sp.add_argument("sinogram")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--config", help="config supplying the volume grid and method settings")
    sp.add_argument("--p", type=float, help="expected weight exponent; must match the file")
    sp.add_argument("--method", choices=METHODS)
    sp.add_argument("--band-fraction", type=float)
    sp.add_argument("--window", choices=WINDOWS)
    sp.add_argument("--pad", type=int)
    sp.add_argument("--upsample", type=int)
    sp.add_argument("--sphere-nodes", type=int)
    _add_volume_flags(sp)
    _add_csv_flags(sp)

    sp = sub.add_parser("check-slice", parents=[common], help="compare both sides of the Fourier slice identity")
    sp.add_argument("field")
    sp.add_argument("sinogram")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--band-fraction", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("check-lemma", parents=[common], help="max deviation between R^(p) f and cos^p R^(0)(y^-p f)")
    sp.add_argument("config")
    sp.add_argument("--p", type=float, required=True)
    _add_sino_flags(sp)

    sp = sub.add_parser("diff", parents=[common], help="L2, relative L2 and max error of field A against reference B")
    sp.add_argument("a")
    sp.add_argument("b")
    return ap


def _volume_grid(args, cfg) -> VolumeGrid:
    base = cfg.volume if cfg is not None else None
    d = cfg.d if cfg is not None and cfg.d is not None else getattr(args, "_d", None)
    vals = {
        "x_extent": args.x_extent if args.x_extent is not None else (base.x_extent if base else None),
        "y_extent": args.y_extent if args.y_extent is not None else (base.y_extent if base else None),
        "n_x": args.n_x if args.n_x is not None else (base.n_x if base else None),
        "n_y": args.n_y if args.n_y is not None else (base.n_y if base else None),
    }
    missing = [k for k, v in vals.items() if v is None]
    if missing or d is None:
        raise ConfigError(f"volume grid incomplete, missing {', '.join(missing or ['d'])}")
    return VolumeGrid(d, vals["x_extent"], vals["y_extent"], vals["n_x"], vals["n_y"])


def _sinogram_grid(args, cfg) -> ConeSinogramGrid:
    base = cfg.sinogram
    vals = {
        "u_extent": args.u_extent if args.u_extent is not None else (base.u_extent if base else None),
        "n_u": args.n_u if args.n_u is not None else (base.n_u if base else None),
        "theta_min": args.theta_min if args.theta_min is not None else (base.theta_extent[0] if base else None),
        "theta_max": args.theta_max if args.theta_max is not None else (base.theta_extent[1] if base else None),
        "n_theta": args.n_theta if args.n_theta is not None else (base.n_theta if base else None),
    }
    missing = [k for k, v in vals.items() if v is None]
    if missing or cfg.d is None:
        raise ConfigError(f"sinogram grid incomplete, missing {', '.join(missing or ['d'])}")
    return ConeSinogramGrid(cfg.d, vals["u_extent"], vals["n_u"], (vals["theta_min"], vals["theta_max"]),
                            vals["n_theta"])


def _need_phantom(cfg):
    if cfg.phantom is None:
        raise ConfigError("config defines no [bump] sections")
    return cfg.phantom


def export_csv(path, field: VolumeField, axis: int = -1, index: int | None = None) -> None:
    """Write the slice ``index`` along ``axis`` as long-format CSV (coordinates, value)."""
    grid = field.grid
    d = grid.d
    axis = axis % d
    n = grid.shape[axis]
    index = n // 2 if index is None else index
    if not (0 <= index < n):
        raise ConfigError(f"csv index {index} out of range for axis {axis} with {n} nodes")
    names = [f"x{i + 1}" for i in range(d - 1)] + ["y"]
    axes = grid.axes()
    keep = [i for i in range(d) if i != axis]
    sl = np.take(field.values, index, axis=axis)
    mesh = np.meshgrid(*[axes[i] for i in keep], indexing="ij")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"{names[axis]}={axes[axis][index]:.17g}"])
        w.writerow([names[i] for i in keep] + ["value"])
        for row in zip(*[m.ravel() for m in mesh], sl.ravel()):
            w.writerow([f"{v:.17g}" for v in row])


def _cmd_phantom(args, out):
    cfg = load_config(args.config)
    field = rasterize(_need_phantom(cfg), _volume_grid(args, cfg))
    _check_finite("field", field.values)
    write_field(args.output, field)
    if args.csv:
        export_csv(args.csv, field, args.csv_axis, args.csv_index)
    print(f"wrote {args.output} shape={field.grid.shape}", file=out)


def _cmd_forward(args, out):
    cfg = load_config(args.config)
    phantom = _need_phantom(cfg)
    p = args.p if args.p is not None else (cfg.p if cfg.p is not None else 0.0)
    sino = forward_project(phantom, _sinogram_grid(args, cfg), p)
    _check_finite("sinogram", sino.values)
    write_sinogram(args.output, sino)
    print(f"wrote {args.output} shape={sino.grid.shape} p={p:g}", file=out)


def _cmd_reconstruct(args, out):
    sino = read_sinogram(args.sinogram)
    if args.p is not None and float(args.p) != sino.p:
        raise WeightError(f"--p {args.p:g} does not match the sinogram's p={sino.p:g}")
    cfg = load_config(args.config) if args.config else None
    if cfg is not None and cfg.d is not None and cfg.d != sino.grid.d:
        raise ConfigError(f"config is for d={cfg.d} but the sinogram has d={sino.grid.d}")
    args._d = sino.grid.d
    if cfg is not None and cfg.d is None:
        cfg.values["d"] = sino.grid.d
    grid = _volume_grid(args, cfg)
    base = cfg.reconstruction if cfg is not None else ReconstructionConfig()
    f = base.filter
    filt = FilterConfig(
        args.band_fraction if args.band_fraction is not None else f.band_fraction,
        args.window if args.window is not None else f.window,
        args.pad if args.pad is not None else f.pad_factor,
        args.upsample if args.upsample is not None else f.upsample,
    )
    rc = ReconstructionConfig(
        args.method if args.method is not None else base.method,
        filt,
        base.interpolation,
        args.sphere_nodes if args.sphere_nodes is not None else base.sphere_nodes,
    )
    field = reconstruct(sino, grid, rc)
    _check_finite("reconstruction", field.values)
    write_field(args.output, field)
    if args.csv:
        export_csv(args.csv, field, args.csv_axis, args.csv_index)
    print(f"wrote {args.output} shape={grid.shape} method={rc.method}", file=out)


def _cmd_check_slice(args, out):
    field = read_field(args.field)
    sino = read_sinogram(args.sinogram)
    samples = random_slice_samples(field.grid, sino.grid, args.samples, args.band_fraction, args.seed)
    report = check_slice_identity(field, sino, samples)
    _check_finite("slice report", np.concatenate([report.lhs, report.rhs, report.rel_err]))
    print(report.to_table(), file=out)


def _cmd_check_lemma(args, out):
    cfg = load_config(args.config)
    dev = lemma_deviation(_need_phantom(cfg), _sinogram_grid(args, cfg), args.p)
    _check_finite("deviation", dev)
    print(f"max_deviation = {dev:.6e}", file=out)


def _cmd_diff(args, out):
    a = read_field(args.a)
    b = read_field(args.b)
    err, rel = field_l2_error(a, b)
    mx = float(np.max(np.abs(a.values - b.values)))
    _check_finite("difference", [err, mx])
    print(f"l2 = {err:.6e}", file=out)
    print(f"relative_l2 = {0 if rel == 0 else format(rel, '.6e')}", file=out)
    print(f"max_abs = {mx:.6e}", file=out)


COMMANDS = {
    "phantom": _cmd_phantom,
    "forward": _cmd_forward,
    "reconstruct": _cmd_reconstruct,
    "check-slice": _cmd_check_slice,
    "check-lemma": _cmd_check_lemma,
    "diff": _cmd_diff,
}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        _kernels.set_threads(args.threads)
        COMMANDS[args.command](args, out)
    except NumericalError as exc:
        print(f"ERROR 2: {exc}", file=err)
        return 2
    except (ConeRadonError, OSError) as exc:
        print(f"ERROR 1: {exc}", file=err)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
