"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical cross-check failure,
4 file I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import design, doppler
from .decompose import (
    FieldInterpolator,
    WindingError,
    locate_dislocations,
    net_topological_charge,
    spectrum_from_field,
)
from .fields import ClippingError, NecklaceSpec, rasterize
from .fileio import (
    FormatError,
    fmt,
    load_necklace,
    load_pancake,
    read_field,
    read_json,
    result_to_dict,
    target_from_dict,
    write_dislocations,
    write_field,
    write_json,
    write_matrix,
    write_sidebands,
    write_spectrum,
    write_timeseries,
)
from .propagate import AliasingError, PropagationSpec, fresnel_propagate, propagate_pancake_analytic
from .spectrum import OamSpectrum, pancake_cn, pancake_weights, weights_from_cn

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CROSSCHECK = 3
EXIT_IO = 4

ANALYZE_TOLERANCE = 1e-4
DRIFT_TOLERANCE = 1e-3
SUITE_SEPARATIONS = (0.0, 1.0, 2.0, 6.0)


class CrossCheckError(RuntimeError):
    pass


def _pair(text: str) -> tuple:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    return a, b


def _grid(text: str) -> tuple:
    parts = text.split(",")
    try:
        if len(parts) == 2:
            return int(parts[0]), int(parts[1]), None
        if len(parts) == 3:
            return int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected NX,NY or NX,NY,EXTENT, got {text!r}")


def _grid_meta(f) -> str:
    return f"{f.nx}x{f.ny} cells of {fmt(f.dx)}"


def _rasterize(source, grid):
    nx, ny, extent = grid
    return rasterize(source, nx, ny, extent)


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _max_weight_gap(a: OamSpectrum, b: OamSpectrum) -> float:
    wa, wb = weights_from_cn(a), weights_from_cn(b)
    ns = set(wa.weights) | set(wb.weights)
    return max(abs(wa[n] - wb[n]) for n in ns)


def cmd_analyze(args) -> int:
    if not (args.pancake or args.field):
        raise ValueError("analyze needs --pancake and/or --field")
    meta = {}
    analytic = numeric = None
    if args.pancake:
        p = load_pancake(args.pancake)
        analytic = pancake_cn(p)
        f = read_field(args.field) if args.field else _rasterize(p, args.grid)
        nmax = args.nmax if args.nmax is not None else p.n_vortices + 5
    else:
        f = read_field(args.field)
        nmax = args.nmax if args.nmax is not None else 32
    numeric = spectrum_from_field(f, args.origin, nmax)
    meta.update(grid=_grid_meta(f), nmax=nmax, origin=args.origin or f.origin)
    result = numeric
    if analytic is not None:
        gap = _max_weight_gap(analytic, numeric)
        meta["crosscheck_max_weight_gap"] = fmt(gap)
        result = analytic
        if gap > ANALYZE_TOLERANCE:
            raise CrossCheckError(f"analytic and numeric weights differ by {gap:.3g} (limit {ANALYZE_TOLERANCE:g})")
    _emit_spectrum(args.out, result, meta)
    return EXIT_OK


def _emit_spectrum(path, s, meta):
    if path:
        write_spectrum(path, s, meta)
    else:
        from .fileio import spectrum_csv

        sys.stdout.write(spectrum_csv(s, meta))


def _necklace_report(n: NecklaceSpec, grid, nmax, out: Path, suffix: str) -> dict:
    f = _rasterize(n, grid)
    interp = FieldInterpolator(f)
    spec = spectrum_from_field(f, None, nmax, interpolator=interp)
    found = locate_dislocations(f)
    reach = max((math.hypot(x, y) for x, y, _ in found.dislocations), default=0.0)
    radius = min(reach + 0.5 * n.w0, 0.95 * min(f.half_extent))
    try:
        net = net_topological_charge(f, radius, interpolator=interp)
    except WindingError:
        net = None
    meta = {"d": fmt(n.d), "grid": _grid_meta(f), "nmax": nmax, "net_charge": net}
    write_spectrum(out / f"spectrum{suffix}.csv", spec, meta)
    write_dislocations(out / f"dislocations{suffix}.csv", found.dislocations)
    w = weights_from_cn(spec)
    even = max((p for k, p in w.weights.items() if k % 2 == 0), default=0.0)
    return {"d": n.d, "dislocations": len(found), "net_charge": net, "max_even_weight": even}


def cmd_necklace(args) -> int:
    base = load_necklace(args.necklace)
    out = _out_dir(args.out)
    if args.suite:
        specs = [NecklaceSpec(base.m, base.w0, d * base.w0, base.amp_a, base.amp_b) for d in SUITE_SEPARATIONS]
    else:
        specs = [base]
    for n in specs:
        suffix = f"_d{n.d / n.w0:g}" if args.suite else ""
        r = _necklace_report(n, args.grid, args.nmax or 32, out, suffix)
        print(f"d={fmt(r['d'])} dislocations={r['dislocations']} net_charge={r['net_charge']} "
              f"max_even_weight={r['max_even_weight']:.3g}")
    return EXIT_OK


def cmd_design(args) -> int:
    target = target_from_dict(read_json(args.target))
    result = design.design_general(target, starts=args.starts, seed=args.seed)
    doc = result_to_dict(result)
    doc["tolerance"] = target.tolerance
    if args.out:
        write_json(args.out, doc)
    print(f"residual={result.residual:.3g} converged={result.converged} best_start={result.trace['best_start']}")
    if not result.converged:
        raise CrossCheckError(f"residual {result.residual:.3g} exceeds tolerance {target.tolerance:g}")
    return EXIT_OK


def _load_source(args):
    if getattr(args, "pancake", None):
        return load_pancake(args.pancake)
    if getattr(args, "necklace", None):
        return load_necklace(args.necklace)
    raise ValueError("need --pancake or --necklace")


def cmd_render(args) -> int:
    source = _load_source(args)
    f = _rasterize(source, args.grid)
    out = _out_dir(args.out)
    data = np.abs(f.values) if args.what == "amplitude" else np.angle(f.values)
    write_matrix(out / f"{args.what}.csv", data)
    write_field(out / "field.oamf", f)
    return EXIT_OK


def cmd_scan(args) -> int:
    p = load_pancake(args.pancake)
    lo, hi = args.range if args.range else ((0.0, 2 * math.pi) if args.param == "phi" else (0.0, 4 * p.w0))
    table = design.scan_parameter(p, args.vortex, args.param, lo, hi, args.steps)
    header = ",".join([args.param] + [f"P_{n}" for n in range(p.n_vortices + 1)])
    rows = [header] + [",".join([fmt(v)] + [fmt(x) for x in row]) for v, row in zip(table.values, table.weights)]
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_propagate(args) -> int:
    spec = PropagationSpec(args.wavelength, args.z)
    pancake = load_pancake(args.pancake) if args.pancake else None
    if args.field:
        f0 = read_field(args.field)
    elif pancake is not None:
        f0 = _rasterize(pancake, args.grid)
    else:
        raise ValueError("propagate needs --field or --pancake")
    if args.analytic:
        if pancake is None:
            raise ValueError("--analytic needs --pancake")
        nx, ny, extent = args.grid
        f1 = propagate_pancake_analytic(pancake, spec, nx, ny, extent)
    else:
        f1 = fresnel_propagate(f0, spec)
    out = _out_dir(args.out)
    write_field(out / "field.oamf", f1)
    nmax = args.nmax if args.nmax is not None else (pancake.n_vortices + 5 if pancake else 32)
    after = spectrum_from_field(f1, None, nmax)
    meta = {"z": fmt(args.z), "wavelength": fmt(args.wavelength), "grid": _grid_meta(f1), "nmax": nmax}
    if pancake is not None:
        meta["rayleigh_range"] = fmt(spec.rayleigh_range(pancake.w0))
        ref = pancake_weights(pancake)
        got = weights_from_cn(after)
        drift = max(abs(got[n] - p) / p for n, p in ref.weights.items() if p > 1e-6)
        meta["max_relative_weight_drift"] = fmt(drift)
        write_spectrum(out / "spectrum.csv", after, meta)
        print(f"max relative weight drift {drift:.3g}")
        if drift > DRIFT_TOLERANCE:
            raise CrossCheckError(f"weights drifted by {drift:.3g} (limit {DRIFT_TOLERANCE:g})")
    else:
        write_spectrum(out / "spectrum.csv", after, meta)
    return EXIT_OK


def cmd_sidebands(args) -> int:
    if args.pancake:
        w = pancake_weights(load_pancake(args.pancake))
    elif args.target:
        t = target_from_dict(read_json(args.target))
        from .spectrum import WeightVector

        w = WeightVector({n: p for n, p in t.weights.items() if p > 0})
    else:
        raise ValueError("sidebands needs --pancake or --target")
    s = doppler.sidebands_from_weights(w, args.omega)
    if args.out:
        write_sidebands(args.out, s.lines)
    else:
        for n, dw, p in s.lines:
            print(f"{n},{fmt(dw)},{fmt(p)}")
    if args.beat:
        sig = doppler.synthesize_beat_signal(s)
        write_timeseries(args.beat, sig.t, sig.intensity)
        rec = doppler.recover_weights(sig, args.omega, max(w.weights))
        gap = max(abs(rec.weights[n] - w[n]) for n in w.weights)
        print(f"round-trip max weight error {gap:.3g}")
        if gap > 1e-3:
            raise CrossCheckError(f"recovered weights off by {gap:.3g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oamkit", description="OAM spectra and vortex-pancake design")
    sub = parser.add_subparsers(dest="command", required=True)
    grid_help = "grid as NX,NY[,EXTENT]; extent defaults to 4 waists beyond the outermost feature"

    a = sub.add_parser("analyze", help="OAM spectrum of a pancake spec and/or a field file")
    a.add_argument("--pancake")
    a.add_argument("--field")
    a.add_argument("--origin", type=_pair)
    a.add_argument("--nmax", type=int)
    a.add_argument("--grid", type=_grid, default=(512, 512, None), help=grid_help)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    n = sub.add_parser("necklace", help="spectrum and dislocations of a two-pearl necklace")
    n.add_argument("--necklace", required=True)
    n.add_argument("--grid", type=_grid, default=(512, 512, None), help=grid_help)
    n.add_argument("--nmax", type=int)
    n.add_argument("--suite", action="store_true", help="run separations 0, 1, 2, 6 waists")
    n.add_argument("--out", required=True, help="output directory")
    n.set_defaults(func=cmd_necklace)

    d = sub.add_parser("design", help="numerical inverse design for a target weight vector")
    d.add_argument("--target", required=True)
    d.add_argument("--starts", type=int, default=design.DEFAULT_STARTS)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out")
    d.set_defaults(func=cmd_design)

    r = sub.add_parser("render", help="sample a source and write amplitude or phase")
    r.add_argument("--pancake")
    r.add_argument("--necklace")
    r.add_argument("--what", choices=("amplitude", "phase"), default="amplitude")
    r.add_argument("--grid", type=_grid, default=(512, 512, None), help=grid_help)
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("scan", help="weights versus one vortex coordinate")
    s.add_argument("--pancake", required=True)
    s.add_argument("--vortex", type=int, default=0)
    s.add_argument("--param", default="phi")
    s.add_argument("--range", type=_pair)
    s.add_argument("--steps", type=int, default=361)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    p = sub.add_parser("propagate", help="free-space propagation and spectrum drift check")
    p.add_argument("--pancake")
    p.add_argument("--field")
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--wavelength", type=float, required=True)
    p.add_argument("--analytic", action="store_true", help="use the LG-mode expansion instead of the FFT")
    p.add_argument("--grid", type=_grid, default=(512, 512, None), help=grid_help)
    p.add_argument("--nmax", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_propagate)

    b = sub.add_parser("sidebands", help="rotational-Doppler sideband lines of a weight vector")
    b.add_argument("--pancake")
    b.add_argument("--target")
    b.add_argument("--omega", type=float, default=1.0)
    b.add_argument("--beat", help="also write the synthetic beat signal here")
    b.add_argument("--out")
    b.set_defaults(func=cmd_sidebands)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CrossCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, FormatError, ClippingError, AliasingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
