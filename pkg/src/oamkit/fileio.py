"""Readers and writers for the on-disk formats.

* pancake / necklace specs and design targets/results: JSON
* sampled fields: ``OAMF1`` binary (magic line, JSON header line, raw
  little-endian complex128 samples, row-major)
* spectra, dislocations, sidebands, time series, scans: CSV with 17
  significant digits so values round-trip exactly
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .fields import NecklaceSpec, SampledField, VortexPancake
from .spectrum import OamSpectrum, WeightVector, weights_from_cn

MAGIC = b"OAMF1"


class FormatError(ValueError):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def _complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise FormatError(f"complex values are written as [re, im], got {v!r}")


def _pair(z: complex) -> list:
    return [z.real, z.imag]


def pancake_to_dict(p: VortexPancake) -> dict:
    return {"w0": p.w0, "a0": _pair(p.a0), "vortices": [[r, f] for r, f in p.vortices]}


def pancake_from_dict(d: dict) -> VortexPancake:
    try:
        vortices = [(float(r), float(f)) for r, f in d.get("vortices", [])]
        return VortexPancake(w0=float(d["w0"]), vortices=tuple(vortices), a0=_complex(d.get("a0", [1.0, 0.0])))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed pancake spec: {exc}") from exc


def necklace_to_dict(n: NecklaceSpec) -> dict:
    return {"m": n.m, "w0": n.w0, "d": n.d, "ampA": _pair(n.amp_a), "ampB": _pair(n.amp_b)}


def necklace_from_dict(d: dict) -> NecklaceSpec:
    try:
        return NecklaceSpec(
            m=int(d["m"]),
            w0=float(d["w0"]),
            d=float(d["d"]),
            amp_a=_complex(d.get("ampA", [1.0, 0.0])),
            amp_b=_complex(d.get("ampB", [1.0, 0.0])),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed necklace spec: {exc}") from exc


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_pancake(path) -> VortexPancake:
    return pancake_from_dict(read_json(path))


def load_necklace(path) -> NecklaceSpec:
    return necklace_from_dict(read_json(path))


def write_field(path, f: SampledField):
    header = {"nx": f.nx, "ny": f.ny, "dx": f.dx, "dy": f.dy, "ox": f.origin[0], "oy": f.origin[1]}
    data = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC + b"\n")
        fh.write(json.dumps(header).encode() + b"\n")
        fh.write(data)


def read_field(path) -> SampledField:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC + b"\n"):
        raise FormatError(f"{path}: missing OAMF1 magic")
    end = raw.index(b"\n", len(MAGIC) + 1)
    try:
        h = json.loads(raw[len(MAGIC) + 1 : end])
        nx, ny = int(h["nx"]), int(h["ny"])
    except (ValueError, KeyError) as exc:
        raise FormatError(f"{path}: bad OAMF1 header ({exc})") from exc
    body = raw[end + 1 :]
    if len(body) != nx * ny * 16:
        raise FormatError(f"{path}: expected {nx * ny * 16} data bytes, found {len(body)}")
    values = np.frombuffer(body, dtype="<c16").reshape(ny, nx).astype(complex)
    return SampledField(values, float(h["dx"]), float(h["dy"]), (float(h["ox"]), float(h["oy"])))


def spectrum_csv(s: OamSpectrum, meta: dict | None = None) -> str:
    """Rows ``n,C_n,P_n`` over the occupied range, then ``# mean_oam=...``.

    Any ``meta`` entries follow as further ``# key=value`` comment lines.
    """
    trimmed = s.trimmed()
    w = weights_from_cn(trimmed)
    lines = ["n,C_n,P_n"]
    for n, c in trimmed.entries.items():
        lines.append(f"{n},{fmt(c)},{fmt(w[n])}")
    lines.append(f"# mean_oam={fmt(w.mean_oam)}")
    for k, v in (meta or {}).items():
        lines.append(f"# {k}={v}")
    return "\n".join(lines) + "\n"


def write_spectrum(path, s: OamSpectrum, meta: dict | None = None):
    Path(path).write_text(spectrum_csv(s, meta))


def read_spectrum(path) -> tuple:
    """Return ``(OamSpectrum, WeightVector, comments)`` from a spectrum CSV."""
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != "n,C_n,P_n":
        raise FormatError(f"{path}: not a spectrum CSV")
    entries, weights, comments = {}, {}, {}
    for line in text[1:]:
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            comments[key] = val
            continue
        n, c, p = line.split(",")
        entries[int(n)] = float(c)
        weights[int(n)] = float(p)
    mean = float(comments["mean_oam"]) if "mean_oam" in comments else None
    return OamSpectrum(entries, "file"), WeightVector(weights, mean), comments


def write_dislocations(path, dislocations):
    lines = ["x,y,charge"] + [f"{fmt(x)},{fmt(y)},{q}" for x, y, q in dislocations]
    Path(path).write_text("\n".join(lines) + "\n")


def write_sidebands(path, lines_):
    rows = ["n,delta_omega,weight"] + [f"{n},{fmt(dw)},{fmt(p)}" for n, dw, p in lines_]
    Path(path).write_text("\n".join(rows) + "\n")


def write_timeseries(path, t, intensity):
    rows = ["t,intensity"] + [f"{fmt(a)},{fmt(b)}" for a, b in zip(t, intensity)]
    Path(path).write_text("\n".join(rows) + "\n")


def write_matrix(path, matrix):
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",", fmt="%.17g")


def target_from_dict(d: dict):
    from .design import DesignError, DesignTarget

    try:
        return DesignTarget(
            weights={int(k): float(v) for k, v in d["weights"].items()},
            N=int(d["N"]),
            tolerance=float(d.get("tolerance", 1e-6)),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise DesignError(f"malformed design target: {exc}") from exc


def result_to_dict(r) -> dict:
    trace = {k: (v if not isinstance(v, float) or math.isfinite(v) else None) for k, v in r.trace.items()}
    return {
        "pancake": pancake_to_dict(r.pancake),
        "achieved": {str(n): p for n, p in r.achieved.weights.items()},
        "mean_oam": r.achieved.mean_oam,
        "residual": r.residual,
        "seed": r.trace.get("seed"),
        "iterations": r.trace.get("iterations"),
        "trace": trace,
    }
