"""Spiral-harmonic analysis of sampled fields.

The field is resampled on concentric rings about a chosen origin, each ring
is Fourier transformed in angle, and the squared harmonic amplitudes are
integrated over radius. Ring samples come from band-limited (Fourier)
interpolation of the grid by default; bilinear interpolation is available but
is only good to roughly 1e-4 relative on typical grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .fields import SampledField
from .spectrum import OamSpectrum, weights_from_cn

DEFAULT_NMAX = 32
DEFAULT_NRADII = 192
MIN_RING_SAMPLES = 256
# Per-|k| energy (relative) below which a spatial frequency is dropped from the
# interpolation basis.
SPECTRAL_FLOOR = 1e-16
_CHUNK = 4096


class WindingError(ValueError):
    """Phase winding is undefined because the amplitude vanishes on the path."""


@dataclass(frozen=True, eq=False)
class AzimuthalProfileTable:
    """Harmonic amplitudes ``a_n(rho)`` on a set of radii.

    ``coefficients[i, j]`` is ``a_n`` for ``n = n_values[i]`` at ``radii[j]``.
    ``quad_weights`` integrate a function of rho over ``[0, radii_max]``.
    """

    n_values: np.ndarray
    radii: np.ndarray
    quad_weights: np.ndarray
    coefficients: np.ndarray
    origin: tuple
    truncated: bool

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.coefficients)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.coefficients)

    def row(self, n: int) -> np.ndarray:
        return self.coefficients[int(n) + int(self.n_values[-1])]


class FieldInterpolator:
    """Evaluate a sampled field at arbitrary points inside its window."""

    def __init__(self, f: SampledField, method: str = "spectral"):
        if method not in ("spectral", "bilinear"):
            raise ValueError(f"unknown interpolation method {method!r}")
        self.field = f
        self.method = method
        if method == "spectral":
            self._prepare_spectral()

    def _prepare_spectral(self):
        f = self.field
        spec = np.fft.fft2(f.values)
        power = np.abs(spec) ** 2
        total = power.sum()
        kx_idx = _trim_axis(power.sum(axis=0), total)
        ky_idx = _trim_axis(power.sum(axis=1), total)
        self._coef = spec[np.ix_(ky_idx, kx_idx)] / (f.nx * f.ny)
        self._kx = 2 * np.pi * np.fft.fftfreq(f.nx, f.dx)[kx_idx]
        self._ky = 2 * np.pi * np.fft.fftfreq(f.ny, f.dy)[ky_idx]
        self._x0 = f.x[0]
        self._y0 = f.y[0]

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        xf = np.broadcast_to(x, shape).ravel()
        yf = np.broadcast_to(y, shape).ravel()
        if self.method == "bilinear":
            out = self._bilinear(xf, yf)
        else:
            out = np.empty(xf.size, dtype=complex)
            for s in range(0, xf.size, _CHUNK):
                xs = xf[s : s + _CHUNK] - self._x0
                ys = yf[s : s + _CHUNK] - self._y0
                ex = np.exp(1j * np.outer(xs, self._kx))
                ey = np.exp(1j * np.outer(ys, self._ky))
                out[s : s + _CHUNK] = np.einsum("pj,pj->p", ey @ self._coef, ex)
        return out.reshape(shape)

    def _bilinear(self, x, y):
        f = self.field
        col = (x - f.x[0]) / f.dx
        row = (y - f.y[0]) / f.dy
        coords = np.vstack([row, col])
        re = ndimage.map_coordinates(f.values.real, coords, order=1, mode="nearest")
        im = ndimage.map_coordinates(f.values.imag, coords, order=1, mode="nearest")
        return re + 1j * im


def _trim_axis(marginal: np.ndarray, total: float) -> np.ndarray:
    """FFT indices up to the last |k| carrying more than a sliver of energy.

    The sample window is not exactly periodic, so the spectrum never decays
    to round-off; it levels off at a floor set by the tiny mismatch between
    opposite edges. Bins below ``SPECTRAL_FLOOR`` of the total are that floor.
    """
    n = marginal.size
    if total == 0:
        return np.array([0])
    freq = np.abs(np.round(np.fft.fftfreq(n) * n)).astype(int)
    by_k = np.bincount(freq, weights=marginal)
    significant = np.nonzero(by_k > SPECTRAL_FLOOR * total)[0]
    cutoff = significant[-1] if significant.size else 0
    return np.nonzero(freq <= cutoff)[0]


def _ring_geometry(f: SampledField, origin):
    ox, oy = origin
    xs, ys = f.x, f.y
    if not (xs[0] <= ox <= xs[-1] and ys[0] <= oy <= ys[-1]):
        raise ValueError(f"origin {origin} lies outside the sampled window")
    reach = min(ox - xs[0], xs[-1] - ox, oy - ys[0], ys[-1] - oy)
    nominal = min(xs[-1] - f.origin[0], f.origin[0] - xs[0], ys[-1] - f.origin[1], f.origin[1] - ys[0])
    return reach, reach < nominal * (1 - 1e-9)


def azimuthal_decompose(
    f: SampledField,
    origin=None,
    n_max: int = DEFAULT_NMAX,
    n_radii: int = DEFAULT_NRADII,
    ring_samples: int | None = None,
    interpolation: str = "spectral",
    interpolator: FieldInterpolator | None = None,
) -> AzimuthalProfileTable:
    """Project the field onto spiral harmonics ``exp(i n phi)`` ring by ring.

    Radii are Gauss-Legendre nodes on ``[0, R]`` where ``R`` is the largest
    circle about ``origin`` that stays inside the sample window. When the
    origin is off-centre this radius is shorter than the window and the
    table is flagged as truncated.
    """
    if origin is None:
        origin = f.origin
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if n_radii < 16:
        raise ValueError("n_radii must be at least 16")
    if ring_samples is None:
        ring_samples = max(MIN_RING_SAMPLES, 8 * n_max)
    if ring_samples < 2 * n_max + 1:
        raise ValueError("too few ring samples for the requested n_max")
    reach, truncated = _ring_geometry(f, origin)

    nodes, gw = np.polynomial.legendre.leggauss(n_radii)
    radii = 0.5 * reach * (nodes + 1)
    quad = 0.5 * reach * gw

    theta = 2 * np.pi * np.arange(ring_samples) / ring_samples
    X = origin[0] + np.outer(radii, np.cos(theta))
    Y = origin[1] + np.outer(radii, np.sin(theta))
    interp = interpolator or FieldInterpolator(f, interpolation)
    ring = interp(X, Y)

    # a_n = (2 pi)^{-1/2} * integral u e^{-i n phi} dphi
    harmonics = np.fft.fft(ring, axis=1) * (math.sqrt(2 * math.pi) / ring_samples)
    n_values = np.arange(-n_max, n_max + 1)
    coeffs = harmonics[:, n_values % ring_samples].T
    return AzimuthalProfileTable(n_values, radii, quad, coeffs, (float(origin[0]), float(origin[1])), truncated)


def spectrum_from_table(table: AzimuthalProfileTable) -> OamSpectrum:
    cn = (np.abs(table.coefficients) ** 2 * table.radii) @ table.quad_weights
    return OamSpectrum({int(n): float(c) for n, c in zip(table.n_values, cn)}, "numeric")


def spectrum_from_field(f: SampledField, origin=None, n_max: int = DEFAULT_NMAX, **kwargs) -> OamSpectrum:
    """Numeric ``C_n = int |a_n(rho)|^2 rho drho`` for ``|n| <= n_max``."""
    return spectrum_from_table(azimuthal_decompose(f, origin, n_max, **kwargs))


def energy_and_oam(f: SampledField, origin=None, n_max: int = DEFAULT_NMAX, **kwargs) -> tuple:
    """Total power (grid sum) and mean OAM per photon in units of hbar."""
    power = f.power()
    if power == 0:
        raise ValueError("field is identically zero")
    w = weights_from_cn(spectrum_from_field(f, origin, n_max, **kwargs))
    return power, w.mean_oam


@dataclass(frozen=True)
class DislocationSet:
    """Phase singularities found on a grid: ``(x, y, charge)`` triples."""

    dislocations: tuple
    cell_size: float

    def __len__(self):
        return len(self.dislocations)

    @property
    def total_charge(self) -> int:
        return sum(q for _, _, q in self.dislocations)

    @property
    def charges(self) -> list:
        return [q for _, _, q in self.dislocations]


def _wrapped_step(a, b):
    return np.angle(b * np.conj(a))


def locate_dislocations(f: SampledField, amplitude_floor: float = 1e-10) -> DislocationSet:
    """Find screw dislocations from the phase circulation around each 2x2 plaquette.

    Plaquettes whose four corners all sit below ``amplitude_floor`` times the
    field maximum are ignored; their phase is numerical noise. Detections in
    touching plaquettes are merged and their charges summed.
    """
    u = f.values
    peak = np.abs(u).max()
    if peak == 0:
        raise ValueError("field is identically zero")
    c00, c01, c11, c10 = u[:-1, :-1], u[:-1, 1:], u[1:, 1:], u[1:, :-1]
    circ = _wrapped_step(c00, c01) + _wrapped_step(c01, c11) + _wrapped_step(c11, c10) + _wrapped_step(c10, c00)
    charge = np.rint(circ / (2 * np.pi)).astype(int)
    corner_max = np.maximum.reduce([np.abs(c00), np.abs(c01), np.abs(c11), np.abs(c10)])
    charge[corner_max < amplitude_floor * peak] = 0

    labels, count = ndimage.label(charge != 0, structure=np.ones((3, 3), dtype=int))
    xc = (f.x[:-1] + f.x[1:]) / 2
    yc = (f.y[:-1] + f.y[1:]) / 2
    found = []
    for lab in range(1, count + 1):
        rows, cols = np.nonzero(labels == lab)
        q = int(charge[rows, cols].sum())
        if q == 0:
            continue
        found.append((float(xc[cols].mean()), float(yc[rows].mean()), q))
    found.sort(key=lambda d: (d[0], d[1]))
    return DislocationSet(tuple(found), float(max(f.dx, f.dy)))


def net_topological_charge(
    f: SampledField,
    radius: float,
    center=None,
    samples: int = 4096,
    amplitude_floor: float = 1e-10,
    interpolator: FieldInterpolator | None = None,
) -> int:
    """Total phase winding, in units of 2 pi, along a circle about ``center``."""
    if center is None:
        center = f.origin
    reach, _ = _ring_geometry(f, center)
    if not 0 < radius <= reach:
        raise ValueError(f"circle of radius {radius} does not fit inside the window (max {reach:.4g})")
    theta = 2 * np.pi * np.arange(samples + 1) / samples
    interp = interpolator or FieldInterpolator(f)
    path = interp(center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta))
    peak = np.abs(f.values).max()
    if np.abs(path).min() < amplitude_floor * peak:
        raise WindingError(f"amplitude vanishes on the circle of radius {radius}")
    steps = _wrapped_step(path[:-1], path[1:])
    if np.abs(steps).max() > np.pi / 2:
        raise WindingError("phase changes too fast along the path; increase samples")
    turns = steps.sum() / (2 * np.pi)
    return int(round(turns))
