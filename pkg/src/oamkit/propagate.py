"""Free-space paraxial propagation.

Envelopes follow ``2ik du/dz + laplacian_perp(u) = 0``, so each plane wave
component picks up ``exp(-i (kx^2 + ky^2) z / 2k)``. The sampled propagator
applies that transfer function once; the analytic route carries every LG_{l0}
component of a pancake with its own waist growth, curvature and Gouy phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    CLIP_TOLERANCE,
    SampledField,
    VortexPancake,
    default_half_extent,
    lg_norm,
)
from .spectrum import pancake_lg_coefficients

# Relative energy allowed in spatial frequencies that would wrap around the window.
WRAP_TOLERANCE = 1e-10
BORDER_CELLS = 8


class AliasingError(ValueError):
    """The transfer-function chirp is under-sampled where the field has energy."""


@dataclass(frozen=True)
class PropagationSpec:
    wavelength: float
    z: float

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def k(self) -> float:
        return 2 * math.pi / self.wavelength

    def rayleigh_range(self, w0: float) -> float:
        return math.pi * w0**2 / self.wavelength


def _border_fraction(f: SampledField) -> float:
    p = np.abs(f.values) ** 2
    b = BORDER_CELLS
    inner = p[b:-b, b:-b].sum() if min(p.shape) > 2 * b else 0.0
    total = p.sum()
    return float((total - inner) / total) if total > 0 else 0.0


def fresnel_propagate(f: SampledField, spec: PropagationSpec) -> SampledField:
    """Propagate a sampled field by ``spec.z`` with the paraxial transfer function.

    Refuses fields with noticeable power along the window border and
    distances at which components carrying energy would travel more than half
    the window sideways, i.e. where the chirp ``k_perp^2 z / 2k`` is no longer
    sampled finely enough to keep them from wrapping around.
    """
    if _border_fraction(f) > CLIP_TOLERANCE:
        raise ValueError("field has noticeable power at the window border; enlarge the grid")
    U = np.fft.fft2(f.values)
    kx = 2 * np.pi * np.fft.fftfreq(f.nx, f.dx)
    ky = 2 * np.pi * np.fft.fftfreq(f.ny, f.dy)
    if spec.z != 0:
        power = np.abs(U) ** 2
        total = power.sum()
        half_x, half_y = f.half_extent
        kx_lim = half_x * spec.k / abs(spec.z)
        ky_lim = half_y * spec.k / abs(spec.z)
        wrap = power[:, np.abs(kx) > kx_lim].sum() + power[np.abs(ky) > ky_lim, :].sum()
        if total > 0 and wrap > WRAP_TOLERANCE * total:
            raise AliasingError(
                f"{wrap / total:.3g} of the energy sits at spatial frequencies that wrap around "
                f"the window over z = {spec.z:g}; enlarge the window"
            )
    KX, KY = np.meshgrid(kx, ky)
    H = np.exp(-1j * (KX**2 + KY**2) * spec.z / (2 * spec.k))
    return f.replace_values(np.fft.ifft2(U * H))


def lg_p0_at(m: int, w0: float, spec: PropagationSpec, x, y):
    """Unit-power LG_{m0} at distance ``spec.z`` from its waist."""
    zr = spec.rayleigh_range(w0)
    zeta = spec.z / zr
    w = w0 * math.sqrt(1 + zeta**2)
    gouy = math.atan(zeta)
    r2 = x * x + y * y
    # 1/R written without the singular R(0)
    inv_r = spec.z / (spec.z**2 + zr**2)
    wc = x + 1j * y if m >= 0 else x - 1j * y
    am = abs(m)
    return (
        lg_norm(am, w)
        * (math.sqrt(2) / w) ** am
        * wc**am
        * np.exp(-r2 / w**2)
        * np.exp(1j * spec.k * r2 * inv_r / 2)
        * np.exp(-1j * (am + 1) * gouy)
    )


def propagate_pancake_analytic(
    p: VortexPancake,
    spec: PropagationSpec,
    nx: int = 512,
    ny: int | None = None,
    extent: float | None = None,
) -> SampledField:
    """Sample a pancake at distance ``spec.z`` from the sum of its propagated LG modes."""
    ny = nx if ny is None else ny
    if extent is None:
        extent = 2 * default_half_extent(p)
    h = extent / max(nx, ny)
    xs = (np.arange(nx) - (nx - 1) / 2) * h
    ys = (np.arange(ny) - (ny - 1) / 2) * h
    X, Y = np.meshgrid(xs, ys)
    out = np.zeros_like(X, dtype=complex)
    for l, c in enumerate(pancake_lg_coefficients(p)):
        if c != 0:
            out += c * lg_p0_at(l, p.w0, spec, X, Y)
    return SampledField(out, h, h)
