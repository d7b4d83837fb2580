"""Field sources and their sampled representation.

Three analytic sources are supported: unit-power Laguerre-Gauss modes with
radial index p = 0, Gaussian hosts carrying nested single-charge vortices
("pancakes"), and two-pearl vortex necklaces. All of them are evaluated at
the waist plane z = 0; propagated versions live in :mod:`oamkit.propagate`.

Lengths are carried in one arbitrary unit. Every weight computed downstream
depends only on ratios to the waist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaincc

TWO_PI = 2.0 * math.pi

# Relative power allowed outside the sampled window before rasterize refuses.
CLIP_TOLERANCE = 1e-6
DEFAULT_GRID = 512


class ClippingError(ValueError):
    """The requested sampling window cuts off a noticeable part of the beam."""


@dataclass(frozen=True)
class LgModeP0:
    """Laguerre-Gauss mode with winding number ``m`` and no radial nodes."""

    m: int
    w0: float = 1.0

    def __post_init__(self):
        if not self.w0 > 0:
            raise ValueError(f"waist must be positive, got {self.w0}")
        object.__setattr__(self, "m", int(self.m))


@dataclass(frozen=True)
class VortexPancake:
    """Gaussian host of waist ``w0`` with ``N`` nested unit-charge vortices.

    ``vortices`` holds ``(rho, phi)`` pairs. Angles are folded into
    ``[0, 2*pi)``. Coincident entries are allowed and encode a dislocation of
    higher charge.
    """

    w0: float = 1.0
    vortices: tuple = ()
    a0: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not self.w0 > 0:
            raise ValueError(f"waist must be positive, got {self.w0}")
        cleaned = []
        for rho, phi in self.vortices:
            rho, phi = float(rho), float(phi)
            if rho < 0 or not math.isfinite(rho):
                raise ValueError(f"vortex radius must be finite and >= 0, got {rho}")
            phi = phi % TWO_PI
            if phi >= TWO_PI:  # -tiny % 2pi rounds up to 2pi
                phi = 0.0
            cleaned.append((rho, phi))
        object.__setattr__(self, "vortices", tuple(cleaned))
        object.__setattr__(self, "a0", complex(self.a0))

    @property
    def n_vortices(self) -> int:
        return len(self.vortices)

    @property
    def roots(self) -> np.ndarray:
        """Vortex positions as complex numbers ``rho * exp(i phi)``."""
        return np.array([r * np.exp(1j * p) for r, p in self.vortices], dtype=complex)

    @classmethod
    def from_roots(cls, roots, w0=1.0, a0=1.0):
        roots = np.asarray(roots, dtype=complex)
        return cls(w0=w0, vortices=tuple((abs(z), np.angle(z)) for z in roots), a0=a0)

    def with_vortex(self, index: int, rho=None, phi=None) -> "VortexPancake":
        """Copy with one vortex moved."""
        vs = list(self.vortices)
        r, p = vs[index]
        vs[index] = (r if rho is None else rho, p if phi is None else phi)
        return VortexPancake(w0=self.w0, vortices=tuple(vs), a0=self.a0)


@dataclass(frozen=True)
class NecklaceSpec:
    """Two LG_{m0} pearls centred at ``x = -d/2`` and ``x = +d/2``."""

    m: int = 1
    w0: float = 1.0
    d: float = 0.0
    amp_a: complex = 1.0 + 0.0j
    amp_b: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not self.w0 > 0:
            raise ValueError(f"waist must be positive, got {self.w0}")
        if self.d < 0:
            raise ValueError(f"pearl separation must be >= 0, got {self.d}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "amp_a", complex(self.amp_a))
        object.__setattr__(self, "amp_b", complex(self.amp_b))


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex amplitude on a uniform Cartesian grid.

    ``values`` has shape ``(ny, nx)``; row ``j`` is the line ``y = y[j]``.
    Samples sit at cell centres, symmetric about ``origin``.
    """

    values: np.ndarray
    dx: float
    dy: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 2 or min(vals.shape) < 2:
            raise ValueError(f"need a 2-D grid of at least 2x2 samples, got {vals.shape}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("sample spacing must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.nx) - (self.nx - 1) / 2) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.ny) - (self.ny - 1) / 2) * self.dy

    @property
    def half_extent(self) -> tuple:
        """Half widths of the window measured to the outer cell boundaries."""
        return self.nx * self.dx / 2, self.ny * self.dy / 2

    def meshgrid(self):
        return np.meshgrid(self.x, self.y)

    def power(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.dx * self.dy)

    def replace_values(self, values) -> "SampledField":
        return SampledField(values, self.dx, self.dy, self.origin)


Source = Union[LgModeP0, VortexPancake, NecklaceSpec]


def elementary_symmetric_all(roots: Sequence[complex]) -> np.ndarray:
    """All elementary symmetric polynomials ``e_0 .. e_N`` of ``roots``.

    Built by multiplying out ``prod(1 + z_l t)`` one root at a time.
    """
    roots = np.asarray(roots, dtype=complex).ravel()
    e = np.zeros(len(roots) + 1, dtype=complex)
    e[0] = 1.0
    for i, z in enumerate(roots):
        # e_k <- e_k + z * e_{k-1}; the right side is built before assignment
        e[1 : i + 2] = e[1 : i + 2] + z * e[0 : i + 1]
    return e


def elementary_symmetric(roots: Sequence[complex], k: int) -> complex:
    """k-th elementary symmetric polynomial of ``roots``."""
    n = len(roots)
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    return complex(elementary_symmetric_all(roots)[k])


def lg_norm(m: int, w0: float) -> float:
    m = abs(m)
    return math.sqrt(2.0 / (math.pi * math.factorial(m))) / w0


def eval_lg_p0(mode: LgModeP0, rho, phi):
    """Unit-power LG_{m0} amplitude at the waist."""
    rho = np.asarray(rho, dtype=float)
    m = abs(mode.m)
    radial = (math.sqrt(2.0) * rho / mode.w0) ** m * np.exp(-(rho**2) / mode.w0**2)
    return lg_norm(m, mode.w0) * radial * np.exp(1j * mode.m * np.asarray(phi))


def _lg_p0_xy(m: int, w0: float, x, y):
    # Cartesian form; avoids the atan2 branch and is exact for m >= 0 or < 0.
    w = x + 1j * y if m >= 0 else x - 1j * y
    r2 = x * x + y * y
    return lg_norm(m, w0) * (math.sqrt(2.0) / w0) ** abs(m) * w ** abs(m) * np.exp(-r2 / w0**2)


def eval_pancake_xy(p: VortexPancake, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = x + 1j * y
    out = p.a0 * np.exp(-(x * x + y * y) / p.w0**2) + 0j
    for z in p.roots:
        out = out * (w - z)
    return out


def eval_pancake(p: VortexPancake, rho, phi):
    """Pancake amplitude ``a0 * prod(rho e^{i phi} - z_l) * exp(-rho^2/w0^2)``."""
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return eval_pancake_xy(p, rho * np.cos(phi), rho * np.sin(phi))


def eval_necklace(n: NecklaceSpec, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    half = n.d / 2
    return n.amp_a * _lg_p0_xy(n.m, n.w0, x + half, y) + n.amp_b * _lg_p0_xy(n.m, n.w0, x - half, y)


def eval_source_xy(source: Source, x, y):
    if isinstance(source, LgModeP0):
        return _lg_p0_xy(source.m, source.w0, np.asarray(x, float), np.asarray(y, float))
    if isinstance(source, VortexPancake):
        return eval_pancake_xy(source, x, y)
    if isinstance(source, NecklaceSpec):
        return eval_necklace(source, x, y)
    raise TypeError(f"unsupported source {type(source).__name__}")


def default_half_extent(source: Source) -> float:
    """Half width of the default window: 4 waists beyond the outermost feature."""
    if isinstance(source, VortexPancake):
        reach = max((r for r, _ in source.vortices), default=0.0)
    elif isinstance(source, NecklaceSpec):
        reach = source.d / 2
    else:
        reach = 0.0
    return max(4 * source.w0, reach + 4 * source.w0)


def _lg_tail(m: int, w0: float, radius: float) -> float:
    """Fraction of unit LG_{m0} power outside a centred circle."""
    if radius <= 0:
        return 1.0
    return float(gammaincc(abs(m) + 1, 2 * radius**2 / w0**2))


def clipped_fraction(source: Source, half_x: float, half_y: float, center=(0.0, 0.0)) -> float:
    """Upper estimate of the relative power falling outside a rectangular window.

    Uses the disc inscribed in the window around each beam centre; the true
    loss through the rectangle can only be smaller.
    """
    cx, cy = center

    def inscribed(bx, by):
        return min(half_x - abs(bx - cx), half_y - abs(by - cy))

    if isinstance(source, LgModeP0):
        return _lg_tail(source.m, source.w0, inscribed(0.0, 0.0))
    if isinstance(source, VortexPancake):
        # annuli are orthogonal across winding numbers, so the tail splits per mode
        from .spectrum import pancake_cn

        spec = pancake_cn(source)
        total = sum(spec.entries.values())
        if total == 0:
            return 0.0
        r = inscribed(0.0, 0.0)
        if r <= 0:
            return 1.0
        s = 2 * r**2 / source.w0**2
        return sum(c * float(gammaincc(n + 1, s)) for n, c in spec.entries.items()) / total
    if isinstance(source, NecklaceSpec):
        half = source.d / 2
        ta = _lg_tail(source.m, source.w0, inscribed(-half, 0.0))
        tb = _lg_tail(source.m, source.w0, inscribed(half, 0.0))
        outside = (abs(source.amp_a) * math.sqrt(ta) + abs(source.amp_b) * math.sqrt(tb)) ** 2
        total = necklace_power(source)
        if total <= 0:
            return 0.0
        return min(1.0, outside / total)
    raise TypeError(f"unsupported source {type(source).__name__}")


def necklace_power(n: NecklaceSpec) -> float:
    """Exact power of the two-pearl field.

    The overlap of two LG_{m0} modes displaced by ``d`` is
    ``exp(-d^2 / 2w0^2) * L_|m|(d^2 / 2w0^2)`` with ``L`` the Laguerre polynomial.
    """
    from scipy.special import eval_laguerre

    s = n.d**2 / (2 * n.w0**2)
    overlap = math.exp(-s) * float(eval_laguerre(abs(n.m), s))
    return abs(n.amp_a) ** 2 + abs(n.amp_b) ** 2 + 2 * (n.amp_a.conjugate() * n.amp_b).real * overlap


def rasterize(
    source: Source,
    nx: int = DEFAULT_GRID,
    ny: int | None = None,
    extent: float | None = None,
    center=(0.0, 0.0),
    check_clipping: bool = True,
) -> SampledField:
    """Sample an analytic source at cell centres.

    ``extent`` is the full side length of the window along the longer axis;
    cells are square. When omitted it follows :func:`default_half_extent`.
    """
    ny = nx if ny is None else ny
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2 samples per axis")
    if extent is None:
        extent = 2 * default_half_extent(source)
    if not extent > 0:
        raise ValueError(f"extent must be positive, got {extent}")
    h = extent / max(nx, ny)
    if check_clipping:
        lost = clipped_fraction(source, nx * h / 2, ny * h / 2, center)
        if lost > CLIP_TOLERANCE:
            raise ClippingError(
                f"window of {nx}x{ny} cells of size {h:.4g} clips an estimated "
                f"{lost:.3g} of the beam power (limit {CLIP_TOLERANCE:g})"
            )
    xs = center[0] + (np.arange(nx) - (nx - 1) / 2) * h
    ys = center[1] + (np.arange(ny) - (ny - 1) / 2) * h
    X, Y = np.meshgrid(xs, ys)
    return SampledField(eval_source_xy(source, X, Y), h, h, center)
