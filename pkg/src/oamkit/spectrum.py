"""Closed-form OAM spectra of vortex pancakes and the weight algebra.

A pancake is a polynomial in ``w = x + i y`` times a Gaussian, so expanding
the product over its vortices gives the LG_{l0} content directly. The
expansion coefficients involve the elementary symmetric polynomials of the
vortex positions and their squared moduli are the spiral-harmonic powers
``C_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .fields import VortexPancake, elementary_symmetric_all

# Above this vortex count C_n is assembled in log space.
LOG_SPACE_THRESHOLD = 20


@dataclass(frozen=True)
class OamSpectrum:
    """Power ``C_n`` carried by each spiral harmonic ``exp(i n phi)``."""

    entries: dict
    source: str = "analytic"

    def __post_init__(self):
        clean = {}
        for n, c in sorted(self.entries.items()):
            c = float(c)
            if c < 0 or math.isnan(c):
                raise ValueError(f"C_{n} must be non-negative, got {c}")
            clean[int(n)] = c
        object.__setattr__(self, "entries", clean)

    @property
    def total(self) -> float:
        return math.fsum(self.entries.values())

    def __getitem__(self, n: int) -> float:
        return self.entries.get(n, 0.0)

    def occupied_range(self) -> tuple:
        """Closed index range between the first and last nonzero entry."""
        nz = [n for n, c in self.entries.items() if c > 0]
        if not nz:
            raise ValueError("spectrum is identically zero")
        return min(nz), max(nz)

    def trimmed(self) -> "OamSpectrum":
        lo, hi = self.occupied_range()
        return OamSpectrum({n: self[n] for n in range(lo, hi + 1)}, self.source)


@dataclass(frozen=True)
class WeightVector:
    """Occupation weights ``P_n`` and the mean OAM per photon in units of hbar.

    Only the closed range of occupied indices is stored; anything outside it
    has zero weight.
    """

    weights: dict
    mean_oam: float = field(default=None)

    def __post_init__(self):
        w = {int(n): float(p) for n, p in sorted(self.weights.items())}
        object.__setattr__(self, "weights", w)
        if self.mean_oam is None:
            object.__setattr__(self, "mean_oam", math.fsum(n * p for n, p in w.items()))

    def __getitem__(self, n: int) -> float:
        return self.weights.get(n, 0.0)

    def as_array(self, lo: int, hi: int) -> np.ndarray:
        return np.array([self[n] for n in range(lo, hi + 1)])


def pancake_lg_coefficients(p: VortexPancake) -> np.ndarray:
    """Coefficients of the unit-power LG_{l0} modes, l = 0..N, in a pancake."""
    n = p.n_vortices
    e = elementary_symmetric_all(p.roots)
    coef = np.empty(n + 1, dtype=complex)
    for l in range(n + 1):
        coef[l] = (
            p.a0
            * math.sqrt(math.pi)
            * (-1) ** (n - l)
            * (p.w0 / math.sqrt(2)) ** (l + 1)
            * math.sqrt(math.factorial(l))
            * e[n - l]
        )
    return coef


def pancake_log_cn(p: VortexPancake) -> np.ndarray:
    """Natural log of ``C_n`` for n = 0..N; ``-inf`` where the mode is empty."""
    n = p.n_vortices
    e = elementary_symmetric_all(p.roots)
    ls = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        log_b2 = 2 * np.log(np.abs(e[n - ls]))
        log_a2 = 2 * np.log(abs(p.a0)) if p.a0 != 0 else -np.inf
    return log_a2 + math.log(math.pi) + gammaln(ls + 1) + (ls + 1) * math.log(p.w0**2 / 2) + log_b2


def pancake_cn(p: VortexPancake) -> OamSpectrum:
    """Spiral-harmonic powers of a pancake; nonzero only for 0 <= n <= N."""
    n = p.n_vortices
    if n > LOG_SPACE_THRESHOLD:
        cn = np.exp(pancake_log_cn(p))
    else:
        e = elementary_symmetric_all(p.roots)
        cn = [
            abs(p.a0) ** 2 * math.pi * math.factorial(k) * (p.w0**2 / 2) ** (k + 1) * abs(e[n - k]) ** 2
            for k in range(n + 1)
        ]
    return OamSpectrum({k: c for k, c in enumerate(cn)}, "analytic")


def pancake_weights(p: VortexPancake) -> WeightVector:
    """Weights straight from the log-space powers; safe for large N."""
    logc = pancake_log_cn(p)
    if np.all(np.isneginf(logc)):
        raise ValueError("pancake field is identically zero")
    w = np.exp(logc - logsumexp(logc))
    return weights_from_cn(OamSpectrum(dict(enumerate(w)), "analytic"))


def n2_closed_form(p: VortexPancake) -> tuple:
    """Explicit ``(C_0, C_1, C_2)`` for a pancake with exactly two vortices."""
    if p.n_vortices != 2:
        raise ValueError(f"closed form needs exactly 2 vortices, got {p.n_vortices}")
    (r1, f1), (r2, f2) = p.vortices
    a2 = abs(p.a0) ** 2
    w0 = p.w0
    c0 = 0.5 * w0**2 * math.pi * r1**2 * r2**2 * a2
    c1 = 0.25 * w0**4 * math.pi * a2 * (r1**2 + r2**2 + 2 * r1 * r2 * math.cos(f1 - f2))
    c2 = 0.25 * w0**6 * math.pi * a2
    return c0, c1, c2


def weights_from_cn(s: OamSpectrum) -> WeightVector:
    """Normalise a spectrum to occupation weights and the mean OAM."""
    total = s.total
    if not total > 0:
        raise ValueError("cannot normalise an all-zero spectrum")
    lo, hi = s.occupied_range()
    weights = {n: s[n] / total for n in range(lo, hi + 1)}
    return WeightVector(weights)
