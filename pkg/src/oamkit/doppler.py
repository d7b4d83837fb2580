"""Rotational-Doppler readout of OAM weights.

A prism rotating at ``Omega`` shifts the frequency of the winding-``n``
component by ``2 n Omega``. Beating the shifted light against an unshifted
reference of unit amplitude gives an intensity whose lines sit at multiples
of ``2 Omega``. The line strengths are the autocorrelation of the field
amplitudes ``(1 + sqrt(P_0), sqrt(P_1), ...)``, which :func:`recover_weights`
inverts.

The intensity is real, so a winding ``n`` and ``-n`` produce the same beat.
Recovery therefore assumes non-negative winding numbers, which holds for
every pancake.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .spectrum import WeightVector

DEFAULT_PERIODS = 64
# Fraction of AC signal energy off the modelled lines that triggers a flag.
UNEXPLAINED_THRESHOLD = 1e-8


class LeakageError(ValueError):
    """The record does not span a whole number of beat periods."""


@dataclass(frozen=True)
class SidebandSpectrum:
    omega: float
    lines: tuple  # (n, delta_omega, weight)

    @property
    def n_max(self) -> int:
        return max(abs(n) for n, _, _ in self.lines)


@dataclass(frozen=True, eq=False)
class BeatSignal:
    t: np.ndarray
    intensity: np.ndarray

    @property
    def sample_rate(self) -> float:
        return 1.0 / (self.t[1] - self.t[0])

    @property
    def duration(self) -> float:
        return self.t.size / self.sample_rate


@dataclass(frozen=True)
class Recovery:
    weights: WeightVector
    unexplained: float
    model_residual: float

    @property
    def flagged(self) -> bool:
        return self.unexplained > UNEXPLAINED_THRESHOLD


def sidebands_from_weights(w: WeightVector, omega: float) -> SidebandSpectrum:
    if not omega > 0:
        raise ValueError(f"prism angular velocity must be positive, got {omega}")
    lines = tuple((n, 2 * n * omega, p) for n, p in w.weights.items() if p > 0)
    return SidebandSpectrum(omega, lines)


def default_duration(omega: float, periods: int = DEFAULT_PERIODS) -> float:
    """``periods`` beat periods of the fundamental ``2 Omega``."""
    return periods * math.pi / omega


def synthesize_beat_signal(s: SidebandSpectrum, duration: float | None = None,
                           sample_rate: float | None = None) -> BeatSignal:
    """Intensity ``|1 + sum_n sqrt(P_n) exp(i 2 n Omega t)|^2`` sampled uniformly."""
    if duration is None:
        duration = default_duration(s.omega)
    if not duration > 0:
        raise ValueError("duration must be positive")
    nyquist = 4 * s.omega * max(s.n_max, 1) / math.pi
    if sample_rate is None:
        sample_rate = 4 * nyquist
    if not sample_rate > nyquist:
        raise ValueError(f"sample rate {sample_rate:g} must exceed {nyquist:g} for the highest beat")
    count = int(round(duration * sample_rate))
    t = np.arange(count) / sample_rate
    field = np.ones_like(t, dtype=complex)
    for n, dw, p in s.lines:
        field += math.sqrt(p) * np.exp(1j * dw * t)
    return BeatSignal(t, np.abs(field) ** 2)


def _autocorrelation(e: np.ndarray) -> np.ndarray:
    m = e.size
    return np.array([e[: m - k] @ e[k:] for k in range(m)])


def recover_weights(signal: BeatSignal, omega: float, n_max: int) -> Recovery:
    """Estimate ``P_0 .. P_n_max`` from a reference-beat intensity record.

    Line strengths are read at the exact frequencies ``2 k Omega``; only
    magnitudes are estimated. Energy at other frequencies, e.g. from modes
    above ``n_max``, is reported as ``unexplained``.
    """
    if not omega > 0:
        raise ValueError("prism angular velocity must be positive")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    m = signal.intensity.size
    cycles = signal.duration * omega / math.pi
    if abs(cycles - round(cycles)) > 1e-6 * max(cycles, 1):
        raise LeakageError(f"record spans {cycles:.6g} beat periods; need a whole number to avoid leakage")
    cycles = int(round(cycles))
    if cycles < 1:
        raise LeakageError("record is shorter than one beat period")
    if n_max * cycles >= m // 2:
        raise ValueError("sample rate too low to resolve the requested lines")

    spec = np.fft.rfft(signal.intensity) / m
    line_bins = np.arange(n_max + 1) * cycles
    lines = spec[line_bins].real
    lines[1:] *= 2  # rfft keeps one of each +/- pair
    # I_k = sum_n e_n e_{n+k}; rfft gives I_0 at DC and 2 Re I_k at bin k*cycles
    acf = lines.copy()
    acf[1:] /= 2
    ac = np.abs(spec[1:]) ** 2
    off = np.ones(spec.size, dtype=bool)
    off[line_bins] = False
    off[0] = False
    unexplained = float(ac[off[1:]].sum() / ac.sum()) if ac.sum() > 0 else 0.0

    def residual(e):
        r = _autocorrelation(e) - acf
        norm = (e[0] - 1) ** 2 + e[1:] @ e[1:] - 1
        return np.append(r, norm)

    # first-order start: the reference beats dominate every line
    guess = np.clip(acf.copy(), 0, None)
    guess[0] = 1 + math.sqrt(max(0.0, 1 - guess[1:] @ guess[1:])) if n_max else 2.0
    lower = np.zeros(n_max + 1)
    lower[0] = 1.0
    upper = np.full(n_max + 1, np.inf)
    upper[0] = 2.0
    guess = np.clip(guess, lower, np.minimum(upper, 2.0))
    sol = least_squares(residual, guess, bounds=(lower, upper), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    e = sol.x
    p = np.concatenate([[(e[0] - 1) ** 2], e[1:] ** 2])
    p = p / p.sum()
    weights = {n: float(v) for n, v in enumerate(p)}
    nz = [n for n, v in weights.items() if v > 0]
    weights = {n: weights[n] for n in range(min(nz), max(nz) + 1)}
    return Recovery(WeightVector(weights), unexplained, float(np.abs(sol.fun).max()))
