"""End-to-end acceptance criteria A1-A9.

Each test records a verdict through the ``criterion`` fixture; the pytest
summary prints one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from conftest import random_pancake
from oamkit.decompose import (
    energy_and_oam,
    locate_dislocations,
    net_topological_charge,
    spectrum_from_field,
)
from oamkit.design import (
    DesignTarget,
    design_equal_populations_n2,
    design_general,
    design_suppress_p0,
    design_suppress_p1,
    design_suppress_p2,
    equal_population_branches,
    scan_parameter,
    suppressing_position,
)
from oamkit.doppler import recover_weights, sidebands_from_weights, synthesize_beat_signal
from oamkit.fields import LgModeP0, NecklaceSpec, VortexPancake, rasterize
from oamkit.propagate import PropagationSpec, fresnel_propagate
from oamkit.spectrum import n2_closed_form, pancake_cn, pancake_weights, weights_from_cn

UNIFORM_11 = DesignTarget({n: 1 / 11 for n in range(11)}, N=10, tolerance=1e-3)


def numeric_weights(source, n_max):
    return weights_from_cn(spectrum_from_field(rasterize(source), n_max=n_max))


@pytest.fixture(scope="module")
def uniform_design():
    t = time.perf_counter()
    result = design_general(UNIFORM_11, starts=32, seed=0)
    return result, time.perf_counter() - t


def test_a1_analytic_vs_quadrature(criterion):
    rng = np.random.default_rng(1)
    worst, modes = 0.0, 0
    t = time.perf_counter()
    for i in range(200):
        n = 1 + i % 6
        p = random_pancake(rng, n)
        analytic = pancake_cn(p)
        numeric = spectrum_from_field(rasterize(p), n_max=n + 5)
        w = weights_from_cn(analytic)
        for k in range(n + 1):
            if w[k] > 1e-6:
                worst = max(worst, abs(numeric[k] - analytic[k]) / analytic[k])
                modes += 1
    elapsed = time.perf_counter() - t
    ok = worst < 1e-6 and elapsed < 120
    criterion("A1", ok, f"worst relative C_n error {worst:.2e} over {modes} modes, {elapsed:.1f} s")
    assert ok


def test_a2_two_vortex_closed_form(criterion):
    rng = np.random.default_rng(2)
    pancakes = [random_pancake(rng, 2) for _ in range(1000)]
    t = time.perf_counter()
    worst = 0.0
    for p in pancakes:
        general = pancake_cn(p)
        for n, c in enumerate(n2_closed_form(p)):
            worst = max(worst, abs(c - general[n]) / general[n])
    elapsed = time.perf_counter() - t
    ok = worst < 1e-12 and elapsed < 1
    criterion("A2", ok, f"worst relative error {worst:.2e}, {elapsed:.3f} s")
    assert ok


def test_a3_equal_populations_branch(criterion):
    w0, rho1 = 1.0, 2**-0.25
    p = design_equal_populations_n2(w0, rho1)
    analytic = np.abs(pancake_weights(p).as_array(0, 2) - 1 / 3).max()
    numeric = np.abs(numeric_weights(p, 7).as_array(0, 2) - 1 / 3).max()

    # settle the angle by quadrature alone: which candidate equalises the populations?
    rho2 = w0**2 / (math.sqrt(2) * rho1)
    misses = {}
    for name, dphi in equal_population_branches(w0, rho1).items():
        trial = VortexPancake(w0, ((rho1, dphi), (rho2, 0.0)))
        misses[name] = np.abs(numeric_weights(trial, 7).as_array(0, 2) - 1 / 3).max()
    winner = min(misses, key=misses.get)

    ok = analytic < 1e-12 and numeric < 1e-5 and winner == "derived" and misses["printed"] > 1e-2
    criterion(
        "A3",
        ok,
        f"analytic miss {analytic:.1e}, numeric miss {numeric:.1e}; quadrature picks the '{winner}' branch "
        f"(derived miss {misses['derived']:.1e}, pi-minus form miss {misses['printed']:.3f})",
    )
    assert ok


def test_a4_suppression_recipes(criterion):
    p0 = design_suppress_p0(1.0, 0.3)
    p1 = design_suppress_p1(1.0, 0.3)
    checks = {
        "P0 analytic": pancake_weights(p0)[0],
        "P0 numeric": numeric_weights(p0, 7)[0],
        "P1 analytic": pancake_weights(p1)[1],
        "P1 numeric": numeric_weights(p1, 7)[1],
    }
    p2 = design_suppress_p2(1.0, 0.5, 20.0)
    leak = pancake_weights(p2)[2]
    leak_numeric = numeric_weights(p2, 7)[2]
    half_half = design_suppress_p0(1.0, 0.5)
    w_half = pancake_weights(half_half).as_array(0, 2)

    ok = (
        max(checks["P0 analytic"], checks["P1 analytic"]) < 1e-12
        and max(checks["P0 numeric"], checks["P1 numeric"]) < 1e-8
        and leak < 2e-3
        and leak_numeric < 2e-3
        and half_half.vortices[1][0] == 1.0
        and np.abs(w_half - [0, 0.5, 0.5]).max() < 1e-12
    )
    summary = ", ".join(f"{k} {v:.1e}" for k, v in checks.items())
    criterion("A4", ok, f"{summary}; P2 leak at 20 w0 {leak:.2e} (numeric {leak_numeric:.2e}); (0,1/2,1/2) at rho2 = w0")
    assert ok


def test_a5_necklace_suite(criterion):
    expected = {0.0: 1, 1.0: 1, 2.0: 3, 6.0: 3}
    notes, ok = [], True
    for d, count in expected.items():
        f = rasterize(NecklaceSpec(1, 1.0, d))
        s = spectrum_from_field(f)
        w = weights_from_cn(s)
        found = locate_dislocations(f)
        net = net_topological_charge(f, d / 2 + 1.0)
        if d == 0:
            ok &= abs(w[1] - 1) < 1e-9
        else:
            even = max(s[n] for n in range(-32, 33, 2)) / max(s.entries.values())
            ok &= even < 1e-10
        ok &= len(found) == count and net == 1
        notes.append(f"d={d:g}: {len(found)} dislocations, net {net:+d}")
    criterion("A5", ok, "; ".join(notes))
    assert ok


def test_a6_z_invariance(criterion):
    p = random_pancake(np.random.default_rng(6), 3, w0=1.0)
    ref = pancake_weights(p)
    f0 = rasterize(p)
    wavelength = 0.5
    zr = PropagationSpec(wavelength, 0.0).rayleigh_range(p.w0)
    drift, power = 0.0, 0.0
    for frac in (0.25, 0.5, 1.0):
        f = fresnel_propagate(f0, PropagationSpec(wavelength, frac * zr))
        w = weights_from_cn(spectrum_from_field(f, n_max=8))
        drift = max(drift, max(abs(w[n] - ref[n]) / ref[n] for n in range(4) if ref[n] > 1e-6))
        power = max(power, abs(f.power() - f0.power()) / f0.power())
    ok = drift < 1e-3 and power < 1e-9
    criterion("A6", ok, f"max relative weight drift {drift:.2e}, power change {power:.1e}")
    assert ok


def test_a7_ten_vortex_design(criterion, uniform_design):
    result, elapsed = uniform_design
    # put vortex 1 on the circle through the exact P_4 null of the
    # other nine, then sweep its azimuth
    p = result.pancake
    rho, _ = suppressing_position(p, 0, 4)
    scan = scan_parameter(p.with_vortex(0, rho=rho), 0, "phi", 0, 2 * math.pi, 721)
    p4 = scan.column(4)
    ratio = np.median(p4) / p4.min()
    ok = result.residual < 1e-3 and ratio >= 100
    criterion(
        "A7",
        ok,
        f"uniform N=10 residual {result.residual:.1e} (best start {result.trace['best_start']}, {elapsed:.1f} s); "
        f"P_4 scan median/min {ratio:.1e} at phi = {scan.values[np.argmin(p4)]:.3f}",
    )
    assert ok


def test_a8_mean_oam(criterion):
    lg = {m: energy_and_oam(rasterize(LgModeP0(m, 1.0)), n_max=8)[1] for m in (-2, 1, 3)}
    gauss = rasterize(VortexPancake(1.0, ()), 256, extent=24.0)
    displaced = energy_and_oam(gauss, (1.0, 0.0), 12)[1]
    half = pancake_weights(VortexPancake(1.0, ((1 / math.sqrt(2), 0.7),))).mean_oam
    lg_err = max(abs(v - m) for m, v in lg.items())
    ok = lg_err < 1e-6 and abs(displaced) < 1e-6 and abs(half - 0.5) < 1e-9
    criterion("A8", ok, f"LG error {lg_err:.1e}, displaced Gaussian {displaced:.1e}, N=1 at w0/sqrt2 {half - 0.5:.1e}")
    assert ok


def test_a9_measurement_round_trip(criterion, uniform_design):
    states = {
        "a": pancake_weights(design_equal_populations_n2(1.0, 2**-0.25)),
        "b": pancake_weights(design_suppress_p0(1.0, 0.5)),
        "c": pancake_weights(design_suppress_p1(1.0, 0.5)),
        "d": pancake_weights(design_suppress_p2(1.0, 0.5, 20.0)),
        "N=10": uniform_design[0].achieved,
    }
    errors = {}
    for name, w in states.items():
        omega = 1.0
        sig = synthesize_beat_signal(sidebands_from_weights(w, omega))
        rec = recover_weights(sig, omega, max(w.weights)).weights
        errors[name] = max(abs(rec[n] - w[n]) for n in set(w.weights) | set(rec.weights))
    worst = max(errors.values())
    ok = worst < 1e-3
    criterion("A9", ok, "L-inf errors " + ", ".join(f"{k} {v:.1e}" for k, v in errors.items()))
    assert ok
