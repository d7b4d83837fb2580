"""Inverse design of vortex pancakes with prescribed OAM weights.

Two vortices admit closed-form recipes: equal populations and the exact
suppression of one of the three projections. For any other vortex count the
weights are matched numerically with multistart Nelder-Mead over the
Cartesian vortex coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .fields import TWO_PI, VortexPancake, elementary_symmetric_all
from .spectrum import WeightVector, pancake_weights

DEFAULT_STARTS = 32
DEFAULT_MAX_ITER = 40000
INITIAL_RADIUS = 2.0  # in waists
SIMPLEX_SCALE = 0.3  # in waists
# Nelder-Mead is restarted from its own optimum until it stops moving.
MAX_RESTARTS = 20


class DesignError(ValueError):
    """The requested design is infeasible or malformed."""


@dataclass(frozen=True)
class DesignTarget:
    """Prescribed weights ``P_n`` for a pancake with ``N`` vortices."""

    weights: dict
    N: int
    tolerance: float = 1e-6

    def __post_init__(self):
        w = {int(n): float(p) for n, p in self.weights.items()}
        object.__setattr__(self, "weights", dict(sorted(w.items())))
        if self.N < 0:
            raise DesignError(f"vortex count must be >= 0, got {self.N}")
        if any(p < 0 for p in w.values()):
            raise DesignError("target weights must be non-negative")
        outside = [n for n, p in w.items() if p > 0 and not 0 <= n <= self.N]
        if outside:
            raise DesignError(f"a pancake with {self.N} vortices only occupies n = 0..{self.N}; got n = {outside}")
        if abs(sum(w.values()) - 1) > 1e-9:
            raise DesignError(f"target weights must sum to 1, got {sum(w.values())!r}")
        if not self.tolerance > 0:
            raise DesignError("tolerance must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.weights.get(n, 0.0) for n in range(self.N + 1)])


@dataclass(frozen=True)
class DesignResult:
    pancake: VortexPancake
    achieved: WeightVector
    residual: float
    trace: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return bool(self.trace.get("converged", False))


def equal_population_branches(w0: float, rho1: float) -> dict:
    """Candidate angle separations for the N = 2 equal-population pancake.

    ``"derived"`` solves C_1 = C_2 directly, ``cos(dphi) = (w0^2 - rho1^2 -
    rho2^2) / (2 rho1 rho2)``. ``"printed"`` is ``pi`` minus that angle, the
    form often quoted for this construction. Only ``"derived"`` equalises the
    populations; the acceptance suite checks both by quadrature.
    """
    if not rho1 > 0:
        raise DesignError("rho1 must be positive: a centred vortex forces C_0 = 0")
    rho2 = w0**2 / (math.sqrt(2) * rho1)
    cos_dphi = (w0**2 - rho1**2 - rho2**2) / (2 * rho1 * rho2)
    if abs(cos_dphi) > 1:
        raise DesignError(
            f"rho1 = {rho1:g} is infeasible: equal populations need |cos(dphi)| <= 1, got {cos_dphi:.6g}"
        )
    derived = math.acos(cos_dphi)
    return {"derived": derived, "printed": math.pi - derived}


def design_equal_populations_n2(w0: float, rho1: float, branch: str = "auto") -> VortexPancake:
    """Two-vortex pancake with P_0 = P_1 = P_2 = 1/3.

    ``rho1 * rho2 = w0^2 / sqrt(2)`` fixes C_0 = C_2 and the angle between the
    vortices fixes C_1 = C_2. With ``branch="auto"`` each candidate angle is
    scored against the target weights and the better one is returned.
    """
    rho2 = w0**2 / (math.sqrt(2) * rho1) if rho1 > 0 else math.inf
    branches = equal_population_branches(w0, rho1)
    if branch != "auto":
        if branch not in branches:
            raise DesignError(f"unknown branch {branch!r}")
        return VortexPancake(w0, ((rho1, branches[branch]), (rho2, 0.0)))

    def miss(dphi):
        p = VortexPancake(w0, ((rho1, dphi), (rho2, 0.0)))
        return np.abs(pancake_weights(p).as_array(0, 2) - 1 / 3).max()

    best = min(branches.values(), key=miss)
    return VortexPancake(w0, ((rho1, best), (rho2, 0.0)))


def _check_fraction(value: float, name: str):
    if not 0 < value <= 1:
        raise DesignError(f"{name} must lie in (0, 1], got {value}")


def design_suppress_p0(w0: float, p2: float) -> VortexPancake:
    """P_0 = 0 exactly: one vortex on axis, the other at ``w0 sqrt((1-P_2)/P_2)``."""
    _check_fraction(p2, "P_2")
    return VortexPancake(w0, ((0.0, 0.0), (w0 * math.sqrt((1 - p2) / p2), 0.0)))


def design_suppress_p1(w0: float, p2: float) -> VortexPancake:
    """P_1 = 0 exactly: two antipodal vortices at radius ``w0 ((1-P_2)/2P_2)^(1/4)``."""
    _check_fraction(p2, "P_2")
    rho = w0 * ((1 - p2) / (2 * p2)) ** 0.25
    return VortexPancake(w0, ((rho, math.pi), (rho, 0.0)))


def design_suppress_p2(w0: float, p1: float, rho2_cut: float) -> VortexPancake:
    """P_2 -> 0 asymptotically by parking the second vortex at ``rho2_cut``.

    The first vortex sits at ``w0 sqrt((1-P_1)/2P_1)``. The pair is placed a
    quarter turn apart, which removes the cross term from C_1 so that P_1
    only differs from its target by O((w0 / rho2_cut)^2).
    """
    _check_fraction(p1, "P_1")
    if rho2_cut < 10 * w0:
        raise DesignError(f"rho2_cut must be at least 10 w0 for the asymptotic recipe, got {rho2_cut / w0:g} w0")
    rho1 = w0 * math.sqrt((1 - p1) / (2 * p1))
    return VortexPancake(w0, ((rho1, math.pi / 2), (rho2_cut, 0.0)))


def suppress_p2_leak(w0: float, p1: float, rho2_cut: float) -> float:
    """Residual P_2 left by :func:`design_suppress_p2`, in closed form."""
    rho1_sq = w0**2 * (1 - p1) / (2 * p1)
    r2 = rho2_cut**2
    return w0**4 / (w0**4 + w0**2 * (rho1_sq + r2) + 2 * rho1_sq * r2)


def suppressing_position(p: VortexPancake, vortex_index: int, n: int) -> tuple:
    """Where to move one vortex so that mode ``n`` is emptied exactly.

    ``B_{N-n}`` is affine in any single root, ``B = z_j e'_{N-n-1} + e'_{N-n}``
    with primes denoting the other roots, so it has exactly one zero in
    ``z_j``. Returns ``(rho, phi)`` of that zero.
    """
    N = p.n_vortices
    if not 0 <= vortex_index < N:
        raise DesignError(f"vortex index {vortex_index} out of range for {N} vortices")
    if not 0 <= n <= N:
        raise DesignError(f"mode {n} is not in 0..{N}")
    k = N - n
    if k == 0:
        raise DesignError(f"mode {N} has B_0 = 1 and cannot be suppressed")
    rest = np.delete(p.roots, vortex_index)
    e = elementary_symmetric_all(rest)
    if e[k - 1] == 0:
        raise DesignError("the remaining vortices leave this mode independent of the chosen vortex")
    z = -e[k] / e[k - 1] if k <= len(rest) else 0.0
    return abs(z), float(np.angle(z)) % TWO_PI


class _Objective:
    """Squared weight error as a function of Cartesian vortex coordinates (in waists)."""

    def __init__(self, target: np.ndarray):
        self.target = target
        self.N = target.size - 1
        n = np.arange(self.N + 1)
        # log of n! (w0^2/2)^(n+1) with w0 = 1; the constant factor drops out
        self.log_scale = gammaln(n + 1) + (n + 1) * math.log(0.5)
        self.log_scale -= self.log_scale.max()
        self.scale = np.exp(self.log_scale)
        self.evaluations = 0

    def weights(self, x: np.ndarray) -> np.ndarray:
        N = self.N
        e = elementary_symmetric_all(x[:N] + 1j * x[N:])
        c = self.scale * np.abs(e[::-1]) ** 2
        return c / c.sum()

    def __call__(self, x: np.ndarray) -> float:
        self.evaluations += 1
        d = self.weights(x) - self.target
        return float(d @ d)


def _initial_configuration(N: int, seed: int, start: int) -> np.ndarray:
    # keyed on (seed, start) so that start k is the same whatever the total count
    rng = np.random.default_rng([seed, start])
    r = INITIAL_RADIUS * np.sqrt(rng.uniform(size=N))
    a = rng.uniform(0, TWO_PI, size=N)
    return np.concatenate([r * np.cos(a), r * np.sin(a)])


def _descend(obj: _Objective, x0: np.ndarray, max_iter: int) -> tuple:
    iterations = 0
    dim = x0.size
    for _ in range(MAX_RESTARTS):
        simplex = np.vstack([x0, x0 + SIMPLEX_SCALE * np.eye(dim)])
        res = minimize(
            obj,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "maxiter": max_iter,
                "maxfev": 2 * max_iter,
                "xatol": 1e-12,
                "fatol": 1e-24,
                "adaptive": True,
            },
        )
        iterations += res.nit
        moved = np.max(np.abs(res.x - x0))
        x0 = res.x
        if moved < 1e-10 or iterations >= max_iter:
            break
    return x0, iterations


def gauge_fix(p: VortexPancake) -> VortexPancake:
    """Canonical form: vortices by decreasing radius, the first one on phi = 0.

    Weights are unchanged by relabelling vortices or rotating them together.
    """
    vs = sorted(p.vortices, key=lambda v: (-round(v[0], 12), v[1]))
    if not vs:
        return p
    turn = vs[0][1] if vs[0][0] > 0 else 0.0
    return VortexPancake(p.w0, tuple((r, ph - turn) for r, ph in vs), p.a0)


def design_general(
    target: DesignTarget,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    w0: float = 1.0,
) -> DesignResult:
    """Find vortex positions whose weights match ``target`` in least squares.

    Every start runs to completion; the best start wins, earlier starts
    winning ties. Non-convergence is reported in the trace, not raised.
    """
    if starts < 1:
        raise DesignError("need at least one start")
    N = target.N
    goal = target.as_array()
    if N == 0:
        pancake = VortexPancake(w0, ())
        achieved = pancake_weights(pancake)
        return DesignResult(pancake, achieved, 0.0, {"starts": starts, "seed": seed, "iterations": 0,
                                                     "evaluations": 0, "best_start": 0, "converged": True})

    obj = _Objective(goal)
    best_x, best_val, best_start = None, math.inf, -1
    total_iter = 0
    for s in range(starts):
        x, nit = _descend(obj, _initial_configuration(N, seed, s), max_iter)
        total_iter += nit
        val = obj(x)
        if val < best_val:
            best_x, best_val, best_start = x, val, s

    pancake = gauge_fix(VortexPancake.from_roots(w0 * (best_x[:N] + 1j * best_x[N:]), w0=w0))
    achieved = pancake_weights(pancake)
    residual = float(np.abs(achieved.as_array(0, N) - goal).max())
    trace = {
        "starts": starts,
        "seed": seed,
        "max_iter": max_iter,
        "iterations": total_iter,
        "evaluations": obj.evaluations,
        "best_start": best_start,
        "objective": best_val,
        "converged": residual <= target.tolerance,
    }
    return DesignResult(pancake, achieved, residual, trace)


@dataclass(frozen=True, eq=False)
class ScanTable:
    """Weights ``P_n`` (columns n = 0..N) against one swept vortex coordinate."""

    parameter: str
    vortex_index: int
    values: np.ndarray
    weights: np.ndarray

    def column(self, n: int) -> np.ndarray:
        return self.weights[:, n]


def scan_parameter(p: VortexPancake, vortex_index: int, parameter: str, start: float, stop: float,
                   steps: int) -> ScanTable:
    """Sweep one coordinate of one vortex and record the weights at each step."""
    if parameter not in ("rho", "phi"):
        raise DesignError(f"only vortex coordinates 'rho' and 'phi' can be scanned, got {parameter!r}")
    if not 0 <= vortex_index < p.n_vortices:
        raise DesignError(f"vortex index {vortex_index} out of range for {p.n_vortices} vortices")
    if steps < 2:
        raise DesignError("a scan needs at least 2 steps")
    if parameter == "rho" and min(start, stop) < 0:
        raise DesignError("radius scan range must be non-negative")
    values = np.linspace(start, stop, steps)
    rows = []
    for v in values:
        moved = p.with_vortex(vortex_index, **{parameter: v})
        rows.append(pancake_weights(moved).as_array(0, p.n_vortices))
    return ScanTable(parameter, vortex_index, values, np.array(rows))
