"""Variational minimization of the trial energy over (A, D, alpha)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .model import EVEN, ODD, DomainError, QuadratureError, TrialParams, check_parity, default_cutoff
from .pt import rayleigh_energy, trial_grid
from .trial import TrialFunction

ALPHA_FLOOR = 1e-8


def cold_seed(a, parity=EVEN) -> TrialParams:
    """Rough starting point: D = 4, A = -9 + 6a (capped), alpha from the well depth."""
    A = -9.0 + 6.0 * a if a > -2 else -9.0 + 14.0 * a
    alpha = 3.0 if a > -2 else 2.4 * abs(a)
    return TrialParams(A=A, D=4.0 if a > -2 else 6.0, alpha=alpha, parity=parity)


class FastObjective:
    """Float64 Rayleigh quotient on a fixed Gauss-Legendre grid."""

    def __init__(self, a, parity, seed: TrialParams, X=None):
        self.a = float(a)
        self.parity = parity
        X = X or default_cutoff(a, 16)
        tf = TrialFunction(seed, a)
        self.grid = trial_grid(tf, X, max_change=3.0, h_max=0.25)
        self.x, self.w = self.grid.nodes_f64()
        self.V = self.a * self.x ** 2 + 2 * self.x ** 4
        self.calls = 0

    def __call__(self, A, D, alpha):
        self.calls += 1
        tf = TrialFunction(TrialParams(A, D, alpha, self.parity), self.a)
        phi, y0 = tf._eval(self.x, tf.ops(numpy=True), 1)
        wt = np.exp(-2 * (phi - phi.min())) * self.w
        val = np.dot(y0 * y0 + self.V, wt) / wt.sum()
        if not math.isfinite(val):
            raise QuadratureError(f"non-finite objective at A={A}, D={D}, alpha={alpha}")
        return float(val)


@dataclass(frozen=True)
class OptimizeResult:
    best: TrialParams
    energy: object
    iterations: int
    evaluations: int
    simplex_diameter: float
    converged: bool
    history: tuple = field(default=(), repr=False)

    def to_json(self, digits=25):
        from .model import context, fmt
        ctx = context(192)
        return {
            "params": self.best.as_dict(),
            "energy": fmt(ctx, self.energy, digits),
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "simplex_diameter": self.simplex_diameter,
            "converged": self.converged,
        }


def _diameter(simplex):
    """Largest coordinate offset from the best vertex (the size scipy tests against xatol)."""
    s = np.asarray(simplex)
    return float(np.max(np.abs(s[1:] - s[0])))


def optimize_trial(a, parity=EVEN, seed: TrialParams | None = None, tol=1e-7, *, maxiter=20000,
                   precision_bits=192, restart=True) -> OptimizeResult:
    """Nelder-Mead on (A, D, alpha), then a full-precision re-evaluation.

    The search runs in coordinates scaled by the seed magnitudes, so `tol`
    is a relative simplex size.
    """
    check_parity(parity)
    if not tol > 0:
        raise DomainError("tol must be positive")
    seed = seed or cold_seed(a, parity)
    if seed.parity != parity:
        raise DomainError("seed parity does not match the requested parity")
    obj = FastObjective(a, parity, seed)
    scale = np.array([max(abs(seed.A), 1.0), max(abs(seed.D), 1.0), max(abs(seed.alpha), 1.0)])
    floor = ALPHA_FLOOR if parity == ODD else 0.0
    bounds = [(None, None), (None, None), (floor / scale[2], None)]
    history = []

    def f(z):
        A, D, al = z * scale
        return obj(A, abs(D) or 1e-12, max(al, floor))

    def callback(xk, *args):
        history.append(best[0])

    best = [math.inf]

    def tracked(z):
        v = f(z)
        if v < best[0]:
            best[0] = v
        return v

    def run(z0, simplex=None):
        opts = {"xatol": tol, "fatol": ftol, "maxiter": maxiter, "maxfev": 4 * maxiter}
        if simplex is not None:
            opts["initial_simplex"] = simplex
        return minimize(tracked, z0, method="Nelder-Mead", bounds=bounds, callback=callback, options=opts)

    z0 = np.array([seed.A, seed.D, seed.alpha]) / scale
    # float64 round-off of the objective sets the useful function tolerance
    ftol = 1e-14 * (1 + abs(f(z0)))
    res = run(z0)
    iters = res.nit
    if restart:
        zb = res.x
        simplex = [zb] + [zb + 0.1 * np.abs(zb[i]) * np.eye(3)[i] for i in range(3)]
        res2 = run(zb, np.array(simplex))
        iters += res2.nit
        if res2.fun <= res.fun:
            res = res2
    A, D, al = res.x * scale
    params = TrialParams(float(A), float(abs(D)), float(max(al, floor)), parity)
    diam = _diameter(res.final_simplex[0])
    tf = TrialFunction(params, a, precision_bits)
    energy = rayleigh_energy(tf, trial_grid(tf))
    return OptimizeResult(params, energy, iters, obj.calls, diam, bool(diam <= tol), tuple(history))
