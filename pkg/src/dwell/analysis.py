"""
Composite pipelines: level splitting, critical coupling and curve tables.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .instanton import gap_series
from .model import DEFAULT_PRECISION, EVEN, ODD, BracketError, DomainError, NumericalError, TrialParams, context, fmt
from .pt import pt_series, trial_grid
from .reference import reference_eigen
from .trial import TrialFunction
from .varopt import cold_seed, optimize_trial

X_PLOT = 10.0


# --------------------------------------------------------------------------
# gap
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class GapReport:
    a: float
    mode: str
    ground: tuple            # partial sums E_1, E_1 + E_2, ...
    excited: tuple
    gaps: tuple              # gaps[k] = excited[k] - ground[k]; gaps[0] is the variational gap
    instanton: tuple
    deviations: tuple        # instanton partial sums vs the last gap
    params: dict = field(default_factory=dict)

    @property
    def best(self):
        return self.gaps[-1]

    def to_json(self, digits=20):
        ctx = context(DEFAULT_PRECISION)
        s = lambda v: fmt(ctx, v, digits)
        out = {
            "a": self.a,
            "mode": self.mode,
            "E_ground": [s(v) for v in self.ground],
            "E_excited": [s(v) for v in self.excited],
            "gap": [s(v) for v in self.gaps],
            "instanton": [s(v) for v in self.instanton],
            "deviation_percent": [ctx.nstr(100 * d, 4) for d in self.deviations],
        }
        if self.params:
            out["params"] = {k: v.as_dict() for k, v in self.params.items()}
        return out


def _pt_energies(a, params, K, bits):
    tf = TrialFunction(params, a, bits)
    return tuple(pt_series(tf, K, trial_grid(tf)).partial_sums)


def gap(a, K=1, mode="pt", *, even: TrialParams | None = None, odd: TrialParams | None = None,
        bits=DEFAULT_PRECISION, workers=2) -> GapReport:
    """Level splitting E_odd - E_even.

    In ``pt`` mode both series run to order K + 1 and gaps[k] is formed
    from the sums through E_(k+1); missing parameter sets are optimized.
    In ``reference`` mode the gap comes from two shooting solves.
    """
    if not a < 0:
        raise DomainError("the splitting is only meaningful for a < 0")
    if K < 1:
        raise DomainError("K must be >= 1")
    inst = gap_series(a, bits).partial_sums
    if mode == "reference":
        with ThreadPoolExecutor(workers) as pool:
            g, e = pool.map(lambda p: reference_eigen(a, p, bits=bits).energy, (EVEN, ODD))
        gaps = (e - g,)
        return GapReport(a, mode, (g,), (e,), gaps, inst, tuple(abs(s - gaps[-1]) / gaps[-1] for s in inst))
    if mode != "pt":
        raise DomainError(f"unknown mode {mode!r}")

    def pipeline(parity, p):
        if p is None:
            p = optimize_trial(a, parity, cold_seed(a, parity), precision_bits=bits).best
        return p, _pt_energies(a, p, K + 1, bits)

    with ThreadPoolExecutor(workers) as pool:
        (pe, ge), (po, eo) = pool.map(lambda args: pipeline(*args), ((EVEN, even), (ODD, odd)))
    gaps = tuple(x - y for x, y in zip(eo, ge))
    dev = tuple(abs(s - gaps[-1]) / abs(gaps[-1]) for s in inst)
    return GapReport(a, mode, ge, eo, gaps, inst, dev, {"even": pe, "odd": po})


# --------------------------------------------------------------------------
# critical coupling
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class CriticalResult:
    a_crit: object
    bracket: tuple
    iterations: int
    energy: object
    mode: str

    @property
    def m2_crit(self):
        """Same point for the unit quartic coupling g = 1."""
        return self.a_crit / context(DEFAULT_PRECISION).cbrt(4)

    def to_json(self, digits=15):
        ctx = context(DEFAULT_PRECISION)
        return {
            "a_crit": ctx.nstr(self.a_crit, digits),
            "m2_crit_g1": ctx.nstr(self.m2_crit, digits),
            "bracket": [ctx.nstr(b, digits) for b in self.bracket],
            "iterations": self.iterations,
            "E_at_root": fmt(ctx, self.energy, 5),
            "mode": self.mode,
        }


class _PTGround:
    """E_ground(a) from re-optimized trial functions with continuation seeding."""

    def __init__(self, K, bits):
        self.K, self.bits = K, bits
        self.seeds = {}

    def __call__(self, a):
        a = float(a)
        near = min(self.seeds, key=lambda b: abs(b - a)) if self.seeds else None
        seed = self.seeds[near] if near is not None else cold_seed(a, EVEN)
        res = optimize_trial(a, EVEN, seed, tol=1e-9, precision_bits=self.bits)
        self.seeds[a] = res.best
        return _pt_energies(a, res.best, self.K, self.bits)[-1]


def critical_a(tol=1e-10, *, mode="reference", bracket=(-5.0, -2.0), K=2, bits=DEFAULT_PRECISION) -> CriticalResult:
    """Coupling where the ground-state energy vanishes (Illinois iteration)."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    ctx = context(bits)
    if mode == "reference":
        f = lambda a: reference_eigen(float(a), EVEN, bits=bits, verify=False).energy
    elif mode == "pt":
        f = _PTGround(K, bits)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    lo, hi = (ctx.mpf(b) for b in bracket)
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise BracketError(f"E(a) does not change sign on [{bracket[0]}, {bracket[1]}]")
    it = 0
    a, fa = (lo, flo) if abs(flo) < abs(fhi) else (hi, fhi)
    while abs(hi - lo) > tol and abs(fa) > tol:
        it += 1
        if it > 100:
            raise NumericalError("critical coupling iteration did not converge")
        a = (lo * fhi - hi * flo) / (fhi - flo)
        # reference energies are float-rounded in a; stay on a float grid
        a = ctx.mpf(float(a))
        fa = f(a)
        if fa * fhi < 0:
            lo, flo = hi, fhi
        else:
            flo /= 2
        hi, fhi = a, fa
    return CriticalResult(a, (min(lo, hi), max(lo, hi)), it, fa, mode)


# --------------------------------------------------------------------------
# curves
# --------------------------------------------------------------------------
def curves(a, params: TrialParams, K=1, *, x_plot=X_PLOT, step=0.05, bits=DEFAULT_PRECISION):
    """Tables of y0 and y_1..y_K on [0, x_plot] as {name: [(x, value), ...]}."""
    tf = TrialFunction(params, a, bits)
    grid = trial_grid(tf, X=max(x_plot + 1.0, trial_grid(tf).X))
    state = pt_series(tf, K, grid)
    ctx = context(bits)
    n = int(round(x_plot / step))
    xs = [ctx.mpf(step) * i for i in range(n + 1)]
    # the odd y0 has a pole at the node, so its table starts after x = 0
    out = {"y0": [(x, tf.y0(x)) for x in xs if params.parity == EVEN or x > 0]}
    for k in range(1, K + 1):
        curve = state.y(k)
        out[f"y{k}"] = [(x, curve(x)) for x in xs]
    return out, state


def curves_csv(table, digits=20):
    """Render each curve as CSV text with header ``x,value``."""
    ctx = context(DEFAULT_PRECISION)
    texts = {}
    for name, rows in table.items():
        buf = io.StringIO()
        buf.write("x,value\n")
        for x, v in rows:
            buf.write(f"{ctx.nstr(x, 10)},{fmt(ctx, v, digits)}\n")
        texts[name] = buf.getvalue()
    return texts


def sign_changes(rows, xmin=0.0):
    vals = [v for x, v in rows if x > xmin]
    return sum(1 for u, v in zip(vals, vals[1:]) if u * v < 0)
