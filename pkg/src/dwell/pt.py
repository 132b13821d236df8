"""
Logarithmic perturbation theory around an interpolating trial function.

With y = -(log psi)' the Schroedinger equation becomes y' - y^2 = E - V.
Splitting V = V0 + V1 (V0 = y0^2 - y0') and expanding y = sum y_k,
E = sum E_k (E0 = 0) gives, for k >= 1,

    y_k' - 2 y0 y_k = E_k - Q_k,      Q_1 = V1,  Q_k = -sum_{i=1}^{k-1} y_i y_{k-i}

    E_k = <Q_k> = int Q_k psi0^2 / int psi0^2
    y_k(x) psi0(x)^2 = int_0^x (E_k - Q_k) psi0^2 = -int_x^inf (E_k - Q_k) psi0^2

The second form of y_k is used to the right of the psi0 peak and the first
to its left, so each side is a sum of terms of one dominant scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .model import (
    EVEN,
    ODD,
    DomainError,
    QuadratureError,
    decimal_digits,
    default_cutoff,
    fmt,
    potential,
)
from .quad import (
    CurveTable,
    PanelGrid,
    adaptive_grid,
    cumulative_values,
    integrate_half,
    tail_values,
)
from .trial import TrialFunction

DEFAULT_ORDER = 3


# --------------------------------------------------------------------------
# grid construction
# --------------------------------------------------------------------------
def peak_location(tf: TrialFunction, X: float) -> float:
    """x >= 0 where |psi| is largest (float64 search, then bisection on y0)."""
    xs = np.linspace(1e-6, X, 20001)
    phi = tf.phi(xs, numpy=True)
    i = int(np.argmin(phi))
    if i == 0 and tf.parity == EVEN:
        return 0.0
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tf.y0(np.array([mid]), numpy=True)[0] < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def trial_grid(tf: TrialFunction, X=None, *, order=32, max_change=6.0, h_max=0.5) -> PanelGrid:
    """Panel grid on [0, X] resolving psi0^2 of the given trial function."""
    if X is None:
        X = default_cutoff(tf.a, decimal_digits(tf.precision_bits))
    odd = tf.parity == ODD

    def slope(x):
        x = max(x, 1e-8)
        y = tf.y0(np.array([x]), numpy=True)[0]
        if odd:
            y += 1.0 / x
        return 2.0 * abs(y) + 1.0

    peak = peak_location(tf, X)
    return adaptive_grid(slope, X, order=order, h_max=h_max, max_change=max_change, marks=(peak,))


# --------------------------------------------------------------------------
# state
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class _Base:
    """Zero-order data on the grid nodes, shared by every step."""

    tf: TrialFunction
    grid: PanelGrid

    @property
    def bits(self):
        return self.tf.precision_bits

    @cached_property
    def ctx(self):
        from .model import context
        return context(self.bits)

    @cached_property
    def nodes(self):
        return self.grid.nodes(self.bits)

    @cached_property
    def table(self):
        rows = [self.tf.all_at(x) for x in self.nodes]
        return {
            "phi": [r[0] for r in rows],
            "y0": [r[1] for r in rows],
            "v0": [r[3] for r in rows],
            "v1": [r[4] for r in rows],
        }

    @cached_property
    def ipeak(self):
        phi = self.table["phi"]
        return min(range(len(phi)), key=phi.__getitem__)

    @cached_property
    def weight(self):
        """psi0^2 scaled to 1 at the largest node value."""
        ctx = self.ctx
        p0 = self.table["phi"][self.ipeak]
        return [ctx.exp(-2 * (p - p0)) for p in self.table["phi"]]

    @cached_property
    def norm(self):
        return integrate_half(self.weight, self.grid, self.bits)

    @cached_property
    def edge(self):
        """phi, y0 at X, for the analytic tail beyond the cutoff."""
        ctx = self.ctx
        X = ctx.mpf(self.grid.X)
        phi, y0 = self.tf._eval(X, self.tf.ops(), 1)
        return phi, y0

    def mean(self, vals):
        """(<f>, err) for values of f at the nodes, averaged against psi0^2."""
        ctx = self.ctx
        num, err_n = integrate_half([v * w for v, w in zip(vals, self.weight)], self.grid, self.bits)
        den, err_d = self.norm
        val = num / den
        return val, (err_n + abs(val) * err_d) / den + ctx.eps * abs(val)

    def beyond(self, g_last):
        """int_X^inf of an integrand whose last node value is g_last (exponential tail)."""
        ctx = self.ctx
        phiX, y0X = self.edge
        drop = ctx.exp(-2 * (phiX - self.table["phi"][-1]))
        return g_last * drop / (2 * y0X)

    def solve(self, energy, q):
        """y at the nodes from y' - 2 y0 y = energy - q."""
        g = [(energy - qi) * w for qi, w in zip(q, self.weight)]
        left = cumulative_values(g, self.grid, self.bits)
        right = tail_values(g, self.grid, self.bits, beyond=self.beyond(g[-1]))
        ip = self.ipeak
        out = []
        for i, w in enumerate(self.weight):
            out.append(left[i] / w if i <= ip else -right[i] / w)
        return out, left, right


@dataclass(frozen=True)
class SeriesState:
    """Energies E_1..E_k and corrections y_1..y_k for one trial function."""

    tf: TrialFunction
    grid: PanelGrid
    energies: tuple = ()
    errors: tuple = ()
    curves: tuple = ()
    residuals: tuple = ()
    base: _Base = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.base is None:
            object.__setattr__(self, "base", _Base(self.tf, self.grid))

    @property
    def a(self):
        return self.tf.a

    @property
    def parity(self):
        return self.tf.parity

    @property
    def order(self):
        return len(self.energies)

    @property
    def ctx(self):
        return self.base.ctx

    @property
    def partial_sums(self):
        out, acc = [], self.ctx.mpf(0)
        for e in self.energies:
            acc += e
            out.append(acc)
        return out

    @property
    def energy(self):
        return self.partial_sums[-1]

    def y(self, k):
        return self.curves[k - 1]

    @cached_property
    def diagnostics(self):
        return diagnostics(self)

    def to_json(self, digits=None):
        ctx = self.ctx
        digits = digits or decimal_digits(self.tf.precision_bits) - 5
        s = lambda v: fmt(ctx, v, digits)
        d = self.diagnostics
        return {
            "a": self.a,
            "parity": self.parity,
            "params": self.tf.params.as_dict(),
            "precision_bits": self.tf.precision_bits,
            "cutoff": self.grid.X,
            "E": [s(e) for e in self.energies],
            "err_est": [fmt(ctx, e, 3) for e in self.errors],
            "partial_sums": [s(e) for e in self.partial_sums],
            "diagnostics": {k: (fmt(ctx, v, 12) if not isinstance(v, (int, float, str)) else v) for k, v in d.items()},
        }


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------
def rayleigh_energy(tf: TrialFunction, grid: PanelGrid | None = None, *, with_error=False):
    """Rayleigh quotient in gradient form, int (psi'^2 + V psi^2) / int psi^2."""
    base = _Base(tf, grid or trial_grid(tf))
    ctx = base.ctx
    a = ctx.mpf(tf.a)
    vals = [y * y + potential(a, x) for y, x in zip(base.table["y0"], base.nodes)]
    val, err = base.mean(vals)
    return (val, err) if with_error else val


def e1(tf: TrialFunction, grid: PanelGrid | None = None):
    """First correction <V1>; equals the Rayleigh quotient since E0 = 0."""
    base = _Base(tf, grid or trial_grid(tf))
    return base.mean(base.table["v1"])[0]


def start(tf: TrialFunction, grid: PanelGrid | None = None) -> SeriesState:
    return SeriesState(tf, grid or trial_grid(tf))


def pt_step(state: SeriesState) -> SeriesState:
    """Append E_k and y_k for k = state.order + 1."""
    base = state.base
    k = state.order + 1
    if k == 1:
        q = base.table["v1"]
    else:
        ys = [c.values for c in state.curves]
        q = [-state.ctx.fsum(ys[i - 1][j] * ys[k - i - 1][j] for i in range(1, k)) for j in range(len(base.nodes))]
    for x, v in zip(base.nodes, q):
        if not state.ctx.isfinite(v):
            raise QuadratureError(f"non-finite Q_{k}", x=state.ctx.nstr(x, 15))
    ek, err = base.mean(q)
    yk, left, right = base.solve(ek, q)
    # the two representations differ by the full integral, which E_k zeroes
    resid = abs(left[-1] + base.beyond((ek - q[-1]) * base.weight[-1]))
    curve = CurveTable(base.grid, tuple(yk), ODD, base.bits)
    return replace(
        state,
        energies=state.energies + (ek,),
        errors=state.errors + (err,),
        curves=state.curves + (curve,),
        residuals=state.residuals + (resid,),
        base=base,
    )


def pt_series(tf: TrialFunction, K: int = DEFAULT_ORDER, grid: PanelGrid | None = None) -> SeriesState:
    if K < 1:
        raise DomainError("K must be >= 1")
    state = start(tf, grid)
    for _ in range(K):
        state = pt_step(state)
    return state


def y1_stats(state: SeriesState, k: int = 1, *, plateau_to: float = 1.0):
    """(max|y_k|, argmax, max|y_k| on [0, plateau_to]) over the grid nodes."""
    if state.order < k:
        raise DomainError(f"state holds only {state.order} corrections")
    ys = state.y(k).values
    xs = state.base.nodes
    i = max(range(len(ys)), key=lambda j: abs(ys[j]))
    plateau = max((abs(v) for x, v in zip(xs, ys) if x <= plateau_to), default=state.ctx.mpf(0))
    return abs(ys[i]), xs[i], plateau


def y1_far(state: SeriesState, x):
    """y_1 at any x > 0 from the exact tail integral (also beyond the grid).

    The integral runs in t >= x with weight exp(-2(phi(t) - phi(x))); V1 is
    known in closed form, so no tabulated data enter.
    """
    if state.order < 1:
        raise DomainError("E_1 not computed yet")
    tf = state.tf
    ctx = state.ctx
    x = ctx.mpf(x)
    if x <= 0:
        raise DomainError("x must be positive")
    E1 = state.energies[0]
    phix, y0x = tf._eval(x, tf.ops(), 1)
    scale = 1 / (2 * abs(y0x))

    def f(t):
        phi, _, _, _, v1 = tf.all_at(t)
        return (E1 - v1) * ctx.exp(-2 * (phi - phix))

    pts = [x + scale * c for c in (0, 1, 4, 16, 64)] + [ctx.inf]
    return -ctx.quad(f, pts)


def subordination_radius(state: SeriesState):
    """(R, sup_{x>R} |V1/V0|) with R the last node where |V1/V0| >= 1."""
    t = state.base.table
    ratios = [abs(v1 / v0) if v0 != 0 else state.ctx.inf for v0, v1 in zip(t["v0"], t["v1"])]
    last = -1
    for i, r in enumerate(ratios):
        if r >= 1:
            last = i
    R = state.base.nodes[last] if last >= 0 else state.ctx.mpf(0)
    sup = max(ratios[last + 1:], default=state.ctx.mpf(0))
    return R, sup


def diagnostics(state: SeriesState) -> dict:
    d = {}
    if state.order >= 1:
        m, xm, plat = y1_stats(state)
        d.update(max_abs_y1=m, argmax_y1=xm, plateau_y1=plat)
        d["max_residual"] = max(state.residuals)
    R, sup = subordination_radius(state)
    d.update(subordination_R=R, sup_ratio_beyond_R=sup)
    return d


def node_parity_error(curve: CurveTable, samples=(0.3, 1.1, 2.7)):
    """Largest |y(x) + y(-x)| over sample points (odd curves give zero)."""
    return max(abs(curve(x) + curve(-x)) for x in samples if x <= curve.grid.X)
