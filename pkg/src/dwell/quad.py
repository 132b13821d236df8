"""
Composite Gauss-Legendre quadrature on a half-line panel grid, in
extended precision.

Everything here integrates over [0, X] and extends to the full line by
parity. Cumulative integrals use the exact integral of the per-panel
interpolating polynomial through the Gauss nodes (spectral integration),
so values at nodes are as accurate as the panel rule itself.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .model import EVEN, ODD, DomainError, QuadratureError, check_parity, context


# --------------------------------------------------------------------------
# reference-interval rules on [-1, 1]
# --------------------------------------------------------------------------
def _legendre_values(ctx, t, nmax):
    """[P_0(t), ..., P_nmax(t)] by the three-term recurrence."""
    out = [ctx.mpf(1), t]
    for m in range(1, nmax):
        out.append(((2 * m + 1) * t * out[m] - m * out[m - 1]) / (m + 1))
    return out[: nmax + 1]


@lru_cache(maxsize=None)
def gauss_legendre(n: int, bits: int):
    """Nodes and weights of the n-point Gauss-Legendre rule, ascending.

    Float64 nodes are polished by Newton's method on P_n at the target
    precision.
    """
    ctx = context(bits)
    guess, _ = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    eps = ctx.mpf(2) ** (-bits + 4)
    for g in guess:
        t = ctx.mpf(float(g))
        for _ in range(100):
            P = _legendre_values(ctx, t, n)
            dP = n * (t * P[n] - P[n - 1]) / (t * t - 1)
            dt = P[n] / dP
            t -= dt
            if abs(dt) < eps:
                break
        P = _legendre_values(ctx, t, n)
        dP = n * (t * P[n] - P[n - 1]) / (t * t - 1)
        nodes.append(t)
        weights.append(2 / ((1 - t * t) * dP * dP))
    return tuple(nodes), tuple(weights)


@dataclass(frozen=True)
class _RefRule:
    n: int
    bits: int

    @cached_property
    def nodes(self):
        return gauss_legendre(self.n, self.bits)[0]

    @cached_property
    def weights(self):
        return gauss_legendre(self.n, self.bits)[1]

    @cached_property
    def legendre_at_nodes(self):
        ctx = context(self.bits)
        return [_legendre_values(ctx, t, self.n) for t in self.nodes]

    def partial_row(self, t):
        """Row r with sum_j r_j f_j = int_{-1}^{t} p(s) ds for the interpolant p."""
        ctx = context(self.bits)
        Pt = _legendre_values(ctx, t, self.n)
        row = []
        for w, Pj in zip(self.weights, self.legendre_at_nodes):
            acc = (t + 1) / 2
            for m in range(1, self.n):
                acc += Pj[m] * (Pt[m + 1] - Pt[m - 1]) / 2
            row.append(w * acc)
        return row

    @cached_property
    def cumulative(self):
        return [self.partial_row(t) for t in self.nodes]

    @cached_property
    def reverse(self):
        return [[w - s for w, s in zip(self.weights, row)] for row in self.cumulative]

    @cached_property
    def embedded_weights(self):
        """Interpolatory weights on every other node (the half-order rule)."""
        ctx = context(self.bits)
        sub = self.nodes[::2]
        k = len(sub)
        M = ctx.matrix(k, k)
        rhs = ctx.matrix(k, 1)
        for i, t in enumerate(sub):
            P = _legendre_values(ctx, t, k)
            for m in range(k):
                M[m, i] = P[m]
        rhs[0] = 2
        sol = ctx.lu_solve(M, rhs)
        return [sol[i] for i in range(k)]

    @cached_property
    def bary(self):
        ctx = context(self.bits)
        return [(-1) ** j * ctx.sqrt((1 - t * t) * w) for j, (t, w) in enumerate(zip(self.nodes, self.weights))]


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class PanelGrid:
    """Breakpoints 0 = x_0 < ... < x_M = X with an n-point rule per panel."""

    breakpoints: tuple
    order: int = 32

    def __post_init__(self):
        b = tuple(float(v) for v in self.breakpoints)
        object.__setattr__(self, "breakpoints", b)
        if len(b) < 2 or b[0] != 0.0:
            raise DomainError("breakpoints must start at 0 and contain at least one panel")
        if any(b1 <= b0 for b0, b1 in zip(b, b[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if self.order < 4:
            raise DomainError("need at least 4 nodes per panel")

    @property
    def X(self) -> float:
        return self.breakpoints[-1]

    @property
    def panels(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def size(self) -> int:
        return self.panels * self.order

    def refined(self, factor=2) -> "PanelGrid":
        return PanelGrid(self.breakpoints, self.order * factor)

    def nodes(self, bits):
        return _grid_rule(self, bits)[0]

    def weights(self, bits):
        return _grid_rule(self, bits)[1]

    def nodes_f64(self):
        t, w = np.polynomial.legendre.leggauss(self.order)
        b = np.asarray(self.breakpoints)
        half = (b[1:] - b[:-1])[:, None] / 2
        mid = (b[1:] + b[:-1])[:, None] / 2
        return (mid + half * t).ravel(), (half * w).ravel()

    def panel_of(self, x) -> int:
        i = bisect.bisect_right(self.breakpoints, float(x)) - 1
        return min(max(i, 0), self.panels - 1)


@lru_cache(maxsize=64)
def _grid_rule(grid: PanelGrid, bits: int):
    ctx = context(bits)
    ref = _RefRule(grid.order, bits)
    nodes, weights = [], []
    for b0, b1 in zip(grid.breakpoints, grid.breakpoints[1:]):
        half = (ctx.mpf(b1) - ctx.mpf(b0)) / 2
        mid = (ctx.mpf(b1) + ctx.mpf(b0)) / 2
        nodes.extend(mid + half * t for t in ref.nodes)
        weights.extend(half * w for w in ref.weights)
    return tuple(nodes), tuple(weights)


def uniform_grid(X, panels, order=32) -> PanelGrid:
    return PanelGrid(tuple(X * i / panels for i in range(panels + 1)), order)


def adaptive_grid(slope, X, *, order=32, h_max=0.5, max_change=8.0, marks=()) -> PanelGrid:
    """Panels sized so that ``slope * width <= max_change`` and ``width <= h_max``.

    ``slope(x)`` is a float64 bound on |d/dx log w(x)| for the weight w the
    grid must resolve (typically 2|y0| for psi0^2). ``marks`` are points
    forced onto the breakpoint list (e.g. wavefunction peaks).
    """
    if not X > 0:
        raise DomainError("X must be positive")
    marks = sorted(m for m in marks if 0 < m < X)
    b = [0.0]
    x = 0.0
    while x < X:
        h = min(h_max, max_change / max(slope(x), 1e-12))
        h = min(h, max_change / max(slope(min(x + h, X)), 1e-12))
        nxt = min(x + h, X)
        for m in marks:
            if x < m < nxt:
                nxt = m
                break
        if X - nxt < 0.25 * h:
            nxt = X
        b.append(nxt)
        x = nxt
    return PanelGrid(tuple(b), order)


# --------------------------------------------------------------------------
# curves
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class CurveTable:
    """Function of x known at the grid nodes, interpolated per panel.

    Values for x < 0 follow from the parity tag.
    """

    grid: PanelGrid
    values: tuple
    parity: str = ODD
    bits: int = 192

    def __post_init__(self):
        check_parity(self.parity)
        if len(self.values) != self.grid.size:
            raise DomainError(f"expected {self.grid.size} values, got {len(self.values)}")

    @property
    def nodes(self):
        return self.grid.nodes(self.bits)

    def __call__(self, x):
        ctx = context(self.bits)
        x = ctx.mpf(x)
        if x == 0 and self.parity == ODD:
            return ctx.mpf(0)
        sign = 1
        if x < 0:
            x = -x
            sign = -1 if self.parity == ODD else 1
        if x > self.grid.X:
            raise DomainError(f"x={x} outside the tabulated range [0, {self.grid.X}]")
        p = self.grid.panel_of(x)
        n = self.grid.order
        vals = self.values[p * n:(p + 1) * n]
        panel_nodes = self.grid.nodes(self.bits)[p * n:(p + 1) * n]
        if x in panel_nodes:
            return sign * vals[panel_nodes.index(x)]
        b0, b1 = ctx.mpf(self.grid.breakpoints[p]), ctx.mpf(self.grid.breakpoints[p + 1])
        t = (2 * x - b0 - b1) / (b1 - b0)
        ref = _RefRule(n, self.bits)
        num = den = ctx.mpf(0)
        for tj, lam, v in zip(ref.nodes, ref.bary, vals):
            d = t - tj
            if d == 0:
                return sign * v
            q = lam / d
            num += q * v
            den += q
        return sign * num / den

    def to_csv(self, fh=None, xmax=None):
        """Write ``x,value`` rows for the nodes (up to `xmax`); return text if no handle."""
        own = fh is None
        fh = fh or io.StringIO()
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "value"])
        ctx = context(self.bits)
        for x, v in zip(self.nodes, self.values):
            if xmax is not None and x > xmax:
                break
            w.writerow([ctx.nstr(x, 20), ctx.nstr(v, 30)])
        return fh.getvalue() if own else None


@dataclass(frozen=True)
class IntegralTable(CurveTable):
    """Running integral F(x) = int_0^x f, kept together with the samples of f.

    Between nodes F is the exact integral of the panel interpolant of f, so
    F(x) + integrate_tail(f, grid, x) equals the full integral to rounding.
    """

    integrand: tuple = ()

    def __call__(self, x):
        ctx = context(self.bits)
        x = ctx.mpf(x)
        if x < 0:
            sign = -1 if self.parity == ODD else 1
            return sign * self(-x)
        if x > self.grid.X:
            raise DomainError(f"x={x} outside the tabulated range [0, {self.grid.X}]")
        p = self.grid.panel_of(x)
        n = self.grid.order
        b0, b1 = ctx.mpf(self.grid.breakpoints[p]), ctx.mpf(self.grid.breakpoints[p + 1])
        panel_nodes = self.grid.nodes(self.bits)[p * n:(p + 1) * n]
        if x in panel_nodes:
            return self.values[p * n + panel_nodes.index(x)]
        half = (b1 - b0) / 2
        ref = _RefRule(n, self.bits)
        seg = self.integrand[p * n:(p + 1) * n]
        # value at the panel start, recovered from the first node of the panel
        start = self.values[p * n] - half * ctx.fdot(ref.cumulative[0], seg)
        return start + half * ctx.fdot(ref.partial_row((2 * x - b0 - b1) / (b1 - b0)), seg)


# --------------------------------------------------------------------------
# integration
# --------------------------------------------------------------------------
def sample(f, grid: PanelGrid, bits: int):
    """Values of f at the grid nodes; f may already be a sequence of values."""
    ctx = context(bits)
    nodes = grid.nodes(bits)
    if callable(f):
        vals = []
        for x in nodes:
            v = f(x)
            if not ctx.isfinite(v):
                raise QuadratureError("non-finite integrand sample", x=ctx.nstr(x, 15))
            vals.append(v)
        return vals
    vals = list(f)
    if len(vals) != len(nodes):
        raise DomainError("value list does not match the grid")
    for x, v in zip(nodes, vals):
        if not ctx.isfinite(v):
            raise QuadratureError("non-finite integrand sample", x=ctx.nstr(x, 15))
    return vals


def integrate_half(f, grid: PanelGrid, bits=192):
    """int_0^X f with an error estimate from the embedded half-order rule."""
    ctx = context(bits)
    vals = sample(f, grid, bits)
    w = grid.weights(bits)
    n = grid.order
    ref = _RefRule(n, bits)
    emb = ref.embedded_weights
    total = ctx.fsum(wi * vi for wi, vi in zip(w, vals))
    err = ctx.mpf(0)
    for p, (b0, b1) in enumerate(zip(grid.breakpoints, grid.breakpoints[1:])):
        half = (ctx.mpf(b1) - ctx.mpf(b0)) / 2
        seg = vals[p * n:(p + 1) * n]
        full = ctx.fsum(wi * vi for wi, vi in zip(w[p * n:(p + 1) * n], seg))
        coarse = half * ctx.fsum(e * v for e, v in zip(emb, seg[::2]))
        err += abs(full - coarse)
    return total, err


def integrate_line(f, grid: PanelGrid, parity=EVEN, bits=192):
    """Full-line integral of an integrand of given parity: 2 int_0^X f, or 0 if odd."""
    check_parity(parity)
    ctx = context(bits)
    if parity == ODD:
        return ctx.mpf(0), ctx.mpf(0)
    val, err = integrate_half(f, grid, bits)
    return 2 * val, 2 * err


def integrate_cumulative(f, grid: PanelGrid, parity=EVEN, bits=192) -> CurveTable:
    """F(x) = int_0^x f at every node; F has the opposite parity to f."""
    check_parity(parity)
    vals = sample(f, grid, bits)
    F = cumulative_values(vals, grid, bits)
    return IntegralTable(grid, tuple(F), ODD if parity == EVEN else EVEN, bits, tuple(vals))


def cumulative_values(vals, grid: PanelGrid, bits=192):
    ctx = context(bits)
    n = grid.order
    ref = _RefRule(n, bits)
    S = ref.cumulative
    out = []
    base = ctx.mpf(0)
    for p, (b0, b1) in enumerate(zip(grid.breakpoints, grid.breakpoints[1:])):
        half = (ctx.mpf(b1) - ctx.mpf(b0)) / 2
        seg = vals[p * n:(p + 1) * n]
        for row in S:
            out.append(base + half * ctx.fdot(row, seg))
        base += half * ctx.fdot(ref.weights, seg)
    return out


def tail_values(vals, grid: PanelGrid, bits=192, beyond=0):
    """T(x_i) = int_{x_i}^X f (+ `beyond`) at every node, accumulated right to left."""
    ctx = context(bits)
    n = grid.order
    ref = _RefRule(n, bits)
    R = ref.reverse
    out = [None] * len(vals)
    base = ctx.mpf(beyond)
    for p in range(grid.panels - 1, -1, -1):
        b0, b1 = grid.breakpoints[p], grid.breakpoints[p + 1]
        half = (ctx.mpf(b1) - ctx.mpf(b0)) / 2
        seg = vals[p * n:(p + 1) * n]
        for i, row in enumerate(R):
            out[p * n + i] = base + half * ctx.fdot(row, seg)
        base += half * ctx.fdot(ref.weights, seg)
    return out


def integrate_tail(f, grid: PanelGrid, x, bits=192):
    """int_x^X f for any 0 <= x <= X."""
    ctx = context(bits)
    x = ctx.mpf(x)
    if x < 0 or x > grid.X:
        raise DomainError(f"x={x} outside [0, {grid.X}]")
    vals = sample(f, grid, bits)
    n = grid.order
    p = grid.panel_of(x)
    ref = _RefRule(n, bits)
    b0, b1 = ctx.mpf(grid.breakpoints[p]), ctx.mpf(grid.breakpoints[p + 1])
    half = (b1 - b0) / 2
    t = (2 * x - b0 - b1) / (b1 - b0)
    seg = vals[p * n:(p + 1) * n]
    row = ref.partial_row(t)
    inside = half * ctx.fdot([w - r for w, r in zip(ref.weights, row)], seg)
    rest = ctx.fsum(wi * vi for wi, vi in zip(grid.weights(bits)[(p + 1) * n:], vals[(p + 1) * n:]))
    return inside + rest


def log_spacing_hint(X, n_panels):
    """Geometric breakpoints on (0, X]; handy for integrands peaked at 0."""
    r = math.exp(math.log(1e3) / n_panels)
    pts = [X * (r ** i - 1) / (r ** n_panels - 1) for i in range(n_panels + 1)]
    return PanelGrid(tuple(pts))
