"""
Independent eigenvalue oracle for -psi'' + (a x^2 + 2 x^4) psi = E psi.

The parity-reduced problem on [0, X] is solved by shooting inward from X
with a Taylor-series integrator in extended precision; the potential is a
polynomial, so local Taylor coefficients follow from a short recursion.
A finite-difference matrix gives the starting energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import (
    DEFAULT_PRECISION,
    EVEN,
    ODD,
    BracketError,
    DomainError,
    NumericalError,
    check_parity,
    context,
    decimal_digits,
    default_cutoff,
    fmt,
)
from .quad import CurveTable, adaptive_grid


# --------------------------------------------------------------------------
# Taylor stepping
# --------------------------------------------------------------------------
def _vcoef(a, E, x0, b=2):
    """Taylor coefficients of a x^2 + b x^4 - E about x0."""
    x2 = x0 * x0
    return (
        a * x2 + b * x2 * x2 - E,
        2 * a * x0 + 4 * b * x2 * x0,
        a + 6 * b * x2,
        4 * b * x0,
        b,
    )


def _step(ctx, a, E, x0, psi, dpsi, h, tol, b=2):
    """Advance (psi, psi') from x0 to x0 + h."""
    v = _vcoef(a, E, x0, b)
    c = [psi, dpsi]
    s0, s1 = psi + dpsi * h, dpsi
    hk = h
    scale = abs(psi) + abs(dpsi * h)
    small = 0
    k = 0
    while True:
        acc = v[0] * c[k]
        for j in range(1, min(k, 4) + 1):
            acc += v[j] * c[k - j]
        ck2 = acc / ((k + 2) * (k + 1))
        c.append(ck2)
        hk1 = hk * h          # h^(k+2)
        term = ck2 * hk1
        s0 += term
        s1 += (k + 2) * ck2 * hk   # derivative term h^(k+1)
        hk = hk1
        if abs(term) <= tol * scale and abs((k + 2) * ck2 * hk1) <= tol * scale:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        k += 1
        if k > 2000:
            raise NumericalError("Taylor series failed to converge; reduce the step")
    return s0, s1, c


def _step_size(a, E, x, kappa, b=2):
    return kappa / (math.sqrt(abs(float(a * x * x + b * x ** 4 - E))) + 1.0)


def shoot(a, E, X, *, bits=DEFAULT_PRECISION, kappa=1.0, keep=False, quartic=2):
    """Integrate the decaying solution from X down to 0.

    Returns (psi(0), psi'(0), checkpoints). Checkpoints (x, psi, psi') are
    only collected when `keep` is set.
    """
    ctx = context(bits)
    a = ctx.mpf(a)
    E = ctx.mpf(E)
    x = ctx.mpf(X)
    # WKB slope: phi' = sqrt(b) x^2 + a/(2 sqrt(b)) + 1/x - (4bE + a^2)/(8 b^(3/2) x^2)
    b = ctx.mpf(quartic)
    rb = ctx.sqrt(b)
    slope = rb * x * x + a / (2 * rb) + 1 / x - (4 * b * E + a * a) / (8 * b * rb * x * x)
    psi, dpsi = ctx.mpf(1), -slope
    tol = ctx.eps
    pts = [(x, psi, dpsi)] if keep else None
    while x > 0:
        h = min(_step_size(float(a), float(E), float(x), kappa, quartic), float(x))
        h = ctx.mpf(h) if x - h > ctx.mpf(1e-30) else x
        psi, dpsi, _ = _step(ctx, a, E, x, psi, dpsi, -h, tol, b)
        x = x - h
        # keep magnitudes near 1 so the exponent does not run away
        m = abs(psi) + abs(dpsi)
        psi, dpsi = psi / m, dpsi / m
        if keep:
            pts.append((x, psi, dpsi, m))
    return psi, dpsi, pts


def _mismatch(psi0, dpsi0, parity):
    n = abs(psi0) + abs(dpsi0)
    return (dpsi0 if parity == EVEN else psi0) / n


# --------------------------------------------------------------------------
# finite-difference seed
# --------------------------------------------------------------------------
def fd_eigenvalue(a, parity=EVEN, level=0, X=None, n=6000, quartic=2):
    """Parity-reduced second-order finite differences (float64)."""
    check_parity(parity)
    if X is None:
        X = cutoff_for(a, 15, quartic)
    h = X / (n + 0.5)
    x = (np.arange(n) + 0.5) * h
    d = 2.0 / h ** 2 + a * x ** 2 + quartic * x ** 4
    d[0] += (-1.0 if parity == EVEN else 1.0) / h ** 2
    e = -np.ones(n - 1) / h ** 2
    w = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(level, level))
    return float(w[0])


# --------------------------------------------------------------------------
# solution
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ReferenceSolution:
    a: float
    parity: str
    level: int
    energy: object
    error: object
    X: float
    bits: int
    kappa: float
    iterations: int
    checkpoints: tuple = field(repr=False, default=())
    peak: tuple = field(repr=False, default=None)
    quartic: float = 2.0

    @property
    def ctx(self):
        return context(self.bits)

    def _raw(self, x):
        """(psi, psi') at 0 <= x <= X, unnormalized, by a Taylor step from a checkpoint."""
        ctx = self.ctx
        x = ctx.mpf(x)
        if x < 0 or x > self.X:
            raise DomainError(f"x={x} outside [0, {self.X}]")
        cps = self.checkpoints
        # checkpoints run from X down to 0; scale factors accumulate downward
        lo, hi = 0, len(cps) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if cps[mid][0] >= x:
                lo = mid
            else:
                hi = mid
        xc, p, dp, logscale = cps[lo]
        if x != xc:
            p, dp, _ = _step(ctx, ctx.mpf(self.a), self.energy, xc, p, dp, x - xc, ctx.eps, ctx.mpf(self.quartic))
        return p * ctx.exp(logscale), dp * ctx.exp(logscale)

    def psi(self, x):
        """Eigenfunction, peak-normalized (max |psi| = 1, positive for x > 0)."""
        ctx = self.ctx
        x = ctx.mpf(x)
        sign = 1
        if x < 0:
            x = -x
            sign = -1 if self.parity == ODD else 1
        return sign * self._raw(x)[0] / self.peak[1]

    def log_derivative(self, x):
        """-psi'/psi, the counterpart of the trial-function y0."""
        p, dp = self._raw(x)
        return -dp / p

    def eigenfunction(self, grid=None) -> CurveTable:
        if grid is None:
            grid = default_grid(self.a, self.X)
        vals = tuple(self.psi(x) for x in grid.nodes(self.bits))
        return CurveTable(grid, vals, self.parity, self.bits)

    def node_count(self, samples=2000):
        """Interior sign changes on (0, X)."""
        xs = np.linspace(0, self.X, samples + 2)[1:-1]
        vals = [self.psi(float(x)) for x in xs]
        return sum(1 for u, v in zip(vals, vals[1:]) if u * v < 0)

    def to_csv(self, fh=None, grid=None):
        return self.eigenfunction(grid).to_csv(fh)

    def to_json(self, digits=None):
        ctx = self.ctx
        digits = digits or decimal_digits(self.bits) - 10
        return {
            "a": self.a,
            "parity": self.parity,
            "level": self.level,
            "energy": fmt(ctx, self.energy, digits),
            "err_est": fmt(ctx, self.error, 3),
            "cutoff": self.X,
            "precision_bits": self.bits,
            "iterations": self.iterations,
        }


def cutoff_for(a, digits, quartic=2):
    """Cutoff for a general quartic coefficient, by scaling from the b = 2 rule."""
    s = (2 / quartic) ** (1 / 6)
    return default_cutoff(a * s ** 4 if quartic != 2 else a, digits) * s


def default_grid(a, X):
    r2 = math.sqrt(2)
    return adaptive_grid(lambda x: 2 * abs(r2 * x * x + a / (2 * r2)) + 2.0, X, h_max=0.25, max_change=6.0)


def _solve_energy(a, parity, level, X, bits, kappa, E_seed, tol, quartic=2):
    ctx = context(bits)
    f = lambda E: _mismatch(*shoot(a, E, X, bits=bits, kappa=kappa, quartic=quartic)[:2], parity)
    width = ctx.mpf(1e-4) * (1 + abs(E_seed))
    lo, hi = ctx.mpf(E_seed) - width, ctx.mpf(E_seed) + width
    flo, fhi = f(lo), f(hi)
    tries = 0
    while flo * fhi > 0:
        tries += 1
        if tries > 12:
            raise BracketError(
                f"no sign change of the boundary mismatch around E={E_seed}; widen the energy bracket"
            )
        width *= 4
        lo, hi = ctx.mpf(E_seed) - width, ctx.mpf(E_seed) + width
        flo, fhi = f(lo), f(hi)
    # Illinois false position: [lo, hi] always brackets the root
    it = 0
    best, fbest = (lo, flo) if abs(flo) < abs(fhi) else (hi, fhi)
    while abs(hi - lo) > tol * (1 + abs(best)) and abs(fbest) > 16 * ctx.eps:
        it += 1
        if it > 200:
            raise NumericalError("energy iteration did not converge")
        E = (lo * fhi - hi * flo) / (fhi - flo)
        fE = f(E)
        if abs(fE) < abs(fbest):
            best, fbest = E, fE
        if fE * fhi < 0:
            lo, flo = hi, fhi
        else:
            flo /= 2
        hi, fhi = E, fE
    return best, it


def reference_eigen(a, parity=EVEN, level=0, *, bits=DEFAULT_PRECISION, X=None, kappa=1.0, verify=True,
                    quartic=2):
    """Eigenvalue number `level` within one parity class.

    With `verify`, the energy is recomputed with half the step control and
    the difference is reported as the error estimate. `quartic` replaces
    the coefficient 2 of x^4 (used to cross-check the coupling rescaling).
    """
    check_parity(parity)
    if not math.isfinite(a):
        raise DomainError("a must be finite")
    if level < 0:
        raise DomainError("level must be >= 0")
    ctx = context(bits)
    if X is None:
        X = cutoff_for(a, decimal_digits(bits), quartic)
    tol = ctx.mpf(2) ** (-bits + 20)
    seed = fd_eigenvalue(a, parity, level, X=min(X, cutoff_for(a, 15, quartic)), quartic=quartic)
    E, it = _solve_energy(a, parity, level, X, bits, kappa, seed, tol, quartic)
    err = ctx.mpf(0)
    if verify:
        E2, it2 = _solve_energy(a, parity, level, X, bits, kappa / 2, seed, tol, quartic)
        err = abs(E2 - E)
        E, it = E2, it + it2
    # dense-output checkpoints with accumulated log scale
    _, _, pts = shoot(a, E, X, bits=bits, kappa=min(kappa, 0.5), keep=True, quartic=quartic)
    cps = []
    logscale = ctx.mpf(0)
    cps.append((pts[0][0], pts[0][1], pts[0][2], logscale))
    for x, p, dp, m in pts[1:]:
        logscale += ctx.log(m)
        cps.append((x, p, dp, logscale))
    sol = ReferenceSolution(a, parity, level, E, err, float(X), bits, kappa, it, tuple(cps), quartic=float(quartic))
    return replace(sol, peak=_find_peak(sol))


def _find_peak(sol):
    """(x, psi) at the global maximum of |psi| on [0, X]."""
    ctx = sol.ctx
    xs = np.linspace(0, sol.X, 801)
    vals = [abs(sol._raw(float(x))[0]) for x in xs]
    i = max(range(len(vals)), key=vals.__getitem__)
    if i == 0 and sol.parity == EVEN:
        p = sol._raw(0)[0]
        return ctx.mpf(0), abs(p)
    lo, hi = ctx.mpf(xs[max(i - 1, 0)]), ctx.mpf(xs[min(i + 1, len(xs) - 1)])
    sgn = 1 if sol._raw(lo)[0] > 0 else -1
    # bisection on psi' (sign change from + to - across the maximum of sgn*psi)
    for _ in range(sol.bits):
        mid = (lo + hi) / 2
        if sgn * sol._raw(mid)[1] > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < ctx.eps:
            break
    x = (lo + hi) / 2
    return x, sol._raw(x)[0]


# --------------------------------------------------------------------------
# expansion checks
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class SmallXReport:
    fitted: tuple
    predicted: tuple
    rel_error: tuple
    condition: float


def small_x_check(sol: ReferenceSolution, *, h=0.02, terms=8) -> SmallXReport:
    """Fit -log psi near 0 by a polynomial in x^2 and compare c2, c4, c6."""
    if sol.parity != EVEN or sol.level != 0 or sol.quartic != 2:
        raise DomainError("small-x expansion applies to the even ground state of a x^2 + 2 x^4")
    ctx = sol.ctx
    xs = [ctx.mpf(h) * j for j in range(1, 3 * terms + 1)]
    rows = ctx.matrix([[x ** (2 * m) for m in range(terms)] for x in xs])
    rhs = ctx.matrix([-ctx.log(abs(sol.psi(x))) for x in xs])
    coef = ctx.qr_solve(rows, rhs)[0]
    c = [coef[i] for i in range(terms)]
    sv = ctx.svd_r(rows, compute_uv=False)
    cond = float(max(sv) / min(sv))
    E, a = sol.energy, ctx.mpf(sol.a)
    pred = (E / 2, (E * E - a) / 12, (2 * E * (E * E - a) - 6) / 90)
    fit = (c[1], c[2], c[3])
    rel = tuple(abs(f - p) / abs(p) for f, p in zip(fit, pred))
    return SmallXReport(fit, pred, rel, cond)


@dataclass(frozen=True)
class LargeXReport:
    xs: tuple
    remainder: tuple
    spread: float
    constant: float


def large_x_check(sol: ReferenceSolution, window=(6.0, 10.0), *, samples=41, next_term=False) -> LargeXReport:
    """Remainder of the phase after subtracting its known large-x terms.

    The phase is -log|psi/x^n|. Subtracted: (sqrt2/3) x^3 + a x/2^(3/2)
    + (n+1) log x + (8E + a^2)/(2^(9/2) x); with `next_term` also a/(8 x^2).
    The remainder should be flat over the window.
    """
    lo, hi = window
    if sol.quartic != 2:
        raise DomainError("large-x expansion is written for a x^2 + 2 x^4")
    if hi > sol.X - 0.5 or lo <= 0:
        raise DomainError(f"window {window} outside the converged region (cutoff {sol.X})")
    ctx = sol.ctx
    a, E = ctx.mpf(sol.a), sol.energy
    n = 0 if sol.parity == EVEN else 1
    r2 = ctx.sqrt(2)
    xs, rs = [], []
    for i in range(samples):
        x = ctx.mpf(lo) + (ctx.mpf(hi) - lo) * i / (samples - 1)
        phi = -ctx.log(abs(sol.psi(x))) + n * ctx.log(x)
        lead = r2 / 3 * x ** 3 + a * x / 2 ** ctx.mpf(1.5) + (n + 1) * ctx.log(x) + (8 * E + a * a) / (2 ** ctx.mpf(4.5) * x)
        if next_term:
            lead += a / (8 * x * x)
        xs.append(float(x))
        rs.append(phi - lead)
    spread = float(max(rs) - min(rs))
    return LargeXReport(tuple(xs), tuple(float(r) for r in rs), spread, float(rs[-1]))


# --------------------------------------------------------------------------
# deviation from a trial function
# --------------------------------------------------------------------------
def wavefunction_deviation(tf, sol: ReferenceSolution, *, cutoff=1e-20, grid=None):
    """max |(psi_trial - psi_ref)/psi_trial| where psi_trial > cutoff * peak.

    Both functions are peak-normalized and positive for x > 0.
    """
    if tf.parity != sol.parity:
        raise DomainError("parity mismatch between trial function and reference solution")
    if float(tf.a) != float(sol.a):
        raise DomainError("coupling mismatch between trial function and reference solution")
    ctx = sol.ctx
    if grid is None:
        grid = default_grid(sol.a, sol.X)
    xs = [x for x in grid.nodes(sol.bits)]
    phis = [tf.phi(x) for x in xs]
    # peak of the trial function: refine the best node by bisection on y0
    i = min(range(len(phis)), key=phis.__getitem__)
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    if tf.y0(lo) < 0 < tf.y0(hi):
        for _ in range(sol.bits):
            mid = (lo + hi) / 2
            if tf.y0(mid) < 0:
                lo = mid
            else:
                hi = mid
        pmin = tf.phi((lo + hi) / 2)
    else:
        pmin = phis[i]
    if tf.parity == EVEN:
        # a single-well peak sits at the origin, which is not a node
        pmin = min(pmin, tf.phi(ctx.mpf(0)))
    worst, where = ctx.mpf(0), None
    floor = -ctx.log(ctx.mpf(cutoff))
    for x, p in zip(xs, phis):
        if p - pmin > floor:
            continue
        pt = ctx.exp(pmin - p)
        d = abs((pt - sol.psi(x)) / pt)
        if d > worst:
            worst, where = d, x
    return worst, where
