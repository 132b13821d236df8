"""
Interpolating-phase trial functions of both parities and their derived
potentials.

Conventions
-----------
The phase is ``phi = -log|psi|`` and the logarithmic derivative used
throughout is ``y0 = phi'`` (so ``y0 > 0`` in the classically forbidden
tail), which makes the zero-order potential ``V0 = y0**2 - y0'`` and the
Riccati equation ``y' - y**2 = E - V``.

For parity p (n = 0 even, n = 1 odd) the trial function is::

    psi = (D^2 + 2x^2)^(-(n+1)/2) * C(alpha x / sqrt(D^2 + 2x^2))
          * exp(-A/s - ((D^2 + 3a) x^2 + 4 x^4) / (6 s)),   s = sqrt(D^2 + 2x^2)

with C = cosh (even) or sinh (odd). All derivatives are closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .model import (
    EVEN,
    ODD,
    DomainError,
    PoleError,
    TrialParams,
    context,
    potential,
)


class _MpOps:
    """Scalar math on an mpmath context."""

    def __init__(self, ctx):
        self.ctx = ctx
        self.sqrt = ctx.sqrt
        self.log = ctx.log
        self.exp = ctx.exp
        self.tanh = ctx.tanh
        self.coth = ctx.coth

    def mpf(self, v):
        return self.ctx.mpf(v)

    def logcosh(self, u):
        return self.ctx.log(self.ctx.cosh(u))

    def logabssinh(self, u):
        return self.ctx.log(abs(self.ctx.sinh(u)))


class _NpOps:
    """Vectorized float64 math; log-cosh/log-sinh in overflow-safe form."""

    sqrt = staticmethod(np.sqrt)
    log = staticmethod(np.log)
    exp = staticmethod(np.exp)
    tanh = staticmethod(np.tanh)

    @staticmethod
    def coth(u):
        return 1.0 / np.tanh(u)

    @staticmethod
    def mpf(v):
        return float(v)

    @staticmethod
    def logcosh(u):
        u = np.abs(u)
        return u + np.log1p(np.exp(-2 * u)) - math.log(2)

    @staticmethod
    def logabssinh(u):
        u = np.abs(u)
        with np.errstate(divide="ignore"):
            small = np.log(np.sinh(np.minimum(u, 1.0)))
        big = u + np.log1p(-np.exp(-2 * np.maximum(u, 1.0))) - math.log(2)
        return np.where(u < 1.0, small, big)


NUMPY = _NpOps()


def phase_int(x, a, A, D, n, ops=None):
    """Interpolating phase (no cosh/sinh factor).

    ``A/s + ((D^2+3a) x^2 + 4 x^4)/(6 s) + (n+1)/2 * log(D^2 + 2 x^2)``
    """
    ops = ops or _MpOps(context(192))
    x = ops.mpf(x) if not isinstance(x, np.ndarray) else x
    s2 = D * D + 2 * x * x
    if np.any(s2 == 0):
        raise DomainError("singular denominator: D = 0 at x = 0")
    s = ops.sqrt(s2)
    return A / s + ((D * D + 3 * a) * x * x + 4 * x ** 4) / (6 * s) + (n + 1) * ops.log(s2) / 2


@dataclass(frozen=True)
class TrialFunction:
    """k = 0 trial function of one parity at coupling `a`.

    Evaluators work on mpmath scalars at ``precision_bits`` by default;
    ``numpy=True`` switches to vectorized float64 (used by the optimizer).
    """

    params: TrialParams
    a: float
    precision_bits: int = 192

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def parity(self) -> str:
        return self.params.parity

    @cached_property
    def _mp(self):
        return _MpOps(context(self.precision_bits))

    def ops(self, numpy=False):
        return NUMPY if numpy else self._mp

    def _consts(self, o):
        p = self.params
        f = o.mpf
        D2 = f(p.D) ** 2
        return f(p.A), D2, f(p.alpha), f(self.a), D2 + 3 * f(self.a)

    # --- evaluation core -------------------------------------------------
    def _eval(self, x, o, order):
        """Return (phi, y0, y0', V0) up to the requested derivative order."""
        A, D2, al, a, c = self._consts(o)
        if not isinstance(x, np.ndarray):
            x = o.mpf(x)
        odd = self.parity == ODD
        m = 1 if odd else o.mpf(0.5)
        if odd and not isinstance(x, np.ndarray) and x == 0 and order >= 1:
            raise PoleError("log-derivative of the odd trial function has a pole at x = 0")
        x2 = x * x
        s2 = D2 + 2 * x2
        s = o.sqrt(s2)
        s3 = s2 * s
        u = al * x / s
        num = c * x2 + 4 * x2 * x2
        P = A / s + num / (6 * s)
        L = o.logabssinh(u) if odd else o.logcosh(u)
        phi = P + m * o.log(s2) - L
        if order == 0:
            return (phi,)
        # P = A/s + num/(6s)
        dnum = 2 * c * x + 16 * x2 * x
        d2num = 2 * c + 48 * x2
        ds = 2 * x / s
        dP = -A * ds / s2 + (dnum * s - num * ds) / (6 * s2)
        d2s = 2 * D2 / s3
        # (1/s)'' = 2 s'^2/s^3 - s''/s^2
        inv_s_2 = 2 * ds * ds / s3 - d2s / s2
        inv_s_1 = -ds / s2
        d2P = A * inv_s_2 + (d2num / s + 2 * dnum * inv_s_1 + num * inv_s_2) / 6
        du = al * D2 / s3
        d2u = -6 * al * D2 * x / (s3 * s2)
        T = o.coth(u) if odd else o.tanh(u)
        y0 = dP + m * 4 * x / s2 - T * du
        if order == 1:
            return phi, y0
        dy0 = d2P + m * 4 * (D2 - 2 * x2) / (s2 * s2) - (1 - T * T) * du * du - T * d2u
        return phi, y0, dy0, y0 * y0 - dy0

    # --- public evaluators ------------------------------------------------
    def phi(self, x, numpy=False):
        """-log|psi| (unnormalized)."""
        return self._eval(x, self.ops(numpy), 0)[0]

    def log_psi(self, x, numpy=False):
        return -self.phi(x, numpy)

    def psi(self, x, numpy=False):
        o = self.ops(numpy)
        val = o.exp(-self._eval(x, o, 0)[0])
        if self.parity == ODD:
            if numpy:
                return np.sign(x) * val
            return val if x > 0 else (-val if x < 0 else 0 * val)
        return val

    def y0(self, x, numpy=False):
        return self._eval(x, self.ops(numpy), 1)[1]

    def y0_prime(self, x, numpy=False):
        return self._eval(x, self.ops(numpy), 2)[2]

    def y0_reg(self, x):
        """y0 with the 1/x pole removed (odd parity); equals y0 for even parity."""
        if self.parity == EVEN:
            return self.y0(x)
        o = self.ops()
        if x == 0:
            return o.mpf(0)
        x = o.mpf(x)
        return self._eval(x, o, 1)[1] + 1 / x

    def _v0_node(self, o):
        # V0 is finite at the odd node although y0**2 and y0' both blow up;
        # evaluate at a point where the O(x^2) error matches the cancellation loss
        return self._eval(o.mpf(2) ** (-self.precision_bits // 4), o, 2)[3]

    def v0(self, x, numpy=False):
        o = self.ops(numpy)
        if not numpy and self.parity == ODD and x == 0:
            return self._v0_node(o)
        return self._eval(x, o, 2)[3]

    def v1(self, x, numpy=False):
        o = self.ops(numpy)
        x = x if numpy else o.mpf(x)
        return potential(o.mpf(self.a), x) - self.v0(x, numpy)

    def all_at(self, x):
        """(phi, y0, y0', V0, V1) at one point in extended precision."""
        o = self.ops()
        x = o.mpf(x)
        phi, y0, dy0, v0 = self._eval(x, o, 2)
        return phi, y0, dy0, v0, potential(o.mpf(self.a), x) - v0

    def node_count(self, X, samples=4001):
        """Number of sign changes of psi on [-X, X]."""
        xs = np.linspace(-X, X, samples)
        signs = []
        for x in xs:
            v = self.psi(float(x))
            if v != 0:
                signs.append(1 if v > 0 else -1)
        return sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 != s1)
