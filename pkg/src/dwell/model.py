"""
Problem definition for the quartic oscillator H = -d^2/dx^2 + a x^2 + 2 x^4.

Holds the parameter records shared by every other module, the extended
precision contexts and the coupling rescaling between the two-parameter
form -d^2/dx^2 + m^2 x^2 + g x^4 and the one-parameter form above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath

EVEN = "even"
ODD = "odd"
PARITIES = (EVEN, ODD)

DEFAULT_PRECISION = 192


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class PoleError(DomainError):
    """Evaluation at the node of an odd trial function."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-finite sample, no bracket, ...)."""


class QuadratureError(NumericalError):
    def __init__(self, message, x=None):
        super().__init__(message if x is None else f"{message} at x={x}")
        self.x = x


class BracketError(NumericalError):
    pass


@lru_cache(maxsize=None)
def context(bits: int) -> mpmath.ctx_mp.MPContext:
    """Private mpmath context with `bits` of mantissa (no global state touched)."""
    if bits < 53:
        raise DomainError(f"precision must be at least 53 bits, got {bits}")
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


def decimal_digits(bits: int) -> int:
    return int(bits * math.log10(2))


def fmt(ctx, value, digits):
    """Decimal string with `digits` significant digits, exponent form outside [1e-4, 1e8)."""
    return ctx.nstr(value, digits, min_fixed=-4, max_fixed=8)


def check_parity(parity: str) -> str:
    if parity not in PARITIES:
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")
    return parity


def potential(a, x):
    return a * x * x + 2 * x ** 4


@dataclass(frozen=True)
class OscillatorParams:
    """Coupling `a` plus the numerical settings used to treat it.

    ``cutoff`` is the half-line truncation X; ``None`` means "choose from
    the decay of the wavefunction" (see :func:`default_cutoff`).
    """

    a: float
    precision_bits: int = DEFAULT_PRECISION
    cutoff: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise DomainError("a must be finite")
        if self.precision_bits < 64:
            raise DomainError("precision_bits must be >= 64")
        if self.cutoff is not None and not self.cutoff > 0:
            raise DomainError("cutoff must be positive")

    @property
    def ctx(self):
        return context(self.precision_bits)

    @property
    def digits(self) -> int:
        return decimal_digits(self.precision_bits)

    @property
    def X(self) -> float:
        return self.cutoff if self.cutoff is not None else default_cutoff(self.a, self.digits)


@dataclass(frozen=True)
class TrialParams:
    """Free parameters of the k = 0 trial function of either parity."""

    A: float
    D: float
    alpha: float
    parity: str = EVEN

    def __post_init__(self):
        check_parity(self.parity)
        if self.D == 0 or not math.isfinite(self.D):
            raise DomainError("D must be finite and non-zero")
        if not math.isfinite(self.A):
            raise DomainError("A must be finite")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise DomainError("alpha must be finite and >= 0")
        if self.parity == ODD and self.alpha == 0:
            raise DomainError("odd trial function needs alpha > 0")

    @property
    def n(self) -> int:
        return 0 if self.parity == EVEN else 1

    def as_dict(self):
        return {"A": self.A, "D": self.D, "alpha": self.alpha, "parity": self.parity}


# Parameter sets printed with the published results (both parities at a = -20).
PUBLISHED_PARAMS = {
    (1.0, EVEN): TrialParams(A=-9.23456, D=4.33441, alpha=2.74573, parity=EVEN),
    (-1.0, EVEN): TrialParams(A=-12.4816, D=4.059888, alpha=3.07041, parity=EVEN),
    (-20.0, EVEN): TrialParams(A=-286.6456, D=6.765663, alpha=49.6136, parity=EVEN),
    (-20.0, ODD): TrialParams(A=-246.64375, D=5.584376, alpha=38.82768, parity=ODD),
}


def symanzik_rescale(m2, g):
    """Map (m^2, g) to the one-parameter form.

    Returns ``(a, energy_scale)`` with ``E(m2, g) = energy_scale * E(a)``,
    where E(a) refers to -d^2/dx^2 + a x^2 + 2 x^4.
    """
    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    a = m2 * (2 / g) ** (2 / 3)
    scale = (g / 2) ** (1 / 3)
    return a, scale


def symanzik_inverse(a, g):
    """Inverse of :func:`symanzik_rescale` at fixed g: returns m^2."""
    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    return a * (g / 2) ** (2 / 3)


def leading_phase(a, x):
    """Growing part of the large-|x| phase: (sqrt2/3)|x|^3 + a|x|/2^(3/2) + log|x|."""
    ax = abs(x)
    return math.sqrt(2) / 3 * ax ** 3 + a * ax / 2 ** 1.5 + math.log(max(ax, 1e-300))


def default_cutoff(a: float, digits: int) -> float:
    """Half-line cutoff X with exp(-2 phi(X)) below 10^-(digits+10) of the peak.

    The phase is measured from its minimum over [0, X] so that the rule
    stays meaningful when the wells sit far from the origin (a << 0).
    """
    target = (digits + 10) * math.log(10) / 2
    xs = [0.01 * i for i in range(1, 2001)]
    phis = [leading_phase(a, x) for x in xs]
    phimin = min(phis)
    imin = phis.index(phimin)
    for x, p in zip(xs[imin:], phis[imin:]):
        if p - phimin >= target:
            return round(x + 0.05, 2)
    raise DomainError(f"could not place a cutoff for a={a}")
