"""One-instanton asymptotic series for the level splitting at a << 0."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import DEFAULT_PRECISION, DomainError, context, fmt

# (coefficient, power of 2 in the denominator scale, power of |a|^(3/2))
# term_k = -c_k / (2^(k/2) |a|^(3k/2))
COEFFICIENTS = (
    Fraction(71, 12),
    Fraction(6299, 288),
    Fraction(2691107, 10368),
    Fraction(2125346615, 497664),
)
MAX_ORDER = len(COEFFICIENTS)


@dataclass(frozen=True)
class GapSeries:
    a: float
    prefactor: object
    terms: tuple
    partial_sums: tuple

    def deviations(self, reference):
        """Relative deviation of every partial sum from a supplied gap value."""
        return tuple(abs(s - reference) / abs(reference) for s in self.partial_sums)

    def to_json(self, reference=None, digits=15):
        ctx = context(DEFAULT_PRECISION)
        out = {
            "a": self.a,
            "partial_sums": [fmt(ctx, s, digits) for s in self.partial_sums],
        }
        if reference is not None:
            out["reference"] = fmt(ctx, reference, digits)
            out["deviation_percent"] = [ctx.nstr(100 * d, 4) for d in self.deviations(reference)]
        return out


def gap_series(a, bits: int = DEFAULT_PRECISION) -> GapSeries:
    if not a < 0:
        raise DomainError("the instanton series needs a < 0")
    ctx = context(bits)
    a = ctx.mpf(a)
    b = abs(a)
    pref = 2 ** (ctx.mpf(11) / 4) / ctx.sqrt(ctx.pi) * b ** (ctx.mpf(5) / 4) * ctx.exp(-ctx.sqrt(2) * b ** 1.5 / 6)
    # the k-th correction has scale (sqrt2 |a|^(3/2))^k
    step = ctx.sqrt(2) * b ** 1.5
    terms = [ctx.mpf(1)]
    for k, c in enumerate(COEFFICIENTS, start=1):
        terms.append(-ctx.mpf(c.numerator) / c.denominator / step ** k)
    sums, acc = [], ctx.mpf(0)
    for t in terms:
        acc += t
        sums.append(pref * acc)
    return GapSeries(float(a), pref, tuple(pref * t for t in terms), tuple(sums))


def gap_asymptotic(a, order: int = MAX_ORDER, bits: int = DEFAULT_PRECISION):
    """Prefactor times the series truncated after `order` corrections (0..4)."""
    if not (isinstance(order, int) and 0 <= order <= MAX_ORDER):
        raise DomainError(f"order must be an integer in 0..{MAX_ORDER}")
    return gap_series(a, bits).partial_sums[order]
