"""Truncated unit-circle polylogarithms and the odd L-value L(3, chi_-3).

Every truncated value carries a rigorous bound on the omitted tail, so callers
compare against inequalities rather than "looks converged" heuristics.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _fixed
from .precision import PrecisionContext, euler_maclaurin_tail
from .series import SeriesId, partial_sums

__all__ = [
    "ClausenReductionReport",
    "TruncatedValue",
    "UnitCirclePolylogValue",
    "L_chi3_corrected",
    "L_chi3_series",
    "L_chi3_tail_bound",
    "clausen_cos",
    "clausen_reduction_report",
    "glaisher_sin",
    "unit_circle_polylog",
]

MIN_TERMS = 10
_CHI3 = (0, 1, -1)


@dataclass(frozen=True)
class TruncatedValue:
    value: object
    tail_bound: object
    N: int

    def contains(self, x, slack=0) -> bool:
        return abs(self.value - x) <= self.tail_bound + slack


@dataclass(frozen=True)
class UnitCirclePolylogValue:
    """``sum_{n<=N} e^{i n theta} / n**order``, an approximation to ``Li_order(e^{i theta})``."""

    order: int
    theta: object
    value: object
    tail_bound: object
    N: int

    @property
    def cos_part(self) -> TruncatedValue:
        return TruncatedValue(self.value.real, self.tail_bound, self.N)

    @property
    def sin_part(self) -> TruncatedValue:
        return TruncatedValue(self.value.imag, self.tail_bound, self.N)


def _tail_bound(s: int, theta, N: int, ctx):
    """Bound on ``|sum_{n>N} e^{i n theta} / n**s|``.

    Two estimates, whichever is smaller: the integral test, and Abel summation
    against the geometric partial sums ``|sum e^{i n theta}| <= 1/|sin(theta/2)|``.
    """
    mp = ctx.mp
    integral = 1 / ((s - 1) * mp.mpf(N) ** (s - 1))
    half = abs(mp.sin(mp.mpf(theta) / 2))
    if half == 0:
        return integral
    return min(integral, 1 / (mp.mpf(N + 1) ** s * half))


def unit_circle_polylog(s: int, theta, N: int, ctx: PrecisionContext) -> UnitCirclePolylogValue:
    if s not in (2, 3):
        raise ValueError("order must be 2 or 3")
    if N < MIN_TERMS:
        raise ValueError(f"N must be at least {MIN_TERMS}")
    mp = ctx.mp
    theta = mp.mpf(theta)
    re, im, bits = _fixed.circle_sum(theta, N, s, ctx)
    value = mp.mpc(_fixed.from_fixed(re, bits, mp), _fixed.from_fixed(im, bits, mp))
    return UnitCirclePolylogValue(s, theta, value, _tail_bound(s, theta, N, ctx), N)


def clausen_cos(s: int, theta, N: int, ctx: PrecisionContext) -> TruncatedValue:
    """``sum_{n<=N} cos(n theta) / n**s`` with its tail bound."""
    return unit_circle_polylog(s, theta, N, ctx).cos_part


def glaisher_sin(s: int, theta, N: int, ctx: PrecisionContext) -> TruncatedValue:
    """``sum_{n<=N} sin(n theta) / n**s`` with its tail bound."""
    return unit_circle_polylog(s, theta, N, ctx).sin_part


# --- L(3, chi_-3) -------------------------------------------------------------


def L_chi3_series(N: int, ctx: PrecisionContext):
    """``sum_{n<=N} chi_-3(n) / n**3`` with ``chi_-3 = (0, +1, -1)`` by residue mod 3."""
    if N < 2:
        raise ValueError("N must be at least 2")
    bits = _fixed.scale_bits(ctx)
    one = 1 << bits
    acc = 0
    for n in range(1, N + 1):
        chi = _CHI3[n % 3]
        if chi:
            q = one // (n * n * n)
            acc += q if chi > 0 else -q
    return _fixed.from_fixed(acc, bits, ctx.mp)


def L_chi3_tail_bound(N: int, ctx: PrecisionContext):
    """The nonzero terms past ``N`` alternate in sign and shrink, so the first one bounds the tail."""
    n = N + 1
    while n % 3 == 0:
        n += 1
    return 1 / ctx.mp.mpf(n) ** 3


def L_chi3_corrected(N: int, ctx: PrecisionContext) -> TruncatedValue:
    """Partial sum plus Euler-Maclaurin tails of both residue classes.

    The bound adds a working-precision rounding allowance to the two
    Euler-Maclaurin remainders.
    """
    head = L_chi3_series(N, ctx)
    # first k with 3k+1 > N, and with 3k+2 > N
    k1 = N // 3 + (1 if N % 3 >= 1 else 0)
    k2 = N // 3 + (1 if N % 3 >= 2 else 0)
    t1, b1 = euler_maclaurin_tail(ctx, 1, 3, 3, k1)
    t2, b2 = euler_maclaurin_tail(ctx, 2, 3, 3, k2)
    return TruncatedValue(head + t1 - t2, b1 + b2 + ctx.tolerance(), N)


# --- Clausen reduction claims -------------------------------------------------


@dataclass
class ClausenReductionReport:
    N: int
    F_cot: object
    F_tan: object
    Cl3_1: TruncatedValue
    S3_1: TruncatedValue
    S2_1: TruncatedValue
    leading_cot: object  # 2 Cl3(1) - pi zeta(2)
    precise_cot: object  # 2 Cl3(1) - pi^2 log 2 / 3 + S2(1)
    leading_tan: object  # 2 S3(1)
    gap_leading_cot: object
    gap_precise_cot: object
    gap_leading_tan: object
    gap_F_cot_vs_2Cl3: object
    truncation_budget: object

    def as_dict(self, ctx: PrecisionContext, digits: int = 12) -> dict:
        out = {}
        for k, v in vars(self).items():
            if isinstance(v, TruncatedValue):
                out[k] = {"value": ctx.to_str(v.value, digits), "tail_bound": ctx.to_str(v.tail_bound, 3)}
            elif isinstance(v, int):
                out[k] = v
            else:
                out[k] = ctx.to_str(v, digits)
        return out


def clausen_reduction_report(N: int, ctx: PrecisionContext, states=None) -> ClausenReductionReport:
    """Measure how far F_cot and F_tan sit from the proposed Clausen reductions.

    Nothing here asserts that either reduction holds; the gaps are reported as
    measured at truncation ``N``. ``truncation_budget`` is the combined tail
    bound of the polylog pieces; the F sums themselves have no proven tail
    bound.
    """
    if N < 1000:
        raise ValueError("N must be at least 1000")
    mp = ctx.mp
    if states is None:
        states = partial_sums([SeriesId.F_COT, SeriesId.F_TAN], N, ctx)
    f_cot = states[SeriesId.F_COT].value
    f_tan = states[SeriesId.F_TAN].value
    li3 = unit_circle_polylog(3, 1, N, ctx)
    cl3, s3 = li3.cos_part, li3.sin_part
    s2 = glaisher_sin(2, 1, N, ctx)
    pi = ctx.pi
    zeta2 = pi**2 / 6
    leading_cot = 2 * cl3.value - pi * zeta2
    precise_cot = 2 * cl3.value - pi**2 * mp.log(2) / 3 + s2.value
    leading_tan = 2 * s3.value
    return ClausenReductionReport(
        N=N,
        F_cot=f_cot,
        F_tan=f_tan,
        Cl3_1=cl3,
        S3_1=s3,
        S2_1=s2,
        leading_cot=leading_cot,
        precise_cot=precise_cot,
        leading_tan=leading_tan,
        gap_leading_cot=abs(f_cot - leading_cot),
        gap_precise_cot=abs(f_cot - precise_cot),
        gap_leading_tan=abs(f_tan - leading_tan),
        gap_F_cot_vs_2Cl3=abs(f_cot - 2 * cl3.value),
        truncation_budget=2 * cl3.tail_bound + s2.tail_bound,
    )
