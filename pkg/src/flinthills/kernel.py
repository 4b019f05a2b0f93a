"""The kernel K(x) = sin 3x / sin^3 x in its three algebraic forms.

* ``kernel_trig``: the defining quotient.
* ``kernel_csc``: ``3 csc^2 x - 4``.
* ``kernel_qform``: the five partial-fraction summands in ``q = e^{ix}``,
  ``-4 + 3/(q+1) - 3/(q+1)^2 - 3/(q-1) - 3/(q-1)^2``.

K has period pi and a double pole with coefficient 3 at every multiple of pi.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .precision import PrecisionContext

__all__ = [
    "LaurentExpansion",
    "LaurentFit",
    "PoleProximityError",
    "QFormTerms",
    "kernel_csc",
    "kernel_qform",
    "kernel_trig",
    "laurent_coefficients",
    "laurent_fit",
    "laurent_remainder_constant",
]

MAX_LAURENT_POWER = 4
FIT_POWERS = tuple(range(-2, MAX_LAURENT_POWER + 1))


class PoleProximityError(ArithmeticError):
    """The argument is too close to a pole of K to be evaluated reliably."""

    def __init__(self, distance, message=None):
        self.distance = distance
        super().__init__(message or f"argument lies {distance} from a pole of K")


def _pole_distance(x, ctx: PrecisionContext):
    mp = ctx.mp
    x = mp.mpf(x)
    return abs(x - mp.nint(x / ctx.pi) * ctx.pi)


def _check_pole(x, ctx: PrecisionContext):
    d = _pole_distance(x, ctx)
    # the relative error of sin doubles in exponent when cubed near a zero
    if d <= ctx.mp.mpf(10) ** (-ctx.working_digits / 2):
        raise PoleProximityError(d)
    return ctx.mp.mpf(x)


def kernel_trig(x, ctx: PrecisionContext):
    x = _check_pole(x, ctx)
    mp = ctx.mp
    return mp.sin(3 * x) / mp.sin(x) ** 3


def kernel_csc(x, ctx: PrecisionContext):
    x = _check_pole(x, ctx)
    return 3 / ctx.mp.sin(x) ** 2 - 4


@dataclass(frozen=True)
class QFormTerms:
    """The five summands of the partial-fraction form, each an mpc."""

    constant: object
    plus_simple: object  # 3/(q+1)
    plus_double: object  # -3/(q+1)^2
    minus_simple: object  # -3/(q-1)
    minus_double: object  # -3/(q-1)^2

    def as_tuple(self):
        return (self.constant, self.plus_simple, self.plus_double, self.minus_simple, self.minus_double)

    def total(self):
        return sum(self.as_tuple()[1:], self.constant)


def kernel_qform(x, ctx: PrecisionContext) -> QFormTerms:
    x = _check_pole(x, ctx)
    mp = ctx.mp
    q = mp.expj(x)
    p1, m1 = 1 / (q + 1), 1 / (q - 1)
    return QFormTerms(
        constant=mp.mpc(-4),
        plus_simple=3 * p1,
        plus_double=-3 * p1 * p1,
        minus_simple=-3 * m1,
        minus_double=-3 * m1 * m1,
    )


# --- Laurent data -------------------------------------------------------------


@dataclass(frozen=True)
class LaurentExpansion:
    """Exact Laurent coefficients of K about a pole, from ``u**-2`` upward."""

    pole_order: int
    coefficients: tuple

    def coefficient(self, power: int) -> Fraction:
        return self.coefficients[power + self.pole_order]

    def powers(self):
        return range(-self.pole_order, -self.pole_order + len(self.coefficients))


def _series_mul(a, b, n):
    return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)]


def _series_inv(a, n):
    out = [Fraction(1) / a[0]]
    for k in range(1, n):
        out.append(-sum(a[i] * out[k - i] for i in range(1, k + 1)) / a[0])
    return out


def laurent_coefficients(max_power: int) -> LaurentExpansion:
    """Exact coefficients of ``u**-2 .. u**max_power`` of ``K(u)``.

    Derived by rational power-series arithmetic on ``3 (u / sin u)**2 - 4 u**2``;
    only orders up to ``u**4`` are offered.
    """
    if max_power > MAX_LAURENT_POWER:
        raise ValueError(f"Laurent coefficients are only offered up to u^{MAX_LAURENT_POWER}")
    if max_power < -2:
        raise ValueError("max_power must be >= -2")
    n = max_power + 3  # number of coefficients of u^2 K(u), powers 0..max_power+2
    sinc = [Fraction((-1) ** (k // 2), factorial(k + 1)) if k % 2 == 0 else Fraction(0) for k in range(n)]
    inv = _series_inv(sinc, n)
    body = [3 * c for c in _series_mul(inv, inv, n)]
    if n > 2:
        body[2] -= 4
    return LaurentExpansion(pole_order=2, coefficients=tuple(body))


@dataclass(frozen=True)
class LaurentFit:
    powers: tuple
    coefficients: tuple
    residual_norm: object

    def coefficient(self, power: int):
        return self.coefficients[self.powers.index(power)]


def default_fit_radii(ctx: PrecisionContext, count: int = 12):
    """Logarithmically spaced radii in [1e-3, 1e-2]."""
    mp = ctx.mp
    return [mp.mpf(10) ** (-3 + mp.mpf(k) / (count - 1)) for k in range(count)]


def laurent_fit(radii, ctx: PrecisionContext) -> LaurentFit:
    """Least-squares fit of ``K(u)`` on ``u**-2 .. u**4`` over ``radii``.

    Solved by QR at working precision; returns coefficients and the residual
    norm. Needs at least seven distinct radii in ``(0, 0.3]``.
    """
    mp = ctx.mp
    pts = sorted({mp.mpf(r) for r in radii})
    if any(r <= 0 or r > mp.mpf("0.3") for r in pts):
        raise ValueError("radii must lie in (0, 0.3]")
    if len(pts) < len(FIT_POWERS):
        raise ValueError(
            f"ill-conditioned fit: {len(pts)} distinct radii for {len(FIT_POWERS)} unknowns"
        )
    A = mp.matrix(len(pts), len(FIT_POWERS))
    b = mp.matrix(len(pts), 1)
    for i, u in enumerate(pts):
        for j, p in enumerate(FIT_POWERS):
            A[i, j] = u**p
        b[i] = kernel_trig(u, ctx)
    x, res = mp.qr_solve(A, b)
    return LaurentFit(FIT_POWERS, tuple(x[j] for j in range(len(FIT_POWERS))), res)


def laurent_remainder_constant(ctx: PrecisionContext, radii=None):
    """``max |K(u) - (3/u^2 - 3 + u^2/5 + 2u^4/63)| / u^6`` over ``radii``.

    The radii default to 20 points in ``(0, 0.05]``.
    """
    mp = ctx.mp
    exp = laurent_coefficients(MAX_LAURENT_POWER)
    if radii is None:
        radii = [mp.mpf(k) / 400 for k in range(1, 21)]
    worst = mp.zero
    for u in radii:
        u = mp.mpf(u)
        approx = mp.fsum(mp.mpf(c.numerator) / c.denominator * u**p for p, c in zip(exp.powers(), exp.coefficients))
        worst = max(worst, abs(kernel_trig(u, ctx) - approx) / u**6)
    return worst


def pole_distance(x, ctx: PrecisionContext):
    """Distance from ``x`` to the nearest multiple of pi."""
    return _pole_distance(x, ctx)
