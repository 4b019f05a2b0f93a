"""Working-precision configuration and the constants every other module reads.

Arithmetic is delegated to a private :class:`mpmath.MPContext` per
:class:`PrecisionContext`, so contexts never touch the global ``mpmath.mp``
state. Every elementary operation is correctly rounded (round-to-nearest) at
the working precision; that is mpmath's contract and is not configurable here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath

__all__ = [
    "DEFAULT_GUARD_DIGITS",
    "MIN_DECIMAL_DIGITS",
    "PrecisionContext",
    "PrecisionError",
    "const_L3_exact",
    "euler_maclaurin_tail",
    "make_context",
]

DEFAULT_GUARD_DIGITS = 15
MIN_DECIMAL_DIGITS = 10


class PrecisionError(ArithmeticError):
    """Raised when a computation cannot be certified at the available precision."""


def euler_maclaurin_tail(ctx, offset, step, power, start):
    """Return ``(value, bound)`` for ``sum_{k >= start} (offset + step*k)**-power``.

    The tail is the integral plus the half end term plus Bernoulli
    corrections, truncated once a correction drops below the working epsilon.
    ``bound`` is twice the first omitted correction; for these completely
    monotone summands the remainder never exceeds the first omitted term.
    """
    mp = ctx.mp
    a, b, s = mp.mpf(offset), mp.mpf(step), power
    x = a + b * start
    if x <= 0:
        raise ValueError("tail start must lie to the right of the singularity")
    total = x ** (1 - s) / (b * (s - 1)) + x ** (-s) / 2
    eps = mp.eps
    # (s)_{2j-1} * b**(2j-1) * x**(-s-2j+1), updated two orders at a time
    deriv = s * b * x ** (-s - 1)
    j = 1
    while True:
        total += mp.bernoulli(2 * j) / mp.factorial(2 * j) * deriv
        deriv = deriv * (s + 2 * j - 1) * (s + 2 * j) * b * b / (x * x)
        j += 1
        omitted = abs(mp.bernoulli(2 * j) / mp.factorial(2 * j) * deriv)
        if omitted < eps * abs(total) or j > 200:
            return total, 2 * omitted


def _zeta3(mp_ctx_holder):
    mp = mp_ctx_holder.mp
    start = mp_ctx_holder.working_digits + 10
    head = mp.fsum(mp.mpf(1) / (n * n * n) for n in range(1, start))
    tail, _ = euler_maclaurin_tail(mp_ctx_holder, 0, 1, 3, start)
    return head + tail


@dataclass(frozen=True)
class PrecisionContext:
    """Immutable precision settings with cached constants.

    ``decimal_digits`` is the number of digits results are meant to carry;
    ``guard_digits`` extra digits absorb cancellation. The working precision
    is their sum and never changes after construction.
    """

    decimal_digits: int
    guard_digits: int = DEFAULT_GUARD_DIGITS
    mp: mpmath.ctx_mp.MPContext = field(init=False, repr=False, compare=False)
    pi: mpmath.mpf = field(init=False, repr=False, compare=False)
    zeta3: mpmath.mpf = field(init=False, repr=False, compare=False)
    L3: mpmath.mpf = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.decimal_digits < MIN_DECIMAL_DIGITS:
            raise ValueError(
                f"decimal_digits must be >= {MIN_DECIMAL_DIGITS}, got {self.decimal_digits}"
            )
        if self.guard_digits < 1:
            raise ValueError("guard_digits must be positive")
        mp = mpmath.MPContext()
        mp.dps = self.working_digits
        object.__setattr__(self, "mp", mp)
        object.__setattr__(self, "pi", +mp.pi)
        object.__setattr__(self, "zeta3", _zeta3(self))
        object.__setattr__(self, "L3", 4 * self.pi**3 / (81 * mp.sqrt(3)))

    @property
    def working_digits(self) -> int:
        return self.decimal_digits + self.guard_digits

    @property
    def working_bits(self) -> int:
        return self.mp.prec

    @property
    def stamp(self) -> dict:
        """Serializable identity of this context, used to guard checkpoints."""
        return {
            "decimal_digits": self.decimal_digits,
            "guard_digits": self.guard_digits,
            "working_bits": self.working_bits,
        }

    def mpf(self, x):
        return self.mp.mpf(x)

    def tolerance(self, slack_digits: int = 3):
        """``10**(-working_digits + slack_digits)``, the identity-check tolerance."""
        return self.mp.mpf(10) ** (slack_digits - self.working_digits)

    def to_str(self, x, digits: int | None = None) -> str:
        """Fixed decimal-string rendering used in every exported file."""
        return mpmath.libmp.to_str(self.mp.mpf(x)._mpf_, digits or self.decimal_digits)

    def digits_lost(self, n: int) -> int:
        return math.ceil(math.log10(n)) if n > 1 else 0


@lru_cache(maxsize=None)
def make_context(decimal_digits: int, guard_digits: int = DEFAULT_GUARD_DIGITS) -> PrecisionContext:
    """Build (or fetch the cached) context for ``decimal_digits`` output digits."""
    return PrecisionContext(int(decimal_digits), int(guard_digits))


def const_L3_exact(ctx: PrecisionContext):
    """L(3, chi_{-3}) = 4 pi^3 / (81 sqrt 3) at working precision."""
    return ctx.L3
