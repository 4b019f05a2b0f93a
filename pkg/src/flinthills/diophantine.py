"""Trigonometry at integer arguments, convergents of pi, and the G/I/R census.

Integers are split by ``|sin n|`` against ``n**-1/2`` and ``n**-3/2``:

* G (generic):      ``|sin n| >= n**-1/2``
* I (intermediate): ``n**-3/2 <= |sin n| < n**-1/2``
* R (resonant):     ``|sin n| < n**-3/2``

Argument reduction is explicit: ``m = round(n/pi)``, ``delta = n - m*pi`` and
``sin n = (-1)**m sin(delta)``. Computing ``delta`` cancels about
``log10(n / |delta|)`` digits, which must fit inside the context's guard
digits; otherwise :class:`PrecisionError` is raised instead of silently
returning a degraded value.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .precision import PrecisionContext, PrecisionError

__all__ = [
    "Convergent",
    "NearDistance",
    "Regime",
    "RegimeCensus",
    "classify",
    "export_census_csv",
    "export_census_json",
    "pi_convergents",
    "regime_census",
    "signed_near_distance",
    "sin_cos_integer",
    "sin_integer",
    "weyl_sum_magnitude",
]

# Digits of slack that must remain after the reduction loss is subtracted
# from the guard digits.
SPARE_DIGITS = 1
DEFAULT_EXPONENTS = (Fraction(1, 2), Fraction(3, 2))
I_MEMBER_CAP = 10**5


class Regime(str, enum.Enum):
    G = "G"
    I = "I"  # noqa: E741
    R = "R"


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    error: object  # mpf, |pi - p/q|

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class NearDistance:
    n: int
    m: int
    delta: object  # mpf in (-pi/2, pi/2]


def _enclosure(ctx: PrecisionContext):
    man, exp = ctx.pi.man_exp
    mid = Fraction(int(man)) * Fraction(2) ** int(exp)
    # mpmath's pi is correctly rounded: |pi - mid| <= 2**(exp-1) < 2**exp
    rad = Fraction(2) ** int(exp)
    return mid - rad, mid + rad


def _cf_quotients(x: Fraction):
    while True:
        a = x.numerator // x.denominator
        yield a
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def pi_convergents(count: int, ctx: PrecisionContext) -> list[Convergent]:
    """First ``count`` continued-fraction convergents of pi.

    Partial quotients are certified by expanding both ends of an interval
    known to contain pi; the expansion stops at the first quotient on which
    the two ends disagree. At ``d`` working digits roughly ``0.85 d``
    convergents are available. Asking for more raises :class:`PrecisionError`.
    """
    if count < 1:
        raise ValueError("count must be positive")
    lo, hi = _enclosure(ctx)
    quotients = []
    for a, b in zip(_cf_quotients(lo), _cf_quotients(hi)):
        if a != b or len(quotients) == count:
            break
        quotients.append(a)
    if len(quotients) < count:
        raise PrecisionError(
            f"only {len(quotients)} convergents of pi are certified at "
            f"{ctx.working_digits} working digits; {count} requested"
        )
    out = []
    p0, q0, p1, q1 = 1, 0, quotients[0], 1
    out.append(Convergent(p1, q1, abs(ctx.pi - p1)))
    for a in quotients[1:]:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append(Convergent(p1, q1, abs(ctx.pi - ctx.mpf(p1) / q1)))
    return out


def _reduction_loss(n: int, delta) -> int:
    """Decimal digits cancelled when forming ``n - m*pi``."""
    mag = float(abs(delta))
    if mag == 0.0:
        return 10**9
    return max(0, math.ceil(math.log10(max(n, 1) / mag)))


def signed_near_distance(n: int, ctx: PrecisionContext) -> NearDistance:
    """``delta(n) = n - round(n/pi)*pi`` with its multiplier ``m``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    mp = ctx.mp
    m = int(mp.nint(n / ctx.pi))
    delta = n - m * ctx.pi
    half = ctx.pi / 2
    if delta <= -half:
        m, delta = m - 1, delta + ctx.pi
    elif delta > half:
        m, delta = m + 1, delta - ctx.pi
    loss = _reduction_loss(n, delta)
    if loss + SPARE_DIGITS > ctx.guard_digits:
        raise PrecisionError(
            f"reducing n={n} cancels {loss} digits; context has only "
            f"{ctx.guard_digits} guard digits"
        )
    if abs(abs(delta) - half) < ctx.tolerance(loss + 2):
        raise PrecisionError(f"round(n/pi) is undecidable for n={n} at this precision")
    return NearDistance(n, m, delta)


def sin_cos_integer(n: int, ctx: PrecisionContext):
    """``(cos n, sin n)`` through the explicit pi-reduction."""
    nd = signed_near_distance(n, ctx)
    sign = -1 if nd.m & 1 else 1
    return sign * ctx.mp.cos(nd.delta), sign * ctx.mp.sin(nd.delta)


def sin_integer(n: int, ctx: PrecisionContext):
    nd = signed_near_distance(n, ctx)
    s = ctx.mp.sin(nd.delta)
    return -s if nd.m & 1 else s


def _thresholds(n: int, ctx, exponents=DEFAULT_EXPONENTS):
    mp = ctx.mp
    lo_exp, hi_exp = (mp.mpf(Fraction(e).numerator) / Fraction(e).denominator for e in exponents)
    return mp.mpf(n) ** -lo_exp, mp.mpf(n) ** -hi_exp


def classify(n: int, ctx: PrecisionContext, exponents=DEFAULT_EXPONENTS) -> Regime:
    """Regime label of ``n``.

    Raises :class:`PrecisionError` when ``|sin n|`` sits too close to a
    threshold for the comparison to be trusted.
    """
    nd = signed_near_distance(n, ctx)
    s = abs(ctx.mp.sin(nd.delta))
    t_generic, t_resonant = _thresholds(n, ctx, exponents)
    margin = max(ctx.tolerance(5), s * ctx.tolerance(_reduction_loss(n, nd.delta) + 1))
    for t in (t_generic, t_resonant):
        if abs(s - t) < margin:
            raise PrecisionError(f"|sin {n}| is within {margin} of a regime threshold")
    if s >= t_generic:
        return Regime.G
    if s >= t_resonant:
        return Regime.I
    return Regime.R


def weyl_sum_magnitude(h: int, N: int, ctx: PrecisionContext):
    """``|sum_{n<=N} exp(2 pi i h n / pi)|`` by direct summation.

    Equals ``|sin(N h) / sin h|``; tests check that closed form.
    """
    from ._fixed import circle_sum, from_fixed

    if h < 1 or N < 1:
        raise ValueError("h and N must be positive")
    re, im, bits = circle_sum(2 * h, N, 0, ctx)
    mp = ctx.mp
    return mp.hypot(from_fixed(re, bits, mp), from_fixed(im, bits, mp))


# --- census -----------------------------------------------------------------

# float64 Cody-Waite reduction: the first two parts of pi carry 30
# significant bits each, so m*part is exact for m < 2**23.
_CW_LIMIT = 2**23
_AMBIGUOUS_REL = 1e-9


def _split_pi() -> tuple[float, float, float]:
    import mpmath

    hp = mpmath.MPContext()
    hp.prec = 200
    pi = hp.pi
    a = float(hp.mpf(int(pi * 2**28)) / 2**28)
    rest = pi - a
    b = float(hp.mpf(int(rest * 2**58)) / 2**58)
    c = float(rest - b)
    return a, b, c


_PI_A, _PI_B, _PI_C = _split_pi()


@dataclass
class RegimeCensus:
    N: int
    count_G: int = 0
    count_I: int = 0
    count_R: int = 0
    members_R: list = field(default_factory=list)
    members_I: list = field(default_factory=list)
    i_cap: int = I_MEMBER_CAP
    min_scaled_delta: object = None  # min |delta(n)| n^{3/2}
    min_scaled_delta_n: int = 0
    i_count_at: dict = field(default_factory=dict)
    generic_bound_max_ratio: float = 0.0
    rechecked: int = 0

    @property
    def ratio_I(self) -> float:
        return self.count_I / math.sqrt(self.N)

    def ratio_table(self) -> dict:
        return {k: v / math.sqrt(k) for k, v in sorted(self.i_count_at.items())}

    def summary(self, ctx: PrecisionContext | None = None) -> dict:
        msd = self.min_scaled_delta
        return {
            "N": self.N,
            "counts": {"G": self.count_G, "I": self.count_I, "R": self.count_R},
            "R_members": list(self.members_R),
            "I_members_stored": len(self.members_I),
            "I_ratio_sqrtN": {str(k): repr(v) for k, v in self.ratio_table().items()},
            "min_abs_delta_n32": ctx.to_str(msd, 15) if ctx is not None else str(msd),
            "min_abs_delta_n32_at": self.min_scaled_delta_n,
            "generic_bound_max_ratio": repr(self.generic_bound_max_ratio),
            "high_precision_rechecks": self.rechecked,
        }


def _census_block(lo: int, hi: int, exponents):
    n = np.arange(lo, hi + 1, dtype=np.float64)
    m = np.rint(n / math.pi)
    delta = ((n - m * _PI_A) - m * _PI_B) - m * _PI_C
    s = np.abs(np.sin(delta))
    t_generic = n ** (-float(exponents[0]))
    t_resonant = n ** (-float(exponents[1]))
    generic = s >= t_generic
    resonant = s < t_resonant
    ambiguous = (np.abs(s - t_generic) <= _AMBIGUOUS_REL * t_generic) | (
        np.abs(s - t_resonant) <= _AMBIGUOUS_REL * t_resonant
    )
    return n, delta, s, generic, resonant, ambiguous


def regime_census(
    N: int,
    ctx: PrecisionContext,
    exponents=DEFAULT_EXPONENTS,
    i_cap: int = I_MEMBER_CAP,
    block: int = 1 << 20,
    exact: bool = False,
) -> RegimeCensus:
    """Partition ``[1, N]`` into G/I/R.

    The default path reduces in float64 (three-part Cody-Waite split of pi,
    exact for ``N < 2**23``) and hands every ``n`` whose ``|sin n|`` lies
    within a relative ``1e-9`` of a threshold to :func:`classify`. With
    ``exact=True`` every ``n`` goes through :func:`classify`.
    """
    if N < 1:
        raise ValueError("N must be positive")
    census = RegimeCensus(N=N, i_cap=i_cap)
    decades = {10**k for k in range(1, 16) if 10**k <= N} | {N}
    best = (math.inf, 0)
    if exact or N >= _CW_LIMIT:
        for n in range(1, N + 1):
            _tally(census, n, classify(n, ctx, exponents))
            if n in decades:
                census.i_count_at[n] = census.count_I
        census.rechecked = N
        best_n = min(
            range(1, N + 1),
            key=lambda k: abs(signed_near_distance(k, ctx).delta) * ctx.mpf(k) ** 1.5,
        )
        _finish_min(census, best_n, ctx)
        _generic_ratio(census, ctx)
        return census

    for lo in range(1, N + 1, block):
        hi = min(N, lo + block - 1)
        n, delta, s, generic, resonant, ambiguous = _census_block(lo, hi, exponents)
        labels = np.where(generic, 0, np.where(resonant, 2, 1))
        for idx in np.flatnonzero(ambiguous):
            k = int(n[idx])
            labels[idx] = "GIR".index(classify(k, ctx, exponents).value)
            census.rechecked += 1
        census.count_G += int(np.count_nonzero(labels == 0))
        i_idx = np.flatnonzero(labels == 1)
        r_idx = np.flatnonzero(labels == 2)
        census.count_R += len(r_idx)
        census.members_R.extend(int(n[i]) for i in r_idx)
        room = census.i_cap - len(census.members_I)
        if room > 0:
            census.members_I.extend(int(n[i]) for i in i_idx[:room])
        for d in sorted(decades):
            if lo <= d <= hi:
                census.i_count_at[d] = census.count_I + int(np.count_nonzero(i_idx < d - lo + 1))
        census.count_I += len(i_idx)

        scaled = np.abs(delta) * n**1.5
        j = int(np.argmin(scaled))
        if scaled[j] < best[0]:
            best = (float(scaled[j]), int(n[j]))

        g = labels == 0
        if np.any(g):
            kern = np.abs(3.0 / s[g] ** 2 - 4.0) / n[g] ** 3
            ratio = float(np.max(kern / (3.0 * n[g] ** -1.5)))
            census.generic_bound_max_ratio = max(census.generic_bound_max_ratio, ratio)

    _finish_min(census, best[1], ctx)
    return census


def _tally(census: RegimeCensus, n: int, label: Regime):
    if label is Regime.G:
        census.count_G += 1
    elif label is Regime.I:
        census.count_I += 1
        if len(census.members_I) < census.i_cap:
            census.members_I.append(n)
    else:
        census.count_R += 1
        census.members_R.append(n)


def _finish_min(census: RegimeCensus, n: int, ctx):
    nd = signed_near_distance(n, ctx)
    census.min_scaled_delta = abs(nd.delta) * ctx.mpf(n) ** ctx.mpf(1.5)
    census.min_scaled_delta_n = n


def _generic_ratio(census: RegimeCensus, ctx):
    mp = ctx.mp
    worst = 0.0
    for n in range(1, census.N + 1):
        s = sin_integer(n, ctx)
        if abs(s) >= mp.mpf(n) ** -0.5:
            k = abs(3 / s**2 - 4) / mp.mpf(n) ** 3
            worst = max(worst, float(k / (3 * mp.mpf(n) ** -1.5)))
    census.generic_bound_max_ratio = worst


def _census_rows(census: RegimeCensus, ctx, rows: str):
    if rows == "all":
        numbers = range(1, census.N + 1)
        known = None
    elif rows == "nongeneric":
        numbers = sorted(set(census.members_R) | set(census.members_I))
        known = {k: Regime.R for k in census.members_R}
    else:
        raise ValueError("rows must be 'all' or 'nongeneric'")
    for n in numbers:
        nd = signed_near_distance(n, ctx)
        s = abs(ctx.mp.sin(nd.delta))
        if known is not None:
            label = known.get(n, Regime.I)
        else:
            label = classify(n, ctx)
        yield n, nd.m, ctx.to_str(nd.delta), ctx.to_str(s), label.value


def export_census_csv(census: RegimeCensus, path, ctx: PrecisionContext, rows: str = "nongeneric"):
    """CSV with columns ``n, m, delta, abs_sin_n, regime``.

    ``rows="nongeneric"`` writes the stored I and R members only;
    ``rows="all"`` writes every ``n <= N`` (slow for large ``N``).
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "m", "delta", "abs_sin_n", "regime"])
        for row in _census_rows(census, ctx, rows):
            w.writerow(row)


def export_census_json(census: RegimeCensus, path, ctx: PrecisionContext):
    with open(path, "w") as fh:
        json.dump(census.summary(ctx), fh, indent=2, sort_keys=True)
        fh.write("\n")
