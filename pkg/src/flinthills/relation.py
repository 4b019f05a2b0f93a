"""Integer relation detection by PSLQ, with explicit absence certificates.

A search either returns an integer vector ``a`` with ``|a . v|`` below the
detection threshold, or reports the lower bound on the Euclidean norm of any
relation that the algorithm had established when it stopped. "Absent" means
that bound excludes every vector with ``max |a_i| <= bound``; it says nothing
about relations with larger coefficients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import mpmath

from .precision import PrecisionContext, PrecisionError

__all__ = [
    "Basis",
    "Outcome",
    "RelationQuery",
    "RelationResult",
    "constant_estimate",
    "pslq",
    "scan_relations",
]

MIN_DIGITS = 12
MAX_BOUND = 10**6
THRESHOLD_SLACK = 3
# summation levels tried, in order, when a slowly converging constant is requested
F_LEVELS = (10**6, 2 * 10**6, 5 * 10**6, 10**7)


class Outcome(str, enum.Enum):
    RELATION = "relation"
    ABSENT = "absent"
    INCONCLUSIVE = "inconclusive"


@dataclass
class RelationResult:
    outcome: Outcome
    digits: int
    bound: int
    relation: tuple | None = None
    residual: object = None  # |a . v| at doubled precision, normalised by max |v|
    norm_bound: object = None  # every relation has Euclidean norm >= this
    iterations: int = 0
    note: str = ""

    def as_dict(self, labels=None) -> dict:
        out = {
            "outcome": self.outcome.value,
            "digits": self.digits,
            "bound": self.bound,
            "iterations": self.iterations,
            "norm_bound": None if self.norm_bound is None else mpmath.nstr(self.norm_bound, 8),
            "note": self.note,
        }
        if self.relation is not None:
            rel = list(self.relation)
            out["relation"] = dict(zip(labels, rel)) if labels else rel
            out["residual"] = mpmath.nstr(self.residual, 5)
        return out


def _known_digits(x) -> float:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return math.inf if isinstance(x, int) else 15.0
    ctx = getattr(x, "context", None)
    if ctx is not None:
        return ctx.dps
    return math.inf


def pslq(values, bound: int, digits: int, known_digits=None, max_iterations: int = 10_000) -> RelationResult:
    """Search for ``a`` with ``a . values ~ 0`` and ``max |a_i| <= bound``.

    ``values`` are rounded to ``digits`` significant digits and the iteration
    runs with a few extra digits; the detection threshold is
    ``10**(-digits + 3)`` relative to ``max |values|``. ``known_digits``
    overrides the number of trustworthy digits inferred from the inputs.
    """
    n = len(values)
    if n < 2:
        raise ValueError("need at least two values")
    if digits < MIN_DIGITS:
        raise ValueError(f"digits must be >= {MIN_DIGITS}")
    if not 1 <= bound <= MAX_BOUND:
        raise ValueError(f"bound must lie in [1, {MAX_BOUND}]")
    if known_digits is None:
        known_digits = min(_known_digits(v) for v in values)
    if known_digits < digits:
        raise PrecisionError(f"inputs carry about {known_digits} digits, {digits} requested")

    mp = mpmath.MPContext()
    mp.dps = digits + 10
    # round to the requested significance, then normalise for scale invariance
    x = [mp.mpf(mp.nstr(mp.mpf(v), digits, strip_zeros=False)) for v in values]
    scale = max(abs(v) for v in x)
    if scale == 0:
        raise ValueError("all values are zero")
    x = [v / scale for v in x]
    tol = mp.mpf(10) ** (THRESHOLD_SLACK - digits)

    for i, v in enumerate(x):
        if abs(v) < tol:
            rel = tuple(1 if j == i else 0 for j in range(n))
            return _verified(values, rel, digits, bound, 0, None, "zero input gives the trivial relation")

    gamma = mp.sqrt(mp.mpf(4) / 3)
    s = [mp.sqrt(mp.fsum(v * v for v in x[k:])) for k in range(n)]
    y = [v / s[0] for v in x]
    s = [v / s[0] for v in s]
    H = [[mp.zero] * (n - 1) for _ in range(n)]
    for i in range(n):
        for j in range(min(i + 1, n - 1)):
            if j == i:
                H[i][j] = s[i + 1] / s[i]
            else:
                H[i][j] = -y[i] * y[j] / (s[j] * s[j + 1])
    A = [[int(i == j) for j in range(n)] for i in range(n)]
    B = [[int(i == j) for j in range(n)] for i in range(n)]

    def reduce_rows(rows):
        for i in rows:
            for j in range(min(i - 1, n - 2), -1, -1):
                if H[j][j] == 0:
                    continue
                t = int(mp.nint(H[i][j] / H[j][j]))
                if not t:
                    continue
                y[j] += t * y[i]
                for k in range(j + 1):
                    H[i][k] -= t * H[j][k]
                for k in range(n):
                    A[i][k] -= t * A[j][k]
                    B[k][j] += t * B[k][i]

    reduce_rows(range(1, n))
    limit = mp.mpf(10) ** digits
    target = bound * mp.sqrt(n)
    norm_bound = mp.zero
    for it in range(1, max_iterations + 1):
        m = max(range(n - 1), key=lambda i: gamma ** (i + 1) * abs(H[i][i]))
        y[m], y[m + 1] = y[m + 1], y[m]
        A[m], A[m + 1] = A[m + 1], A[m]
        H[m], H[m + 1] = H[m + 1], H[m]
        for row in B:
            row[m], row[m + 1] = row[m + 1], row[m]
        if m <= n - 3:
            t0 = mp.sqrt(H[m][m] ** 2 + H[m][m + 1] ** 2)
            if t0 == 0:
                break
            t1, t2 = H[m][m] / t0, H[m][m + 1] / t0
            for i in range(m, n):
                t3, t4 = H[i][m], H[i][m + 1]
                H[i][m] = t1 * t3 + t2 * t4
                H[i][m + 1] = -t2 * t3 + t1 * t4
        reduce_rows(range(m + 1, n))

        best = min(range(n), key=lambda i: abs(y[i]))
        if abs(y[best]) < tol:
            rel = tuple(B[k][best] for k in range(n))
            return _verified(values, rel, digits, bound, it, norm_bound, "")
        hmax = max(abs(H[j][j]) for j in range(n - 1))
        if hmax == 0:
            break
        norm_bound = max(norm_bound, 1 / hmax)
        if norm_bound > target:
            return RelationResult(
                Outcome.ABSENT,
                digits,
                bound,
                norm_bound=norm_bound,
                iterations=it,
                note=f"every relation has Euclidean norm >= {mpmath.nstr(norm_bound, 6)} > bound * sqrt(n)",
            )
        if max(abs(a) for row in A for a in row) > limit:
            return RelationResult(
                Outcome.INCONCLUSIVE, digits, bound, norm_bound=norm_bound, iterations=it, note="precision exhausted"
            )
    return RelationResult(
        Outcome.INCONCLUSIVE, digits, bound, norm_bound=norm_bound, iterations=max_iterations, note="iteration limit"
    )


def _verified(values, rel, digits, bound, iterations, norm_bound, note) -> RelationResult:
    """Recheck a candidate at doubled precision; demote it if it fails or is too large."""
    g = math.gcd(*rel)
    rel = tuple(a // g for a in rel)
    first = next(a for a in rel if a)
    if first < 0:
        rel = tuple(-a for a in rel)
    mp = mpmath.MPContext()
    mp.dps = 2 * digits
    v = [mp.mpf(x) for x in values]
    scale = max(abs(x) for x in v) or mp.one
    residual = abs(mp.fsum(a * x for a, x in zip(rel, v))) / scale
    threshold = mp.mpf(10) ** (THRESHOLD_SLACK - digits)
    if residual >= threshold:
        return RelationResult(
            Outcome.INCONCLUSIVE, digits, bound, norm_bound=norm_bound, iterations=iterations,
            note=f"candidate {rel} failed re-verification (residual {mpmath.nstr(residual, 3)})",
        )
    if max(abs(a) for a in rel) > bound:
        return RelationResult(
            Outcome.INCONCLUSIVE, digits, bound, norm_bound=norm_bound, iterations=iterations,
            note=f"relation {rel} exceeds the coefficient bound",
        )
    return RelationResult(Outcome.RELATION, digits, bound, rel, residual, norm_bound, iterations, note)


@dataclass
class RelationQuery:
    labels: tuple
    values: tuple
    bound: int
    digits: int
    known_digits: float = math.inf

    def __post_init__(self):
        if len(self.values) < 2 or len(self.labels) != len(self.values):
            raise ValueError("need at least two labelled values")

    def run(self) -> RelationResult:
        return pslq(list(self.values), self.bound, self.digits, known_digits=self.known_digits)


# --- bases from the series engine ---------------------------------------------


class Basis(str, enum.Enum):
    FCOT_BASIS = "FCOT_BASIS"
    FTAN_BASIS = "FTAN_BASIS"
    CL3_BASIS = "CL3_BASIS"


@dataclass
class ConstantEstimate:
    """A slowly converging sum with an empirical error estimate.

    ``error_estimate`` is ``|F(N) - F(N/2)|`` plus the largest term magnitude
    on ``(N/2, N]``; it is an estimate, not a bound. Spikes beyond ``N`` are
    of the size of the largest one before it only if the next convergent
    denominator is not much larger; that is the assumption being made.
    """

    label: str
    value: object
    N: int
    error_estimate: object
    known_digits: float
    history: list = field(default_factory=list)


def constant_estimate(series_id, digits: int, ctx: PrecisionContext, levels=F_LEVELS) -> ConstantEstimate:
    """Sum ``series_id`` at increasing ``N`` until ``digits`` digits look settled.

    Raises :class:`PrecisionError` if the last level is still short; the
    exception's ``estimate`` attribute holds the last (uncertified) estimate.
    """
    from .series import SeriesId, partial_sum

    sid = SeriesId(series_id)
    if sid not in _HALF_ANGLE:
        raise ValueError(f"no error model for {sid.value}")
    mp = ctx.mp
    state = None
    history = []
    known = 0.0
    for N in levels:
        state_half = partial_sum(sid, N // 2, ctx, resume_from=state)
        state = partial_sum(sid, N, ctx, resume_from=state_half)
        big = _max_half_angle_term(sid, N // 2 + 1, N)
        err_est = abs(state.value - state_half.value) + mp.mpf(big)
        known = float(-mp.log10(err_est / abs(state.value))) if err_est else math.inf
        history.append({"N": N, "value": ctx.to_str(state.value, digits + 3), "error_estimate": mp.nstr(err_est, 3)})
        if known >= digits:
            return ConstantEstimate(sid.value, state.value, N, err_est, known, history)
    err = PrecisionError(f"{sid.value} reaches only about {known:.1f} digits by N={levels[-1]}; {digits} requested")
    # the best uncertified estimate, for reporting only
    err.estimate = ConstantEstimate(sid.value, state.value, state.N, err_est, known, history)
    raise err


_HALF_ANGLE = {"F_COT", "F_TAN", "G_COT", "G_TAN"}


def _max_half_angle_term(sid, lo: int, hi: int, block: int = 1 << 20) -> float:
    """Largest ``|term|`` on ``[lo, hi]`` for the half-angle series, in float64.

    ``n/2`` is reduced modulo pi with the census's three-part split, which is
    exact in this range, so near-resonant terms keep their magnitude.
    """
    import numpy as np

    from .diophantine import _CW_LIMIT, _PI_A, _PI_B, _PI_C

    if hi // 2 >= _CW_LIMIT:
        raise ValueError("range too large for the float64 reduction")
    best = 0.0
    for a in range(lo, hi + 1, block):
        n = np.arange(a, min(hi, a + block - 1) + 1, dtype=np.float64)
        x = n / 2
        m = np.rint(x / math.pi)
        t = np.abs(np.tan(((x - m * _PI_A) - m * _PI_B) - m * _PI_C))
        f = {"F_COT": 1 / t, "F_TAN": t, "G_COT": t**-2, "G_TAN": t**2}[sid.value]
        best = max(best, float(np.max(f / n**3)))
    return best


def _basis_values(basis: Basis, digits: int, ctx: PrecisionContext, estimates: dict):
    mp = ctx.mp
    if basis is Basis.CL3_BASIS:
        from .polylog import clausen_cos

        # tail bound 1/((N+1)^3 sin(1/2)) below 10^-(digits+2)
        N = int(mp.ceil((mp.mpf(10) ** (digits + 2) / mp.sin(mp.mpf(1) / 2)) ** (mp.mpf(1) / 3)))
        cl3 = clausen_cos(3, 1, N, ctx)
        known = float(-mp.log10(cl3.tail_bound / abs(cl3.value)))
        meta = {"N": N, "tail_bound": mp.nstr(cl3.tail_bound, 3)}
        return ("Cl3(1)", "zeta(3)", "L(3,chi_-3)"), (cl3.value, ctx.zeta3, ctx.L3), known, meta
    sid = "F_COT" if basis is Basis.FCOT_BASIS else "F_TAN"
    est = estimates.get(sid) or constant_estimate(sid, digits, ctx)
    estimates[sid] = est
    meta = {"N": est.N, "error_estimate": mp.nstr(est.error_estimate, 3), "history": est.history}
    labels = (sid, "zeta(3)", "pi^2", "1")
    return labels, (est.value, ctx.zeta3, ctx.pi**2, mp.one), est.known_digits, meta


def scan_relations(bases, bound: int, digits: int, ctx: PrecisionContext, estimates=None) -> dict:
    """Run PSLQ on each named basis; returns a JSON-ready report keyed by basis."""
    if ctx.decimal_digits < digits:
        raise PrecisionError(f"context carries {ctx.decimal_digits} digits, {digits} requested")
    estimates = {} if estimates is None else estimates
    report = {}
    for b in bases:
        b = Basis(b)
        labels, values, known, meta = _basis_values(b, digits, ctx, estimates)
        result = RelationQuery(labels, values, bound, digits, known).run()
        entry = result.as_dict(labels)
        entry.update(labels=list(labels), known_digits=round(known, 2), source=meta)
        entry["values"] = [ctx.to_str(v, digits + 3) for v in values]
        report[b.value] = entry
    return report
