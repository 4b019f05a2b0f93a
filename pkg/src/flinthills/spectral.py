"""Numerical check of the Fourier transform of K against Gaussian test functions.

Transform convention: ``f^(xi) = int f(x) e^{-i xi x} dx``. With this
convention the distributional transform of K is the delta comb::

    K^ = -8 pi delta(xi) - 12 pi sum_{k != 0} |k| delta(xi - 2k)

For ``phi(xi) = exp(-xi^2 / (2 sigma^2))`` the transform is
``psi(x) = sigma sqrt(2 pi) exp(-sigma^2 x^2 / 2)`` and duality gives::

    <K^, phi> = -8 pi - 24 pi sum_{k>=1} k exp(-2 k^2 / sigma^2)   (comb side)
    <K, psi>  = finite-part integral of K psi over the real line     (kernel side)

The kernel side is integrated panel by panel, one panel ``[j pi - pi/2, j pi + pi/2]``
per pole. On each panel the double pole ``3/u^2`` is handled by the Hadamard
finite part with cut-off radius ``r``::

    FP int_{|u|<a} g/u^2 = int_{r<|u|<a} g/u^2 + int_{|u|<r} (g - g(0))/u^2 - 2 g(0)/r

which does not depend on ``r``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .precision import PrecisionContext, PrecisionError

__all__ = [
    "CombWeight",
    "FinitePartQuadrature",
    "PairingResult",
    "QuadratureBudgetError",
    "comb_weights",
    "non_resonance_constant",
    "pair_comb_gaussian",
    "pair_kernel_finitepart",
    "parseval_check",
    "spectral_report",
]

PARSEVAL_TOLERANCE = 1e-6
DEFAULT_COMB_TOLERANCE = 1e-12


class QuadratureBudgetError(ArithmeticError):
    """A tail or quadrature error bound exceeded its allowed budget."""


@dataclass(frozen=True)
class CombWeight:
    k: int
    location: int
    coefficient: object


def comb_weights(kmax: int, ctx: PrecisionContext | None = None) -> list[CombWeight]:
    """Point masses of the comb for ``|k| <= kmax``, ordered by ``k``."""
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    if ctx is None:
        from .precision import make_context

        ctx = make_context(30)
    pi = ctx.pi
    out = []
    for k in range(-kmax, kmax + 1):
        coeff = -8 * pi if k == 0 else -12 * pi * abs(k)
        out.append(CombWeight(k, 2 * k, coeff))
    return out


def _comb_tail_bound(sigma, kmax: int, ctx):
    """Bound on ``24 pi sum_{k>kmax} k exp(-2k^2/sigma^2)``.

    ``f(x) = x exp(-2x^2/sigma^2)`` decreases for ``x >= sigma/2``, so the sum
    from ``k0 = kmax+1`` on is at most ``f(k0) + int_{k0}^inf f``.
    """
    mp = ctx.mp
    k0 = kmax + 1
    if k0 < sigma / 2:
        return mp.inf
    e = mp.exp(-2 * mp.mpf(k0) ** 2 / sigma**2)
    return 24 * ctx.pi * (k0 * e + sigma**2 / 4 * e)


def pair_comb_gaussian(sigma, ctx: PrecisionContext, kmax: int | None = None, tol=None):
    """Comb side ``<K^, phi>``; raises if the k-tail exceeds ``tol`` relative.

    With ``kmax=None`` the smallest ``kmax`` whose tail is below working
    tolerance is used. An explicit ``kmax`` is checked against ``tol``
    (default ``1e-12``).
    """
    mp = ctx.mp
    sigma = mp.mpf(sigma)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    auto = kmax is None
    if tol is None:
        tol = ctx.tolerance() if auto else DEFAULT_COMB_TOLERANCE
    tol = mp.mpf(tol)
    kmax = 0 if auto else kmax
    while True:
        value = -8 * ctx.pi - 24 * ctx.pi * mp.fsum(k * mp.exp(-2 * mp.mpf(k) ** 2 / sigma**2) for k in range(1, kmax + 1))
        bound = _comb_tail_bound(sigma, kmax, ctx)
        if bound <= tol * abs(value):
            return value
        if not auto:
            raise QuadratureBudgetError(
                f"comb tail bound {mp.nstr(bound, 3)} exceeds {mp.nstr(tol, 3)} relative at kmax={kmax}"
            )
        kmax += 1


@dataclass(frozen=True)
class FinitePartQuadrature:
    """Panel quadrature layout for the kernel side.

    ``M`` poles on each side of the origin are visited; ``radius`` is the
    finite-part cut-off; ``nodes`` is the Gauss-Legendre order per segment.
    """

    M: int = 40
    radius: object = "0.5"
    nodes: int = 40
    budget: float = 1e-9

    def __post_init__(self):
        if self.M < 1 or self.nodes < 4:
            raise ValueError("need M >= 1 and at least 4 nodes")


@dataclass
class PairingResult:
    value: object
    quadrature_error: object
    truncation_bound: object
    panels: int
    radius: object


_NODE_CACHE: dict = {}


def _gauss_legendre(n: int, mp):
    key = (n, mp.prec)
    if key not in _NODE_CACHE:
        nodes = []
        for i in range(1, n + 1):
            x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
            while True:
                p0, p1 = mp.one, x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) <= mp.eps * 4:
                    break
            p0, p1 = mp.one, x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            nodes.append((x, 2 / ((1 - x * x) * dp * dp)))
        _NODE_CACHE[key] = nodes
    return _NODE_CACHE[key]


def _integrate(f, a, b, rule):
    h = (b - a) / 2
    m = (a + b) / 2
    return h * sum(w * f(m + h * x) for x, w in rule)


def _panel(center, sigma, r, rule, ctx):
    """Finite part of ``int K(u) psi(center + u) du`` over ``|u| < pi/2``."""
    mp = ctx.mp
    pre = sigma * mp.sqrt(2 * ctx.pi)
    s2 = sigma * sigma / 2

    def psi(x):
        return pre * mp.exp(-s2 * x * x)

    g0 = psi(center)
    a = ctx.pi / 2

    def inner(u):
        gs = psi(center + u) + psi(center - u)
        remainder = 3 / mp.sin(u) ** 2 - 4 - 3 / (u * u)
        return 3 * (gs - 2 * g0) / (u * u) + remainder * gs

    def outer(u):
        return (3 / mp.sin(u) ** 2 - 4) * (psi(center + u) + psi(center - u))

    return _integrate(inner, mp.zero, r, rule) + _integrate(outer, r, a, rule) - 6 * g0 / r


def _panel_bound(j, sigma, ctx):
    """Crude bound on the finite-part contribution of panel ``j`` (``j >= 1``)."""
    mp = ctx.mp
    a = ctx.pi / 2
    near = abs(j) * ctx.pi - a
    gmax = sigma * mp.sqrt(2 * ctx.pi) * mp.exp(-sigma**2 * near**2 / 2)
    far = near + ctx.pi
    g2max = gmax * sigma**2 * (sigma**2 * far**2 + 1)
    # |FP int 3 g/u^2| <= 3 (a max|g''| + 2 max|g| / a), and |K - 3/u^2| <= 3
    return 3 * (a * g2max + 2 * gmax / a) + 6 * a * gmax


def pair_kernel_finitepart(sigma, quad: FinitePartQuadrature, ctx: PrecisionContext) -> PairingResult:
    """Kernel side ``<K, psi>`` by panel-wise finite-part quadrature.

    Panels with ``|j| <= M`` are integrated; the rest are bounded by
    :func:`_panel_bound`. Panels whose bound is already below the working
    tolerance are skipped. The quadrature error is estimated from the
    difference to a half-order rule.
    """
    mp = ctx.mp
    sigma = mp.mpf(sigma)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    r = mp.mpf(quad.radius)
    if not 0 < r < ctx.pi / 2:
        raise ValueError("cut-off radius must lie in (0, pi/2)")
    rule = _gauss_legendre(quad.nodes, mp)
    coarse = _gauss_legendre(quad.nodes // 2, mp)
    eps = ctx.tolerance(0)
    fine_total = coarse_total = mp.zero
    panels = 0
    for j in range(quad.M + 1):
        if j and _panel_bound(j, sigma, ctx) < eps:
            break
        for c in ({j, -j} if j else {0}):
            center = c * ctx.pi
            fine_total += _panel(center, sigma, r, rule, ctx)
            coarse_total += _panel(center, sigma, r, coarse, ctx)
            panels += 1
    else:
        j = quad.M + 1
    # skipped panels on both sides
    trunc = mp.zero
    k = j
    while True:
        b = 2 * _panel_bound(k, sigma, ctx)
        trunc += b
        if b < eps * trunc or b == 0 or b < mp.eps * eps:
            break
        k += 1
    err = abs(fine_total - coarse_total)
    scale = abs(fine_total) or mp.one
    if trunc > quad.budget * scale:
        raise QuadratureBudgetError(
            f"Gaussian truncation bound {mp.nstr(trunc, 3)} exceeds budget at M={quad.M}, sigma={mp.nstr(sigma, 5)}"
        )
    if err > quad.budget * scale:
        raise QuadratureBudgetError(f"quadrature error estimate {mp.nstr(err, 3)} exceeds budget with {quad.nodes} nodes")
    return PairingResult(fine_total, err, trunc, panels, r)


@dataclass
class ParsevalEntry:
    sigma: object
    comb: object
    kernel: PairingResult
    relative_error: object


@dataclass
class ParsevalReport:
    entries: list = field(default_factory=list)
    tolerance: float = PARSEVAL_TOLERANCE

    @property
    def max_relative_error(self):
        return max((e.relative_error for e in self.entries), default=0)

    @property
    def passed(self) -> bool:
        return all(e.relative_error < self.tolerance for e in self.entries)


def parseval_check(sigmas, ctx: PrecisionContext, quad: FinitePartQuadrature | None = None) -> ParsevalReport:
    """Compare both pairings for each ``sigma`` in ``[0.2, 2]``."""
    quad = quad or FinitePartQuadrature()
    report = ParsevalReport()
    for s in sigmas:
        s = ctx.mpf(s)
        if not ctx.mpf("0.2") <= s <= 2:
            raise ValueError("sigma must lie in [0.2, 2]")
        comb = pair_comb_gaussian(s, ctx)
        kern = pair_kernel_finitepart(s, quad, ctx)
        report.entries.append(ParsevalEntry(s, comb, kern, abs(kern.value - comb) / abs(comb)))
    return report


def non_resonance_constant(kmax: int, ctx: PrecisionContext):
    """``min_{1<=k<=kmax} ||pi k|| k^(3/2)`` and its minimiser.

    ``||.||`` is the distance to the nearest integer. A positive value is the
    empirical form of the absence of exact resonances between the comb
    frequencies and the integers.
    """
    mp = ctx.mp
    if mp.mpf(kmax) * ctx.pi > mp.mpf(10) ** (ctx.guard_digits - 1):
        raise PrecisionError("kmax too large for the guard digits")
    best, arg = mp.inf, None
    for k in range(1, kmax + 1):
        x = ctx.pi * k
        v = abs(x - mp.nint(x)) * mp.mpf(k) ** mp.mpf(1.5)
        if v < best:
            best, arg = v, k
    return best, arg


def spectral_report(sigmas, ctx: PrecisionContext, quad: FinitePartQuadrature | None = None, radii=("0.3", "0.5", "0.8")) -> dict:
    """JSON-ready summary: both sides per sigma, cut-off audit, non-resonance constant."""
    quad = quad or FinitePartQuadrature()
    rep = parseval_check(sigmas, ctx, quad)
    rows = []
    for e in rep.entries:
        by_r = [pair_kernel_finitepart(e.sigma, FinitePartQuadrature(quad.M, r, quad.nodes, quad.budget), ctx).value for r in radii]
        spread = max(by_r) - min(by_r)
        rows.append(
            {
                "sigma": ctx.to_str(e.sigma, 6),
                "comb_side": ctx.to_str(e.comb, 20),
                "kernel_side": ctx.to_str(e.kernel.value, 20),
                "relative_error": ctx.to_str(e.relative_error, 3),
                "quadrature_error": ctx.to_str(e.kernel.quadrature_error, 3),
                "truncation_bound": ctx.to_str(e.kernel.truncation_bound, 3),
                "panels": e.kernel.panels,
                "cutoff_radii": list(radii),
                "cutoff_spread": ctx.to_str(spread, 3),
            }
        )
    const, arg = non_resonance_constant(10**4, ctx)
    return {
        "pairings": rows,
        "max_relative_error": ctx.to_str(rep.max_relative_error, 3),
        "tolerance": PARSEVAL_TOLERANCE,
        "passed": rep.passed,
        "non_resonance": {"kmax": 10**4, "constant": ctx.to_str(const, 8), "argmin": arg},
    }


def write_spectral_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")
