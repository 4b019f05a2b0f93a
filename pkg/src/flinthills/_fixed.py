"""Fixed-point helpers for long summations.

Values are Python integers scaled by ``2**bits``. Additions are exact, so a
partial sum does not depend on how the index range was split across chunks,
workers or checkpoints; only the per-term rounding matters, and that is a
function of ``n`` alone.
"""

from __future__ import annotations

import mpmath

# Extra bits beyond working precision; covers rotation drift over one chunk
# (at most 2**16 steps, i.e. ~17 bits) with a wide margin.
EXTRA_BITS = 64
DEFAULT_CHUNK = 1 << 16


def scale_bits(ctx) -> int:
    return ctx.working_bits + EXTRA_BITS


def to_fixed(x, bits: int) -> int:
    """Round an mpf (or int/Fraction-compatible value) to the nearest fixed-point integer."""
    if isinstance(x, int):
        man, exp = x, 0
    elif hasattr(x, "_mpf_"):
        sign, man, exp, _ = x._mpf_
        if sign:
            man = -man
    else:
        raise TypeError(f"cannot convert {type(x).__name__} to fixed point")
    man, exp = int(man), int(exp)
    if man == 0:
        return 0
    shift = exp + bits
    if shift >= 0:
        return man << shift
    # round half away from zero
    q, r = divmod(abs(man), 1 << -shift)
    if 2 * r >= (1 << -shift):
        q += 1
    return q if man > 0 else -q


def from_fixed(v: int, bits: int, mp):
    """Convert back to an mpf of context ``mp`` (rounded to its precision)."""
    return mp.mpf((v, -bits)) if v else mp.zero


def hi_context(bits: int):
    """A throwaway mpmath context carrying ``bits`` plus a safety margin."""
    hp = mpmath.MPContext()
    hp.prec = bits + 40
    return hp


def rotation_step(theta, bits: int):
    """Fixed-point ``(cos theta, sin theta)`` accurate to the full scale."""
    hp = hi_context(bits)
    t = hp.mpf(theta)
    return to_fixed(hp.cos(t), bits), to_fixed(hp.sin(t), bits)


def rotate(c: int, s: int, cs: int, ss: int, bits: int):
    """One step of ``(c + i s) * (cs + i ss)`` with round-to-nearest."""
    half = 1 << (bits - 1)
    return (c * cs - s * ss + half) >> bits, (s * cs + c * ss + half) >> bits


def circle_sum(theta, N: int, power: int, ctx, chunk: int = DEFAULT_CHUNK):
    """Fixed-point ``sum_{n=1}^{N} e^{i n theta} / n**power``.

    Rotation is re-anchored from a direct high-precision evaluation at the
    first index of every chunk. Returns ``(real, imag, bits)``.
    """
    bits = scale_bits(ctx)
    hp = hi_context(bits + len(str(N)) * 4)
    th = hp.mpf(theta)
    cs, ss = rotation_step(th, bits)
    half = 1 << (bits - 1)
    re = im = 0
    start = 1
    while start <= N:
        stop = min(N, start + chunk - 1)
        c = to_fixed(hp.cos(start * th), bits)
        s = to_fixed(hp.sin(start * th), bits)
        for n in range(start, stop + 1):
            if power:
                d = n**power
                re += c // d
                im += s // d
            else:
                re += c
                im += s
            c, s = (c * cs - s * ss + half) >> bits, (s * cs + c * ss + half) >> bits
        start = stop + 1
    return re, im, bits
