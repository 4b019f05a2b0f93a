"""Term providers and resumable summation for every series in the package.

Two evaluation routes exist for each term:

* :func:`term` evaluates one term through :func:`~flinthills.diophantine.sin_cos_integer`
  in mpmath. It is the reference route.
* :func:`partial_sums` runs the fast route. It rotates ``e^{in}`` (and
  ``e^{3in}`` for R1STAR) in fixed point, re-anchoring from ``sin_cos_integer``
  at the first index of every chunk. Accumulators are exact integer sums, so
  the result is bit-identical however the range is split across chunks,
  workers or checkpoints.

Series (all summed over ``n = 1..N``)::

    S        1 / (n^3 sin^2 n)
    R1STAR   sin 3n / (n^3 sin^3 n)
    A, B     1 / (n^3 (e^{in} + 1)),  1 / (n^3 (e^{in} + 1)^2)
    C, D     1 / (n^3 (e^{in} - 1)),  1 / (n^3 (e^{in} - 1)^2)
    F_COT    cot(n/2) / n^3            F_TAN   tan(n/2) / n^3
    G_COT    cot^2(n/2) / n^3          G_TAN   tan^2(n/2) / n^3
    H3       1 / n^3
"""

from __future__ import annotations

import enum
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import _fixed
from .diophantine import Regime, classify, signed_near_distance, sin_cos_integer
from .kernel import PoleProximityError
from .precision import PrecisionContext, PrecisionError, make_context

__all__ = [
    "CheckpointError",
    "SeriesId",
    "SeriesState",
    "SpikeRecord",
    "acceleration_failure_demo",
    "load_checkpoint",
    "partial_sum",
    "partial_sums",
    "richardson_half",
    "save_checkpoint",
    "spike_ledger",
    "term",
    "verify_explicit",
    "verify_partial_fraction",
    "verify_reduction",
]

DEFAULT_SPIKE_THRESHOLD = 1
CHECKPOINT_VERSION = 1


class SeriesId(str, enum.Enum):
    S = "S"
    R1STAR = "R1STAR"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    F_COT = "F_COT"
    F_TAN = "F_TAN"
    G_COT = "G_COT"
    G_TAN = "G_TAN"
    H3 = "H3"

    @property
    def is_complex(self) -> bool:
        return self in _COMPLEX


_COMPLEX = frozenset({SeriesId.A, SeriesId.B, SeriesId.C, SeriesId.D})


class CheckpointError(ValueError):
    """A checkpoint is corrupt or does not match the requested computation."""


# --- reference route ----------------------------------------------------------


def _half_angle(c, s, mp):
    """``(cot(n/2), tan(n/2))`` from ``cos n`` and ``sin n`` without cancellation."""
    if c >= 0:
        return (1 + c) / s, s / (1 + c)
    return s / (1 - c), (1 - c) / s


def term(sid: SeriesId, n: int, ctx: PrecisionContext):
    """The ``n``-th term of series ``sid`` (mpf, or mpc for A-D)."""
    sid = SeriesId(sid)
    if n < 1:
        raise ValueError("n must be positive")
    mp = ctx.mp
    if sid is SeriesId.H3:
        return mp.mpf(1) / mp.mpf(n) ** 3
    try:
        c, s = sin_cos_integer(n, ctx)
    except PrecisionError as exc:
        raise PrecisionError(f"{sid.value} term n={n}: {exc}") from exc
    n3 = mp.mpf(n) ** 3
    if sid is SeriesId.S:
        return 1 / (n3 * s * s)
    if sid is SeriesId.R1STAR:
        _, s3 = sin_cos_integer(3 * n, ctx)
        return s3 / (n3 * s**3)
    if sid.is_complex:
        q = mp.mpc(c, s)
        z = q + 1 if sid in (SeriesId.A, SeriesId.B) else q - 1
        if abs(z) <= mp.mpf(10) ** (-ctx.working_digits / 2):
            raise PoleProximityError(abs(z), f"{sid.value} term n={n}: e^(in) -/+ 1 is {abs(z)}")
        w = 1 / z
        if sid in (SeriesId.B, SeriesId.D):
            w = w * w
        return w / n3
    cot, tan = _half_angle(c, s, mp)
    return {
        SeriesId.F_COT: cot,
        SeriesId.F_TAN: tan,
        SeriesId.G_COT: cot * cot,
        SeriesId.G_TAN: tan * tan,
    }[sid] / n3


# --- fast route ---------------------------------------------------------------


@dataclass
class SpikeRecord:
    n: int
    value: object  # mpf or mpc
    abs_delta: object  # mpf
    regime: str


@dataclass
class SeriesState:
    """Resumable accumulator for one series.

    ``real_fixed`` / ``imag_fixed`` are integers scaled by ``2**scale_bits``.
    """

    series: SeriesId
    N: int
    real_fixed: int
    imag_fixed: int
    scale_bits: int
    stamp: dict
    chunk_size: int = _fixed.DEFAULT_CHUNK
    spike_threshold: str = str(DEFAULT_SPIKE_THRESHOLD)
    spikes: list = field(default_factory=list)

    @property
    def context(self) -> PrecisionContext:
        return make_context(self.stamp["decimal_digits"], self.stamp["guard_digits"])

    @property
    def real(self):
        return _fixed.from_fixed(self.real_fixed, self.scale_bits, self.context.mp)

    @property
    def imag(self):
        return _fixed.from_fixed(self.imag_fixed, self.scale_bits, self.context.mp)

    @property
    def value(self):
        if self.series.is_complex:
            return self.context.mp.mpc(self.real, self.imag)
        return self.real

    def to_dict(self) -> dict:
        ctx = self.context
        body = {
            "version": CHECKPOINT_VERSION,
            "series": self.series.value,
            "N": self.N,
            "stamp": dict(self.stamp),
            "scale_bits": self.scale_bits,
            "chunk_size": self.chunk_size,
            "spike_threshold": self.spike_threshold,
            "real": ctx.to_str(self.real, ctx.working_digits),
            "imag": ctx.to_str(self.imag, ctx.working_digits),
            "real_fixed": str(self.real_fixed),
            "imag_fixed": str(self.imag_fixed),
            "spikes": [_spike_to_dict(r, ctx) for r in self.spikes],
        }
        body["content_hash"] = _content_hash(body)
        return body

    @classmethod
    def from_dict(cls, body: dict) -> "SeriesState":
        body = dict(body)
        digest = body.pop("content_hash", None)
        if digest != _content_hash(body):
            raise CheckpointError("checkpoint content hash mismatch")
        stamp = body["stamp"]
        ctx = make_context(stamp["decimal_digits"], stamp["guard_digits"])
        if ctx.stamp != stamp:
            raise CheckpointError(f"checkpoint stamp {stamp} is not reproducible here")
        return cls(
            series=SeriesId(body["series"]),
            N=int(body["N"]),
            real_fixed=int(body["real_fixed"]),
            imag_fixed=int(body["imag_fixed"]),
            scale_bits=int(body["scale_bits"]),
            stamp=stamp,
            chunk_size=int(body["chunk_size"]),
            spike_threshold=body["spike_threshold"],
            spikes=[_spike_from_dict(d, ctx) for d in body["spikes"]],
        )


def _content_hash(body: dict) -> str:
    blob = json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _spike_to_dict(r: SpikeRecord, ctx) -> dict:
    mp = ctx.mp
    v = r.value
    return {
        "n": r.n,
        "value": ctx.to_str(mp.re(v), ctx.working_digits),
        "value_imag": ctx.to_str(mp.im(v), ctx.working_digits),
        "abs_delta": ctx.to_str(r.abs_delta, ctx.working_digits),
        "regime": r.regime,
    }


def _spike_from_dict(d: dict, ctx) -> SpikeRecord:
    mp = ctx.mp
    re, im = mp.mpf(d["value"]), mp.mpf(d["value_imag"])
    value = mp.mpc(re, im) if im else re
    return SpikeRecord(int(d["n"]), value, mp.mpf(d["abs_delta"]), d["regime"])


def save_checkpoint(state: SeriesState, path) -> None:
    with open(path, "w") as fh:
        json.dump(state.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> SeriesState:
    try:
        with open(path) as fh:
            body = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    return SeriesState.from_dict(body)


def _anchor(n: int, ctx, bits: int, triple: bool):
    c, s = sin_cos_integer(n, ctx)
    out = [_fixed.to_fixed(c, bits), _fixed.to_fixed(s, bits)]
    if triple:
        c3, s3 = sin_cos_integer(3 * n, ctx)
        out += [_fixed.to_fixed(c3, bits), _fixed.to_fixed(s3, bits)]
    return out


def _block(task):
    """Fixed-point sums of ``ids`` over ``lo..hi`` inside one chunk.

    ``anchor_n`` is the chunk's first index; rotation starts there even when
    ``lo`` is later, so term values never depend on where a run resumed.
    """
    ids, lo, hi, anchor_n, digits, guard, bits, thr = task
    ctx = make_context(digits, guard)
    ids = [SeriesId(i) for i in ids]
    want = set(ids)
    triple = SeriesId.R1STAR in want
    need_pm = want & {SeriesId.A, SeriesId.B}
    need_mm = want & {SeriesId.C, SeriesId.D}
    need_half = want & {SeriesId.F_COT, SeriesId.F_TAN, SeriesId.G_COT, SeriesId.G_TAN}
    need_s = want & {SeriesId.S, SeriesId.R1STAR}

    one = 1 << bits
    half = 1 << (bits - 1)
    two = 2 * bits
    three = 3 * bits
    thr2 = thr * thr
    cs1, ss1 = _fixed.rotation_step(1, bits)
    cs3, ss3 = _fixed.rotation_step(3, bits) if triple else (0, 0)
    anchor = _anchor(anchor_n, ctx, bits, triple)
    c, s = anchor[0], anchor[1]
    c3, s3 = (anchor[2], anchor[3]) if triple else (0, 0)
    for _ in range(lo - anchor_n):
        c, s = (c * cs1 - s * ss1 + half) >> bits, (s * cs1 + c * ss1 + half) >> bits
        if triple:
            c3, s3 = (c3 * cs3 - s3 * ss3 + half) >> bits, (s3 * cs3 + c3 * ss3 + half) >> bits

    re = {i: 0 for i in ids}
    im = {i: 0 for i in ids}
    spikes = []
    vals = {}
    for n in range(lo, hi + 1):
        n3 = n * n * n
        vals.clear()
        if need_s:
            den = n3 * s * s
            if SeriesId.S in want:
                vals[SeriesId.S] = (1 << three) // den
            if triple:
                vals[SeriesId.R1STAR] = (s3 << three) // (den * s)
        if SeriesId.H3 in want:
            vals[SeriesId.H3] = one // n3
        if need_pm:
            # 1/(q+1) = conj(q+1) / |q+1|^2, before the 1/n^3 weight
            x = c + one
            den = x * x + s * s
            pr, pi = (x << two) // den, (-s << two) // den
            if SeriesId.A in want:
                vals[SeriesId.A] = (pr // n3, pi // n3)
            if SeriesId.B in want:
                vals[SeriesId.B] = (((pr * pr - pi * pi) >> bits) // n3, ((2 * pr * pi) >> bits) // n3)
        if need_mm:
            x = c - one
            den = x * x + s * s
            pr, pi = (x << two) // den, (-s << two) // den
            if SeriesId.C in want:
                vals[SeriesId.C] = (pr // n3, pi // n3)
            if SeriesId.D in want:
                vals[SeriesId.D] = (((pr * pr - pi * pi) >> bits) // n3, ((2 * pr * pi) >> bits) // n3)
        if need_half:
            if c >= 0:
                cot = ((one + c) << bits) // s
                tan = (s << bits) // (one + c)
            else:
                cot = (s << bits) // (one - c)
                tan = ((one - c) << bits) // s
            if SeriesId.F_COT in want:
                vals[SeriesId.F_COT] = cot // n3
            if SeriesId.F_TAN in want:
                vals[SeriesId.F_TAN] = tan // n3
            if SeriesId.G_COT in want:
                vals[SeriesId.G_COT] = ((cot * cot) >> bits) // n3
            if SeriesId.G_TAN in want:
                vals[SeriesId.G_TAN] = ((tan * tan) >> bits) // n3
        for sid, v in vals.items():
            if type(v) is tuple:
                re[sid] += v[0]
                im[sid] += v[1]
                if v[0] * v[0] + v[1] * v[1] >= thr2:
                    spikes.append((n, sid.value, v[0], v[1]))
            else:
                re[sid] += v
                if v >= thr or -v >= thr:
                    spikes.append((n, sid.value, v, 0))
        c, s = (c * cs1 - s * ss1 + half) >> bits, (s * cs1 + c * ss1 + half) >> bits
        if triple:
            c3, s3 = (c3 * cs3 - s3 * ss3 + half) >> bits, (s3 * cs3 + c3 * ss3 + half) >> bits
    return {i.value: (re[i], im[i]) for i in ids}, spikes


def _tasks(ids, start: int, stop: int, ctx, bits: int, thr: int, chunk: int):
    out = []
    n = start
    while n <= stop:
        anchor_n = (n - 1) // chunk * chunk + 1
        hi = min(stop, anchor_n + chunk - 1)
        out.append((tuple(i.value for i in ids), n, hi, anchor_n, ctx.decimal_digits, ctx.guard_digits, bits, thr))
        n = hi + 1
    return out


def partial_sums(
    ids,
    N: int,
    ctx: PrecisionContext,
    resume_from=None,
    chunk_size: int = _fixed.DEFAULT_CHUNK,
    spike_threshold=DEFAULT_SPIKE_THRESHOLD,
    workers: int = 1,
) -> dict:
    """Sum several series over ``1..N`` in one pass.

    ``resume_from`` maps series ids to :class:`SeriesState` values from an
    earlier run with the same context, chunk size and spike threshold; all
    resumed states must share the same ``N``. Chunks may be farmed out to
    ``workers`` processes; the merge is exact, so the result does not depend
    on the worker count.
    """
    ids = [SeriesId(i) for i in dict.fromkeys(ids)]
    if N < 1:
        raise ValueError("N must be positive")
    bits = _fixed.scale_bits(ctx)
    thr_str = str(spike_threshold)
    thr = _fixed.to_fixed(ctx.mpf(thr_str), bits)
    if thr <= 0:
        raise ValueError("spike threshold must be positive")

    start_states = {}
    if resume_from:
        if isinstance(resume_from, SeriesState):
            resume_from = {resume_from.series: resume_from}
        for sid in ids:
            st = resume_from.get(sid)
            if st is None:
                raise CheckpointError(f"no checkpoint supplied for {sid.value}")
            _check_resume(st, sid, ctx, bits, chunk_size, thr_str)
            start_states[sid] = st
        starts = {st.N for st in start_states.values()}
        if len(starts) != 1:
            raise CheckpointError("resumed series stop at different N")
        done = starts.pop()
        if done > N:
            raise CheckpointError(f"checkpoint is at N={done}, beyond requested N={N}")
    else:
        done = 0

    tasks = _tasks(ids, done + 1, N, ctx, bits, thr, chunk_size)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block, tasks))
    else:
        results = [_block(t) for t in tasks]

    out = {}
    for sid in ids:
        prev = start_states.get(sid)
        re = prev.real_fixed if prev else 0
        im = prev.imag_fixed if prev else 0
        spikes = list(prev.spikes) if prev else []
        for sums, _ in results:
            r, i = sums[sid.value]
            re += r
            im += i
        out[sid] = SeriesState(
            series=sid,
            N=N,
            real_fixed=re,
            imag_fixed=im,
            scale_bits=bits,
            stamp=ctx.stamp,
            chunk_size=chunk_size,
            spike_threshold=thr_str,
        )
        out[sid].spikes = spikes
    for _, raw in results:
        for n, sid_value, r, i in raw:
            sid = SeriesId(sid_value)
            out[sid].spikes.append(_make_spike(n, r, i, sid, bits, ctx))
    return out


def _make_spike(n, r, i, sid, bits, ctx) -> SpikeRecord:
    mp = ctx.mp
    re = _fixed.from_fixed(r, bits, mp)
    value = mp.mpc(re, _fixed.from_fixed(i, bits, mp)) if sid.is_complex else re
    nd = signed_near_distance(n, ctx)
    try:
        regime = classify(n, ctx).value
    except PrecisionError:
        regime = "?"
    return SpikeRecord(n, value, abs(nd.delta), regime)


def _check_resume(st: SeriesState, sid, ctx, bits, chunk_size, thr_str):
    if st.series is not sid:
        raise CheckpointError(f"checkpoint is for {st.series.value}, not {sid.value}")
    if st.stamp != ctx.stamp or st.scale_bits != bits:
        raise CheckpointError(f"precision stamp {st.stamp} does not match context {ctx.stamp}")
    if st.chunk_size != chunk_size:
        raise CheckpointError(f"checkpoint chunk size {st.chunk_size} != {chunk_size}")
    if st.spike_threshold != thr_str:
        raise CheckpointError(f"checkpoint spike threshold {st.spike_threshold} != {thr_str}")


def partial_sum(sid: SeriesId, N: int, ctx: PrecisionContext, resume_from: SeriesState | None = None, **kw) -> SeriesState:
    """Sum one series over ``1..N``; see :func:`partial_sums` for options."""
    sid = SeriesId(sid)
    resume = {sid: resume_from} if resume_from is not None else None
    return partial_sums([sid], N, ctx, resume_from=resume, **kw)[sid]


def spike_ledger(sid: SeriesId, N: int, threshold, ctx: PrecisionContext) -> list:
    """All ``n <= N`` whose term magnitude reaches ``threshold``, ascending."""
    if ctx.mpf(str(threshold)) <= 0:
        raise ValueError("threshold must be positive")
    return partial_sum(sid, N, ctx, spike_threshold=threshold).spikes


# --- identity checks ----------------------------------------------------------


@dataclass
class ReductionCheck:
    N: int
    termwise_residual: object  # |R1*(N) - 3 S(N) + 4 H3(N)|
    zeta_residual: object  # |R1*(N) - (3 S(N) - 4 zeta(3))|
    R1STAR: object
    S: object
    H3: object


@dataclass
class ExplicitCheck:
    N: int
    residual: object  # |R1*(N) + 5/2 H3(N) - 3/4 (G_cot(N) + G_tan(N))|
    explicit_value: object  # -5/2 zeta(3) + 3/4 (G_cot + G_tan)
    R1STAR: object
    G_COT: object
    G_TAN: object


@dataclass
class PartialFractionCheck:
    N: int
    residual: object  # |R1*(N) - Re(rhs)|
    imaginary_part: object  # |Im(rhs)|
    combination: object  # -4 H3 + 3A - 3B - 3C - 3D
    A: object
    B: object
    C: object
    D: object
    R1STAR: object


def _values(states):
    return {sid: st.value for sid, st in states.items()}


def verify_reduction(N: int, ctx: PrecisionContext, states=None, **kw) -> ReductionCheck:
    v = _values(states or partial_sums([SeriesId.R1STAR, SeriesId.S, SeriesId.H3], N, ctx, **kw))
    r, s, h = v[SeriesId.R1STAR], v[SeriesId.S], v[SeriesId.H3]
    return ReductionCheck(
        N=N,
        termwise_residual=abs(r - 3 * s + 4 * h),
        zeta_residual=abs(r - (3 * s - 4 * ctx.zeta3)),
        R1STAR=r,
        S=s,
        H3=h,
    )


def verify_explicit(N: int, ctx: PrecisionContext, **kw) -> ExplicitCheck:
    ids = [SeriesId.R1STAR, SeriesId.H3, SeriesId.G_COT, SeriesId.G_TAN]
    v = _values(partial_sums(ids, N, ctx, **kw))
    g = v[SeriesId.G_COT] + v[SeriesId.G_TAN]
    r = v[SeriesId.R1STAR]
    return ExplicitCheck(
        N=N,
        residual=abs(r + ctx.mpf(5) / 2 * v[SeriesId.H3] - ctx.mpf(3) / 4 * g),
        explicit_value=-ctx.mpf(5) / 2 * ctx.zeta3 + ctx.mpf(3) / 4 * g,
        R1STAR=r,
        G_COT=v[SeriesId.G_COT],
        G_TAN=v[SeriesId.G_TAN],
    )


def verify_partial_fraction(N: int, ctx: PrecisionContext, **kw) -> PartialFractionCheck:
    ids = [SeriesId.R1STAR, SeriesId.H3, SeriesId.A, SeriesId.B, SeriesId.C, SeriesId.D]
    v = _values(partial_sums(ids, N, ctx, **kw))
    a, b, c, d = (v[SeriesId(x)] for x in "ABCD")
    rhs = -4 * v[SeriesId.H3] + 3 * a - 3 * b - 3 * c - 3 * d
    mp = ctx.mp
    return PartialFractionCheck(
        N=N,
        residual=abs(v[SeriesId.R1STAR] - mp.re(rhs)),
        imaginary_part=abs(mp.im(rhs)),
        combination=rhs,
        A=a,
        B=b,
        C=c,
        D=d,
        R1STAR=v[SeriesId.R1STAR],
    )


def termwise_residuals(identity: str, N: int, ctx: PrecisionContext):
    """Largest per-term residual of an identity over ``n <= N`` (reference route).

    ``identity`` is ``"reduction"``, ``"explicit"`` or ``"partialfraction"``.
    """
    mp = ctx.mp
    worst = mp.zero
    for n in range(1, N + 1):
        r = term(SeriesId.R1STAR, n, ctx)
        h = term(SeriesId.H3, n, ctx)
        if identity == "reduction":
            res = r - 3 * term(SeriesId.S, n, ctx) + 4 * h
        elif identity == "explicit":
            g = term(SeriesId.G_COT, n, ctx) + term(SeriesId.G_TAN, n, ctx)
            res = r + mp.mpf(5) / 2 * h - mp.mpf(3) / 4 * g
        elif identity == "partialfraction":
            a, b, c, d = (term(SeriesId(x), n, ctx) for x in "ABCD")
            res = r - (-4 * h + 3 * a - 3 * b - 3 * c - 3 * d)
        else:
            raise ValueError(f"unknown identity {identity!r}")
        worst = max(worst, abs(res))
    return worst


# --- extrapolation ------------------------------------------------------------


def richardson_half(s1, N1: int, s2, N2: int):
    """One Richardson step for an error proportional to ``N**-1/2``.

    Returns ``s2 + (s2 - s1) / (sqrt(N2/N1) - 1)``.
    """
    if not (N2 > N1 >= 1):
        raise ValueError("need N2 > N1 >= 1")
    mpctx = getattr(s2, "context", None) or getattr(s1, "context", None)
    if mpctx is not None:
        factor = mpctx.sqrt(mpctx.mpf(N2) / N1) - 1
    else:
        factor = (N2 / N1) ** 0.5 - 1
    return s2 + (s2 - s1) / factor


def neville_limit(levels, values, mp):
    """Polynomial extrapolation in ``h = 1/N`` to ``h = 0``.

    This is the smooth-asymptotics accelerator: it is exact when the error of
    the partial sums is a polynomial in ``1/N``.
    """
    h = [mp.mpf(1) / n for n in levels]
    p = [mp.mpf(v) for v in values]
    k = len(p)
    for j in range(1, k):
        for i in range(k - 1, j - 1, -1):
            p[i] = (h[i - j] * p[i] - h[i] * p[i - 1]) / (h[i - j] - h[i])
    return p[-1]


@dataclass
class AccelerationReport:
    levels_excluding: list
    levels_including: list
    estimate_excluding: object
    estimate_including: object
    direct_N: int
    direct_value: object
    discrepancy_excluding: object
    discrepancy_including: object
    spike_value: object
    h3_estimate: object
    h3_direct: object
    h3_agreement: object
    consistent_excluding: bool
    consistent_including: bool


def acceleration_failure_demo(
    ctx: PrecisionContext,
    direct_N: int = 500_000,
    levels_excluding=(10, 20, 40, 80, 160, 320),
    levels_including=(400, 800, 1600, 3200, 6400, 12800),
    direct_state: SeriesState | None = None,
) -> AccelerationReport:
    """Run a smooth-asymptotics accelerator on R1* partial sums.

    The accelerator extrapolates partial sums at geometrically spaced ``N`` as
    if their error were a polynomial in ``1/N``. Run on levels that stop before
    ``n = 355`` it never sees the spike and lands far from the direct sum.
    The same accelerator applied to ``H3`` (a smooth series) is accurate, which
    is why the failure goes unnoticed. A run counts as consistent when its
    estimate is within 1 of the direct sum.
    """
    mp = ctx.mp
    r = SeriesId.R1STAR
    grid = sorted(set(levels_excluding) | set(levels_including))
    values = {}
    h3_values = {}
    prev = None
    for N in grid:
        prev = partial_sums([r, SeriesId.H3], N, ctx, resume_from=prev)
        values[N] = prev[r].value
        h3_values[N] = prev[SeriesId.H3].value
    if direct_state is None:
        direct_state = partial_sum(r, direct_N, ctx, resume_from=prev[r] if prev[r].N <= direct_N else None)
    direct = direct_state.value
    direct_N = direct_state.N
    est_ex = neville_limit(levels_excluding, [values[n] for n in levels_excluding], mp)
    est_in = neville_limit(levels_including, [values[n] for n in levels_including], mp)
    h3_est = neville_limit(levels_excluding, [h3_values[n] for n in levels_excluding], mp)
    h3_direct = partial_sum(SeriesId.H3, direct_N, ctx).value
    return AccelerationReport(
        levels_excluding=list(levels_excluding),
        levels_including=list(levels_including),
        estimate_excluding=est_ex,
        estimate_including=est_in,
        direct_N=direct_N,
        direct_value=direct,
        discrepancy_excluding=abs(est_ex - direct),
        discrepancy_including=abs(est_in - direct),
        spike_value=term(r, 355, ctx),
        h3_estimate=h3_est,
        h3_direct=h3_direct,
        h3_agreement=abs(h3_est - h3_direct),
        consistent_excluding=abs(est_ex - direct) < 1,
        consistent_including=abs(est_in - direct) < 1,
    )
