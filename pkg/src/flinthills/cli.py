"""Command-line entry point.

Exit status: 0 ok, 2 usage error, 3 precision error, 4 verification failed,
5 I/O or checkpoint failure.
"""

from __future__ import annotations

import argparse
import functools
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from . import _fixed
from .precision import DEFAULT_GUARD_DIGITS, PrecisionError, make_context

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECISION = 3
EXIT_VERIFY = 4
EXIT_IO = 5

OUTPUT_ENV = "FLINTHILLS_OUTPUT_DIR"
TABLE_LEVELS = (10_000, 50_000, 100_000, 200_000, 500_000)
LERCH_N = 50_000
LERCH_MIN_DIGITS = 40
TABLE_PLACES = 7


class VerificationFailed(Exception):
    pass


@dataclass
class RunConfig:
    digits: int = 30
    guard_digits: int = DEFAULT_GUARD_DIGITS
    exponents: tuple = ("1/2", "3/2")
    chunk_size: int = _fixed.DEFAULT_CHUNK
    spike_threshold: str = "1"
    output_dir: str = field(default_factory=lambda: os.environ.get(OUTPUT_ENV, "."))
    checkpoint: str | None = None
    workers: int = 1

    @property
    def context(self):
        return make_context(self.digits, self.guard_digits)

    @property
    def exponent_fractions(self):
        return tuple(Fraction(e) for e in self.exponents)

    def to_json(self) -> str:
        body = asdict(self)
        body["exponents"] = list(self.exponents)
        return json.dumps(body, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        body = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(body) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "exponents" in body:
            body["exponents"] = tuple(str(e) for e in body["exponents"])
        return cls(**body)

    def merged(self, overrides: dict) -> "RunConfig":
        body = asdict(self)
        body.update({k: v for k, v in overrides.items() if k in body})
        body["exponents"] = tuple(body["exponents"])
        return RunConfig(**body)


def checkpoint_roundtrip(state, path):
    """Save ``state`` to ``path`` and read it back."""
    from .series import load_checkpoint, save_checkpoint

    save_checkpoint(state, path)
    return load_checkpoint(path)


# --- subcommands --------------------------------------------------------------


def _out(cfg: RunConfig, name: str) -> Path:
    d = Path(cfg.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def cmd_sum(args, cfg: RunConfig) -> int:
    from .series import SeriesId, load_checkpoint, partial_sum, save_checkpoint

    ctx = cfg.context
    sid = SeriesId(args.series)
    path = args.resume or cfg.checkpoint
    state = None
    if path and Path(path).exists():
        state = load_checkpoint(path)
        if state.N > args.N:
            raise VerificationFailed(f"checkpoint already at N={state.N} > {args.N}")
    step = args.checkpoint_every or args.N
    target = state.N if state else 0
    while target < args.N:
        target = min(args.N, target + step)
        state = partial_sum(
            sid, target, ctx, resume_from=state, chunk_size=cfg.chunk_size,
            spike_threshold=cfg.spike_threshold, workers=cfg.workers,
        )
        if path:
            save_checkpoint(state, path)
    if state is None:
        state = partial_sum(sid, args.N, ctx, chunk_size=cfg.chunk_size, spike_threshold=cfg.spike_threshold)
    value = state.value
    if sid.is_complex:
        print(f"{sid.value}({args.N}) = {ctx.to_str(value.real)} + {ctx.to_str(value.imag)}i")
    else:
        print(f"{sid.value}({args.N}) = {ctx.to_str(value)}")
    for r in state.spikes:
        print(f"  spike n={r.n} term={ctx.mp.nstr(r.value, 10)} |delta|={ctx.mp.nstr(r.abs_delta, 5)} regime={r.regime}")
    return EXIT_OK


def cmd_classify(args, cfg: RunConfig) -> int:
    from .diophantine import export_census_csv, export_census_json, regime_census

    ctx = cfg.context
    census = regime_census(args.N, ctx, exponents=cfg.exponent_fractions, exact=args.exact)
    summary = census.summary(ctx)
    print(json.dumps(summary, indent=1, sort_keys=True))
    if args.csv:
        export_census_csv(census, args.csv, ctx, rows=args.rows)
    if args.json:
        export_census_json(census, args.json, ctx)
    if census.count_G + census.count_I + census.count_R != args.N:
        raise VerificationFailed("census does not partition [1, N]")
    return EXIT_OK


def cmd_convergents(args, cfg: RunConfig) -> int:
    from .diophantine import pi_convergents

    ctx = cfg.context
    for c in pi_convergents(args.count, ctx):
        print(f"{c.p}/{c.q}  |pi - p/q| = {ctx.mp.nstr(c.error, 6)}")
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    from . import series

    ctx = cfg.context
    threshold = ctx.mp.mpf(10) ** (5 - cfg.digits)
    kw = dict(chunk_size=cfg.chunk_size, workers=cfg.workers)
    if args.identity == "reduction":
        r = series.verify_reduction(args.N, ctx, **kw)
        print(f"termwise residual |R1*(N) - 3S(N) + 4H3(N)| = {ctx.mp.nstr(r.termwise_residual, 5)}")
        print(f"zeta-referenced residual |R1*(N) - 3S(N) + 4 zeta(3)| = {ctx.mp.nstr(r.zeta_residual, 5)}")
        worst = r.termwise_residual
    elif args.identity == "explicit":
        r = series.verify_explicit(args.N, ctx, **kw)
        print(f"termwise residual |R1*(N) + 5/2 H3(N) - 3/4 (G_cot(N) + G_tan(N))| = {ctx.mp.nstr(r.residual, 5)}")
        print(f"-5/2 zeta(3) + 3/4 (G_cot + G_tan) = {ctx.to_str(r.explicit_value, 15)}")
        worst = r.residual
    else:
        r = series.verify_partial_fraction(args.N, ctx, **kw)
        print(f"residual |R1*(N) - Re(-4H3 + 3A - 3B - 3C - 3D)| = {ctx.mp.nstr(r.residual, 5)}")
        print(f"imaginary part = {ctx.mp.nstr(r.imaginary_part, 5)}")
        worst = max(r.residual, r.imaginary_part)
    print(f"threshold {ctx.mp.nstr(threshold, 3)}: {'PASS' if worst < threshold else 'FAIL'}")
    if worst >= threshold:
        raise VerificationFailed(args.identity)
    return EXIT_OK


def cmd_laurent(args, cfg: RunConfig) -> int:
    from .kernel import default_fit_radii, laurent_coefficients, laurent_fit

    ctx = cfg.context
    radii = [ctx.mpf(r) for r in args.radii] if args.radii else default_fit_radii(ctx)
    fit = laurent_fit(radii, ctx)
    exact = laurent_coefficients(4)
    for p, c in zip(fit.powers, fit.coefficients):
        print(f"u^{p:+d}: fitted {ctx.mp.nstr(c, 15):>24}  exact {exact.coefficient(p)}")
    print(f"residual norm {ctx.mp.nstr(fit.residual_norm, 3)}")
    return EXIT_OK


def cmd_spectral(args, cfg: RunConfig) -> int:
    from .spectral import FinitePartQuadrature, spectral_report

    ctx = cfg.context
    quad = FinitePartQuadrature(M=args.M, radius=args.radius, nodes=args.nodes)
    report = spectral_report(args.sigma, ctx, quad)
    text = json.dumps(report, indent=1, sort_keys=True)
    print(text)
    if args.json:
        Path(args.json).write_text(text + "\n")
    if not report["passed"]:
        raise VerificationFailed("pairings disagree")
    return EXIT_OK


def cmd_relation(args, cfg: RunConfig) -> int:
    from .relation import scan_relations

    ctx = cfg.context
    report = scan_relations(args.basis, args.bound, args.digits, ctx)
    text = json.dumps(report, indent=1, sort_keys=True)
    print(text)
    if args.json:
        Path(args.json).write_text(text + "\n")
    return EXIT_OK


def partial_sum_table(cfg: RunConfig, levels=TABLE_LEVELS, places: int = TABLE_PLACES):
    """Rows of R1*(N), S(N) and both residuals, plus the Richardson extrapolant of S."""
    from .series import SeriesId, partial_sums, richardson_half, verify_reduction

    ctx = cfg.context
    ids = [SeriesId.R1STAR, SeriesId.S, SeriesId.H3]
    rows = []
    states = None
    for N in levels:
        states = partial_sums(ids, N, ctx, resume_from=states, chunk_size=cfg.chunk_size, workers=cfg.workers)
        chk = verify_reduction(N, ctx, states=states)
        rows.append((N, chk))
    s1, s2 = rows[-2][1].S, rows[-1][1].S
    rich = richardson_half(s1, rows[-2][0], s2, rows[-1][0])
    return rows, rich


def render_table_csv(rows, ctx, places: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "R1STAR", "S", "residual_termwise", "residual_zeta"])
    mp = ctx.mp
    for N, chk in rows:
        w.writerow([
            N,
            _fixed_places(chk.R1STAR, places, mp),
            _fixed_places(chk.S, places, mp),
            mp.nstr(chk.termwise_residual, 3),
            mp.nstr(chk.zeta_residual, 3),
        ])
    return buf.getvalue()


def _fixed_places(x, places, mp) -> str:
    q = mp.nint(x * mp.mpf(10) ** places)
    s = str(int(q))
    neg = s.startswith("-")
    s = s.lstrip("-").rjust(places + 1, "0")
    return ("-" if neg else "") + s[:-places] + "." + s[-places:]


def lerch_values(cfg: RunConfig, N: int = LERCH_N) -> dict:
    from .polylog import L_chi3_corrected, clausen_reduction_report
    from .series import SeriesId, partial_sums, term

    digits = max(cfg.digits, LERCH_MIN_DIGITS)
    ctx = make_context(digits, cfg.guard_digits)
    mp = ctx.mp
    ids = [SeriesId.R1STAR, SeriesId.H3, SeriesId.A, SeriesId.B, SeriesId.C, SeriesId.D,
           SeriesId.F_COT, SeriesId.F_TAN, SeriesId.G_COT, SeriesId.G_TAN]
    st = partial_sums(ids, N, ctx, chunk_size=cfg.chunk_size, workers=cfg.workers)
    v = {k.value: s.value for k, s in st.items()}
    z = ctx.zeta3
    combo = -4 * v["H3"] + 3 * v["A"] - 3 * v["B"] - 3 * v["C"] - 3 * v["D"]

    def c(x, d=12):
        return {"re": ctx.to_str(mp.re(x), d), "im": ctx.to_str(mp.im(x), d)}

    def r(x, d=12):
        return ctx.to_str(x, d)

    quarter = {
        "re_B_minus_(zeta/4 - G_tan/4)": r(mp.re(v["B"]) - (z / 4 - v["G_TAN"] / 4), 3),
        "re_D_minus_(zeta/4 - G_cot/4)": r(mp.re(v["D"]) - (z / 4 - v["G_COT"] / 4), 3),
        "re_B_minus_(zeta/4 - G_tan)": r(mp.re(v["B"]) - (z / 4 - v["G_TAN"]), 3),
        "re_D_minus_(zeta/4 - G_cot)": r(mp.re(v["D"]) - (z / 4 - v["G_COT"]), 3),
    }
    spike = term(SeriesId.R1STAR, 355, ctx)
    from .diophantine import signed_near_distance

    delta = signed_near_distance(355, ctx).delta
    lval = L_chi3_corrected(10_000, ctx)
    clausen = clausen_reduction_report(N, ctx, states=st)
    return {
        "N": N,
        "digits": digits,
        "A": c(v["A"]),
        "B": c(v["B"]),
        "C": c(v["C"]),
        "D": c(v["D"]),
        "combination": c(combo),
        "combination_imag_abs": r(abs(mp.im(combo)), 3),
        "R1STAR": r(v["R1STAR"]),
        "F_cot": r(v["F_COT"]),
        "F_tan": r(v["F_TAN"]),
        "G_cot": r(v["G_COT"]),
        "G_tan": r(v["G_TAN"]),
        "F_cot_plus_2_im_C": r(v["F_COT"] + 2 * mp.im(v["C"]), 3),
        "F_tan_plus_2_im_A": r(v["F_TAN"] + 2 * mp.im(v["A"]), 3),
        "re_C_plus_zeta_over_2": r(mp.re(v["C"]) + z / 2, 3),
        "re_A_minus_zeta_over_2": r(mp.re(v["A"]) - z / 2, 3),
        "quarter_vs_unit_coefficients": quarter,
        "explicit_form_value": r(-mp.mpf(5) / 2 * z + mp.mpf(3) / 4 * (v["G_COT"] + v["G_TAN"])),
        "spike_355": {
            "term": r(spike, 10),
            "laurent_surrogate_3_over_n3_delta2": r(3 / (mp.mpf(355) ** 3 * delta**2), 10),
            "delta": r(delta, 10),
        },
        "L3_exact": r(ctx.L3, 30),
        "L3_series_corrected": {"value": r(lval.value, 30), "bound": r(lval.tail_bound, 3), "N": lval.N},
        "clausen_reduction": clausen.as_dict(ctx, 12),
    }


def cmd_report(args, cfg: RunConfig) -> int:
    ctx = cfg.context
    written = []
    if args.table in ("partial-sums", "all"):
        rows, rich = partial_sum_table(cfg)
        text = render_table_csv(rows, ctx, args.places)
        path = _out(cfg, "partial_sums.csv")
        path.write_text(text)
        full = render_table_csv(rows, ctx, cfg.digits - 3)
        _out(cfg, "partial_sums_full.csv").write_text(full)
        extra = {
            "richardson_S": _fixed_places(rich, args.places, ctx.mp),
            "richardson_S_full": ctx.to_str(rich, 20),
            "levels": [N for N, _ in rows],
        }
        _out(cfg, "partial_sums_extrapolation.json").write_text(json.dumps(extra, indent=1, sort_keys=True) + "\n")
        sys.stdout.write(text)
        print(f"Richardson (p = 1/2) extrapolant of S: {extra['richardson_S']}")
        written += [path]
    if args.table in ("lerch", "all"):
        vals = lerch_values(cfg)
        path = _out(cfg, "lerch_values.json")
        path.write_text(json.dumps(vals, indent=1, sort_keys=True) + "\n")
        print(json.dumps({k: vals[k] for k in ("A", "B", "C", "D", "combination")}, indent=1, sort_keys=True))
        written += [path]
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _common_options() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand's absent flag from clobbering a global one
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="JSON RunConfig; its values override flags")
    p.add_argument("--digits", type=int, help="decimal digits (default 30)")
    p.add_argument("--guard-digits", type=int, dest="guard_digits")
    p.add_argument("--chunk-size", type=int, dest="chunk_size")
    p.add_argument("--spike-threshold", dest="spike_threshold")
    p.add_argument("--output-dir", dest="output_dir", help=f"default ${OUTPUT_ENV} or .")
    p.add_argument("--workers", type=int)
    p.add_argument("--exponents", nargs=2, metavar=("GENERIC", "RESONANT"))
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    p = argparse.ArgumentParser(prog="flinthills", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)
    add = functools.partial(sub.add_parser, parents=[common])

    s = add("sum", help="partial sum of one series")
    s.add_argument("--series", required=True, choices=[x.value for x in _series_ids()])
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--resume", help="checkpoint file: loaded if present, rewritten on progress")
    s.add_argument("--checkpoint-every", type=int, dest="checkpoint_every")
    s.set_defaults(func=cmd_sum)

    s = add("classify", help="G/I/R census of 1..N")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--exact", action="store_true", help="classify every n at high precision")
    s.add_argument("--csv")
    s.add_argument("--rows", choices=["nongeneric", "all"], default="nongeneric")
    s.add_argument("--json")
    s.set_defaults(func=cmd_classify)

    s = add("convergents", help="certified continued-fraction convergents of pi")
    s.add_argument("--count", type=int, default=10)
    s.set_defaults(func=cmd_convergents)

    s = add("verify", help="check a termwise identity at truncation N")
    s.add_argument("--identity", required=True, choices=["reduction", "explicit", "partialfraction"])
    s.add_argument("--N", type=int, required=True)
    s.set_defaults(func=cmd_verify)

    s = add("laurent", help="least-squares Laurent fit of K at its pole")
    s.add_argument("--radii", nargs="*")
    s.set_defaults(func=cmd_laurent)

    s = add("spectral", help="comb vs finite-part pairing for Gaussian tests")
    s.add_argument("--sigma", nargs="+", default=["0.3", "0.5", "1.0"])
    s.add_argument("--M", type=int, default=40)
    s.add_argument("--radius", default="0.5")
    s.add_argument("--nodes", type=int, default=40)
    s.add_argument("--json")
    s.set_defaults(func=cmd_spectral)

    s = add("relation", help="PSLQ scan of a named basis")
    s.add_argument("--basis", nargs="+", default=["FCOT_BASIS", "FTAN_BASIS"],
                   choices=["FCOT_BASIS", "FTAN_BASIS", "CL3_BASIS"])
    s.add_argument("--bound", type=int, default=1000)
    s.add_argument("--relation-digits", type=int, default=15, dest="digits")
    s.add_argument("--json")
    s.set_defaults(func=cmd_relation)

    s = add("report", help="regenerate the partial-sum table and the Lerch values")
    s.add_argument("--table", choices=["partial-sums", "lerch", "all"], default="all")
    s.add_argument("--places", type=int, default=TABLE_PLACES)
    s.set_defaults(func=cmd_report)
    return p


def _series_ids():
    from .series import SeriesId

    return list(SeriesId)


def _config_from(args) -> RunConfig:
    names = ("digits", "guard_digits", "chunk_size", "spike_threshold", "output_dir", "workers", "exponents")
    cfg = RunConfig().merged({k: getattr(args, k) for k in names if getattr(args, k, None) is not None})
    config = getattr(args, "config", None)
    if config:
        text = Path(config).read_text()
        file_cfg = RunConfig.from_json(text)
        given = json.loads(text)
        cfg = cfg.merged({k: getattr(file_cfg, k) for k in given})
    return cfg


def main(argv=None) -> int:
    from .series import CheckpointError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _config_from(args)
        cfg.context  # validates digits
        return args.func(args, cfg)
    except PrecisionError as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (OSError, CheckpointError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
