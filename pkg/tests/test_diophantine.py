import csv
import json
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from flinthills.diophantine import (
    Regime,
    classify,
    export_census_csv,
    export_census_json,
    pi_convergents,
    regime_census,
    signed_near_distance,
    sin_integer,
    weyl_sum_magnitude,
)
from flinthills.precision import PrecisionError, make_context


def _cf_oracle(count):
    """Plain continued-fraction expansion of a 50-digit pi."""
    hp = mpmath.MPContext()
    hp.dps = 50
    x = hp.pi
    p0, q0, p1, q1 = 1, 0, int(hp.floor(x)), 1
    out = [(p1, q1)]
    x = 1 / (x - hp.floor(x))
    while len(out) < count:
        a = int(hp.floor(x))
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((p1, q1))
        x = 1 / (x - a)
    return out


def test_first_convergents(ctx30):
    convs = pi_convergents(4, ctx30)
    assert [(c.p, c.q) for c in convs] == [(3, 1), (22, 7), (333, 106), (355, 113)]
    assert [(c.p, c.q) for c in convs] == _cf_oracle(4)
    assert str(convs[3]) == "355/113"
    assert f"{float(convs[3].error):.3g}" == "2.67e-07"
    (first,) = pi_convergents(1, ctx30)
    assert (first.p, first.q) == (3, 1)
    assert abs(first.error - mpmath.mpf("0.14159265")) < 1e-8


def test_convergents_match_oracle_and_properties(ctx30):
    convs = pi_convergents(20, ctx30)
    assert [(c.p, c.q) for c in convs] == _cf_oracle(20)
    for prev, c in zip(convs, convs[1:]):
        assert c.q > prev.q
    for c in convs:
        assert math.gcd(c.p, c.q) == 1
        assert c.error < ctx30.mpf(1) / c.q**2


def test_convergent_count_is_precision_limited():
    ctx = make_context(10)
    with pytest.raises(PrecisionError):
        pi_convergents(60, ctx)
    with pytest.raises(ValueError):
        pi_convergents(0, ctx)


def test_signed_near_distance_examples(ctx30):
    nd = signed_near_distance(1, ctx30)
    assert (nd.m, nd.delta) == (0, 1)
    nd = signed_near_distance(355, ctx30)
    assert nd.m == 113
    assert f"{float(nd.delta):.4g}" == "3.014e-05"
    nd = signed_near_distance(3, ctx30)
    assert nd.m == 1
    assert abs(nd.delta - (3 - ctx30.pi)) < ctx30.tolerance()
    with pytest.raises(ValueError):
        signed_near_distance(0, ctx30)


def test_reduction_needs_guard_digits():
    ctx = make_context(10, guard_digits=3)
    signed_near_distance(2, ctx)
    with pytest.raises(PrecisionError):
        signed_near_distance(355, ctx)


def test_sin_integer_examples(ctx30):
    hp = mpmath.MPContext()
    hp.dps = 60
    for n in (1, 2, 355, 103993):
        assert abs(sin_integer(n, ctx30) - hp.sin(n)) < abs(hp.sin(n)) * ctx30.mpf(10) ** -30
    assert f"{float(sin_integer(355, ctx30)):.5g}" == "-3.0144e-05"


def test_classify_examples(ctx30):
    assert classify(2, ctx30) is Regime.G
    assert classify(355, ctx30) is Regime.R
    assert classify(333, ctx30) is Regime.I


def test_classify_alternative_exponents(ctx30):
    # with exponents (1, 2) the threshold for R is n^-2 = 7.8e-6 at 355
    assert classify(355, ctx30, exponents=(Fraction(1), Fraction(2))) is Regime.I


def test_weyl_sum_examples(ctx30):
    hp = mpmath.MPContext()
    hp.dps = 60
    assert abs(weyl_sum_magnitude(1, 10, ctx30) - abs(hp.sin(10) / hp.sin(1))) < ctx30.tolerance()
    assert abs(weyl_sum_magnitude(1, 1, ctx30) - 1) < ctx30.tolerance()
    assert abs(weyl_sum_magnitude(2, 100, ctx30) - abs(hp.sin(200) / hp.sin(2))) < ctx30.tolerance()
    assert f"{float(weyl_sum_magnitude(2, 100, ctx30)):.4f}" == "0.9604"


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(1, 3000))
def test_weyl_sum_closed_form(h, N):
    ctx = make_context(20)
    mp = ctx.mp
    closed = abs(mp.sin(N * h) / mp.sin(h))
    assert abs(weyl_sum_magnitude(h, N, ctx) - closed) < ctx.tolerance(6)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**7))
def test_reduction_identity(n):
    ctx = make_context(30)
    nd = signed_near_distance(n, ctx)
    assert -ctx.pi / 2 < nd.delta <= ctx.pi / 2
    s = sin_integer(n, ctx)
    assert abs(s - (-1) ** nd.m * ctx.mp.sin(nd.delta)) < ctx.mpf(10) ** (2 - ctx.working_digits)
    assert abs(s - ctx.mp.sin(n)) < ctx.mpf(10) ** (3 + ctx.digits_lost(n) - ctx.working_digits)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**6))
def test_classification_matches_thresholds(n):
    ctx = make_context(30)
    s = abs(sin_integer(n, ctx))
    label = classify(n, ctx)
    x = ctx.mpf(n)
    assert (label is Regime.G) == (s >= x**-0.5)
    assert (label is Regime.R) == (s < x**-1.5)


def test_census_1000_exact_and_fast_agree(ctx30):
    fast = regime_census(1000, ctx30)
    slow = regime_census(1000, ctx30, exact=True)
    assert fast.members_R == slow.members_R == [1, 3, 22, 355]
    brute = [n for n in range(1, 1001) if classify(n, ctx30) is Regime.R]
    assert brute == [1, 3, 22, 355]
    for c in (fast, slow):
        assert c.count_G + c.count_I + c.count_R == 1000
    assert (fast.count_G, fast.count_I) == (slow.count_G, slow.count_I)
    assert fast.members_I == slow.members_I
    assert abs(fast.min_scaled_delta - slow.min_scaled_delta) < ctx30.tolerance()
    assert fast.min_scaled_delta_n == 355
    assert fast.generic_bound_max_ratio <= 1
    assert slow.generic_bound_max_ratio <= 1


def test_census_members_satisfy_definitions(ctx30):
    c = regime_census(20_000, ctx30)
    for n in c.members_R:
        assert abs(sin_integer(n, ctx30)) < ctx30.mpf(n) ** -1.5
    for n in c.members_I[:500]:
        s = abs(sin_integer(n, ctx30))
        assert ctx30.mpf(n) ** -1.5 <= s < ctx30.mpf(n) ** -0.5
    assert c.count_G + c.count_I + c.count_R == 20_000


def test_census_member_cap(ctx30):
    c = regime_census(20_000, ctx30, i_cap=10)
    assert len(c.members_I) == 10
    assert c.count_I > 10


def test_census_exports(tmp_path, ctx30):
    c = regime_census(1000, ctx30)
    export_census_csv(c, tmp_path / "census.csv", ctx30)
    rows = list(csv.DictReader(open(tmp_path / "census.csv")))
    assert list(rows[0]) == ["n", "m", "delta", "abs_sin_n", "regime"]
    assert {int(r["n"]) for r in rows if r["regime"] == "R"} == {1, 3, 22, 355}
    export_census_csv(c, tmp_path / "all.csv", ctx30, rows="all")
    assert sum(1 for _ in open(tmp_path / "all.csv")) == 1001
    export_census_json(c, tmp_path / "census.json", ctx30)
    body = json.load(open(tmp_path / "census.json"))
    assert body["counts"]["R"] == 4
    assert body["R_members"] == [1, 3, 22, 355]
    assert body["min_abs_delta_n32_at"] == 355
    assert "1000" in body["I_ratio_sqrtN"]
