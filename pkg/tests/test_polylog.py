from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from flinthills.polylog import (
    L_chi3_corrected,
    L_chi3_series,
    L_chi3_tail_bound,
    clausen_cos,
    clausen_reduction_report,
    glaisher_sin,
    unit_circle_polylog,
)
from flinthills.precision import const_L3_exact, make_context

angles = st.floats(min_value=-20, max_value=20, allow_nan=False)


def _hp():
    hp = mpmath.MPContext()
    hp.dps = 60
    return hp


def test_clausen_cos_examples(ctx30):
    mp = ctx30.mp
    z = clausen_cos(3, 0, 1000, ctx30)
    assert z.contains(ctx30.zeta3)
    alt = clausen_cos(3, ctx30.pi, 1000, ctx30)
    assert alt.contains(-ctx30.zeta3 * 3 / 4)
    assert f"{float(-ctx30.zeta3 * 3 / 4):.7f}" == "-0.9015427"
    one = clausen_cos(3, 1, 10**5, ctx30)
    ref = _hp().clcos(3, 1)
    assert one.contains(mp.mpf(ref))
    assert f"{float(one.value):.4f}" == "0.4486"


def test_glaisher_sin_examples(ctx30):
    assert glaisher_sin(3, 0, 500, ctx30).value == 0
    beta = glaisher_sin(3, ctx30.pi / 2, 10**4, ctx30)
    assert beta.contains(ctx30.pi**3 / 32)
    s2 = glaisher_sin(2, 1, 10**5, ctx30)
    assert s2.contains(ctx30.mpf(_hp().clsin(2, 1)))


def test_order_and_truncation_checked(ctx30):
    with pytest.raises(ValueError):
        clausen_cos(4, 1, 100, ctx30)
    with pytest.raises(ValueError):
        glaisher_sin(3, 1, 9, ctx30)


def test_l_chi3_small_sums(ctx30):
    assert L_chi3_series(2, ctx30) == ctx30.mpf("0.875")
    exact = Fraction(1) - Fraction(1, 8) + Fraction(1, 64) - Fraction(1, 125)
    assert abs(L_chi3_series(5, ctx30) - ctx30.mpf(exact.numerator) / exact.denominator) < ctx30.tolerance()
    assert ctx30.to_str(L_chi3_series(5, ctx30), 6) == "0.882625"


@pytest.mark.parametrize("N", [100, 101, 102, 1000, 5000])
def test_l_chi3_series_within_tail_bound(N, ctx30):
    assert abs(L_chi3_series(N, ctx30) - const_L3_exact(ctx30)) <= L_chi3_tail_bound(N, ctx30)


@pytest.mark.parametrize("N", [300, 301, 302])
def test_l_chi3_corrected(N, ctx30):
    v = L_chi3_corrected(N, ctx30)
    assert v.contains(const_L3_exact(ctx30))
    assert v.tail_bound < 1e-40


@settings(max_examples=100, deadline=None)
@given(angles)
def test_trilog_duplication(theta):
    ctx = make_context(20)
    N = 2000
    a = unit_circle_polylog(3, 2 * theta, N, ctx)
    b = unit_circle_polylog(3, theta, N, ctx)
    c = unit_circle_polylog(3, ctx.mpf(theta) + ctx.pi, N, ctx)
    budget = a.tail_bound + 4 * (b.tail_bound + c.tail_bound) + ctx.tolerance()
    assert abs(a.value - 4 * (b.value + c.value)) <= budget


@settings(max_examples=50, deadline=None)
@given(angles)
def test_parity_and_period(theta):
    ctx = make_context(20)
    N = 500
    cpos, cneg = clausen_cos(3, theta, N, ctx), clausen_cos(3, -theta, N, ctx)
    assert abs(cpos.value - cneg.value) < ctx.tolerance(5)
    shifted = clausen_cos(3, ctx.mpf(theta) + 2 * ctx.pi, N, ctx)
    assert abs(cpos.value - shifted.value) < ctx.tolerance(5)
    spos, sneg = glaisher_sin(3, theta, N, ctx), glaisher_sin(3, -theta, N, ctx)
    assert abs(spos.value + sneg.value) < ctx.tolerance(5)


@settings(max_examples=20, deadline=None)
@given(st.integers(10, 3000))
def test_zero_angle_is_exact(N):
    ctx = make_context(20)
    v = unit_circle_polylog(3, 0, N, ctx)
    assert v.value.imag == 0
    h3 = ctx.mp.fsum(ctx.mpf(1) / n**3 for n in range(1, N + 1))
    assert abs(v.value.real - h3) < ctx.tolerance()


@settings(max_examples=30, deadline=None)
@given(angles, st.sampled_from([2, 3]))
def test_truncation_matches_mpmath_within_bound(theta, s):
    ctx = make_context(20)
    v = unit_circle_polylog(s, theta, 1000, ctx)
    hp = _hp()
    if hp.sin(hp.mpf(theta) / 2) == 0:
        return
    ref = hp.polylog(s, hp.expj(theta))
    assert abs(ctx.mp.mpc(ref) - v.value) <= 2 * v.tail_bound + ctx.tolerance()


def test_clausen_reduction_report(ctx30):
    rep = clausen_reduction_report(50_000, ctx30)
    assert f"{float(rep.F_cot):.5f}" == "1.87445"
    assert f"{float(2 * rep.Cl3_1.value):.4f}" == "0.8971"
    assert 0.97 < float(rep.gap_F_cot_vs_2Cl3) < 0.98
    # the reductions are measured, not assumed: the gaps are order one
    assert abs(rep.gap_leading_cot) > 1
    body = rep.as_dict(ctx30)
    assert body["N"] == 50_000
    assert set(body["Cl3_1"]) == {"value", "tail_bound"}
    with pytest.raises(ValueError):
        clausen_reduction_report(999, ctx30)
