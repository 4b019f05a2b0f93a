import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from flinthills.kernel import (
    PoleProximityError,
    default_fit_radii,
    kernel_csc,
    kernel_qform,
    kernel_trig,
    laurent_coefficients,
    laurent_fit,
    laurent_remainder_constant,
    pole_distance,
)

# independent 60-digit evaluations of sin 3/sin^3 1 and sin 0.3/sin^3 0.1
K_AT_1 = "0.236848782312175743828005013624874707116885343052451624159818"
K_AT_01 = "297.00200317905339820448630778036567632940404104247083146436"

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


@pytest.mark.parametrize("fn", [kernel_trig, kernel_csc])
def test_special_values(fn, ctx30):
    mp = ctx30.mp
    assert abs(fn(ctx30.pi / 2, ctx30) + 1) < ctx30.tolerance()
    assert abs(fn(ctx30.pi / 6, ctx30) - 8) < ctx30.tolerance()
    assert abs(fn(mp.one, ctx30) - mp.mpf(K_AT_1)) < ctx30.tolerance()


def test_qform_special_values(ctx30):
    mp = ctx30.mp
    for x, ref in [(ctx30.pi / 2, -1), (mp.one, mp.mpf(K_AT_1)), (mp.mpf("0.1"), mp.mpf(K_AT_01))]:
        total = kernel_qform(x, ctx30).total()
        assert abs(total.real - ref) < ctx30.tolerance() * max(1, abs(ref))
        assert abs(total.imag) < ctx30.tolerance() * max(1, abs(ref))


def test_qform_terms_are_separate(ctx30):
    terms = kernel_qform(1, ctx30)
    assert len(terms.as_tuple()) == 5
    assert terms.constant == -4


@pytest.mark.parametrize("fn", [kernel_trig, kernel_csc, kernel_qform])
def test_pole_proximity(fn, ctx30):
    mp = ctx30.mp
    with pytest.raises(PoleProximityError) as err:
        fn(mp.zero, ctx30)
    assert err.value.distance == 0
    x = 3 * ctx30.pi + mp.mpf(10) ** -30
    with pytest.raises(PoleProximityError) as err:
        fn(x, ctx30)
    assert err.value.distance < mp.mpf(10) ** -29
    # 10^-20 is comfortably outside the 10^-22.5 exclusion radius
    fn(ctx30.pi + mp.mpf(10) ** -20, ctx30)


def test_pole_distance(ctx30):
    assert abs(pole_distance(355, ctx30) - (355 - 113 * ctx30.pi)) < ctx30.tolerance()


def test_laurent_coefficients_exact():
    assert laurent_coefficients(0).coefficients == (3, 0, -3)
    exp = laurent_coefficients(4)
    assert exp.coefficients == (3, 0, -3, 0, Fraction(1, 5), 0, Fraction(2, 63))
    assert all(isinstance(c, Fraction) for c in exp.coefficients)
    assert exp.pole_order == 2
    assert exp.coefficient(-1) == 0
    with pytest.raises(ValueError):
        laurent_coefficients(5)


def test_laurent_fit_on_linear_radii(ctx30):
    fit = laurent_fit([ctx30.mpf(k) / 100 for k in range(1, 11)], ctx30)
    assert abs(fit.coefficient(-2) - 3) < 1e-6
    assert abs(fit.coefficient(-1)) < 1e-6
    assert abs(fit.coefficient(2) - mpmath.mpf(1) / 5) < 1e-4


def test_laurent_fit_default_radii(ctx30):
    fit = laurent_fit(default_fit_radii(ctx30), ctx30)
    exact = laurent_coefficients(4)
    for p in (-2, -1, 0, 1, 2):
        c = exact.coefficient(p)
        assert abs(fit.coefficient(p) - mpmath.mpf(c.numerator) / c.denominator) < 1e-6
    c = exact.coefficient(4)
    assert abs(fit.coefficient(4) - mpmath.mpf(c.numerator) / c.denominator) < 1e-4


def test_trig_and_csc_agree_on_ten_thousand_points(ctx30):
    rng = random.Random(7)
    checked = 0
    while checked < 10_000:
        x = ctx30.mpf(rng.uniform(-50, 50))
        if pole_distance(x, ctx30) <= 0.01:
            continue
        a = kernel_trig(x, ctx30)
        assert abs(a - kernel_csc(x, ctx30)) < ctx30.tolerance() * max(1, abs(a))
        checked += 1


def test_laurent_fit_rejects_bad_radii(ctx30):
    with pytest.raises(ValueError):
        laurent_fit([ctx30.mpf(k) / 100 for k in range(1, 6)], ctx30)
    with pytest.raises(ValueError):
        laurent_fit(["0.01"] * 10, ctx30)
    with pytest.raises(ValueError):
        laurent_fit([ctx30.mpf(k) / 10 for k in range(1, 9)], ctx30)


def test_laurent_remainder_constant(ctx30):
    # next coefficient is 3/675 (from u^6 of 3(u/sin u)^2), so C sits near it
    c = laurent_remainder_constant(ctx30)
    assert 0.001 < c < 0.01


@settings(max_examples=200, deadline=None)
@given(finite)
def test_trig_and_csc_forms_agree(x):
    ctx = _ctx()
    assume(pole_distance(x, ctx) > 0.01)
    a, b = kernel_trig(x, ctx), kernel_csc(x, ctx)
    assert abs(a - b) < ctx.tolerance() * max(1, abs(a))


@settings(max_examples=200, deadline=None)
@given(finite)
def test_period_pi(x):
    ctx = _ctx()
    assume(pole_distance(x, ctx) > 0.01)
    a, b = kernel_trig(x, ctx), kernel_trig(ctx.mpf(x) + ctx.pi, ctx)
    assert abs(a - b) < ctx.tolerance() * max(1, abs(a))


@settings(max_examples=100, deadline=None)
@given(finite)
def test_qform_matches_trig(x):
    ctx = _ctx()
    assume(pole_distance(x, ctx) > 0.01)
    a = kernel_trig(x, ctx)
    total = kernel_qform(x, ctx).total()
    scale = max(1, abs(a))
    assert abs(total.real - a) < ctx.tolerance() * scale
    assert abs(total.imag) < ctx.tolerance() * scale


def _ctx():
    from flinthills.precision import make_context

    return make_context(30)
