import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from flinthills.precision import PrecisionError, make_context
from flinthills.relation import (
    Basis,
    ConstantEstimate,
    Outcome,
    RelationQuery,
    constant_estimate,
    pslq,
    scan_relations,
)


def _hp(digits=60):
    hp = mpmath.MPContext()
    hp.dps = digits
    return hp


def _normalise(a):
    g = math.gcd(*a)
    a = [x // g for x in a]
    first = next(x for x in a if x)
    return tuple(-x for x in a) if first < 0 else tuple(a)


def planted_case(rng, hp):
    while True:
        a = [rng.randint(-50, 50) for _ in range(4)]
        if a[3] and any(a[:3]):
            break
    v = [hp.mpf(rng.random()) + rng.randint(0, 3) for _ in range(3)]
    v.append(-(a[0] * v[0] + a[1] * v[1] + a[2] * v[2]) / a[3])
    return a, v


def test_exact_dependencies():
    hp = _hp()
    r = pslq([hp.pi, 2 * hp.pi, hp.one], 10, 30)
    assert r.outcome is Outcome.RELATION
    assert r.relation == (2, -1, 0)
    z = hp.zeta(3)
    r = pslq([z, 3 * z + 1, hp.one], 10, 30)
    assert r.relation == (3, -1, 1)
    assert r.residual < hp.mpf(10) ** -27


def test_agrees_with_mpmath_pslq():
    hp = _hp()
    vals = [hp.log(2), hp.log(3), hp.log(6)]
    ours = pslq(vals, 100, 30).relation
    hp.dps = 30
    theirs = hp.pslq([hp.mpf(v) for v in vals], maxcoeff=100, maxsteps=10**4)
    assert _normalise(theirs) == ours == (1, 1, -1)


def test_planted_relations_recovered():
    rng = random.Random(20240611)
    hp = _hp()
    hits = 0
    for _ in range(100):
        a, v = planted_case(rng, hp)
        r = pslq(v, 100, 30)
        hits += r.outcome is Outcome.RELATION and r.relation == _normalise(a)
    assert hits == 100


def test_absence_certificate_for_independent_constants():
    hp = _hp()
    r = pslq([hp.e, hp.pi, hp.euler, hp.one], 1000, 30)
    assert r.outcome is Outcome.ABSENT
    assert r.norm_bound > 1000 * 2
    assert r.relation is None
    body = r.as_dict(["e", "pi", "gamma", "1"])
    assert body["outcome"] == "absent"


def test_zero_input_is_trivial_relation():
    hp = _hp()
    r = pslq([hp.pi, hp.zero, hp.one], 10, 20)
    assert r.outcome is Outcome.RELATION
    assert r.relation == (0, 1, 0)
    assert "trivial" in r.note


def test_argument_checks():
    hp = _hp()
    with pytest.raises(ValueError):
        pslq([hp.pi], 10, 20)
    with pytest.raises(ValueError):
        pslq([hp.pi, hp.e], 10, 11)
    with pytest.raises(ValueError):
        pslq([hp.pi, hp.e], 0, 20)
    with pytest.raises(ValueError):
        pslq([hp.pi, hp.e], 10**7, 20)
    with pytest.raises(ValueError):
        pslq([hp.zero, hp.zero], 10, 20)
    with pytest.raises(PrecisionError):
        pslq([hp.pi, hp.e], 10, 20, known_digits=14)
    with pytest.raises(PrecisionError):
        pslq([math.pi, math.e], 10, 20)


def test_relation_query():
    hp = _hp()
    q = RelationQuery(("pi", "2pi", "1"), (hp.pi, 2 * hp.pi, hp.one), 10, 25)
    assert q.run().relation == (2, -1, 0)
    with pytest.raises(ValueError):
        RelationQuery(("pi",), (hp.pi,), 10, 25)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(min_value=1e-3, max_value=1e3))
def test_scale_invariance(seed, factor):
    rng = random.Random(seed)
    hp = _hp()
    a, v = planted_case(rng, hp)
    base = pslq(v, 100, 30)
    scaled = pslq([x * hp.mpf(factor) for x in v], 100, 30)
    assert base.relation == scaled.relation


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-10**6, 10**6), min_size=3, max_size=4), st.integers(15, 30))
def test_soundness(ints, digits):
    hp = _hp()
    v = [hp.mpf(k) / 997 + hp.sqrt(abs(k) + 2) * (i % 2) for i, k in enumerate(ints)]
    r = pslq(v, 1000, digits)
    if r.outcome is Outcome.RELATION:
        hp.dps = 2 * digits
        norm = max(abs(x) for x in v)
        assert abs(hp.fsum(c * x for c, x in zip(r.relation, v))) < hp.mpf(10) ** (3 - digits) * norm
        assert max(abs(c) for c in r.relation) <= 1000


def test_constant_estimate_refuses_when_short():
    ctx = make_context(20)
    with pytest.raises(PrecisionError):
        constant_estimate("F_COT", 15, ctx, levels=(2000, 4000))
    with pytest.raises(ValueError):
        constant_estimate("S", 12, ctx, levels=(2000,))


def test_constant_estimate_accepts_when_settled():
    ctx = make_context(20)
    est = constant_estimate("G_COT", 4, ctx, levels=(1000, 20_000, 50_000))
    assert est.known_digits >= 4
    assert est.N in (1000, 20_000, 50_000)
    assert est.history[-1]["N"] == est.N


def test_scan_cl3_basis():
    ctx = make_context(20)
    rep = scan_relations([Basis.CL3_BASIS], 100, 15, ctx)
    entry = rep["CL3_BASIS"]
    assert entry["labels"] == ["Cl3(1)", "zeta(3)", "L(3,chi_-3)"]
    assert entry["known_digits"] >= 15
    assert entry["outcome"] in {"absent", "relation", "inconclusive"}


def test_scan_uses_supplied_estimates():
    ctx = make_context(20)
    fcot = ctx.mpf("1.8744480280529")
    est = {"F_COT": ConstantEstimate("F_COT", fcot, 10**7, ctx.mpf("2e-14"), 13.9, [])}
    rep = scan_relations([Basis.FCOT_BASIS], 1000, 13, ctx, estimates=est)
    # 13 digits are too few to separate the basis from coefficient-2000 vectors
    assert rep["FCOT_BASIS"]["outcome"] in {"absent", "inconclusive"}
    assert rep["FCOT_BASIS"]["known_digits"] == 13.9
    assert rep["FCOT_BASIS"]["source"]["N"] == 10**7
    with pytest.raises(PrecisionError):
        scan_relations([Basis.FCOT_BASIS], 1000, 15, ctx, estimates=est)
    with pytest.raises(PrecisionError):
        scan_relations([Basis.CL3_BASIS], 100, 25, ctx)
