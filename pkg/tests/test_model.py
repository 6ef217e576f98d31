import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaincore.errors import DomainError, ValidationError
from chaincore.model import (
    CoalitionPair,
    MRSSituation,
    PiecewiseLinearFn,
    RetailerSpec,
    SupplierSpec,
    eval_fn,
    find_q_star,
    min_envelope,
    validate,
    validated,
)

F = PiecewiseLinearFn.from_knots


def test_eval_interpolates_and_extends_constant(ex2):
    w1 = ex2.suppliers[0].wholesale
    assert eval_fn(w1, 10) == pytest.approx(3.5)
    assert eval_fn(w1, 25) == 3.0
    assert eval_fn(w1, 0) == 4.0


def test_eval_rejects_negative_quantity():
    with pytest.raises(DomainError):
        eval_fn(F([(0, 1)]), -1e-12)


@pytest.mark.parametrize(
    "knots",
    [[], [(1, 2)], [(0, 1), (0, 2)], [(0, 1), (2, 1), (1, 0)], [(0, float("nan"))]],
)
def test_bad_knots_rejected(knots):
    with pytest.raises(DomainError):
        PiecewiseLinearFn.from_knots(knots)


def test_envelope_of_example_costs_is_c2(ex2):
    c1, c2 = ex2.suppliers[0].cost, ex2.suppliers[1].cost
    env = min_envelope([c1, c2])
    q = np.linspace(0, 80, 801)
    assert np.allclose(env(q), c2(q), rtol=0, atol=1e-12)


def test_envelope_singleton_is_identity(ex2):
    c1 = ex2.suppliers[0].cost
    assert min_envelope([c1]) is c1


def test_envelope_crossing_point():
    flat = F([(0, 5)])
    kink = F([(0, 6), (4, 2)])
    env = min_envelope([flat, kink])
    assert 1.0 in env.xs
    assert env(1.0) == pytest.approx(5.0)
    q = np.linspace(0, 10, 10001)
    assert np.allclose(env(q), np.minimum(flat(q), kink(q)), atol=1e-12)


def test_envelope_empty_rejected():
    with pytest.raises(DomainError):
        min_envelope([])


@st.composite
def pl_functions(draw):
    k = draw(st.integers(1, 5))
    steps = draw(st.lists(st.floats(0.1, 20), min_size=k - 1, max_size=k - 1))
    xs = np.concatenate([[0.0], np.cumsum(steps)]) if steps else np.array([0.0])
    ys = draw(st.lists(st.floats(-10, 10), min_size=k, max_size=k))
    return PiecewiseLinearFn(tuple(xs.tolist()), tuple(ys))


@settings(max_examples=60, deadline=None)
@given(st.lists(pl_functions(), min_size=1, max_size=4), st.integers(0, 2**32 - 1))
def test_envelope_matches_pointwise_min(fns, seed):
    env = min_envelope(fns)
    q = np.random.default_rng(seed).uniform(0, 120, 1000)
    want = np.min([f(q) for f in fns], axis=0)
    scale = 1 + max(abs(y) for f in fns for y in f.ys)
    assert np.allclose(env(q), want, rtol=0, atol=1e-9 * scale)


@settings(max_examples=60, deadline=None)
@given(pl_functions())
def test_eval_is_lipschitz(f):
    lip = float(np.max(np.abs(f.slopes))) if len(f.xs) > 1 else 0.0
    q = np.linspace(0, f.xs[-1] + 5, 2001)
    d = np.abs(np.diff(f(q)))
    assert np.all(d <= lip * np.diff(q) + 1e-9)


@pytest.mark.parametrize(
    "knots,root",
    [([(0, 5), (50, 0)], 50), ([(0, 8), (40, 0)], 40), ([(0, 30), (300, 0)], 300)],
)
def test_q_star_examples(knots, root):
    assert find_q_star(F(knots)) == pytest.approx(root, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(
    st.floats(0.5, 50), st.lists(st.tuples(st.floats(0.5, 30), st.floats(0.05, 0.95)), min_size=1, max_size=4)
)
def test_q_star_is_first_root(p0, pieces):
    xs, ys = [0.0], [p0]
    for dx, frac in pieces:
        xs.append(xs[-1] + dx)
        ys.append(ys[-1] * frac)
    xs.append(xs[-1] + 10)
    ys.append(0.0)
    p = PiecewiseLinearFn(tuple(xs), tuple(ys))
    r = find_q_star(p)
    assert abs(eval_fn(p, r)) <= 1e-8
    assert eval_fn(p, max(r - 1e-6, 0)) > 0


def test_q_star_errors():
    with pytest.raises(ValidationError, match="never vanishes"):
        find_q_star(F([(0, 5), (10, 1)]))
    with pytest.raises(ValidationError):
        find_q_star(F([(0, 0), (10, -1)]))


def test_examples_validate(ex2, ex4, ex5):
    assert list(ex2.q_star) == [50, 40]
    assert list(ex4.q_star) == [300, 1080]
    assert list(ex5.q_star) == [300]
    assert ex4.unbounded and not ex2.unbounded


def test_example2_cost_product_is_only_a_warning(ex2):
    raw = MRSSituation(ex2.retailers, ex2.suppliers, ex2.capacity)
    result = validate(raw)
    assert result.ok
    assert any("cost" in w.rule for w in result.warnings)


def _one(price=((0, 10), (10, 0)), w=((0, 4),), c=((0, 2),), cap=((5.0,),)):
    return MRSSituation(
        (RetailerSpec("a", F(price)),), (SupplierSpec("s", F(w), F(c)),), cap
    )


def test_wholesale_equal_cost_is_violation():
    res = validate(_one(w=((0, 3),), c=((0, 3),)))
    assert not res.ok
    assert any(v.rule == "wholesale must exceed cost" for v in res.violations)


def test_price_equal_wholesale_at_zero_is_violation():
    res = validate(_one(price=((0, 4), (10, 0))))
    assert any("p(0) > w_j(0) required" in v.rule for v in res.violations)


def test_increasing_price_names_retailer():
    res = validate(_one(price=((0, 10), (2, 12), (10, 0))))
    assert any(v.subject == "retailer a" and "non-increasing" in v.rule for v in res.violations)


def test_wholesale_revenue_must_not_decrease():
    res = validate(_one(w=((0, 4), (10, 0.5)), c=((0, 0.4),)))
    assert any("q*wholesale" in v.rule for v in res.violations)


@pytest.mark.parametrize("cap", [((0.0,),), ((1.0, 2.0),), ((float("inf"),),)])
def test_bad_capacity(cap):
    assert not validate(_one(cap=cap)).ok


def test_all_violations_reported_and_raised():
    bad = _one(price=((0, 3), (10, 0)), w=((0, 3),), c=((0, 3),), cap=((0.0,),))
    res = validate(bad)
    assert len(res.violations) >= 3
    with pytest.raises(ValidationError) as info:
        validated(bad)
    assert len(info.value.violations) == len(res.violations)


def test_duplicate_ids():
    s = _one()
    dup = MRSSituation(s.retailers * 2, s.suppliers, ((5.0,), (5.0,)))
    assert any("unique" in v.rule for v in validate(dup).violations)


def test_coalition_pair_bits():
    p = CoalitionPair.of([0, 2], [1])
    assert p.retailers == 0b101 and p.suppliers == 0b10
    assert p.retailer_indices == (0, 2) and p.supplier_indices == (1,)
    p.check(3, 2)
    with pytest.raises(DomainError):
        p.check(2, 2)


def test_effective_capacity_unbounded(ex4):
    cap = ex4.effective_capacity()
    assert cap.tolist() == [[300, 300], [1080, 1080]]


def test_scaled_functions(ex2):
    s = ex2.scaled(2.0)
    assert s.suppliers[0].wholesale(10) == pytest.approx(7.0)
