import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from families import naive_poly
from polyiter.field import FieldElement, Prime
from polyiter.multipoly import (
    NEG_INF,
    ArityMismatch,
    MultiPoly,
    compose,
    degree_in,
    evaluate,
    evaluate_grid,
    from_term_list,
    parse,
    render,
    total_degree,
)


def X(j, p=5, n=2):
    return MultiPoly.variable(j, p, n)


def poly_strategy(p, n, max_deg=4, max_terms=5):
    exps = st.lists(st.integers(0, max_deg), min_size=n, max_size=n).filter(lambda e: sum(e) <= max_deg)
    return st.dictionaries(exps.map(tuple), st.integers(0, p - 1), max_size=max_terms).map(lambda d: MultiPoly(p, n, d))


def test_evaluate_examples():
    assert evaluate(X(0) * X(1), [2, 3]) == 1
    assert evaluate(MultiPoly.zero(5, 2), [4, 4]) == 0
    f = MultiPoly(3, 2, {(0, 2): 1, (0, 0): 1})
    assert f.evaluate([0, 2]) == 2
    assert f(0, 2) == FieldElement(2, Prime(3))


def test_evaluate_accepts_field_elements():
    f = X(0) * X(1)
    F5 = Prime(5)
    assert f.evaluate([F5(2), F5(3)]) == 1


def test_evaluate_arity_mismatch():
    with pytest.raises(ArityMismatch):
        evaluate(X(0), [1, 2, 3])


def test_add_mul_examples():
    f = X(0) * X(1) + 3
    assert (f + (-f)).is_zero()
    assert X(0) * X(1) == MultiPoly(5, 2, {(1, 1): 1})
    prod = (X(0) * X(1)) * (X(1) + 1)
    assert prod == MultiPoly(5, 2, {(1, 2): 1, (1, 1): 1})
    for w in itertools.product(range(5), repeat=2):
        assert prod.evaluate(w) == (w[0] * w[1] * (w[1] + 1)) % 5


def test_mixed_operands_rejected():
    with pytest.raises(ArityMismatch):
        X(0) + MultiPoly.variable(0, 5, 3)
    with pytest.raises(ValueError):
        X(0) * MultiPoly.variable(0, 7, 2)


def test_canonical_form():
    f = MultiPoly(5, 2, {(1, 0): 3, (0, 1): 0})
    g = MultiPoly(5, 2, {(1, 0): 8})
    assert f == g and hash(f) == hash(g)
    assert len(f) == 1
    assert MultiPoly(5, 2, {(1, 0): 5}).is_zero()


def test_terms_grlex_descending():
    f = parse("X0 + X1^2 + X0*X1 + 1", 7, 2)
    assert [e for e, _ in f.terms()] == [(1, 1), (0, 2), (1, 0), (0, 0)]


def test_compose_examples():
    f = X(0) * X(1) + 2 * X(1) ** 3
    assert compose(f, MultiPoly.identity_tuple(5, 2)) == f
    assert compose(X(0) * X(1), [X(0) * X(1), X(1) + 1]) == MultiPoly(5, 2, {(1, 2): 1, (1, 1): 1})
    c = MultiPoly.constant(4, 5, 2)
    assert compose(c, [X(0) ** 3, X(1) + X(0)]) == c


def test_compose_arity_mismatch():
    with pytest.raises(ArityMismatch):
        compose(X(0), [X(0)])


def test_degree_examples():
    f = MultiPoly(5, 2, {(1, 2): 1, (1, 1): 1})
    assert degree_in(f, 1) == 2
    assert degree_in(MultiPoly.zero(5, 2), 0) is NEG_INF
    g = MultiPoly(3, 2, {(0, 2): 1, (0, 0): 1})
    assert degree_in(g, 0) == 0
    assert total_degree(f) == 3
    assert total_degree(MultiPoly.constant(2, 5, 2)) == 0
    s, t = 3, 4
    assert total_degree(MultiPoly(7, 3, {(0, s, t): 1})) == s + t


def test_neg_inf_sentinel_orders_below_everything():
    assert NEG_INF < 0 and NEG_INF < -10**9
    assert not NEG_INF > 0
    assert max(NEG_INF, 0) == 0
    with pytest.raises(TypeError):
        NEG_INF + 1


def test_render_and_parse():
    f = MultiPoly(7, 2, {(1, 2): 2, (0, 0): 1})
    assert render(f) == "2*X0*X1^2 + 1"
    assert parse("2*X0*X1^2 + 1", 7, 2) == f
    assert parse("X1 - 1", 5, 2) == MultiPoly(5, 2, {(0, 1): 1, (0, 0): 4})
    assert render(MultiPoly.zero(5, 2)) == "0"
    assert str(f) == render(f)


@pytest.mark.parametrize("bad", ["", "X", "2**X0", "X0^", "X9", "X0 + + 1"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse(bad, 5, 2)


def test_from_term_list_accumulates():
    f = from_term_list([((1, 0), 2), ((1, 0), 4), ((0, 0), 1)], 5, 2)
    assert f == MultiPoly(5, 2, {(1, 0): 1, (0, 0): 1})


def test_pow():
    assert (X(1) + 1) ** 0 == MultiPoly.constant(1, 5, 2)
    assert (X(1) + 1) ** 5 == X(1) ** 5 + 1  # Frobenius
    with pytest.raises(ValueError):
        X(0) ** -1


def test_evaluate_grid_matches_pointwise():
    f = parse("3*X1^2*X2 + X2 + 4", 5, 3)
    grid = evaluate_grid(f, [1, 2])
    for a, b in itertools.product(range(5), repeat=2):
        assert grid[a, b] == f.evaluate([0, a, b])
    assert isinstance(grid, np.ndarray)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]).flatmap(lambda p: st.integers(2, 3).flatmap(lambda n: poly_strategy(p, n))))
def test_compose_identity(f):
    assert f.compose(MultiPoly.identity_tuple(f.p, f.arity)) == f


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_compose_evaluate_commutes(data):
    p = data.draw(st.sampled_from([2, 3, 5]))
    n = data.draw(st.integers(2, 3))
    f = data.draw(poly_strategy(p, n, max_deg=3))
    subs = [data.draw(poly_strategy(p, n, max_deg=2, max_terms=3)) for _ in range(n)]
    h = f.compose(subs)
    for w in itertools.product(range(p), repeat=n):
        inner = [naive_poly(s, w) for s in subs]
        assert h.evaluate(w) == naive_poly(f, inner)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_ring_axioms(data):
    p = data.draw(st.sampled_from([3, 5, 7]))
    f, g, h = (data.draw(poly_strategy(p, 2, max_deg=3)) for _ in range(3))
    assert (f * g) * h == f * (g * h)
    assert (f + g) + h == f + (g + h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f
    assert f - f == MultiPoly.zero(p, 2)


def test_product_matches_naive_on_random_inputs():
    rng = random.Random(7)
    for _ in range(50):
        p = rng.choice([3, 5, 7])
        f = MultiPoly(p, 2, {(rng.randrange(4), rng.randrange(4)): rng.randrange(p) for _ in range(4)})
        g = MultiPoly(p, 2, {(rng.randrange(4), rng.randrange(4)): rng.randrange(p) for _ in range(4)})
        fg = f * g
        for w in itertools.product(range(p), repeat=2):
            assert fg.evaluate(w) == naive_poly(f, w) * naive_poly(g, w) % p
