import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from families import (
    naive_apply,
    p3_permutation_system,
    random_family,
    random_member,
    random_permutation_family,
    random_shape,
)
from polyiter.multipoly import MultiPoly, parse
from polyiter.systems import (
    InvalidSystem,
    Schedule,
    ShapeMatrix,
    SizeGuardExceeded,
    SymbolicSizeError,
    SystemFamily,
    TriangularSystem,
    check_degree_law,
    is_bijective_exhaustive,
    is_permutation,
    iterate_symbolic,
    iterate_symbolic_steps,
    predicted_degrees,
    seed_grid,
    validate,
)


def m1_system(p, s01, G0, H0, g_m, h_m):
    shape = ShapeMatrix.from_rows([[1, s01], [0, 1]])
    return TriangularSystem(p, shape, [parse(G0, p, 2)], [parse(H0, p, 2)], g_m, h_m)


def x0x1_system(p=5):
    """F_0 = X_0 X_1, F_1 = X_1 + 1."""
    return m1_system(p, 1, "X1", "0", 1, 1)


# -- shape matrix ---------------------------------------------------------

def test_shape_matrix_invariants():
    ShapeMatrix.from_rows([[1, 2], [0, 1]])
    with pytest.raises(ValueError):
        ShapeMatrix.from_rows([[1, 2], [1, 1]])
    with pytest.raises(ValueError):
        ShapeMatrix.from_rows([[2, 2], [0, 1]])
    with pytest.raises(ValueError):
        ShapeMatrix.from_rows([[1, -1], [0, 1]])
    with pytest.raises(ValueError):
        ShapeMatrix.from_rows([[1, 2, 3], [0, 1]])


def test_shape_helpers():
    S = ShapeMatrix.from_upper(2, {(0, 1): 2, (0, 2): 3, (1, 2): 4})
    assert S[0, 2] == 3
    assert S.leading_exponents(0) == (0, 2, 3)
    assert S.leading_exponents(1) == (0, 0, 4)
    assert S.superdiagonal_product() == 8


# -- validation -------------------------------------------------------------

def test_validate_ok_example():
    assert validate(x0x1_system()).ok


def test_validate_h_degree_violation():
    report = validate(m1_system(5, 1, "X1", "X1^2", 1, 1))
    assert not report.ok
    (v,) = report.violations
    assert v.condition == "h_degree" and (v.i, v.j) == (0, 1)
    assert "deg_X1 H_0 = 2 > s_01 = 1" in v.message


def test_validate_g_m_zero():
    report = validate(m1_system(5, 1, "X1", "0", 0, 1))
    assert [v.condition for v in report.violations] == ["g_m_nonzero"]
    assert "g_m must be nonzero" in str(report)


def test_validate_support_violation():
    report = validate(m1_system(5, 1, "X1 + X0", "0", 1, 0))
    conds = {v.condition for v in report.violations}
    assert "support" in conds
    assert any(v.condition == "support" and v.j == 0 for v in report.violations)


def test_validate_leading_monomial_missing():
    report = validate(m1_system(5, 2, "X1", "0", 1, 0))
    assert any(v.condition == "leading_monomial" for v in report.violations)


def test_validate_second_term_too_high_in_one_variable():
    # lead X1^2 X2^2; the term X1^2 X2 ties in X1, which the per-variable rule forbids
    shape = ShapeMatrix.from_upper(2, {(0, 1): 2, (0, 2): 2, (1, 2): 1})
    G0 = parse("X1^2*X2^2 + X1^2*X2", 7, 3)
    sys = TriangularSystem(7, shape, [G0, parse("X2", 7, 3)], [MultiPoly.zero(7, 3)] * 2, 1, 0)
    bad = [v for v in validate(sys).violations if v.condition == "leading_monomial"]
    assert bad and bad[0].j == 1


def test_h0_may_use_all_later_variables():
    shape = ShapeMatrix.from_upper(2, {(0, 1): 1, (0, 2): 1, (1, 2): 1})
    G = [parse("X1*X2", 5, 3), parse("X2", 5, 3)]
    H = [parse("X1*X2 + X2 + 3", 5, 3), parse("2*X2", 5, 3)]
    assert validate(TriangularSystem(5, shape, G, H, 3, 1)).ok


def test_family_refuses_invalid_members():
    bad = m1_system(5, 1, "X1", "X1^2", 1, 1)
    with pytest.raises(InvalidSystem) as exc:
        SystemFamily.constant(bad)
    assert exc.value.report.violations[0].condition == "h_degree"


def test_system_structure_errors():
    shape = ShapeMatrix.from_rows([[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        TriangularSystem(5, shape, [], [], 1, 0)
    with pytest.raises(ValueError):
        TriangularSystem(5, shape, [MultiPoly.zero(5, 3)], [MultiPoly.zero(5, 3)], 1, 0)
    with pytest.raises(ValueError):
        TriangularSystem(5, shape, [MultiPoly.zero(7, 2)], [MultiPoly.zero(5, 2)], 1, 0)


def test_random_members_always_validate():
    rng = random.Random(3)
    for _ in range(100):
        p = rng.choice([2, 3, 5, 7])
        shape = random_shape(rng, rng.randint(1, 3), entries=(0, 1, 2, 3))
        assert validate(random_member(rng, p, shape)).ok


# -- map evaluation ---------------------------------------------------------

def test_components_and_apply_agree_with_naive():
    rng = random.Random(11)
    for _ in range(20):
        fam = random_family(rng, rng.choice([3, 5, 7]), rng.randint(1, 2))
        sys = fam.members[0]
        comps = sys.components()
        p, n = sys.p, sys.m + 1
        W = seed_grid(p, n)
        many = sys.apply_many(W)
        for col, w in enumerate(itertools.product(range(p), repeat=n)):
            expect = naive_apply(sys, w)
            assert sys.apply(w) == expect
            assert tuple(f.evaluate(w) for f in comps) == expect
            assert tuple(many[:, col]) == expect


def test_from_components_round_trip():
    sys = p3_permutation_system()
    again = TriangularSystem.from_components(3, sys.shape, sys.components())
    assert again == sys
    with pytest.raises(ValueError):
        TriangularSystem.from_components(3, sys.shape, [parse("X0^2", 3, 2), parse("X1", 3, 2)])
    with pytest.raises(ValueError):
        TriangularSystem.from_components(3, sys.shape, [parse("X0", 3, 2), parse("X1^2", 3, 2)])


def test_seed_grid_lexicographic():
    grid = seed_grid(3, 2)
    assert [tuple(c) for c in grid.T] == list(itertools.product(range(3), repeat=2))


# -- permutation test -----------------------------------------------------

def test_is_permutation_examples():
    assert is_permutation(p3_permutation_system())
    chk = is_permutation(x0x1_system(p=3))
    assert not chk
    a, b = chk.witness
    assert a[1] == 0 and b[1] == 0
    sys = x0x1_system(p=3)
    assert sys.apply(a) == sys.apply(b)
    assert chk.witness == ((0, 0), (1, 0))


def test_is_permutation_m0():
    shape = ShapeMatrix.from_rows([[1]])
    sys = TriangularSystem(7, shape, [], [], 3, 5)
    assert is_permutation(sys)
    assert is_bijective_exhaustive(sys)


def test_is_permutation_g_m_zero_gives_witness():
    sys = m1_system(3, 2, "X1^2 + 1", "0", 0, 1)
    chk = is_permutation(sys)
    assert not chk and chk.vanishing[0] == 1
    a, b = chk.witness
    assert a != b and sys.apply(a) == sys.apply(b)


def test_fast_check_agrees_with_exhaustive():
    rng = random.Random(5)
    seen = {True: 0, False: 0}
    for _ in range(150):
        p = rng.choice([2, 3, 5])
        shape = random_shape(rng, rng.randint(1, 2), entries=(0, 1, 2))
        sys = random_member(rng, p, shape)
        fast = bool(is_permutation(sys))
        images = {naive_apply(sys, w) for w in itertools.product(range(p), repeat=sys.m + 1)}
        assert fast == (len(images) == p ** (sys.m + 1))
        assert fast == is_bijective_exhaustive(sys)
        seen[fast] += 1
    assert seen[True] and seen[False]


def test_permutation_guard():
    shape = ShapeMatrix.from_rows([[1, 1], [0, 1]])
    sys = TriangularSystem(101, shape, [parse("X1", 101, 2)], [MultiPoly.zero(101, 2)], 1, 0)
    with pytest.raises(SizeGuardExceeded):
        is_permutation(sys, guard=100)


# -- schedules ----------------------------------------------------------------

def test_schedule_member_index():
    assert Schedule("constant").member_index(5, 3) == 0
    assert [Schedule("cyclic").member_index(k, 3) for k in range(1, 7)] == [0, 1, 2, 0, 1, 2]
    sch = Schedule.explicit([1, 0, 1])
    assert [sch.member_index(k, 2) for k in (1, 2, 3)] == [1, 0, 1]
    with pytest.raises(IndexError):
        sch.member_index(4, 2)
    with pytest.raises(ValueError):
        sch.member_index(0, 2)
    with pytest.raises(ValueError):
        Schedule("random")


def test_family_schedule_bounds():
    sys = p3_permutation_system()
    with pytest.raises(ValueError):
        SystemFamily(sys.shape, (sys,), Schedule.explicit([0, 1]))


# -- symbolic iteration -----------------------------------------------------

def test_iterate_k0_is_identity():
    fam = SystemFamily.constant(x0x1_system())
    it = iterate_symbolic(fam, 0)
    assert list(it.polys) == MultiPoly.identity_tuple(5, 2)


def test_iterate_k2_example():
    fam = SystemFamily.constant(x0x1_system())
    it = iterate_symbolic(fam, 2)
    assert it.polys[0] == parse("X0*X1^2 + X0*X1", 5, 2)
    assert it.polys[1] == parse("X1 + 2", 5, 2)
    G, H = it.split[0]
    assert G == parse("X1^2 + X1", 5, 2)
    assert H.is_zero()
    sys = fam.members[0]
    for w in itertools.product(range(5), repeat=2):
        assert tuple(f.evaluate(w) for f in it.polys) == sys.apply(sys.apply(w))


def test_iterate_recombines_and_matches_pointwise():
    rng = random.Random(21)
    for _ in range(8):
        p = rng.choice([2, 3, 5])
        fam = random_permutation_family(rng, p, rng.randint(1, 2), members=2, schedule="cyclic")
        for it in iterate_symbolic_steps(fam, 4):
            for i in range(fam.m + 1):
                assert it.recombine(i) == it.polys[i]
                G, H = it.split[i]
                assert G.support() <= set(range(i + 1, fam.m + 1))
                assert H.support() <= set(range(i + 1, fam.m + 1))
            for v in itertools.product(range(p), repeat=fam.m + 1):
                w = v
                for k in range(1, it.k + 1):
                    w = fam.system_at(k).apply(w)
                assert tuple(f.evaluate(v) for f in it.polys) == w


def test_term_cap():
    fam = SystemFamily.constant(x0x1_system())
    with pytest.raises(SymbolicSizeError) as exc:
        iterate_symbolic(fam, 6, term_cap=4)
    assert exc.value.k_reached >= 1


# -- degree law -----------------------------------------------------------------

def test_predicted_degrees_examples():
    S1 = ShapeMatrix.from_rows([[1, 1], [0, 1]])
    S2 = ShapeMatrix.from_upper(2, {(0, 1): 1, (1, 2): 1})
    assert predicted_degrees(S2, 0) == (1, 1, 1)
    for k in range(8):
        assert predicted_degrees(S1, k) == (k + 1, 1)
    assert predicted_degrees(S2, 4) == (11, 5, 1)


def test_predicted_degrees_matches_matrix_power():
    rng = random.Random(2)
    for _ in range(20):
        S = random_shape(rng, rng.randint(1, 3), entries=(0, 1, 2, 3))
        A = np.array(S.s, dtype=object)
        for k in range(6):
            expect = np.linalg.matrix_power(A, k).dot(np.ones(S.m + 1, dtype=object)) if k else np.ones(S.m + 1, dtype=object)
            assert predicted_degrees(S, k) == tuple(int(x) for x in expect)


def test_degree_law_m1_example():
    fam = SystemFamily.constant(x0x1_system())
    report = check_degree_law(fam, 6)
    assert report.agrees and report.first_discrepancy is None
    assert [r.observed - 1 for r in report.rows if r.i == 0] == list(range(1, 7))
    assert all(r.observed == 1 for r in report.rows if r.i == 1)


def test_degree_law_m2_superdiagonal_ones():
    shape = ShapeMatrix.from_upper(2, {(0, 1): 1, (1, 2): 1})
    sys = TriangularSystem(7, shape, [parse("X1", 7, 3), parse("X2", 7, 3)], [parse("2*X1", 7, 3), MultiPoly.zero(7, 3)], 3, 1)
    rep = check_degree_law(SystemFamily.constant(sys), 6)
    assert rep.agrees
    deg0 = [r.observed - 1 for r in rep.rows if r.i == 0]
    assert deg0 == [k * (k + 1) // 2 for k in range(1, 7)]
    assert rep.leading_coefficient == Fraction(1, 2)
    assert rep.residual_degree == 1
    assert all(r.observed == 1 for r in rep.rows if r.i == 2)


def test_degree_law_dense_h0():
    shape = ShapeMatrix.from_upper(2, {(0, 1): 1, (0, 2): 1, (1, 2): 1})
    G = [parse("X1*X2", 7, 3), parse("X2", 7, 3)]
    H = [parse("X1 + 3", 7, 3), parse("X2", 7, 3)]
    assert check_degree_law(SystemFamily.constant(TriangularSystem(7, shape, G, H, 2, 1)), 6).agrees


def test_degree_law_random_families():
    rng = random.Random(13)
    for _ in range(6):
        p = rng.choice([5, 7])
        fam = random_family(rng, p, 2, members=rng.choice([1, 2]), schedule="cyclic")
        rep = check_degree_law(fam, 5)
        assert rep.agrees, rep.first_discrepancy
        assert rep.residual_degree is None or rep.residual_degree < fam.m


def test_degree_law_reports_discrepancy_for_invalid_input():
    # bypass validation: the leading monomial X1^2 is missing, so the degree falls short
    shape = ShapeMatrix.from_rows([[1, 2], [0, 1]])
    sys = TriangularSystem(5, shape, [parse("X1", 5, 2)], [MultiPoly.zero(5, 2)], 1, 1)
    fam = object.__new__(SystemFamily)
    object.__setattr__(fam, "shape", shape)
    object.__setattr__(fam, "members", (sys,))
    object.__setattr__(fam, "schedule", Schedule())
    rep = check_degree_law(fam, 3)
    assert not rep.agrees
    first = rep.first_discrepancy
    assert (first.k, first.i, first.observed, first.predicted) == (1, 0, 2, 3)
