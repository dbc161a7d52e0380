import random
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import any_spaces, line_spaces, quasi_spaces
from moebiuslab.corpus import corpus
from moebiuslab.generators import gen_tree_ultrametric
from moebiuslab.qspace import (
    INF,
    FiniteQSpace,
    SpaceParseError,
    as_ext,
    ball,
    diameter,
    extend_with_infinity,
    involute,
    line_space,
    normalize_dA,
    quasi_constant,
    quasi_constant_witness,
    rescale,
    validate,
)


def brute_K(S):
    best = Fraction(1)
    o = S.ordinary
    for x in o:
        for y in o:
            for z in o:
                if len({x, y, z}) == 3:
                    best = max(best, S.dist[x][y] / max(S.dist[x][z], S.dist[z][y]))
    return best


# ---- INF arithmetic

def test_inf_orders_above_everything():
    assert Fraction(10 ** 9) < INF and not INF < Fraction(3)
    assert max(Fraction(5), INF) is INF
    assert INF * 3 is INF and INF + 1 is INF


def test_inf_over_inf_is_refused():
    with pytest.raises(ArithmeticError):
        INF / INF


def test_as_ext_rejects_floats_and_negatives():
    assert as_ext("3/2") == Fraction(3, 2) and as_ext("inf") is INF
    for bad in (0.5, "-1", -2):
        with pytest.raises((ValueError, TypeError, SpaceParseError)):
            as_ext(bad)


# ---- validate

def test_validate_line_example(s0124):
    assert validate(s0124.points, s0124.dist).ok


def test_validate_reports_asymmetry():
    rep = validate(["a", "b", "c"], [[0, 1, 2], [3, 0, 1], [2, 1, 0]])
    assert not rep.ok
    assert any(v.rule == "symmetry" and set(v.witness) == {"a", "b"} for v in rep.violations)


def test_validate_two_infinite_rows():
    d = [[0, "inf", "inf"], ["inf", 0, "inf"], ["inf", "inf", 0]]
    assert "unique-infinity" in validate(["a", "b", "c"], d).rules()


def test_validate_definiteness_and_diagonal():
    rep = validate(["a", "b", "c"], [[1, 0, 2], [0, 0, 1], [2, 1, 0]])
    assert {"zero-diagonal", "definiteness"} <= rep.rules()


def test_validate_parse_errors_are_distinct():
    with pytest.raises(SpaceParseError):
        validate(["a", "b"], [[0, 1]])
    with pytest.raises(SpaceParseError):
        validate(["a", "a", "b"], [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    with pytest.raises(SpaceParseError):
        validate(["a", "b", "c"], [[0, -1, 1], [-1, 0, 1], [1, 1, 0]])


def test_validate_declared_infinity_must_be_infinite():
    d = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    assert "infinity-row" in validate(["a", "b", "c"], d, "c").rules()


# ---- quasi constant

def test_quasi_constant_line_example(s0124):
    K, (x, y, z) = quasi_constant_witness(s0124)
    assert K == 2
    assert s0124.d(x, y) == 2 * max(s0124.d(x, z), s0124.d(z, y))


def test_quasi_constant_ultrametric():
    assert quasi_constant(gen_tree_ultrametric(3, 2, seed=4)) == 1


def test_quasi_constant_small_spaces_floor_at_one():
    assert quasi_constant(line_space([0, 5])) == 1


@given(line_spaces(3, 8))
def test_metrics_have_K_at_most_two(S):
    assert quasi_constant(S) <= 2


@given(any_spaces())
def test_quasi_constant_matches_triple_enumeration(S):
    assert quasi_constant(S) == brute_K(S)


def test_quasi_constant_large_path_agrees_with_enumeration():
    rng = random.Random(3)
    S = line_space(sorted({Fraction(rng.randint(0, 5000), rng.choice([1, 3])) for _ in range(48)}))
    assert len(S.ordinary) > 40
    assert quasi_constant(S) == brute_K(S)


@given(any_spaces(), st.data())
def test_quasi_constant_ignores_point_order(S, data):
    order = data.draw(st.permutations(range(S.n)))
    assert quasi_constant(S.relabel(order)) == quasi_constant(S)
    assert validate(S.relabel(order).points, S.relabel(order).dist, S.relabel(order).infinity_label).ok


# ---- rescale

def test_rescale_examples(s0124):
    assert rescale(s0124, 1) == s0124
    assert rescale(s0124, 3).d("1", "2") == 3
    with pytest.raises(ValueError):
        rescale(s0124, 0)


def test_rescale_keeps_infinity(s0124):
    E = rescale(extend_with_infinity(s0124), Fraction(2, 7))
    assert E.d("0", "inf") is INF


def test_rescale_preserves_K_on_corpus():
    rng = random.Random(11)
    spaces = [S for _, S in corpus(max_points=24)]
    for S in rng.sample(spaces, min(50, len(spaces))):
        lam = Fraction(rng.randint(1, 30), rng.randint(1, 30))
        T = rescale(S, lam)
        T.__dict__.pop("K", None)
        assert brute_K(T) == quasi_constant(S)


# ---- involute

def test_involute_line_example(s0124):
    T = involute(s0124, "0")
    assert (T.d("1", "2"), T.d("1", "4"), T.d("2", "4")) == (Fraction(1, 2), Fraction(3, 4), Fraction(1, 4))
    assert T.infinity_label == "0" and T.d("1", "0") is INF


def test_involute_old_infinity_becomes_ordinary(s0124):
    T = involute(extend_with_infinity(s0124), "2")
    assert T.infinity_label == "2"
    for y in ("0", "1", "4"):
        assert T.d("inf", y) == 1 / s0124.d("2", y)


def test_involute_rejects_bad_points(s0124):
    E = extend_with_infinity(s0124)
    with pytest.raises(ValueError):
        involute(E, "inf")
    with pytest.raises(KeyError):
        involute(E, "7")


@given(any_spaces(), st.data())
def test_involute_output_is_valid(S, data):
    o = data.draw(st.sampled_from([S.points[i] for i in S.ordinary]))
    T = involute(S, o)
    assert validate(T.points, T.dist, T.infinity_label).ok
    assert quasi_constant(T) == brute_K(T)


@given(any_spaces(), st.data())
def test_involute_twice_through_old_infinity(S, data):
    if S.infinity is None:
        S = extend_with_infinity(S)
    o = data.draw(st.sampled_from([S.points[i] for i in S.ordinary]))
    assert involute(involute(S, o), S.infinity_label) == S


# ---- extend

def test_extend_examples():
    S = line_space([0, 1, 3])
    E = extend_with_infinity(S)
    assert E.n == 4 and quasi_constant(E) == quasi_constant(S)
    with pytest.raises(ValueError):
        extend_with_infinity(E)


def test_extend_validates_on_corpus():
    for _, S in corpus(max_points=40):
        if S.infinity is None:
            E = extend_with_infinity(S)
            assert validate(E.points, E.dist, E.infinity_label).ok


@given(line_spaces(3, 6), st.data())
def test_extend_then_involute_gives_finite_old_distances(S, data):
    o = data.draw(st.sampled_from(S.points))
    T = involute(extend_with_infinity(S), o)
    for x in S.points:
        for y in S.points:
            if o not in (x, y):
                assert T.d(x, y) is not INF


# ---- normalize

def test_normalize_sets_unit_distance_on_small_corpus():
    for _, S in corpus(max_points=8):
        for A in permutations(S.points, 3):
            T = normalize_dA(S, A)
            assert T.d(A[1], A[2]) == 1
            assert T.infinity_label == A[0]


def test_normalize_at_existing_infinity_is_rescaling(s0124):
    E = extend_with_infinity(s0124)
    T = normalize_dA(E, ("inf", "1", "4"))
    assert T == rescale(E, 1 / s0124.d("1", "4"))


def test_normalize_rejects_repeated_points(s0124):
    with pytest.raises(ValueError):
        normalize_dA(s0124, ("0", "0", "1"))


# ---- balls and diameters

def test_ball_and_diameter(s0124):
    assert s0124.labels(ball(s0124, "1", 1)) == ["0", "1", "2"]
    assert diameter(s0124, [s0124.index("2")]) == 0
    E = extend_with_infinity(s0124)
    assert diameter(E, [0, E.infinity]) is INF
    assert diameter(E, []) == 0


def test_from_matrix_checks_invariants():
    with pytest.raises(ValueError):
        FiniteQSpace.from_matrix(["a", "b", "c"], [[0, 1, 1], [2, 0, 1], [1, 1, 0]])
