import math
import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import any_spaces, line_spaces
from moebiuslab.generators import gen_cantor, gen_line_grid
from moebiuslab.hausdorff import (
    BallCover,
    _candidates,
    cover_cost,
    default_schedule,
    hausdorff_dim_estimate,
    measure_estimate,
    min_delta_cover,
    resolution_floor,
    transport_cover_involution,
)
from moebiuslab.qspace import extend_with_infinity, line_space, rescale


def oracle_count(S, A, delta):
    """Fewest radius-delta balls (centers anywhere) covering A, by subset enumeration."""
    target = set(A)
    balls = [frozenset(y for y in target if S.dist[c][y] <= delta) for c in S.ordinary]
    for k in range(1, len(balls) + 1):
        for pick in combinations(balls, k):
            if frozenset().union(*pick) >= target:
                return k
    return 0


# ---- cover cost

def test_cover_cost_examples(s0124):
    cov = BallCover(((1, Fraction(1)), (3, Fraction(1))), Fraction(1))
    assert cover_cost(cov, 1) == 2
    assert cover_cost(cov, 0) == 2
    assert cover_cost(cov, 0.5) == pytest.approx(2.0)
    assert cover_cost([(0, Fraction(1, 2))] * 3, 2) == Fraction(3, 4)


def test_cover_cost_zero_power_convention():
    assert cover_cost([(0, Fraction(0))], 0) == 1
    assert cover_cost([(0, Fraction(0))], 0.0) == 1.0


def test_ball_cover_radius_bound():
    with pytest.raises(ValueError):
        BallCover(((0, Fraction(2)),), Fraction(1))


@given(st.lists(st.builds(Fraction, st.integers(1, 20), st.integers(1, 20)), min_size=1, max_size=6),
       st.integers(0, 3), st.integers(0, 3))
def test_cost_inequality_between_exponents(radii, s, dt):
    t = s + dt
    delta = max(radii)
    items = [(0, r) for r in radii]
    assert cover_cost(items, t) <= delta ** (t - s) * cover_cost(items, s)


# ---- min delta cover

def test_min_cover_examples(s0124):
    assert len(min_delta_cover(s0124, ["2"], Fraction(1, 10))) == 1
    cov = min_delta_cover(s0124, None, 1)
    assert len(cov) == 2 and cov.exact
    assert cov.points(s0124) == frozenset(range(4))
    assert len(min_delta_cover(gen_cantor(3), None, Fraction(1, 9))) == 4


def test_min_cover_rejects_nonpositive_delta(s0124):
    with pytest.raises(ValueError):
        min_delta_cover(s0124, None, 0)


def test_min_cover_strips_infinity(s0124):
    E = extend_with_infinity(s0124)
    cov = min_delta_cover(E, E.points, 1)
    assert len(cov) == 2 and E.infinity not in {c for c, _ in cov.items}


def test_greedy_mode_is_flagged():
    S = gen_line_grid(40)
    cov = min_delta_cover(S, None, 1, exact_threshold=5)
    assert not cov.exact and cov.points(S) == frozenset(S.ordinary)


@given(any_spaces(3, 6), st.data())
def test_min_cover_matches_oracle(S, data):
    delta = data.draw(st.sampled_from(sorted({S.dist[x][y] for x in S.ordinary for y in S.ordinary if x != y})))
    A = data.draw(st.sets(st.sampled_from(S.ordinary), min_size=1))
    cov = min_delta_cover(S, A, delta)
    assert cov.exact and len(cov) == oracle_count(S, A, delta)
    assert cov.points(S) >= A


@given(any_spaces(3, 6), st.data())
def test_counts_grow_as_delta_shrinks(S, data):
    ds = sorted({S.dist[x][y] for x in S.ordinary for y in S.ordinary if x != y}, reverse=True)
    counts = [len(min_delta_cover(S, None, d)) for d in ds]
    assert counts == sorted(counts)


@given(any_spaces(3, 6), st.data())
def test_point_add_remove_changes_cost_by_at_most_one_ball(S, data):
    p = data.draw(st.sampled_from(S.ordinary))
    A = set(S.ordinary) - {p}
    delta = data.draw(st.sampled_from(sorted({S.dist[x][y] for x in S.ordinary for y in S.ordinary if x != y})))
    s = data.draw(st.integers(0, 3))
    with_p = cover_cost(min_delta_cover(S, A | {p}, delta), s)
    without = cover_cost(min_delta_cover(S, A, delta), s)
    assert without <= with_p <= without + delta ** s


@given(any_spaces(3, 6), st.data())
def test_scaling_covariance(S, data):
    lam = data.draw(st.sampled_from([Fraction(1, 3), Fraction(2), Fraction(7, 5)]))
    delta = data.draw(st.sampled_from(sorted({S.dist[x][y] for x in S.ordinary for y in S.ordinary if x != y})))
    s = data.draw(st.integers(0, 3))
    base = cover_cost(min_delta_cover(S, None, delta), s)
    scaled = cover_cost(min_delta_cover(rescale(S, lam), None, lam * delta), s)
    assert scaled == lam ** s * base


def test_candidates_drop_dominated_balls(s0124):
    masks = [m for m, _ in _candidates(s0124, list(s0124.ordinary), Fraction(1))]
    assert all(not (a & b == a) for a in masks for b in masks if a != b)


# ---- measure estimates

def test_measure_counts_at_zero_exponent():
    S = gen_cantor(4)
    est = measure_estimate(S, 0, [Fraction(1, 2), Fraction(1, 9), Fraction(1, 27)])
    counts = [p.count for p in est.points]
    assert counts == sorted(counts) and not est.violations
    assert all(p.cost == p.count for p in est.points)


def test_measure_decreases_above_dimension():
    S = gen_cantor(5)
    ds = [Fraction(1, 3 ** j) for j in range(1, 5)]
    costs = [p.cost for p in measure_estimate(S, 1, ds).points]
    assert costs == sorted(costs, reverse=True) and costs[-1] < costs[0]


def test_measure_single_point():
    S = line_space([0, 1, 5])
    est = measure_estimate(S, 2, [Fraction(1, 2), Fraction(1, 4)], A=["5"])
    assert [p.cost for p in est.points] == [Fraction(1, 4), Fraction(1, 16)]


def test_measure_schedule_checks():
    S = gen_cantor(3)
    with pytest.raises(ValueError, match="resolution"):
        measure_estimate(S, 1, [Fraction(1, 100)])
    with pytest.raises(ValueError):
        measure_estimate(S, 1, [Fraction(1, 9), Fraction(1, 3)])


def test_measure_reports_greedy_violations():
    # greedy covers on a long grid are not monotone in general; whatever happens is reported
    S = gen_line_grid(60)
    ds = [Fraction(k, 4) for k in range(40, 3, -1)]
    est = measure_estimate(S, 0, ds, exact_threshold=0)
    for hi, lo in est.violations:
        a = next(p.count for p in est.points if p.delta == hi)
        b = next(p.count for p in est.points if p.delta == lo)
        assert b < a


# ---- dimension

def test_dimension_of_line_sample():
    S = line_space([Fraction(k, 64) for k in range(65)])
    est = hausdorff_dim_estimate(S)
    assert abs(est.dimension - 1.0) <= 0.1
    deltas = [d for d, _, _ in est.scales]
    assert deltas == sorted(deltas, reverse=True)


def test_dimension_of_cantor_sample():
    est = hausdorff_dim_estimate(gen_cantor(7))
    assert abs(est.dimension - math.log(2) / math.log(3)) <= 0.1


def test_dimension_rejects_degenerate_input():
    with pytest.raises(ValueError):
        hausdorff_dim_estimate(line_space([0, 1]))
    with pytest.raises(ValueError):
        hausdorff_dim_estimate(line_space([0]))


def test_default_schedule_halves():
    S = line_space([Fraction(k, 16) for k in range(17)])
    assert default_schedule(S) == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    assert len(default_schedule(S, grid=5)) == 5


def test_parallel_estimate_matches_serial():
    S = gen_cantor(5)
    assert hausdorff_dim_estimate(S, workers=2).scales == hausdorff_dim_estimate(S, workers=1).scales


def test_resolution_floor():
    assert resolution_floor(gen_cantor(3)) == Fraction(2, 27)


# ---- transport under involution

def test_transport_keeps_everything_when_o_is_far():
    S = line_space([0, 1, 2, 100])
    cov = min_delta_cover(S, ["0", "1", "2"], Fraction(1, 2))
    K = S.K
    eps = Fraction(20)
    out, dO, unc = transport_cover_involution(S, cov, "100", eps)
    assert len(out) == len(cov)
    assert all(r == Fraction(1, 2) * K ** 3 / eps ** 2 for _, r in out.items)
    assert not unc


def test_transport_single_ball_at_o():
    S = line_space([0, 1, 2])
    cov = BallCover(((0, Fraction(1, 100)),), Fraction(1, 100))
    out, _, unc = transport_cover_involution(S, cov, "0", Fraction(1))
    assert len(out) == 0
    # the input did not cover X, so points outside B(o, eps) stay uncovered
    assert unc


def test_transport_rejects_large_delta(s0124):
    cov = min_delta_cover(s0124, None, 1)
    with pytest.raises(ValueError):
        transport_cover_involution(s0124, cov, "0", Fraction(2))


@given(any_spaces(3, 7), st.data())
def test_transport_output_always_covers(S, data):
    o = data.draw(st.sampled_from(S.ordinary))
    eps = data.draw(st.sampled_from(sorted({S.dist[x][o] for x in S.ordinary if x != o})))
    delta = eps / S.K ** 2 * Fraction(data.draw(st.integers(1, 9)), 10)
    cov = min_delta_cover(S, None, delta)
    out, dO, unc = transport_cover_involution(S, cov, o, eps)
    assert not unc
    assert all(c != dO.infinity for c, _ in out.items)
