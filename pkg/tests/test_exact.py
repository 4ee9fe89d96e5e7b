import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ids, labels, small_graphs
from hmgf.evaluate import GenSpec, gen_random
from hmgf.exact import (BallTooLarge, ExactConfig, TimeBudgetExceeded, brute_force_oracle,
                        solve_exact)
from hmgf.graph import parse_graph
from hmgf.objective import Query, is_feasible


@pytest.mark.parametrize("h, p, members, num, den", [
    (2, 3, [1, 3, 4], "1.4", 3),
    (3, 3, [1, 3, 5], "1.9", 3),
    (3, 4, [1, 3, 4, 5], "2.4", 4),
])
def test_graph_x(gx, h, p, members, num, den):
    for solve in (solve_exact, brute_force_oracle):
        sol = solve(gx, Query(h, p))
        assert labels(gx, sol.group) == [str(m) for m in members]
        assert sol.sigma == pytest.approx(float(Fraction(num) / den), abs=1e-15)
        assert sol.strictly_feasible


def test_no_potential_edges_picks_smallest_lexicographic():
    g = parse_graph("F a b\nF b c\nF c d")
    for solve in (solve_exact, brute_force_oracle):
        sol = solve(g, Query(1, 2))
        assert sol.sigma == 0
        assert sol.group == (0, 1)


def test_p_above_n_is_absent(gx):
    assert brute_force_oracle(gx, Query(2, 6)) is None
    assert solve_exact(gx, Query(2, 6)) is None


def test_infeasible_is_absent():
    g = parse_graph("V a\nV b\nP a c 0.4")
    # a and c are not friend-connected at all
    assert solve_exact(g, Query(3, 2)) is None
    assert brute_force_oracle(g, Query(3, 2)) is None


def test_ball_too_large_names_vertex():
    edges = "".join(f"F hub x{i}\n" for i in range(30))
    g = parse_graph(edges)
    with pytest.raises(BallTooLarge) as exc:
        solve_exact(g, Query(1, 2))
    assert exc.value.vertex == 0 and exc.value.size == 31
    with pytest.raises(BallTooLarge):
        solve_exact(g, Query(1, 2), ExactConfig(max_ball_size=30))
    assert solve_exact(g, Query(1, 2), ExactConfig(max_ball_size=31)) is not None


def test_time_budget():
    g = gen_random(GenSpec(24, 0.5, 0.0, seed=3))
    with pytest.raises(TimeBudgetExceeded):
        solve_exact(g, Query(2, 2), ExactConfig(time_budget=0.0))


def test_config_requires_ball_at_least_p(gx):
    with pytest.raises(ValueError):
        solve_exact(gx, Query(2, 5), ExactConfig(max_ball_size=4))


def test_oracle_refuses_large_graphs():
    with pytest.raises(ValueError):
        brute_force_oracle(gen_random(GenSpec(21, 0.1, 0.1, 0)), Query(1, 1))


def test_matches_oracle_randomized():
    rng = random.Random(7)
    for i in range(120):
        n = rng.randint(1, 12)
        g = gen_random(GenSpec(n, rng.choice([0.2, 0.4]), rng.choice([0.2, 0.4]), seed=i))
        q = Query(rng.randint(1, 3), rng.randint(1, 4))
        a, b = solve_exact(g, q), brute_force_oracle(g, q)
        assert (a is None) == (b is None)
        if a is not None:
            assert a.group == b.group
            assert abs(a.sigma - b.sigma) <= 1e-12
            assert is_feasible(g, a.group, q)


@settings(max_examples=80, deadline=None)
@given(small_graphs(max_n=8), st.integers(1, 3), st.integers(1, 4))
def test_exact_properties(g, h, p):
    q = Query(h, p)
    sol = solve_exact(g, q)
    ref = brute_force_oracle(g, q)
    assert (sol is None) == (ref is None)
    if sol is None:
        return
    assert sol.group == ref.group
    assert is_feasible(g, sol.group, q)
    assert solve_exact(g, q, ExactConfig(prune=False)).group == sol.group
    assert solve_exact(g, q, ExactConfig(threads=4)).group == sol.group
    half = solve_exact(g.scaled(0.5), q)
    assert half.group == sol.group
    assert half.sigma == sol.sigma / 2


def test_ids_helper_consistency(gx):
    assert ids(gx, [4, 1, 3]) == (0, 2, 3)
