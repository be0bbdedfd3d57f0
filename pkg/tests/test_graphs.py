"""Multigraph container, configuration model, stars, attack, and I/O."""

import itertools
import math

import numpy as np
import pytest

from degcp import (
    MultiGraph,
    build_configuration_model,
    build_star,
    build_star_row,
    complete_graph,
    cycle_graph,
    path_graph,
    read_degree_sequence,
    read_graph,
    targeted_attack,
    write_degree_sequence,
    write_graph,
)
from degcp.rng import stream


def test_degree_identity_random_multigraphs():
    rng = stream(1, 0)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(0, 3 * n))
        us = rng.integers(0, n, size=m)
        vs = rng.integers(0, n, size=m)
        g = MultiGraph.from_pairs(n, us, vs)
        assert g.degree_identity_holds()
        # symmetry of e
        for u in range(n):
            for v in range(n):
                assert g.e(u, v) == g.e(v, u)


def test_cm_deterministic_single_edge():
    g = build_configuration_model([1, 1], stream(2, 0))
    assert g.e(0, 1) == 1
    assert list(g.degrees) == [1, 1]


def test_cm_self_loop_counts_twice():
    g = build_configuration_model([2, 0], stream(2, 1))
    assert g.loops[0] == 1
    assert g.degrees[0] == 2
    assert g.degrees[1] == 0


def test_cm_rejects_odd_sum_and_autofixes():
    with pytest.raises(ValueError):
        build_configuration_model([1, 1, 1], stream(2, 2))
    g = build_configuration_model([1, 1, 1], stream(2, 2), auto_fix=True)
    assert g.degrees.sum() == 4
    assert g.degrees[2] == 2  # extra half-edge lands on the last vertex


def _simple_fraction_exact(deg):
    """Fraction of perfect matchings of the half-edges giving a simple graph."""
    stubs = []
    for v, d in enumerate(deg):
        stubs.extend([v] * d)
    idx = list(range(len(stubs)))

    def matchings(rest):
        if not rest:
            yield []
            return
        a = rest[0]
        for j in range(1, len(rest)):
            b = rest[j]
            for m in matchings(rest[1:j] + rest[j + 1:]):
                yield [(a, b)] + m

    total = simple = 0
    for m in matchings(idx):
        total += 1
        pairs = [(stubs[a], stubs[b]) for a, b in m]
        ok = all(a != b for a, b in pairs)
        seen = set()
        for a, b in pairs:
            key = (min(a, b), max(a, b))
            if key in seen:
                ok = False
            seen.add(key)
        simple += ok
    return simple / total


def test_cm_matching_uniform_simple_fraction():
    # degrees (3,3,3,3): compare the simulated fraction of simple outcomes
    # against exhaustive enumeration of the 11!! matchings
    deg = [3, 3, 3, 3]
    want = _simple_fraction_exact(deg)
    rng = stream(3, 0)
    reps = 20000
    hits = 0
    for _ in range(reps):
        g = build_configuration_model(deg, rng)
        hits += g.loops.sum() == 0 and g.max_multiplicity() <= 1
    p = hits / reps
    se = math.sqrt(want * (1 - want) / reps)
    assert abs(p - want) <= 3 * se


def test_cm_matching_frequencies_uniform():
    # on 4 half-edges (degrees 2,1,1) there are 3 matchings; each should
    # appear with frequency 1/3 within 4 sigma
    deg = [2, 1, 1]
    rng = stream(3, 1)
    reps = 30000
    counts = {"loop": 0, "path12": 0}
    for _ in range(reps):
        g = build_configuration_model(deg, rng)
        if g.loops[0] == 1:
            counts["loop"] += 1  # loop at 0 plus edge {1,2}
        elif g.e(0, 1) == 1 and g.e(0, 2) == 1:
            counts["path12"] += 1
    # matchings: {loop0, 1-2}, and two ways to realize the path 1-0-2
    se = math.sqrt((1 / 3) * (2 / 3) / reps)
    assert abs(counts["loop"] / reps - 1 / 3) <= 4 * se
    assert abs(counts["path12"] / reps - 2 / 3) <= 4 * se


def test_star_and_row_shapes():
    s = build_star(3)
    assert s.n == 4 and s.degrees[0] == 3 and set(s.degrees[1:]) == {1}
    row = build_star_row(2, 1, 2)
    g = row.graph
    assert g.n == 7  # 2 centers + 4 leaves + 1 path vertex
    assert [int(g.degrees[c]) for c in row.centers] == [3, 3]
    assert sorted(g.degrees) == [1, 1, 1, 1, 2, 3, 3]
    # interior centers of a longer row have degree K+2
    row3 = build_star_row(2, 2, 3)
    degs = [int(row3.graph.degrees[c]) for c in row3.centers]
    assert degs == [3, 4, 3]


def test_attack_identity_and_empty():
    g = cycle_graph(5)
    atk = targeted_attack(g, 10)
    assert atk.V_le == 5 and np.array_equal(atk.new_degrees, g.degrees)
    atk0 = targeted_attack(g, 0)
    assert atk0.graph.n == 0


def test_attack_star_hand_trace():
    g = build_star(5)
    atk = targeted_attack(g, 1)
    assert atk.V_le == 5
    assert np.all(atk.new_degrees == 0)
    assert atk.H_le == 5 and atk.H_gt == 5


def test_attack_half_edge_accounting():
    rng = stream(4, 0)
    deg = rng.integers(0, 7, size=40)
    if deg.sum() % 2:
        deg[-1] += 1
    g = build_configuration_model(deg, rng)
    atk = targeted_attack(g, 3)
    assert atk.H_le + atk.H_gt == int(g.degrees.sum())
    assert int(atk.new_degrees.sum()) % 2 == 0
    assert np.all(atk.new_degrees <= g.degrees[atk.kept])


def test_ball_and_surplus_helpers():
    g = complete_graph(4)
    assert len(g.ball(0, 1)) == 4
    p = path_graph(5)
    assert sorted(p.ball(2, 1)) == [1, 2, 3]


def test_graph_io_roundtrip(tmp_path):
    rng = stream(5, 0)
    g = MultiGraph.from_pairs(6, rng.integers(0, 6, 12), rng.integers(0, 6, 12))
    path = tmp_path / "g.txt"
    write_graph(g, path)
    h = read_graph(path)
    assert h.n == g.n
    assert np.array_equal(h.degrees, g.degrees)
    assert np.array_equal(h.loops, g.loops)
    for u in range(g.n):
        for v in range(g.n):
            assert g.e(u, v) == h.e(u, v)


def test_degree_sequence_io(tmp_path):
    path = tmp_path / "deg.txt"
    write_degree_sequence([3, 1, 4, 1], path)
    assert read_degree_sequence(path) == [3, 1, 4, 1]


def test_induced_subgraph_keeps_loops_and_mults():
    g = MultiGraph.from_edges(4, [(0, 1), (0, 1), (1, 2), (2, 3)], loops=[(1, 1)])
    sub, kept = g.induced([0, 1, 2])
    assert list(kept) == [0, 1, 2]
    assert sub.e(0, 1) == 2
    assert sub.loops[1] == 1
    assert sub.degrees[1] == 3 + 2  # two to 0, one to 2, loop twice
