"""Lazy Galton-Watson trees and spherically symmetric trees."""

import math

import numpy as np
import pytest

from degcp import build_sst, delta_pmf, sample_gw_tree, uniform_pmf
from degcp.rng import stream


def test_binary_tree_deterministic():
    t = sample_gw_tree(delta_pmf(2), 3, 42)
    assert t.generation_sizes(3) == [1, 2, 4, 8]


def test_zero_offspring_root_only():
    t = sample_gw_tree(delta_pmf(0), 5, 1)
    assert t.generation_sizes(3) == [1, 0, 0, 0]


def test_sst_generations():
    t = build_sst((2, 3), 2)
    assert t.generation_sizes(2) == [1, 2, 6]
    assert t.degree(0) == 2
    child = t.expand(0)[0]
    assert t.degree(child) == 4  # 3 children + parent


def test_gw_mean_generation_size():
    pmf = uniform_pmf([1, 2])
    N = 6
    reps = 10**4
    sizes = np.empty(reps)
    for i in range(reps):
        t = sample_gw_tree(pmf, N, int(stream(9, i).integers(2**62)))
        sizes[i] = t.generation_sizes(N)[-1]
    want = 1.5**N
    se = sizes.std(ddof=1) / math.sqrt(reps)
    assert abs(sizes.mean() - want) <= 3 * se


def test_expansion_order_invariance():
    # expand one copy breadth-first and another depth-first: same tree
    pmf = uniform_pmf([0, 1, 2, 3])
    a = sample_gw_tree(pmf, 6, 777)
    b = sample_gw_tree(pmf, 6, 777)
    a.generation(6)  # BFS realization

    def dfs(t, v):
        for c in t.expand(v):
            dfs(t, c)

    dfs(b, 0)
    assert a.n == b.n
    # same shape: sorted (depth, offspring count) multiset
    sig_a = sorted((a.depth[v], a.offspring_count(v)) for v in range(a.n)
                   if a.depth[v] < 6)
    sig_b = sorted((b.depth[v], b.offspring_count(v)) for v in range(b.n)
                   if b.depth[v] < 6)
    assert sig_a == sig_b


def test_expand_idempotent_and_boundary():
    t = sample_gw_tree(delta_pmf(2), 2, 3)
    kids1 = t.expand(0)
    kids2 = t.expand(0)
    assert kids1 == kids2
    leaf = t.generation(2)[0]
    assert t.expand(leaf) == []  # capped
    assert t.is_boundary(leaf)
    assert t.offspring_count(leaf) == 2  # count still known for degrees
    assert t.degree(leaf) == 3


def test_generation_beyond_cap_raises():
    t = sample_gw_tree(delta_pmf(1), 2, 3)
    with pytest.raises(ValueError):
        t.generation(3)


def test_root_path_and_multigraph():
    t = build_sst((2, 1, 1), 3)
    gen3 = t.generation(3)
    path = t.root_path(gen3[0])
    assert len(path) == 4 and path[0] == 0
    g = t.to_multigraph()
    assert g.n == t.n
    assert int(g.degrees.sum()) == 2 * (t.n - 1)
