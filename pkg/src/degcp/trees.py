"""Lazily expanded rooted trees: Galton-Watson trees and spherically
symmetric trees.

Offspring counts are drawn from a per-vertex substream keyed by the vertex's
root path, so the realized tree does not depend on the order in which
vertices are expanded. Vertices at ``max_depth`` are boundary vertices: their
offspring *count* can still be sampled (it fixes their degree) but their
children are never materialized.
"""

from __future__ import annotations

import random as _pyrandom

import numpy as np

from .degrees import DegreePMF
from .graphs import MultiGraph
from .rng import mix64

__all__ = ["LazyTree", "sample_gw_tree", "build_sst"]

ROOT = 0


class LazyTree:
    """Rooted tree; vertices are dense ints in order of materialization."""

    def __init__(self, offspring_fn, max_depth: int):
        # offspring_fn(path_key, depth) -> offspring count
        self._offspring_fn = offspring_fn
        self.max_depth = int(max_depth)
        self.parent = [-1]
        self.depth = [0]
        self._key = [1]
        self._children = {}  # vid -> list of child ids (materialized)
        self._count = {}  # vid -> sampled offspring count
        self.boundary = set()

    # -- structure ----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.parent)

    def offspring_count(self, v: int) -> int:
        """Number of children of ``v`` (sampled once, then cached)."""
        c = self._count.get(v)
        if c is None:
            c = int(self._offspring_fn(self._key[v], self.depth[v]))
            self._count[v] = c
        return c

    def expand(self, v: int):
        """Materialize and return the children of ``v`` (idempotent).

        At ``max_depth`` the vertex is marked as boundary and no children are
        created, whatever its sampled offspring count says.
        """
        got = self._children.get(v)
        if got is not None:
            return got
        if self.depth[v] >= self.max_depth:
            self.boundary.add(v)
            self._children[v] = []
            return self._children[v]
        c = self.offspring_count(v)
        kids = []
        d = self.depth[v] + 1
        for j in range(c):
            vid = len(self.parent)
            self.parent.append(v)
            self.depth.append(d)
            self._key.append(mix64(self._key[v], j + 1))
            kids.append(vid)
        self._children[v] = kids
        return kids

    def children(self, v: int):
        return self.expand(v)

    def degree(self, v: int) -> int:
        """Tree degree: offspring count plus one for the parent edge."""
        c = self.offspring_count(v)
        return c if v == ROOT else c + 1

    def is_boundary(self, v: int) -> bool:
        return self.depth[v] >= self.max_depth

    # -- bulk realization -----------------------------------------------------

    def generation(self, N: int):
        """Vertex ids at depth ``N`` (expands everything above them)."""
        if N > self.max_depth:
            raise ValueError("beyond max_depth")
        level = [ROOT]
        for _ in range(N):
            nxt = []
            for v in level:
                nxt.extend(self.expand(v))
            level = nxt
        return level

    def generation_sizes(self, N: int):
        """[|Gen_0|, ..., |Gen_N|]."""
        sizes = []
        level = [ROOT]
        for d in range(N + 1):
            sizes.append(len(level))
            if d < N:
                nxt = []
                for v in level:
                    nxt.extend(self.expand(v))
                level = nxt
        return sizes

    def realize(self, depth=None):
        """Expand the whole tree to ``depth`` (default max_depth)."""
        self.generation(self.max_depth if depth is None else depth)
        return self

    def root_path(self, v: int):
        """Vertex sequence from the root to ``v``."""
        path = [v]
        while path[-1] != ROOT:
            path.append(self.parent[path[-1]])
        return path[::-1]

    def to_multigraph(self, depth=None) -> MultiGraph:
        """Realize to ``depth`` and convert to a simple tree graph.

        Degrees of depth-``depth`` vertices in the result are 1 (their
        unrealized subtrees are cut off).
        """
        self.realize(depth)
        edges = [(self.parent[v], v) for v in range(1, self.n)
                 if depth is None or self.depth[v] <= depth]
        return MultiGraph.from_edges(self.n, edges)


def sample_gw_tree(pmf: DegreePMF, max_depth: int, seed) -> LazyTree:
    """Galton-Watson tree with iid offspring from ``pmf``, lazily expanded.

    ``seed`` may be an int or a Generator (an integer master key is drawn
    from it). Each vertex draws its offspring count from a substream keyed
    by its root path, so expansion order never changes the realized tree.
    """
    if isinstance(seed, np.random.Generator):
        master = int(seed.integers(0, 2**63 - 1))
    else:
        master = int(seed)
    cum = np.cumsum(pmf.probs)
    values = pmf.values

    def draw(path_key, _depth):
        u = _pyrandom.Random(mix64(master, path_key)).random()
        j = int(np.searchsorted(cum, u, side="right"))
        if j >= values.size:
            j = values.size - 1
        return int(values[j])

    return LazyTree(draw, max_depth)


def build_sst(offspring_seq, depth: int) -> LazyTree:
    """Spherically symmetric tree: every generation-i vertex has
    ``offspring_seq[i]`` children; zero beyond the given sequence."""
    seq = [int(d) for d in offspring_seq]
    if any(d < 0 for d in seq):
        raise ValueError("offspring counts must be non-negative")

    def draw(_key, d):
        return seq[d] if d < len(seq) else 0

    return LazyTree(draw, depth)
