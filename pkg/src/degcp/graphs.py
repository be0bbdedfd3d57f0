"""Finite undirected multigraphs and their random constructions.

The central container is :class:`MultiGraph`: CSR adjacency with explicit
edge multiplicities plus a per-vertex loop count. The degree convention is

    d_v = sum_{u != v} e(u, v) + 2 * loops(v),

i.e. a loop contributes two to the degree of its vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import as_generator

__all__ = [
    "MultiGraph",
    "AttackResult",
    "StarRow",
    "build_configuration_model",
    "build_star",
    "build_star_row",
    "path_graph",
    "cycle_graph",
    "complete_graph",
    "random_regular_multigraph",
    "targeted_attack",
    "write_graph",
    "read_graph",
    "write_degree_sequence",
    "read_degree_sequence",
]


class MultiGraph:
    """Undirected multigraph with loops, stored as sorted CSR adjacency.

    Attributes
    ----------
    n : int
        Vertex count; vertices are 0..n-1.
    nbr_ptr, nbr_idx, nbr_mult : ndarray
        CSR rows: distinct neighbors of ``u`` are
        ``nbr_idx[nbr_ptr[u]:nbr_ptr[u+1]]`` (ascending) with multiplicities
        in ``nbr_mult``. Loops are kept out of the CSR rows.
    loops : ndarray
        Loop count per vertex.
    degrees : ndarray
        Cached degrees, loop-counted twice.
    """

    __slots__ = ("n", "nbr_ptr", "nbr_idx", "nbr_mult", "loops", "degrees")

    def __init__(self, n, nbr_ptr, nbr_idx, nbr_mult, loops):
        self.n = int(n)
        self.nbr_ptr = nbr_ptr
        self.nbr_idx = nbr_idx
        self.nbr_mult = nbr_mult
        self.loops = loops
        deg = np.zeros(self.n, dtype=np.int64)
        if nbr_mult.size:
            counts = np.diff(nbr_ptr)
            nz = counts > 0
            deg[nz] = np.add.reduceat(nbr_mult, nbr_ptr[:-1][nz])
        self.degrees = deg + 2 * loops

    # -- construction ---------------------------------------------------

    @classmethod
    def from_pairs(cls, n: int, us, vs) -> "MultiGraph":
        """Build from endpoint arrays; a pair with ``u == v`` is a loop."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.size and (us.min() < 0 or vs.min() < 0 or us.max() >= n or vs.max() >= n):
            raise ValueError("vertex id out of range")
        loop_mask = us == vs
        loops = np.zeros(n, dtype=np.int64)
        if loop_mask.any():
            np.add.at(loops, us[loop_mask], 1)
        u2 = us[~loop_mask]
        v2 = vs[~loop_mask]
        # symmetric: store both directions
        a = np.concatenate([u2, v2])
        b = np.concatenate([v2, u2])
        order = np.lexsort((b, a))
        a = a[order]
        b = b[order]
        if a.size:
            new = np.empty(a.size, dtype=bool)
            new[0] = True
            new[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
            starts = np.flatnonzero(new)
            mult = np.diff(np.append(starts, a.size)).astype(np.int64)
            a = a[starts]
            b = b[starts]
        else:
            mult = np.zeros(0, dtype=np.int64)
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(ptr, a + 1, 1)
        ptr = np.cumsum(ptr)
        return cls(n, ptr, b, mult, loops)

    @classmethod
    def from_edges(cls, n: int, edges, loops=()) -> "MultiGraph":
        """Build from an edge list ``[(u, v), ...]`` plus ``[(u, count), ...]`` loops."""
        us = [e[0] for e in edges]
        vs = [e[1] for e in edges]
        for u, c in loops:
            us.extend([u] * c)
            vs.extend([u] * c)
        return cls.from_pairs(n, us, vs)

    # -- queries ----------------------------------------------------------

    def neighbors(self, u: int):
        """(distinct neighbor ids, multiplicities) of ``u``, loops excluded."""
        lo, hi = self.nbr_ptr[u], self.nbr_ptr[u + 1]
        return self.nbr_idx[lo:hi], self.nbr_mult[lo:hi]

    def e(self, u: int, v: int) -> int:
        """Multiplicity of the edge {u, v}; 0 for u == v (loops are separate)."""
        if u == v:
            return 0
        ids, mult = self.neighbors(u)
        j = np.searchsorted(ids, v)
        if j < ids.size and ids[j] == v:
            return int(mult[j])
        return 0

    @property
    def num_edges(self) -> int:
        """Total edges counted with multiplicity, loops included once each."""
        return int(self.nbr_mult.sum()) // 2 + int(self.loops.sum())

    def max_multiplicity(self) -> int:
        m = int(self.nbr_mult.max()) if self.nbr_mult.size else 0
        return m

    def ball(self, v0: int, r: int):
        """Vertices within graph distance ``r`` of ``v0`` and their distances."""
        dist = {v0: 0}
        frontier = [v0]
        for d in range(1, r + 1):
            nxt = []
            for u in frontier:
                ids, _ = self.neighbors(u)
                for w in ids:
                    w = int(w)
                    if w not in dist:
                        dist[w] = d
                        nxt.append(w)
            frontier = nxt
            if not frontier:
                break
        return dist

    def induced(self, keep):
        """Induced subgraph on ``keep`` (bool mask or vertex list).

        Returns ``(subgraph, kept_ids)``; vertex ``i`` of the subgraph is
        original vertex ``kept_ids[i]``.
        """
        if isinstance(keep, np.ndarray) and keep.dtype == bool:
            kept = np.flatnonzero(keep)
        else:
            kept = np.asarray(sorted(set(int(v) for v in keep)), dtype=np.int64)
        pos = -np.ones(self.n, dtype=np.int64)
        pos[kept] = np.arange(kept.size)
        row = np.repeat(np.arange(self.n), np.diff(self.nbr_ptr))
        col = self.nbr_idx
        mask = (pos[row] >= 0) & (pos[col] >= 0) & (row < col)
        us = np.repeat(pos[row[mask]], self.nbr_mult[mask])
        vs = np.repeat(pos[col[mask]], self.nbr_mult[mask])
        loop_v = np.repeat(pos[kept], self.loops[kept])
        us = np.concatenate([us, loop_v])
        vs = np.concatenate([vs, loop_v])
        return MultiGraph.from_pairs(kept.size, us, vs), kept

    def connected_components(self):
        """Component label per vertex (edges only; isolated vertices count)."""
        label = -np.ones(self.n, dtype=np.int64)
        cur = 0
        for s in range(self.n):
            if label[s] >= 0:
                continue
            stack = [s]
            label[s] = cur
            while stack:
                u = stack.pop()
                ids, _ = self.neighbors(u)
                for w in ids:
                    w = int(w)
                    if label[w] < 0:
                        label[w] = cur
                        stack.append(w)
            cur += 1
        return label, cur

    def degree_identity_holds(self) -> bool:
        """Exact check of d_v = sum_{u != v} e(u,v) + 2 loops(v)."""
        deg = np.zeros(self.n, dtype=np.int64)
        for u in range(self.n):
            ids, mult = self.neighbors(u)
            deg[u] = mult.sum() + 2 * self.loops[u]
        return bool(np.array_equal(deg, self.degrees))


# -- random and deterministic constructions ------------------------------


def build_configuration_model(deg_seq, rng, auto_fix: bool = False) -> MultiGraph:
    """Uniformly random pairing of half-edges with the given degrees.

    The resulting multigraph has loop-counted degrees exactly equal to
    ``deg_seq``. An odd half-edge total is rejected unless ``auto_fix`` is
    set, in which case one half-edge is added to the last vertex.
    """
    rng = as_generator(rng)
    deg = np.asarray(deg_seq, dtype=np.int64).copy()
    if deg.size and deg.min() < 0:
        raise ValueError("negative degree")
    if int(deg.sum()) % 2 == 1:
        if not auto_fix:
            raise ValueError("odd half-edge sum; pass auto_fix=True to add one half-edge")
        deg[-1] += 1
    stubs = np.repeat(np.arange(deg.size, dtype=np.int64), deg)
    rng.shuffle(stubs)
    return MultiGraph.from_pairs(deg.size, stubs[0::2], stubs[1::2])


def random_regular_multigraph(n: int, d: int, rng) -> MultiGraph:
    """Configuration model with constant degree ``d`` (loops/multi-edges allowed)."""
    return build_configuration_model([d] * n, rng)


def build_star(K: int) -> MultiGraph:
    """Star with center 0 of degree ``K`` and leaves 1..K."""
    if K < 1:
        raise ValueError("K >= 1 required")
    return MultiGraph.from_edges(K + 1, [(0, i) for i in range(1, K + 1)])


@dataclass(frozen=True)
class StarRow:
    """A finite row of stars joined by paths, with its layout recorded."""

    graph: MultiGraph
    centers: tuple
    leaves: tuple  # tuple of tuples, one leaf tuple per center
    K: int
    ell: int


def build_star_row(K: int, ell: int, num_stars: int) -> StarRow:
    """Finite row of degree-``K`` stars with paths of ``ell`` internal vertices.

    Consecutive centers are joined by a path of ``ell`` degree-2 vertices, so
    interior centers have degree ``K + 2`` and the two end centers ``K + 1``
    (or ``K`` when there is a single star).
    """
    if K < 1 or ell < 1 or num_stars < 1:
        raise ValueError("K, ell, num_stars must all be >= 1")
    edges = []
    centers = []
    leaves = []
    nxt = 0

    def fresh():
        nonlocal nxt
        nxt += 1
        return nxt - 1

    prev_center = None
    for _ in range(num_stars):
        c = fresh()
        centers.append(c)
        lv = tuple(fresh() for _ in range(K))
        leaves.append(lv)
        edges.extend((c, leaf) for leaf in lv)
        if prev_center is not None:
            chain = [prev_center] + [fresh() for _ in range(ell)] + [c]
            edges.extend(zip(chain[:-1], chain[1:]))
        prev_center = c
    g = MultiGraph.from_edges(nxt, edges)
    return StarRow(g, tuple(centers), tuple(leaves), K, ell)


def path_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


# -- targeted attack ------------------------------------------------------


@dataclass(frozen=True)
class AttackResult:
    """Outcome of removing every vertex of degree above ``M``."""

    graph: MultiGraph
    kept: np.ndarray  # original ids of surviving vertices
    new_degrees: np.ndarray  # degrees inside the attacked graph
    M: int
    V_le: int  # number of surviving vertices
    H_le: int  # half-edges at surviving vertices (original degrees)
    H_gt: int  # half-edges at removed vertices

    def empirical_pmf(self):
        """(values, frequencies) of the post-attack degrees."""
        vals, counts = np.unique(self.new_degrees, return_counts=True)
        return vals, counts / max(1, self.new_degrees.size)


def targeted_attack(g: MultiGraph, M: int) -> AttackResult:
    """Induced subgraph on the vertices of original degree at most ``M``."""
    if M < 0:
        raise ValueError("M >= 0 required")
    keep = g.degrees <= M
    sub, kept = g.induced(keep)
    H_le = int(g.degrees[keep].sum())
    return AttackResult(
        graph=sub,
        kept=kept,
        new_degrees=sub.degrees.copy(),
        M=int(M),
        V_le=int(keep.sum()),
        H_le=H_le,
        H_gt=int(g.degrees.sum()) - H_le,
    )


# -- plain-text graph I/O --------------------------------------------------


def write_graph(g: MultiGraph, path) -> None:
    """Text format: header ``n=<int>``, then ``u v mult`` and ``loop u count`` lines."""
    with open(path, "w") as fh:
        fh.write(f"n={g.n}\n")
        for u in range(g.n):
            ids, mult = g.neighbors(u)
            for v, m in zip(ids, mult):
                if u < v:
                    fh.write(f"{u} {int(v)} {int(m)}\n")
        for u in range(g.n):
            if g.loops[u]:
                fh.write(f"loop {u} {int(g.loops[u])}\n")


def read_graph(path) -> MultiGraph:
    n = None
    us, vs = [], []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("n="):
                n = int(line[2:])
            elif line.startswith("loop"):
                _, u, c = line.split()
                us.extend([int(u)] * int(c))
                vs.extend([int(u)] * int(c))
            else:
                u, v, m = line.split()
                us.extend([int(u)] * int(m))
                vs.extend([int(v)] * int(m))
    if n is None:
        raise ValueError("missing n=<int> header")
    return MultiGraph.from_pairs(n, us, vs)


def write_degree_sequence(deg_seq, path) -> None:
    with open(path, "w") as fh:
        for d in deg_seq:
            fh.write(f"{int(d)}\n")


def read_degree_sequence(path):
    with open(path) as fh:
        return [int(line) for line in fh if line.strip()]
