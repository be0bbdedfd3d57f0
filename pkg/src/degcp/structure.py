"""Structural algorithms: k-core pruning and its fixed-point predictor,
exploration of configuration-model neighborhoods with a dominating tree
coupling, expansion certificates, and star-row embedding search.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .degrees import (
    DegreePMF,
    binomial_thinning_pmf,
    explicit_pmf,
    hash_transform,
    iid_degree_sequence,
    size_biased,
)
from .graphs import MultiGraph, build_configuration_model, targeted_attack
from .rng import as_generator
from .trees import LazyTree, sample_gw_tree

__all__ = [
    "k_core",
    "h_h1",
    "FixedPointReport",
    "jl_fixed_point",
    "eta_zeta_min",
    "attack_threshold",
    "CoreAttackResult",
    "core_after_attack_experiment",
    "ExplorationOutput",
    "explore_neighborhood",
    "surplus_count",
    "hk_exponent",
    "generation_moment_mc",
    "ExpansionReport",
    "delta_k_good_check",
    "MEmbedding",
    "m_embedding_search",
]


# -- k-core ---------------------------------------------------------------


def k_core(g: MultiGraph, k: int):
    """Largest induced subgraph with all internal degrees >= k.

    Repeatedly deletes vertices of current degree below ``k``. Returns
    ``(subgraph, kept_ids)``; the subgraph may be empty.
    """
    if k < 0:
        raise ValueError("k >= 0 required")
    deg = g.degrees.astype(np.int64).copy()
    alive = np.ones(g.n, dtype=bool)
    stack = [v for v in range(g.n) if deg[v] < k]
    for v in stack:
        alive[v] = False
    while stack:
        v = stack.pop()
        ids, mult = g.neighbors(v)
        for w, m in zip(ids, mult):
            w = int(w)
            if alive[w]:
                deg[w] -= int(m)
                if deg[w] < k:
                    alive[w] = False
                    stack.append(w)
    return g.induced(alive)


# -- Janson-Luczak fixed point ------------------------------------------------


def h_h1(pmf: DegreePMF, p: float, k: int):
    """(E[X 1{X >= k}], P(X >= k)) for X ~ Bin(D, p), D ~ pmf.

    Exact finite sums, evaluated through the lower binomial tail (only the
    k terms below the cutoff are accumulated, so large supports stay cheap).
    """
    if not 0 <= p <= 1:
        raise ValueError("p in [0, 1] required")
    mask = (pmf.probs > 0) & (pmf.values >= k)
    js = pmf.values[mask].astype(np.float64)
    ws = pmf.probs[mask]
    if js.size == 0:
        return 0.0, 0.0
    if p == 0.0:
        if k == 0:
            return 0.0, 1.0
        return 0.0, 0.0
    if p == 1.0:
        return float(np.dot(js, ws)), float(ws.sum())
    # b_r = P(Bin(j, p) = r), accumulated for r < k via the ratio recursion
    b = (1.0 - p) ** js
    below_p = np.zeros_like(js)
    below_e = np.zeros_like(js)
    ratio = p / (1.0 - p)
    for r in range(k):
        below_p += b
        below_e += r * b
        b = b * (js - r) / (r + 1.0) * ratio
    h1 = float(np.dot(ws, 1.0 - below_p))
    h = float(np.dot(ws, js * p - below_e))
    # vertices below k contribute nothing to either sum
    return max(h, 0.0), min(max(h1, 0.0), 1.0)


@dataclass
class FixedPointReport:
    """Largest solution of E[D] p^2 = h(D, p) and the densities it predicts."""

    p_hat: float
    h: float
    h1: float
    vertex_density: float  # predicted |core|/n
    edge_density: float  # predicted |edges(core)|/n
    bracket: tuple | None
    degenerate: bool  # min degree >= k: pruning removes nothing
    negative_below: bool  # f < 0 just below p_hat (the usable-crossing condition)
    k: int

    def to_json_dict(self):
        return {
            "p_hat": self.p_hat,
            "h": self.h,
            "h1": self.h1,
            "vertex_density": self.vertex_density,
            "edge_density": self.edge_density,
            "degenerate": self.degenerate,
            "negative_below": self.negative_below,
            "k": self.k,
        }


def jl_fixed_point(pmf: DegreePMF, k: int, grid: int = 10**4, tol: float = 1e-10):
    """Locate p_hat = max{p <= 1 : E[D] p^2 = h(D, p)} and the predicted
    asymptotic core densities.

    Scans a uniform grid for the largest sign change of
    f(p) = E[D] p^2 - h(D, p) with f < 0 below the root, then bisects.
    When the minimum degree already is >= k, pruning removes nothing: p_hat
    is 1 with density 1 (f has a degenerate root there, so it is
    short-circuited). With no admissible root the prediction is an empty
    core (p_hat = 0).
    """
    mean = pmf.mean()
    if mean <= 0:
        raise ValueError("E[D] > 0 required")
    if pmf.support_min >= k:
        h, h1 = h_h1(pmf, 1.0, k)
        return FixedPointReport(1.0, h, h1, h1, mean / 2.0, None, True, False, k)

    def f(p):
        h, _ = h_h1(pmf, p, k)
        return mean * p * p - h

    ps = np.linspace(0.0, 1.0, grid + 1)
    vals = np.array([f(p) for p in ps])
    bracket = None
    for i in range(len(ps) - 1, 0, -1):
        if vals[i - 1] < 0 <= vals[i]:
            bracket = (ps[i - 1], ps[i])
            break
    if bracket is None:
        return FixedPointReport(0.0, 0.0, 0.0, 0.0, 0.0, None, False, False, k)
    lo, hi = bracket
    # one refinement pass, then bisection
    fine = np.linspace(lo, hi, 65)
    fvals = [f(p) for p in fine]
    for i in range(len(fine) - 1, 0, -1):
        if fvals[i - 1] < 0 <= fvals[i]:
            lo, hi = fine[i - 1], fine[i]
            break
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    p_hat = 0.5 * (lo + hi)
    h, h1 = h_h1(pmf, p_hat, k)
    return FixedPointReport(
        p_hat=p_hat,
        h=h,
        h1=h1,
        vertex_density=h1,
        edge_density=mean * p_hat**2 / 2.0,
        bracket=bracket,
        degenerate=False,
        negative_below=f(max(0.0, p_hat - 100 * tol)) < 0,
        k=k,
    )


# -- attack thresholds ------------------------------------------------------


def eta_zeta_min(tau: float, eps: float):
    """Smallest usable tail-heaviness excess and the implied degree-cap
    exponent: eta_min = (3-tau)/((3-tau)-eps(tau-1)) * (1+eps)/(1-eps) - 1
    and zeta_min = (eta_min+1)/(3-tau)."""
    if not 2 < tau < 3:
        raise ValueError("tau in (2, 3) required")
    if not 0 <= eps < (3 - tau) / (tau - 1):
        raise ValueError("eps must satisfy 0 <= eps < (3-tau)/(tau-1)")
    eta_min = (3 - tau) / ((3 - tau) - eps * (tau - 1)) * (1 + eps) / (1 - eps) - 1
    zeta_min = (eta_min + 1) / (3 - tau)
    return eta_min, zeta_min


def attack_threshold(k: int, tau: float, eta: float) -> float:
    """Degree cap M = k^((1+eta)/(3-tau)) above which vertices are removed."""
    if not 2 < tau < 3:
        raise ValueError("tau in (2, 3) required")
    return float(k) ** ((1 + eta) / (3 - tau))


@dataclass
class CoreAttackResult:
    k: int
    M: float
    densities: np.ndarray  # |core| / n per replica (relative to the original n)
    density_mean: float
    density_ci: tuple
    jl_prediction: float | None  # h1 on the thinned pmf, scaled by P(D <= M)

    def to_json_dict(self):
        return {
            "k": self.k,
            "M": self.M,
            "density_mean": self.density_mean,
            "density_ci": list(self.density_ci),
            "jl_prediction": self.jl_prediction,
            "densities": [float(x) for x in self.densities],
        }


def core_after_attack_experiment(
    pmf: DegreePMF, n: int, k: int, eta: float, reps: int, rng, with_jl: bool = True
) -> CoreAttackResult:
    """Sample CMs with iid degrees, attack above M = k^((1+eta)/(3-tau)),
    prune to the k-core, and report the density relative to the original n.

    The analytic reference is the fixed-point density on the thinned limit
    law, scaled by the surviving-vertex fraction P(D <= M).
    """
    tau = pmf.tail_params.get("tau")
    if tau is None:
        raise ValueError("pmf must carry a power-law tau tag")
    rng = as_generator(rng)
    M = attack_threshold(k, tau, eta)
    dens = np.empty(reps)
    for i in range(reps):
        deg = iid_degree_sequence(pmf, n, rng)
        g = build_configuration_model(deg, rng)
        atk = targeted_attack(g, int(M))
        core, _ = k_core(atk.graph, k)
        dens[i] = core.n / n
    mean = float(dens.mean())
    se = float(dens.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    pred = None
    if with_jl:
        thinned, _ = binomial_thinning_pmf(pmf, int(M))
        rep = jl_fixed_point(thinned, k)
        pred = rep.h1 * pmf.cdf(int(M))
    return CoreAttackResult(k, M, dens, mean, (mean - 1.96 * se, mean + 1.96 * se), pred)


# -- neighborhood exploration --------------------------------------------------


@dataclass
class ExplorationOutput:
    """Breadth-first exploration of one configuration-model neighborhood.

    ``ball_vertices`` maps original vertex id -> distance from the root over
    everything revealed up to radius r; ``ball`` is the revealed subgraph
    (on reindexed vertices via ``ball_ids``). The coupled tree is recorded
    as parent pointers with a ghost flag per node; real tree nodes carry the
    original vertex id they represent, so the ball embeds into the non-ghost
    part of the tree by construction.
    """

    ball: MultiGraph
    ball_ids: np.ndarray
    ball_vertices: dict
    collisions: int
    surplus: int
    forward_degrees: list
    tree_parent: list
    tree_ghost: list
    tree_vertex: list  # original id or -1 for ghosts
    tree_depth: list
    dominating_draws: list | None
    surplus_edges: list  # (u, v, kind) with kind in {loop, multi, cross}

    @property
    def tree_size(self) -> int:
        return len(self.tree_parent)


class ExplorationBudgetError(RuntimeError):
    pass


def explore_neighborhood(
    deg_seq,
    v0: int,
    r: int,
    rng,
    ghost_pmf: DegreePMF | None = None,
    eta: float = 0.2,
    budget_fraction: float = 1.0 / 17.0,
    dominating: bool = False,
):
    """Reveal B_r(v0) of a configuration model by sequential half-edge
    matching, together with a tree that contains it.

    Half-edges are matched first-in-first-out from the root; each match
    either discovers a new vertex (its remaining half-edges become the
    forward degree X_s) or collides with an active half-edge, creating a
    surplus edge. On a collision the coupled tree receives two ghost
    subtrees drawn from ``ghost_pmf`` (default: the heavier-tail transform
    of the size-biased empirical law), one per colliding half-edge, reaching
    exactly to depth r. Matching more than ``budget_fraction`` of all
    half-edges aborts with a diagnostic. With ``dominating=True``, each step
    also draws a coupled variable from the ghost law that almost surely
    dominates X_s + 1.
    """
    rng = as_generator(rng)
    deg = np.asarray(deg_seq, dtype=np.int64)
    n = deg.size
    if not 0 <= v0 < n:
        raise ValueError("v0 out of range")
    if r < 1:
        raise ValueError("r >= 1 required")
    total_halves = int(deg.sum())
    budget = budget_fraction * total_halves
    if budget < 2:
        # the fractional budget is an asymptotic guard (it backs the
        # domination coupling); on supports too small for one match it is
        # not binding
        budget = total_halves

    emp_vals, emp_counts = np.unique(deg, return_counts=True)
    emp = explicit_pmf(emp_vals, emp_counts / emp_counts.sum())
    if ghost_pmf is None:
        try:
            ghost_pmf = hash_transform(size_biased(emp), eta)[0]
        except ValueError:
            # tiny or degenerate supports admit no heavier-tail transform;
            # the size-biased law itself still dominates the forward degrees
            ghost_pmf = size_biased(emp)

    # stub pool: flat array of owners with swap-removal
    owners = np.repeat(np.arange(n, dtype=np.int64), deg)
    pos_list = [[] for _ in range(n)]
    for idx, u in enumerate(owners):
        pos_list[int(u)].append(idx)
    stub_pos = {}  # stub id -> current index in pool
    pool = list(range(owners.size))
    for idx, sid in enumerate(pool):
        stub_pos[sid] = idx
    stub_owner = owners

    def pool_remove(sid):
        idx = stub_pos.pop(sid)
        last = pool.pop()
        if last != sid:
            pool[idx] = last
            stub_pos[last] = idx

    # tree bookkeeping
    tree_parent = [-1]
    tree_ghost = [False]
    tree_vertex = [int(v0)]
    tree_depth = [0]

    def tree_add(parent, vertex, depth, ghost):
        tree_parent.append(parent)
        tree_ghost.append(ghost)
        tree_vertex.append(vertex)
        tree_depth.append(depth)
        return len(tree_parent) - 1

    def attach_ghost(parent_node, depth_left):
        # iid ghost subtree reaching exactly depth r from the root
        frontier = [(parent_node, depth_left)]
        while frontier:
            node, left = frontier.pop()
            if left <= 0:
                continue
            if len(tree_parent) > 10**6:
                raise ExplorationBudgetError("coupled tree exceeded 1e6 nodes")
            c = int(ghost_pmf.sample(rng))
            for _ in range(c):
                child = tree_add(node, -1, tree_depth[node] + 1, True)
                frontier.append((child, left - 1))

    dist = {int(v0): 0}
    node_of = {int(v0): 0}
    queue = deque(pos_list[int(v0)])
    edges = []  # (u, v) revealed, loops as (u, u)
    edge_seen = set()
    surplus_edges = []
    forward = []
    dominating_draws = [] if dominating else None
    collisions = 0
    matched = 0

    while queue:
        h = queue.popleft()
        if h not in stub_pos:  # already consumed as a match target
            continue
        hu = int(stub_owner[h])
        pool_remove(h)
        if not pool:
            raise ValueError("odd half-edge count during exploration")
        matched += 2
        if matched > budget:
            raise ExplorationBudgetError(
                f"matched {matched} half-edges, over the {budget:.0f} budget"
            )
        pick = int(rng.integers(len(pool)))
        m = pool[pick]
        mu_ = int(stub_owner[m])

        if dominating:
            # the picked vertex's unmatched-degree law is the size-biased law
            # of the pool; a randomized-quantile draw maps it under the ghost
            # law to a value dominating the observed one
            rem = np.zeros(n, dtype=np.int64)
            for sid in pool:
                rem[stub_owner[sid]] += 1
            vals2, cnt2 = np.unique(rem[rem > 0], return_counts=True)
            w2 = (vals2 * cnt2).astype(np.float64)
            cums = np.cumsum(w2) / w2.sum()
            x_now = int(rem[mu_])
            j = int(np.searchsorted(vals2, x_now))
            lo_u = float(cums[j - 1]) if j > 0 else 0.0
            u_pit = lo_u + rng.random() * (float(cums[j]) - lo_u)
            dominating_draws.append((x_now, int(ghost_pmf.quantile(u_pit))))

        pool_remove(m)
        if mu_ in dist:
            # collision: surplus edge between already-revealed vertices
            collisions += 1
            edges.append((hu, mu_))
            if hu == mu_:
                kind = "loop"
            elif (hu, mu_) in edge_seen or (mu_, hu) in edge_seen:
                kind = "multi"
            else:
                kind = "cross"
            edge_seen.add((hu, mu_))
            surplus_edges.append((hu, mu_, kind))
            forward.append(0)
            # two ghost subtrees keep the tree a superset of the ball
            r1 = dist[hu]
            r2 = dist[mu_]
            gh1 = tree_add(node_of[hu], -1, r1 + 1, True)
            attach_ghost(gh1, r - r1 - 1)
            gh2 = tree_add(node_of[mu_], -1, r2 + 1, True)
            attach_ghost(gh2, r - r2 - 1)
        else:
            d_new = dist[hu] + 1
            dist[mu_] = d_new
            edges.append((hu, mu_))
            edge_seen.add((hu, mu_))
            x_s = int(deg[mu_]) - 1
            forward.append(x_s)
            node = tree_add(node_of[hu], mu_, d_new, False)
            node_of[mu_] = node
            if d_new <= r - 1:
                for sid in pos_list[mu_]:
                    if sid in stub_pos:
                        queue.append(sid)

    # revealed ball as a reindexed multigraph
    ids = sorted(dist)
    index = {v: i for i, v in enumerate(ids)}
    us = [index[a] for a, b in edges]
    vs = [index[b] for a, b in edges]
    ball = MultiGraph.from_pairs(len(ids), us, vs)
    label, ncomp = ball.connected_components()
    surp = ball.num_edges - ball.n + ncomp
    return ExplorationOutput(
        ball=ball,
        ball_ids=np.array(ids, dtype=np.int64),
        ball_vertices=dict(dist),
        collisions=collisions,
        surplus=surp,
        forward_degrees=forward,
        tree_parent=tree_parent,
        tree_ghost=tree_ghost,
        tree_vertex=tree_vertex,
        tree_depth=tree_depth,
        dominating_draws=dominating_draws,
        surplus_edges=surplus_edges,
    )


def surplus_count(g: MultiGraph, v: int, r: int) -> int:
    """Surplus edges of the induced ball: |E| - |V| + #components."""
    dist = g.ball(v, r)
    sub, _ = g.induced(list(dist))
    _, ncomp = sub.connected_components()
    return sub.num_edges - sub.n + ncomp


# -- moment exponents -----------------------------------------------------------


def hk_exponent(k: int, tau_prime: float) -> float:
    """h_k = max{(k+1)/(tau'-1) - 1, 0}; superadditive for tau' > 2."""
    if tau_prime <= 1:
        raise ValueError("tau' > 1 required")
    return max((k + 1) / (tau_prime - 1) - 1.0, 0.0)


def generation_moment_mc(pmf: DegreePMF, r: int, k: int, reps: int, rng):
    """Monte Carlo estimate of E[Z_r^k] for the branching process with
    offspring ``pmf``; returns (estimate, standard error)."""
    rng = as_generator(rng)
    acc = np.empty(reps)
    for i in range(reps):
        tree = sample_gw_tree(pmf, r, int(rng.integers(2**62)))
        acc[i] = float(tree.generation_sizes(r)[-1]) ** k
    est = float(acc.mean())
    se = float(acc.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return est, se


# -- expansion certificates --------------------------------------------------------


@dataclass
class ExpansionReport:
    delta: float
    k: int
    trials: int
    certified: int
    inconclusive: int

    @property
    def pass_rate(self) -> float:
        return self.certified / self.trials if self.trials else 0.0


def delta_k_good_check(g: MultiGraph, delta: float, k: int, trials: int, rng) -> ExpansionReport:
    """Greedy certificates for the neighborhood-expansion property.

    For each sampled set S of floor(delta n) vertices, greedily look for
    floor(delta n)/8 members with k/2 neighbors each, all chosen vertices
    and neighbors distinct. A greedy success certifies the property for that
    set; a greedy failure is inconclusive and counted separately.
    """
    if k % 2 != 0:
        raise ValueError("k must be even")
    m = int(delta * g.n)
    if m < 1:
        raise ValueError("floor(delta n) >= 1 required")
    rng = as_generator(rng)
    need = max(1, m // 8)
    half = k // 2
    certified = 0
    for _ in range(trials):
        S = rng.choice(g.n, size=m, replace=False)
        sset = set(int(v) for v in S)
        used = set()
        good = 0
        for v in S:
            v = int(v)
            if v in used:
                continue
            ids, _ = g.neighbors(v)
            picks = [int(w) for w in ids if int(w) not in used and int(w) not in sset]
            if len(picks) >= half:
                good += 1
                used.add(v)
                used.update(picks[:half])
                if good >= need:
                    break
        if good >= need:
            certified += 1
    return ExpansionReport(delta, k, trials, certified, trials - certified)


# -- star-row embedding search ---------------------------------------------------


@dataclass
class MEmbedding:
    centers: list
    paths: list  # list of vertex lists (interior vertices between centers)
    degree_factor: float

    @property
    def chain_length(self) -> int:
        return len(self.centers)


def m_embedding_search(tree: LazyTree, K: int, ell: int, M: int, budget: int = 200000):
    """Greedy search for a row of stars inside a realized tree.

    A star center is a vertex with exactly 2K children, at least K+1 of them
    of degree at most M; consecutive centers must be joined by a descending
    path with ell interior vertices, each of degree at most M. Returns the
    longest chain found within the vertex budget (possibly empty). The
    degree factor reported is max over embedded vertices of
    deg_tree / deg_row, with the row degree K+2 at centers, 2 on paths and
    1 at leaves.
    """
    visited = 0

    def is_center(v):
        if tree.offspring_count(v) != 2 * K:
            return False
        kids = tree.expand(v)
        low = sum(1 for c in kids if tree.degree(c) <= M)
        return low >= K + 1

    def find_first_center():
        nonlocal visited
        queue = deque([0])
        while queue:
            v = queue.popleft()
            visited += 1
            if visited > budget:
                return None
            if tree.is_boundary(v):
                continue
            if is_center(v):
                return v
            queue.extend(tree.expand(v))
        return None

    def next_center(v):
        # descend exactly ell+1 levels through degree-<=M interiors
        nonlocal visited
        frontier = [(v, 0)]
        while frontier:
            u, d = frontier.pop()
            visited += 1
            if visited > budget:
                return None
            if d == ell + 1:
                if is_center(u):
                    return u
                continue
            if tree.is_boundary(u):
                continue
            for c in tree.expand(u):
                if d + 1 == ell + 1:
                    frontier.append((c, d + 1))
                elif tree.degree(c) <= M:
                    frontier.append((c, d + 1))
        return None

    start = find_first_center()
    if start is None:
        return MEmbedding([], [], 0.0)
    centers = [start]
    paths = []
    while visited <= budget:
        nxt = next_center(centers[-1])
        if nxt is None:
            break
        # reconstruct the connecting path
        path = []
        u = nxt
        for _ in range(ell + 1):
            u = tree.parent[u]
            path.append(u)
        path = path[::-1][1:]  # drop the previous center, keep interiors
        centers.append(nxt)
        paths.append(path)
    # degree inflation over the embedded row
    factor = 0.0
    for i, c in enumerate(centers):
        row_deg = K + 2 if 0 < i < len(centers) - 1 else K + 1
        if len(centers) == 1:
            row_deg = K
        factor = max(factor, tree.degree(c) / row_deg)
    for path in paths:
        for u in path:
            factor = max(factor, tree.degree(u) / 2.0)
    return MEmbedding(centers, paths, factor)
