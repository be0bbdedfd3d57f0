"""Deterministic analytics on infection-path labels.

A label is a vertex tuple (pi_0, ..., pi_m) with an edge between consecutive
entries. Its weight z(pi) is the product of the transmission rates along it,
which equals the expected number of particles ever born with that label in
the genealogic branching random walk. Loop erasure removes backtracking
steps u -> v -> u; the bounds verified here control how much total weight the
erased paths can carry relative to their erased image.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .graphs import MultiGraph
from .penalty import PenaltySpec
from .trees import ROOT, LazyTree

__all__ = [
    "BoundReport",
    "bound_reports_to_csv",
    "validate_path",
    "z_weight",
    "expected_occupancy",
    "erlang_tail",
    "tau",
    "erase_first",
    "erase_k",
    "preimages",
    "verify_backtrack_bounds",
    "count_nonbacktracking",
    "zeta_weights",
    "extinction_series",
    "ExtinctionSeries",
    "overall_fast_bound",
    "alpha_star",
    "surplus_path_bound_check",
]

_SLACK = 1e-12
_PREIMAGE_CAP = 10**6


@dataclass(frozen=True)
class BoundReport:
    case_id: str
    lhs: float
    rhs: float
    enumerated: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + _SLACK


def bound_reports_to_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case_id", "lhs", "rhs", "holds"])
        for r in reports:
            w.writerow([r.case_id, repr(r.lhs), repr(r.rhs), int(r.holds)])


def validate_path(g: MultiGraph, pi) -> None:
    for a, b in zip(pi, pi[1:]):
        if a == b:
            if g.loops[a] < 1:
                raise ValueError(f"no loop at {a}")
        elif g.e(a, b) < 1:
            raise ValueError(f"vertices {a}, {b} are not adjacent")


def z_weight(g: MultiGraph, p: PenaltySpec, pi, x0: float = 1.0) -> float:
    """x0 * product of the rates along the label; x0 itself for length 0.

    Computed in log space for labels longer than 64 steps.
    """
    validate_path(g, pi)
    deg = g.degrees
    m = len(pi) - 1
    # a loop counts twice in e(u, u), matching the degree convention
    loop_rate = lambda a: p.rate(2 * int(g.loops[a]), int(deg[a]), int(deg[a]))
    if m > 64:
        acc = math.log(x0) if x0 > 0 else -math.inf
        for a, b in zip(pi, pi[1:]):
            r = loop_rate(a) if a == b else p.rate(g.e(a, b), int(deg[a]), int(deg[b]))
            acc += math.log(r) if r > 0 else -math.inf
        return math.exp(acc)
    acc = x0
    for a, b in zip(pi, pi[1:]):
        r = loop_rate(a) if a == b else p.rate(g.e(a, b), int(deg[a]), int(deg[b]))
        acc *= r
    return acc


def expected_occupancy(g: MultiGraph, p: PenaltySpec, pi, t: float, x0: float = 1.0) -> float:
    """Expected number of label-pi particles alive at time t:
    z(pi) * t^m / m! * e^(-t)."""
    if t < 0:
        raise ValueError("t >= 0 required")
    m = len(pi) - 1
    return z_weight(g, p, pi, x0) * t**m / math.factorial(m) * math.exp(-t)


def erlang_tail(m: int, t: float) -> float:
    """P(X_m >= t) for X_m a sum of m iid Exp(1): sum_{j<m} e^-t t^j / j!."""
    if m < 0:
        raise ValueError("m >= 0 required")
    if m == 0:
        return 1.0 if t <= 0 else 0.0
    term = math.exp(-t)
    acc = term
    for j in range(1, m):
        term *= t / j
        acc += term
    return min(1.0, acc)


# -- loop erasure --------------------------------------------------------------


def tau(pi):
    """Index of the first backtracking step: min {i >= 2: pi_i == pi_{i-2} !=
    pi_{i-1}}, or inf if none. Repeated loop traversal never counts."""
    for i in range(2, len(pi)):
        if pi[i] == pi[i - 2] and pi[i - 2] != pi[i - 1]:
            return i
    return math.inf


def erase_first(pi):
    """Remove the first backtracking step (two entries)."""
    t = tau(pi)
    if t == math.inf:
        raise ValueError("path has no backtracking step")
    return tuple(pi[: t - 1]) + tuple(pi[t + 1:])


def erase_k(pi, k: int):
    """Apply erase_first k times (identity for k = 0)."""
    out = tuple(pi)
    for _ in range(k):
        out = erase_first(out)
    return out


def _one_step_preimages(g: MultiGraph, pi):
    """All pi' with a single erasure mapping to pi: tau(pi') finite and
    erase_first(pi') == pi, grouped with their backtracking index."""
    pi = tuple(pi)
    out = []
    # insert (v, u) after position a-2 for u = pi[a-2]; the new path is
    # (pi_0..pi_{a-3}, u, v, u, pi_{a-1}..); require tau(new) == a
    for a in range(2, len(pi) + 2):
        u = pi[a - 2]
        ids, _ = g.neighbors(u)
        for v in ids:
            v = int(v)
            cand = pi[: a - 1] + (v, u) + pi[a - 1:]
            if tau(cand) == a:
                out.append((cand, a))
    return out


def preimages(g: MultiGraph, pi, k: int, max_len=None, cap: int = _PREIMAGE_CAP):
    """All paths mapping to ``pi`` under exactly ``k`` erasures.

    Enumerated by exhaustive insertion of backtracking steps, one erasure
    level at a time; ``max_len`` prunes by length and ``cap`` guards the
    total enumeration size.
    """
    level = {tuple(pi)}
    for _ in range(k):
        nxt = set()
        for q in level:
            if max_len is not None and len(q) - 1 + 2 > max_len:
                continue
            for cand, _a in _one_step_preimages(g, q):
                nxt.add(cand)
                if len(nxt) > cap:
                    raise ValueError("preimage enumeration exceeded cap")
        level = nxt
    return level


def verify_backtrack_bounds(g: MultiGraph, pi, lam: float, mu: float, k: int):
    """Exhaustively check the loop-erasure weight bounds around ``pi``.

    Uses the max penalty with exponent ``mu`` (the bounds are proved for
    mu >= 1/2). Emits one report per backtracking index ``a`` for the
    single-step bound

        sum_{pi' in g^-1(pi), tau(pi') = a} z(pi') <= lam^2 z(pi) max_mult

    (max_mult taken at pi_{a-2}) and one report per level j <= k for the
    iterated bound  sum_{(g^(j))^-1(pi)} z <= 2^l(pi) (4 lam^2 max_e)^j z(pi).
    """
    if mu < 0.5:
        raise ValueError("bounds require mu >= 1/2")
    p = PenaltySpec.max_(lam, mu)
    pi = tuple(pi)
    validate_path(g, pi)
    zpi = z_weight(g, p, pi)
    reports = []

    by_a = {}
    for cand, a in _one_step_preimages(g, pi):
        by_a.setdefault(a, []).append(cand)
    for a, cands in sorted(by_a.items()):
        lhs = sum(z_weight(g, p, q) for q in cands)
        u = pi[a - 2]
        ids, mult = g.neighbors(u)
        max_e = int(mult.max()) if mult.size else 0
        reports.append(
            BoundReport(f"one-step a={a}", lhs, lam**2 * zpi * max_e, len(cands))
        )

    max_e_global = max(1, g.max_multiplicity())
    level = {pi}
    for j in range(1, k + 1):
        nxt = set()
        for q in level:
            for cand, _a in _one_step_preimages(g, q):
                nxt.add(cand)
                if len(nxt) > _PREIMAGE_CAP:
                    raise ValueError("preimage enumeration exceeded cap")
        level = nxt
        lhs = sum(z_weight(g, p, q) for q in level)
        rhs = 2 ** (len(pi) - 1) * (4 * lam**2 * max_e_global) ** j * zpi
        reports.append(BoundReport(f"k-level j={j}", lhs, rhs, len(level)))
    return reports


def count_nonbacktracking(g: MultiGraph, v0: int, N: int) -> int:
    """Number of labels from ``v0`` of length at most N with no backtracking
    step. Self-loop traversal never triggers one; a return across a parallel
    edge does (the criterion sees only the vertex pattern)."""
    total = 0

    def walk(cur, prev, remaining):
        nonlocal total
        total += 1
        if remaining == 0:
            return
        ids, _ = g.neighbors(cur)
        for w in ids:
            w = int(w)
            if w == prev and prev != cur:
                continue
            walk(w, cur, remaining - 1)
        if g.loops[cur] >= 1:
            walk(cur, cur, remaining - 1)

    walk(v0, -1, N)
    return total


# -- weights along tree geodesics ------------------------------------------------


def zeta_weights(tree: LazyTree, u: int, mu: float):
    """(zeta, zeta_tilde) along the root geodesic of ``u``.

    zeta multiplies max(d_parent, d_child)^(-mu) over the geodesic edges;
    zeta_tilde uses d_root^(-mu) once and (d_v - 1)^(-mu) at interior
    vertices. zeta <= zeta_tilde always; zeta_tilde is undefined at the root.
    """
    path = tree.root_path(u)
    deg = [tree.degree(v) for v in path]
    zeta = 1.0
    for a, b in zip(deg, deg[1:]):
        zeta *= max(a, b) ** (-mu)
    if u == ROOT:
        return zeta, None
    zt = deg[0] ** (-mu)
    for d in deg[1:-1]:
        zt *= (d - 1) ** (-mu)
    return zeta, zt


@dataclass
class ExtinctionSeries:
    terms: np.ndarray  # per-generation contributions
    partial_sums: np.ndarray
    ratios: np.ndarray  # successive term ratios (diagnostic for geometric decay)
    in_derivation_regime: bool  # lam < 1/2, where the criterion was derived


def extinction_series(
    tree: LazyTree, lam: float, mu: float, N_max: int, use_tilde: bool = False
) -> ExtinctionSeries:
    """Partial sums of sum_N (2 lam)^N sum_{u in Gen_N} zeta(u).

    The weights are accumulated generation by generation (zeta of a child is
    zeta of the parent times the edge factor), so the cost is linear in the
    realized tree. With ``use_tilde`` the sum starts at N = 1.
    """
    terms = []
    if not use_tilde:
        terms.append(1.0)  # zeta(root) = 1, (2 lam)^0 = 1
    # weights propagated down the tree
    level = [(ROOT, 1.0)]
    droot = tree.degree(ROOT)
    for N in range(1, N_max + 1):
        nxt = []
        total = 0.0
        for v, wv in level:
            dv = tree.degree(v)
            for c in tree.expand(v):
                dc = tree.degree(c)
                if use_tilde:
                    if N == 1:
                        wc = droot ** (-mu)
                    else:
                        wc = wv * (dv - 1) ** (-mu)
                else:
                    wc = wv * max(dv, dc) ** (-mu)
                nxt.append((c, wc))
                total += wc
        terms.append((2.0 * lam) ** N * total)
        level = nxt
        if not level:
            break
    terms = np.array(terms)
    ratios = terms[1:] / np.where(terms[:-1] == 0, np.nan, terms[:-1])
    return ExtinctionSeries(terms, np.cumsum(terms), ratios, lam < 0.5)


# -- closed-form bounds ------------------------------------------------------------


def overall_fast_bound(b_N: int, N: int, C: float, lam: float, ell: int):
    """Lower bound on P(dies before CN without reaching distance N):
    1 - 2 b_N (e ell (4 ell lam)^N + e^{-N (C-1)^2 / (2C)}), clamped to [0, 1].

    Returns ``(bound, vacuous)``; ``vacuous`` marks a negative raw value.
    """
    if ell < 1:
        raise ValueError("ell >= 1 required")
    if not lam < 1.0 / (4 * ell):
        raise ValueError("requires lam < 1/(4 ell)")
    if not C > 1:
        raise ValueError("requires C > 1")
    if N < 2:
        raise ValueError("requires N >= 2")
    raw = 1.0 - 2.0 * b_N * (
        math.e * ell * (4 * ell * lam) ** N + math.exp(-N * (C - 1) ** 2 / (2 * C))
    )
    return max(0.0, raw), raw < 0


def alpha_star(lam: float, tol: float = 1e-10) -> float:
    """Unique root in (0, 1) of 1/a - 1 + log a = -log(2 lam), for lam < 1/2.

    The left side decreases from infinity to 0 on (0, 1], so bisection
    applies; the root increases with lam.
    """
    if not 0 < lam < 0.5:
        raise ValueError("requires 0 < lam < 1/2")
    target = -math.log(2 * lam)

    def f(a):
        return 1.0 / a - 1.0 + math.log(a) - target

    lo, hi = 1e-12, 1.0
    # f(lo) > 0 > f(hi) = -target < 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def surplus_path_bound_check(tree: MultiGraph, root: int, extra_edges, N: int) -> BoundReport:
    """|B_N| <= (2k+1)^N |T_N| for a tree plus k admissible extra edges.

    ``extra_edges`` are pairs (u, v) with dist(root, u) <= dist(root, v) <=
    dist(root, u) + 1 in the tree (loops and parallels allowed); B_N counts
    non-backtracking labels from the root of length <= N in the augmented
    graph, T_N the tree vertices within distance N.
    """
    dist = tree.ball(root, tree.n)
    for (u, v) in extra_edges:
        du_, dv_ = dist.get(u), dist.get(v)
        if du_ is None or dv_ is None:
            raise ValueError("extra edge endpoint unreachable from the root")
        lo, hi = min(du_, dv_), max(du_, dv_)
        if hi > lo + 1:
            raise ValueError(f"extra edge {(u, v)} violates the distance condition")
    k = len(extra_edges)
    us = [e[0] for e in extra_edges]
    vs = [e[1] for e in extra_edges]
    row = np.repeat(np.arange(tree.n), np.diff(tree.nbr_ptr))
    mask = row < tree.nbr_idx
    base_u = np.repeat(row[mask], tree.nbr_mult[mask])
    base_v = np.repeat(tree.nbr_idx[mask], tree.nbr_mult[mask])
    aug = MultiGraph.from_pairs(
        tree.n, np.concatenate([base_u, us]).astype(np.int64),
        np.concatenate([base_v, vs]).astype(np.int64)
    )
    b = count_nonbacktracking(aug, root, N)
    t_n = sum(1 for d in dist.values() if d <= N)
    return BoundReport(f"surplus N={N} k={k}", float(b), float((2 * k + 1) ** N * t_n), b)
