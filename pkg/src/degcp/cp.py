"""Exact continuous-time simulation of the degree-penalized contact process.

The event engine keeps one aggregated clock per infected vertex: healing at
rate 1 plus the total outgoing transmission rate (a per-vertex constant,
since per-edge rates do not depend on the state). The next event vertex is
drawn from a Fenwick tree over these weights, the action (heal vs. transmit,
and the transmission target) by a categorical split of the same uniform.
Transmissions onto already-infected vertices are no-ops, which reproduces the
Poisson-stream dynamics exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import MultiGraph
from .penalty import PenaltySpec
from .rng import UniformBuffer, as_generator
from .trees import ROOT, LazyTree

__all__ = [
    "SurvivalReport",
    "simulate_cp",
    "infestation_status",
    "infestation_threshold",
    "star_survival_experiment",
    "star_survival_trend",
    "two_state_occupation",
]

INV16E2 = 1.0 / (16.0 * math.e**2)


class Fenwick:
    """Fenwick tree over non-negative float weights with prefix sampling."""

    __slots__ = ("cap", "tree", "w")

    def __init__(self, cap: int):
        self.cap = 1
        while self.cap < cap:
            self.cap *= 2
        self.tree = [0.0] * (self.cap + 1)
        self.w = [0.0] * self.cap

    def set(self, i: int, value: float):
        delta = value - self.w[i]
        if delta == 0.0:
            return
        self.w[i] = value
        tree = self.tree
        j = i + 1
        cap = self.cap
        while j <= cap:
            tree[j] += delta
            j += j & (-j)

    def total(self) -> float:
        s = 0.0
        tree = self.tree
        j = self.cap
        while j:
            s += tree[j]
            j -= j & (-j)
        return s

    def find(self, x: float):
        """Largest prefix below ``x``: returns (index, remainder)."""
        idx = 0
        bit = self.cap
        tree = self.tree
        while bit:
            nxt = idx + bit
            if nxt <= self.cap and tree[nxt] < x:
                idx = nxt
                x -= tree[nxt]
            bit >>= 1
        if idx >= self.cap:  # fp overshoot guard
            idx = self.cap - 1
            x = self.w[idx] * 0.5
        return idx, x

    def grow(self, cap: int):
        old_w = self.w
        new = Fenwick(cap)
        for i, v in enumerate(old_w):
            if v:
                new.set(i, v)
        self.cap, self.tree, self.w = new.cap, new.tree, new.w


def _rate_structure(g: MultiGraph, p: PenaltySpec, include_loops: bool = False):
    """Flat per-directed-edge rates over (possibly loop-augmented) CSR rows.

    Returns ``(cum, out, base, col)``: cumulative rates over all directed
    edges in row-major order, the total outgoing rate per source, the
    cumulative offset at each row start, and the target of each entry.
    Sampling a target of ``u`` is ``col[searchsorted(cum, base[u] + x)]``
    for ``x`` uniform on ``[0, out[u])``. Loops (entering with multiplicity
    ``2 * loops(u)``, matching the degree convention) matter only for
    branching dynamics; the contact process ignores them.
    """
    row = np.repeat(np.arange(g.n), np.diff(g.nbr_ptr))
    col = g.nbr_idx
    mult = g.nbr_mult
    if include_loops and g.loops.any():
        lv = np.flatnonzero(g.loops)
        row = np.concatenate([row, lv])
        col = np.concatenate([col, lv])
        mult = np.concatenate([mult, 2 * g.loops[lv]])
        order = np.lexsort((col, row))
        row, col, mult = row[order], col[order], mult[order]
    deg = g.degrees.astype(np.float64)
    du = deg[row]
    dv = deg[col]
    if p.kind == "product":
        f = (du * dv) ** p.mu
    elif p.kind == "max":
        f = np.maximum(du, dv) ** p.mu
    elif p.kind == "monomial":
        f = p.a * du**p.mu * dv**p.nu
    else:
        f = np.full(du.shape, p.c)
    with np.errstate(divide="ignore", invalid="ignore"):
        rates = np.where(np.isfinite(f) & (f > 0), p.lam * mult / f, 0.0)
    cum = np.cumsum(rates)
    counts = np.zeros(g.n, dtype=np.int64)
    np.add.at(counts, row, 1)
    ptr = np.concatenate([[0], np.cumsum(counts)])
    base = np.zeros(g.n, dtype=np.float64)
    out = np.zeros(g.n, dtype=np.float64)
    lo = ptr[:-1]
    hi = ptr[1:]
    nz = hi > lo
    base[nz] = np.where(lo[nz] > 0, cum[lo[nz] - 1], 0.0)
    out[nz] = cum[hi[nz] - 1] - base[nz]
    return cum, out, base, col


@dataclass
class SurvivalReport:
    """Outcome of one contact-process run."""

    t_ext: float | None
    censored: bool
    horizon: float
    local_ext: dict = field(default_factory=dict)  # vertex -> time (None if censored)
    infestation_intervals: dict = field(default_factory=dict)  # center -> [(t0, t1)]
    n_events: dict = field(default_factory=dict)
    escaped: bool = False
    t_escape: float | None = None

    def to_json_dict(self):
        return {
            "t_ext": self.t_ext,
            "censored": self.censored,
            "local_ext": {str(k): v for k, v in sorted(self.local_ext.items())},
            "infestation_intervals": {
                str(k): [list(iv) for iv in v]
                for k, v in sorted(self.infestation_intervals.items())
            },
        }


def infestation_threshold(r_rate: float, K: int) -> int:
    """Leaf count required for a degree-K star to count as infested."""
    if r_rate <= 0:
        raise ValueError("r_rate > 0 required")
    return max(1, math.ceil(r_rate * K * INV16E2))


def infestation_status(infected, star_center, leaves, r_rate: float) -> bool:
    """True iff at least ceil(r_rate*K/(16 e^2)) of the star's leaves are infected."""
    del star_center  # the center does not enter the count
    K = len(leaves)
    count = sum(1 for leaf in leaves if leaf in infected)
    return count >= infestation_threshold(r_rate, K)


def simulate_cp(
    graph,
    p: PenaltySpec,
    xi0,
    horizon: float,
    rng,
    down_directed: bool = False,
    stars=None,
    trace=None,
) -> SurvivalReport:
    """Run the contact process until extinction or ``horizon``.

    ``graph`` is a MultiGraph or a LazyTree (expanded on demand as the
    infection spreads; reaching a ``max_depth`` vertex flags the run as
    escaped and stops it). ``stars`` is an optional list of
    ``(center, leaves, threshold)`` whose infestation intervals are recorded.
    ``trace``, if a list, receives ``(time, event, vertex, aux)`` rows.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    xi0 = list(xi0)
    if not xi0:
        raise ValueError("xi0 must contain at least one vertex")
    if isinstance(graph, LazyTree):
        return _simulate_cp_tree(graph, p, xi0, horizon, rng, down_directed, trace)
    if down_directed:
        raise ValueError("down_directed requires a LazyTree")
    return _simulate_cp_graph(graph, p, xi0, horizon, rng, stars, trace)


def _simulate_cp_graph(g, p, xi0, horizon, rng, stars, trace):
    rng = as_generator(rng)
    uni = UniformBuffer(rng)
    cum, out, base, col = _rate_structure(g, p)

    fen = Fenwick(max(2, g.n))
    infected = bytearray(g.n)
    n_inf = 0
    for v in xi0:
        v = int(v)
        if not infected[v]:
            infected[v] = 1
            n_inf += 1
            fen.set(v, 1.0 + out[v])

    # star infestation bookkeeping
    leaf_star = {}
    star_count = {}
    star_state = {}
    star_iv = {}
    if stars:
        for center, leaves, threshold in stars:
            star_iv[center] = []
            star_count[center] = sum(1 for x in leaves if infected[x])
            star_state[center] = (center, threshold)
            for leaf in leaves:
                leaf_star[leaf] = center
            if star_count[center] >= threshold:
                star_iv[center].append([0.0, None])

    last_heal = {}
    n_heal = n_infect = n_noop = 0
    t = 0.0
    log = math.log
    find = fen.find
    fset = fen.set

    while n_inf:
        total = fen.total()
        t += -log(1.0 - uni()) / total
        if t > horizon:
            t = horizon
            break
        v, rem = find(uni() * total)
        if not infected[v]:
            # fp residue; weight should be zero here
            continue
        if rem < 1.0:
            infected[v] = 0
            n_inf -= 1
            fset(v, 0.0)
            n_heal += 1
            last_heal[v] = t
            if trace is not None:
                trace.append((t, "heal", v, -1))
            if leaf_star and v in leaf_star:
                _star_update(v, -1, t, leaf_star, star_count, star_state, star_iv)
        else:
            j = int(np.searchsorted(cum, base[v] + (rem - 1.0), side="right"))
            w = int(col[j])
            if infected[w]:
                n_noop += 1
                continue
            infected[w] = 1
            n_inf += 1
            fset(w, 1.0 + out[w])
            n_infect += 1
            if trace is not None:
                trace.append((t, "infect", w, v))
            if leaf_star and w in leaf_star:
                _star_update(w, +1, t, leaf_star, star_count, star_state, star_iv)

    censored = n_inf > 0
    t_end = horizon if censored else t
    for center, ivs in star_iv.items():
        if ivs and ivs[-1][1] is None:
            ivs[-1][1] = t_end
    local_ext = {v: tm for v, tm in last_heal.items() if not infected[v]}
    for v in range(g.n):
        if infected[v]:
            local_ext[v] = None
    return SurvivalReport(
        t_ext=None if censored else t,
        censored=censored,
        horizon=horizon,
        local_ext=local_ext,
        infestation_intervals={c: [tuple(iv) for iv in ivs] for c, ivs in star_iv.items()},
        n_events={"heal": n_heal, "infect": n_infect, "noop": n_noop},
    )


def _star_update(leaf, delta, t, leaf_star, star_count, star_state, star_iv):
    center = leaf_star[leaf]
    before = star_count[center]
    star_count[center] = before + delta
    _, threshold = star_state[center]
    ivs = star_iv[center]
    if before < threshold <= before + delta:
        ivs.append([t, None])
    elif before + delta < threshold <= before:
        ivs[-1][1] = t


def _simulate_cp_tree(tree, p, xi0, horizon, rng, down_directed, trace):
    rng = as_generator(rng)
    uni = UniformBuffer(rng)

    targets = {}  # v -> (ids list, cum list, out)

    def row(v):
        got = targets.get(v)
        if got is not None:
            return got
        dv = tree.degree(v)
        ids = []
        rates = []
        if not tree.is_boundary(v):
            for c in tree.expand(v):
                ids.append(c)
                rates.append(p.rate(1, dv, tree.degree(c)))
        if not down_directed and v != ROOT:
            par = tree.parent[v]
            ids.append(par)
            rates.append(p.rate(1, dv, tree.degree(par)))
        cumr = []
        s = 0.0
        for r in rates:
            s += r
            cumr.append(s)
        got = (ids, cumr, s)
        targets[v] = got
        return got

    fen = Fenwick(1024)
    infected = {}
    n_inf = 0
    escaped = False
    t_escape = None
    for v in xi0:
        v = int(v)
        if v >= tree.n:
            raise ValueError("xi0 vertex not materialized")
        if not infected.get(v):
            infected[v] = True
            n_inf += 1
            _, _, out_v = row(v)
            if v >= fen.cap:
                fen.grow(2 * (v + 1))
            fen.set(v, 1.0 + out_v)
            if tree.is_boundary(v):
                escaped = True
                t_escape = 0.0

    last_heal = {}
    n_heal = n_infect = n_noop = 0
    t = 0.0
    censored = False

    while n_inf and not escaped:
        total = fen.total()
        t += -math.log(1.0 - uni()) / total
        if t > horizon:
            t = horizon
            censored = True
            break
        v, rem = fen.find(uni() * total)
        if not infected.get(v):
            continue
        ids, cumr, out_v = row(v)
        if rem < 1.0:
            infected[v] = False
            n_inf -= 1
            fen.set(v, 0.0)
            n_heal += 1
            last_heal[v] = t
            if trace is not None:
                trace.append((t, "heal", v, -1))
        else:
            x = rem - 1.0
            j = 0
            while cumr[j] <= x:
                j += 1
            w = ids[j]
            if infected.get(w):
                n_noop += 1
                continue
            infected[w] = True
            n_inf += 1
            _, _, out_w = row(w)
            if w >= fen.cap:
                fen.grow(2 * (w + 1))
            fen.set(w, 1.0 + out_w)
            n_infect += 1
            if trace is not None:
                trace.append((t, "infect", w, v))
            if tree.is_boundary(w):
                escaped = True
                t_escape = t

    censored = censored or n_inf > 0
    local_ext = {v: tm for v, tm in last_heal.items() if not infected.get(v)}
    for v, on in infected.items():
        if on:
            local_ext[v] = None
    return SurvivalReport(
        t_ext=None if censored else t,
        censored=censored,
        horizon=horizon,
        local_ext=local_ext,
        infestation_intervals={},
        n_events={"heal": n_heal, "infect": n_infect, "noop": n_noop},
        escaped=escaped,
        t_escape=t_escape,
    )


# -- star experiments --------------------------------------------------------


@dataclass
class StarSurvivalResult:
    K: int
    times: np.ndarray
    censored: np.ndarray
    median: float
    mean: float
    infested_fraction: float
    threshold: int


def star_survival_experiment(
    K: int, p: PenaltySpec, reps: int, horizon: float, rng, start: str = "center"
) -> StarSurvivalResult:
    """Survival statistics of the contact process on a degree-K star.

    ``start`` is ``"center"`` (only the center infected) or ``"leaves"``
    (ceil(lam K^(1-mu)/(8e)) leaves infected, the conditioning used by the
    maintenance estimates). Censored runs report the horizon as their time.
    """
    from .graphs import build_star

    rng = as_generator(rng)
    g = build_star(K)
    center = 0
    leaves = list(range(1, K + 1))
    r_rate = p.rate(1, K, 1)
    threshold = infestation_threshold(r_rate, K) if r_rate > 0 else 1
    mu_eff = p.mu if p.kind in ("product", "max") else 0.0
    if start == "center":
        xi0 = [center]
    elif start == "leaves":
        m = max(1, math.ceil(p.lam * K ** (1.0 - mu_eff) / (8 * math.e)))
        xi0 = leaves[:m]
    else:
        raise ValueError("start must be 'center' or 'leaves'")

    times = np.empty(reps)
    censored = np.empty(reps, dtype=bool)
    infested_time = 0.0
    total_time = 0.0
    stars = [(center, leaves, threshold)]
    for i in range(reps):
        rep = simulate_cp(g, p, xi0, horizon, rng, stars=stars)
        censored[i] = rep.censored
        times[i] = horizon if rep.censored else rep.t_ext
        total_time += times[i]
        for t0, t1 in rep.infestation_intervals.get(center, []):
            infested_time += (t1 - t0)
    return StarSurvivalResult(
        K=K,
        times=times,
        censored=censored,
        median=float(np.median(times)),
        mean=float(times.mean()),
        infested_fraction=infested_time / total_time if total_time else 0.0,
        threshold=threshold,
    )


def star_survival_median(
    K: int, p: PenaltySpec, reps: int, rng, start: str = "center",
    quantile: float = 0.5, t_cap: float = 1e9,
):
    """Exact sample quantile of the star extinction time over ``reps`` runs.

    The contact process on a star is a chain in (center state, number of
    infected leaves); all replicas are advanced together as numpy lanes and
    the run stops as soon as the requested quantile of death times is an
    observed statistic (the surviving lanes cannot change it). Returns
    ``(quantile_value, death_times_with_inf_for_survivors)``.
    """
    rng = as_generator(rng)
    r = p.rate(1, K, 1)
    if r <= 0:
        raise ValueError("star chain needs a positive leaf rate")
    mu_eff = p.mu if p.kind in ("product", "max") else 0.0
    c = np.ones(reps, dtype=bool)
    L = np.zeros(reps, dtype=np.int64)
    if start == "leaves":
        c[:] = False
        L[:] = max(1, math.ceil(p.lam * K ** (1.0 - mu_eff) / (8 * math.e)))
    elif start != "center":
        raise ValueError("start must be 'center' or 'leaves'")
    t = np.zeros(reps)
    death = np.full(reps, np.inf)
    alive = np.ones(reps, dtype=bool)
    need = int(math.floor(quantile * reps)) + 1

    idx = np.arange(reps)
    while alive.any():
        ai = idx[alive]
        cc = c[ai]
        ll = L[ai].astype(np.float64)
        r1 = cc.astype(np.float64)  # center heals
        r2 = np.where(cc, (K - ll) * r, 0.0)  # center infects a leaf
        r3 = ll  # a leaf heals
        r4 = np.where(cc, 0.0, ll * r)  # a leaf infects the center
        tot = r1 + r2 + r3 + r4
        t[ai] += rng.exponential(1.0, ai.size) / tot
        u = rng.random(ai.size) * tot
        pick_heal_c = u < r1
        pick_inf_l = (~pick_heal_c) & (u < r1 + r2)
        pick_heal_l = (~pick_heal_c) & (~pick_inf_l) & (u < r1 + r2 + r3)
        pick_inf_c = (~pick_heal_c) & (~pick_inf_l) & (~pick_heal_l)
        c[ai[pick_heal_c]] = False
        L[ai[pick_inf_l]] += 1
        L[ai[pick_heal_l]] -= 1
        c[ai[pick_inf_c]] = True
        dead = (~c[ai]) & (L[ai] == 0)
        over = t[ai] >= t_cap
        if dead.any() or over.any():
            done = ai[dead | over]
            death[done] = t[done]
            alive[done] = False
        finite = np.isfinite(death)
        if finite.sum() >= need:
            # the need-th smallest death is the exact sample quantile once
            # every still-running lane's clock has passed it (lanes advance
            # one event at a time, so their clocks lag heterogeneously)
            q_cand = np.partition(death[finite], need - 1)[need - 1]
            if not alive.any() or t[alive].min() >= q_cand:
                break
    qv = float(np.quantile(np.where(np.isfinite(death), death, np.inf), quantile))
    return qv, death


def star_survival_trend(Ks, p: PenaltySpec, reps: int, horizon: float, rng):
    """log median survival against K^(1-2 mu), with a least-squares fit.

    Medians come from the replica-vectorized star chain (exact sample
    medians, no horizon bias); ``horizon`` only caps pathological lanes.
    Returns a dict with the per-K medians, regression points, slope,
    intercept and R^2.
    """
    rng = as_generator(rng)
    mu_eff = p.mu if p.kind in ("product", "max") else 0.0
    medians = [star_survival_median(K, p, reps, rng, t_cap=horizon)[0] for K in Ks]
    xs = np.array([K ** (1.0 - 2.0 * mu_eff) for K in Ks])
    ys = np.array([math.log(m) for m in medians])
    slope, intercept, r2 = _linfit(xs, ys)
    return {
        "medians": medians,
        "x": xs,
        "log_median": ys,
        "slope": slope,
        "intercept": intercept,
        "r2": r2,
    }


def _linfit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), r2


def two_state_occupation(q01: float, q10: float, T: float, rng, start: int = 0):
    """Occupation fraction of state 1 for the two-state chain 0 <-> 1.

    Exact jump-chain simulation over [0, T]; the long-run fraction tends to
    q01/(q01+q10). Returns ``(fraction, n_jumps)``.
    """
    if q01 <= 0 or q10 <= 0:
        raise ValueError("rates must be positive")
    rng = as_generator(rng)
    t = 0.0
    state = start
    time1 = 0.0
    jumps = 0
    while t < T:
        rate = q01 if state == 0 else q10
        dt = rng.exponential(1.0 / rate)
        seg = min(dt, T - t)
        if state == 1:
            time1 += seg
        t += dt
        state ^= 1
        jumps += 1
    return time1 / T, jumps
