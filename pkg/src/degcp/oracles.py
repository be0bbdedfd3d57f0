"""Self-contained oracle battery: every check recomputes its expected value
from an independent route (hand enumeration, closed forms, brute force, or
a cross-implementation) and compares at 3-sigma or exactly.

These are sized to run in well under a minute; the pytest suite runs the
full-size versions.
"""

from __future__ import annotations

import math

import numpy as np

from .brw import simulate_brw, simulate_gbrw
from .cp import simulate_cp, two_state_occupation
from .degrees import (
    binomial_thinning_pmf,
    hash_transform,
    power_law_pmf,
    size_biased,
    uniform_pmf,
)
from .genealogy import (
    alpha_star,
    count_nonbacktracking,
    erlang_tail,
    verify_backtrack_bounds,
)
from .graphs import (
    MultiGraph,
    build_configuration_model,
    build_star,
    complete_graph,
    cycle_graph,
    path_graph,
)
from .graphical import build_graphical_rep, run_cp_from_rep
from .penalty import PenaltySpec
from .renorm import ConeConfig, op_cluster, peierls_bound, peierls_partial_sums
from .rng import stream
from .structure import h_h1, hk_exponent, k_core
from .trees import sample_gw_tree

__all__ = ["run_all", "ORACLES"]


def _ok(cond, detail=""):
    return bool(cond), detail


def oracle_cm_degrees(seed):
    rng = stream(seed, 1)
    deg = rng.integers(0, 8, size=60)
    if deg.sum() % 2:
        deg[-1] += 1
    g = build_configuration_model(deg, rng)
    return _ok(
        np.array_equal(g.degrees, deg) and g.degree_identity_holds(),
        "configuration-model degrees reproduce the sequence",
    )


def oracle_size_biased(seed):
    pmf = uniform_pmf([1, 2])
    sb = size_biased(pmf)
    sh = size_biased(pmf, shifted=True)
    ok = (
        abs(sb.pmf(1) - 1 / 3) < 1e-12
        and abs(sb.pmf(2) - 2 / 3) < 1e-12
        and abs(sh.pmf(0) - 1 / 3) < 1e-12
        and abs(sh.pmf(1) - 2 / 3) < 1e-12
    )
    return _ok(ok, "size-biased masses of uniform{1,2}")


def oracle_hash_dominance(seed):
    pmf = power_law_pmf(3.5, 1, 2000)
    out, z0, Z = hash_transform(pmf, 0.1)
    if not Z < 7 / 8:
        return _ok(False, f"Z={Z}")
    for z in range(0, 2001):
        if out.tail_gt(z) < pmf.tail_gt(z) - 1e-12:
            return _ok(False, f"dominance fails at z={z}")
    return _ok(True, f"z0={z0}, Z={Z:.4f}")


def oracle_gw_mean_growth(seed):
    pmf = uniform_pmf([1, 2])
    N = 5
    reps = 2000
    sizes = np.empty(reps)
    for i in range(reps):
        t = sample_gw_tree(pmf, N, int(stream(seed, 2, i).integers(2**62)))
        sizes[i] = t.generation_sizes(N)[-1]
    want = 1.5**N
    se = sizes.std(ddof=1) / math.sqrt(reps)
    return _ok(abs(sizes.mean() - want) <= 3 * se + 1e-9,
               f"mean |Gen_5| = {sizes.mean():.3f}, want {want:.3f}")


def oracle_cp_pure_death(seed):
    g = path_graph(2)
    p = PenaltySpec.product(0.0, 1.0)
    reps = 4000
    rng = stream(seed, 3)
    ts = np.empty(reps)
    for i in range(reps):
        ts[i] = simulate_cp(g, p, [0], 50.0, rng).t_ext
    se = ts.std(ddof=1) / math.sqrt(reps)
    return _ok(abs(ts.mean() - 1.0) <= 3 * se, f"mean T_ext = {ts.mean():.4f}")


def oracle_cp_harmonic(seed):
    m = 5
    g = MultiGraph.from_edges(m, [])
    p = PenaltySpec.product(0.0, 1.0)
    reps = 4000
    rng = stream(seed, 4)
    ts = np.empty(reps)
    for i in range(reps):
        ts[i] = simulate_cp(g, p, range(m), 80.0, rng).t_ext
    want = sum(1.0 / j for j in range(1, m + 1))
    se = ts.std(ddof=1) / math.sqrt(reps)
    return _ok(abs(ts.mean() - want) <= 3 * se, f"mean {ts.mean():.3f} want {want:.3f}")


def oracle_gbrw_first_birth(seed):
    g = path_graph(2)
    p = PenaltySpec.max_(0.5, 1.0)
    r = p.rate(1, 1, 1)
    reps = 20000
    rng = stream(seed, 5)
    zs = np.empty(reps)
    for i in range(reps):
        res = simulate_gbrw(g, p, [0], 60.0, rng, path_len_cap=1)
        zs[i] = res.births.get((0, 1), 0)
    se = zs.std(ddof=1) / math.sqrt(reps)
    return _ok(abs(zs.mean() - r) <= 3 * se, f"E[Z((a,b))] = {zs.mean():.4f} want {r}")


def oracle_two_engines(seed):
    g = path_graph(4)
    p = PenaltySpec.max_(0.8, 0.5)
    reps = 6000
    rng = stream(seed, 6)
    hits_a = 0
    hits_b = 0
    for i in range(reps):
        rep = simulate_cp(g, p, [0], 1.0, rng)
        alive = {v for v, tm in rep.local_ext.items() if tm is None}
        hits_a += 3 in alive
        gr = build_graphical_rep(g, p, 1.0, rng)
        hits_b += 3 in run_cp_from_rep(gr, [0]).infected_at(1.0)
    pa, pb = hits_a / reps, hits_b / reps
    se = math.sqrt((pa * (1 - pa) + pb * (1 - pb)) / reps + 1e-12)
    return _ok(abs(pa - pb) <= 3 * se, f"P(end infected): {pa:.4f} vs {pb:.4f}")


def oracle_brw_decay(seed):
    g = path_graph(3)
    p = PenaltySpec.product(0.0, 1.0)
    reps = 4000
    rng = stream(seed, 7)
    alive = np.empty(reps)
    for i in range(reps):
        res = simulate_brw(g, p, {1: 3}, 1.0, rng, track_trace=True)
        alive[i] = res.counts_at(3, [1.0])[0]
    want = 3 * math.exp(-1.0)
    se = alive.std(ddof=1) / math.sqrt(reps)
    return _ok(abs(alive.mean() - want) <= 3 * se, f"E|x_1| = {alive.mean():.3f}")


def oracle_backtrack_bounds(seed):
    rng = stream(seed, 8)
    for trial in range(20):
        n = int(rng.integers(3, 7))
        m = int(rng.integers(n - 1, 2 * n))
        us = rng.integers(0, n, size=m)
        vs = rng.integers(0, n, size=m)
        g = MultiGraph.from_pairs(n, us, vs)
        for length in range(0, 4):
            pi = _random_path(g, rng, length)
            if pi is None:
                continue
            for rep in verify_backtrack_bounds(g, pi, 0.3, 0.5, 2):
                if not rep.holds:
                    return _ok(False, f"violation on trial {trial}: {rep}")
    return _ok(True, "no violations on 20 random multigraphs")


def _random_path(g, rng, length):
    for _ in range(30):
        v = int(rng.integers(g.n))
        pi = [v]
        ok = True
        for _ in range(length):
            ids, _m = g.neighbors(pi[-1])
            if ids.size == 0:
                ok = False
                break
            pi.append(int(ids[int(rng.integers(ids.size))]))
        if ok:
            return tuple(pi)
    return None


def oracle_nonbacktracking_counts(seed):
    ok = (
        count_nonbacktracking(path_graph(3), 0, 2) == 3
        and count_nonbacktracking(build_star(3), 0, 2) == 4
        and count_nonbacktracking(cycle_graph(4), 0, 3) == 7
    )
    return _ok(ok, "path/star/cycle label counts")


def oracle_alpha_star(seed):
    a = alpha_star(1 / (2 * math.e))
    resid = 1 / a - 1 + math.log(a) - 1.0
    mono = alpha_star(0.1) < alpha_star(0.2) < alpha_star(0.4)
    return _ok(abs(resid) < 1e-8 and mono, f"alpha*={a:.6f}")


def oracle_erlang(seed):
    return _ok(
        abs(erlang_tail(2, 1.0) - 2 * math.exp(-1)) < 1e-12
        and erlang_tail(1, 0.7) == math.exp(-0.7),
        "partial Poisson sums",
    )


def oracle_kcore(seed):
    k4, _ = k_core(complete_graph(4), 3)
    tree, _ = k_core(path_graph(6), 2)
    c5p = MultiGraph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5)])
    core, kept = k_core(c5p, 2)
    return _ok(k4.n == 4 and tree.n == 0 and core.n == 5 and 5 not in kept,
               "K4 / tree / C5+pendant cores")


def oracle_h_h1(seed):
    from .degrees import delta_pmf

    pmf = delta_pmf(3)
    for p in (0.2, 0.7):
        h, h1 = h_h1(pmf, p, 3)
        if abs(h - 3 * p**3) > 1e-12 or abs(h1 - p**3) > 1e-12:
            return _ok(False, f"p={p}: h={h}, h1={h1}")
    return _ok(True, "Bin(3, p) closed form")


def oracle_thinning(seed):
    pmf = uniform_pmf([1, 3])
    out, q = binomial_thinning_pmf(pmf, 1)
    return _ok(
        abs(q - 0.25) < 1e-12 and abs(out.pmf(0) - 0.75) < 1e-12
        and abs(out.pmf(1) - 0.25) < 1e-12,
        f"q_M={q}",
    )


def oracle_two_state(seed):
    frac, _ = two_state_occupation(1.0, 0.5, 4000.0, stream(seed, 9))
    return _ok(abs(frac - 2 / 3) < 0.02, f"occupation {frac:.4f} want 2/3")


def oracle_peierls(seed):
    exact = peierls_bound((1 / 15) ** 4)
    partial = peierls_partial_sums((1 / 15) ** 4, 60)[-1]
    return _ok(abs(exact - 0.25) < 1e-12 and abs(partial - exact) < 1e-12,
               f"bound={exact}")


def oracle_cone_methods(seed):
    for i, delta in enumerate((0.0, 0.3, 1.0)):
        cfg = ConeConfig(delta, 12)
        a = op_cluster(cfg, stream(seed, 10, i))
        b = op_cluster(cfg, stream(seed, 10, i), method="reachability")
        if a.size != b.size or a.y_max != b.y_max:
            return _ok(False, f"delta={delta}: {a.size} vs {b.size}")
    return _ok(True, "recursion equals reachability")


def oracle_hk(seed):
    ok = (
        hk_exponent(1, 3.5) == 0.0
        and abs(hk_exponent(4, 3.5) - 1.0) < 1e-12
        and all(
            hk_exponent(k, 3.3) + hk_exponent(l, 3.3) <= hk_exponent(k + l, 3.3) + 1e-12
            for k in range(1, 6)
            for l in range(1, 6)
        )
    )
    return _ok(ok, "moment exponents and superadditivity")


ORACLES = [
    ("cm_degrees", oracle_cm_degrees),
    ("size_biased", oracle_size_biased),
    ("hash_dominance", oracle_hash_dominance),
    ("gw_mean_growth", oracle_gw_mean_growth),
    ("cp_pure_death", oracle_cp_pure_death),
    ("cp_harmonic", oracle_cp_harmonic),
    ("gbrw_first_birth", oracle_gbrw_first_birth),
    ("two_engines", oracle_two_engines),
    ("brw_decay", oracle_brw_decay),
    ("backtrack_bounds", oracle_backtrack_bounds),
    ("nonbacktracking_counts", oracle_nonbacktracking_counts),
    ("alpha_star", oracle_alpha_star),
    ("erlang", oracle_erlang),
    ("kcore", oracle_kcore),
    ("h_h1", oracle_h_h1),
    ("thinning", oracle_thinning),
    ("two_state", oracle_two_state),
    ("peierls", oracle_peierls),
    ("cone_methods", oracle_cone_methods),
    ("hk", oracle_hk),
]


def run_all(seed: int = 0):
    """Run every oracle; returns [(name, ok, detail)]."""
    out = []
    for name, fn in ORACLES:
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # an oracle crashing is a failure, not an error
            ok, detail = False, f"exception: {exc!r}"
        out.append((name, ok, detail))
    return out
