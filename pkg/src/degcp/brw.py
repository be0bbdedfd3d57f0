"""Branching random walks: plain, genealogic, and the coupling with the
contact process.

Particles die at rate 1; a particle at ``u`` reproduces onto each neighbor
``v`` at the same penalized rate the contact process uses. The genealogic
variant tracks, per particle, the vertex sequence of its ancestry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cp import Fenwick, _rate_structure
from .graphs import MultiGraph
from .penalty import PenaltySpec
from .rng import UniformBuffer, as_generator

__all__ = [
    "BRWResult",
    "simulate_brw",
    "GBRWResult",
    "simulate_gbrw",
    "coupled_cp_brw",
    "martingale_series",
    "martingale_drift",
]


@dataclass
class BRWResult:
    t_ext: float | None
    censored: bool
    cap_hit: bool  # particle cap reached: survival certified to the horizon
    horizon: float
    final_counts: dict
    n_events: dict
    trace_times: np.ndarray | None = None  # event times (births and deaths)
    trace_vertex: np.ndarray | None = None
    trace_delta: np.ndarray | None = None  # +1 birth, -1 death

    def counts_at(self, n0: int, times):
        """Total particle number at each requested time, from the trace.

        ``n0`` is the initial particle count.
        """
        if self.trace_times is None:
            raise ValueError("run with track_trace=True")
        sizes = np.concatenate([[n0], n0 + np.cumsum(self.trace_delta)])
        out = []
        for t in times:
            j = int(np.searchsorted(self.trace_times, t, side="right"))
            out.append(int(sizes[j]))
        return out


def simulate_brw(
    g: MultiGraph,
    p: PenaltySpec,
    x0,
    horizon: float,
    rng,
    cap: int = 10**6,
    track_trace: bool = False,
) -> BRWResult:
    """Exact branching random walk on ``g`` until extinction, horizon or cap.

    ``x0`` maps vertex -> initial particle count (or an iterable of vertices,
    one particle each). Reaching ``cap`` total particles stops the run with
    ``cap_hit=True``: survival is certified to the horizon rather than
    silently truncated.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    rng = as_generator(rng)
    uni = UniformBuffer(rng)
    cum, out, base, col = _rate_structure(g, p, include_loops=True)

    counts = {}
    if isinstance(x0, dict):
        for v, c in x0.items():
            if c > 0:
                counts[int(v)] = int(c)
    else:
        for v in x0:
            counts[int(v)] = counts.get(int(v), 0) + 1
    total_particles = sum(counts.values())
    if total_particles == 0:
        raise ValueError("x0 must contain at least one particle")

    fen = Fenwick(max(2, g.n))
    for v, c in counts.items():
        fen.set(v, c * (1.0 + out[v]))

    tr_t, tr_v, tr_d = ([], [], []) if track_trace else (None, None, None)
    n_death = n_birth = 0
    t = 0.0
    cap_hit = False
    censored = False

    while total_particles:
        if total_particles >= cap:
            cap_hit = True
            censored = True
            break
        total = fen.total()
        t += -math.log(1.0 - uni()) / total
        if t > horizon:
            censored = True
            t = horizon
            break
        v, rem = fen.find(uni() * total)
        cv = counts.get(v, 0)
        if cv == 0:
            continue
        if rem < cv:  # death of one particle at v
            cv -= 1
            total_particles -= 1
            n_death += 1
            if cv:
                counts[v] = cv
            else:
                del counts[v]
            fen.set(v, cv * (1.0 + out[v]))
            if tr_t is not None:
                tr_t.append(t)
                tr_v.append(v)
                tr_d.append(-1)
        else:
            x = (rem - cv) / cv  # uniform on [0, out[v])
            j = int(np.searchsorted(cum, base[v] + x, side="right"))
            w = int(col[j])
            cw = counts.get(w, 0) + 1
            counts[w] = cw
            total_particles += 1
            n_birth += 1
            fen.set(w, cw * (1.0 + out[w]))
            if tr_t is not None:
                tr_t.append(t)
                tr_v.append(w)
                tr_d.append(+1)

    return BRWResult(
        t_ext=None if censored else t,
        censored=censored,
        cap_hit=cap_hit,
        horizon=horizon,
        final_counts=dict(counts),
        n_events={"death": n_death, "birth": n_birth},
        trace_times=None if tr_t is None else np.array(tr_t),
        trace_vertex=None if tr_v is None else np.array(tr_v, dtype=np.int64),
        trace_delta=None if tr_d is None else np.array(tr_d, dtype=np.int64),
    )


# -- genealogic variant -------------------------------------------------------


@dataclass
class GBRWResult:
    births: dict  # label tuple -> number of particles with that label ever born
    overflow_births: int  # births whose label exceeded the length cap
    snapshots: list  # per requested time: dict label -> count
    overflow_snapshots: list  # per requested time: dict vertex -> pooled count
    t_ext: float | None
    censored: bool

    def total_births(self) -> int:
        return sum(self.births.values()) + self.overflow_births

    def projection_at(self, j: int):
        """Per-vertex particle counts at snapshot ``j`` (labels + overflow)."""
        proj = {}
        for lab, c in self.snapshots[j].items():
            proj[lab[-1]] = proj.get(lab[-1], 0) + c
        for v, c in self.overflow_snapshots[j].items():
            proj[v] = proj.get(v, 0) + c
        return proj


def simulate_gbrw(
    g: MultiGraph,
    p: PenaltySpec,
    x0,
    horizon: float,
    rng,
    path_len_cap: int = 8,
    snapshot_times=(),
) -> GBRWResult:
    """Branching random walk with ancestry labels, tracked exactly.

    A particle's label is the vertex sequence of its ancestral line; a birth
    extends the parent's label by the target vertex. Labels longer than
    ``path_len_cap`` are pooled per end-vertex into an overflow bucket whose
    particles still live, die and reproduce (so the per-vertex projection
    stays exact); their births are counted in ``overflow_births``.
    """
    if path_len_cap < 0:
        raise ValueError("path_len_cap >= 0 required")
    rng = as_generator(rng)
    uni = UniformBuffer(rng)
    cum, out, base, col = _rate_structure(g, p, include_loops=True)

    counts = {}
    births = {}
    if isinstance(x0, dict):
        items = x0.items()
    else:
        merged = {}
        for v in x0:
            merged[int(v)] = merged.get(int(v), 0) + 1
        items = merged.items()
    for v, c in items:
        if c > 0:
            counts[(int(v),)] = int(c)
            births[(int(v),)] = int(c)

    snap_times = sorted(snapshot_times)
    snaps = []
    over_snaps = []
    next_snap = 0
    overflow_births = 0

    def end_of(key):
        return key[1] if key[0] is None else key[-1]

    def weight(key, c):
        return c * (1.0 + out[end_of(key)])

    t = 0.0
    censored = False
    while True:
        total_particles = sum(counts.values())
        total = sum(weight(k, c) for k, c in counts.items())
        if total_particles == 0:
            break
        dt = -math.log(1.0 - uni()) / total
        # emit snapshots crossed by this waiting time
        while next_snap < len(snap_times) and t + dt > snap_times[next_snap]:
            snaps.append({k: c for k, c in counts.items() if k[0] is not None})
            over_snaps.append({end_of(k): c for k, c in counts.items() if k[0] is None})
            next_snap += 1
        t += dt
        if t > horizon:
            censored = True
            break
        x = uni() * total
        key = None
        for k, c in counts.items():
            wgt = weight(k, c)
            if x < wgt:
                key = k
                rem = x
                break
            x -= wgt
        if key is None:  # fp residue
            continue
        c = counts[key]
        if rem < c:  # death
            if c == 1:
                del counts[key]
            else:
                counts[key] = c - 1
        else:
            xx = (rem - c) / c
            v = end_of(key)
            j = int(np.searchsorted(cum, base[v] + xx, side="right"))
            w = int(col[j])
            if key[0] is None or len(key) - 1 + 1 > path_len_cap:
                child = (None, w)
                overflow_births += 1
            else:
                child = key + (w,)
                births[child] = births.get(child, 0) + 1
            counts[child] = counts.get(child, 0) + 1

    while next_snap < len(snap_times):
        snaps.append({k: c for k, c in counts.items() if k[0] is not None})
        over_snaps.append({end_of(k): c for k, c in counts.items() if k[0] is None})
        next_snap += 1

    return GBRWResult(
        births=births,
        overflow_births=overflow_births,
        snapshots=snaps,
        overflow_snapshots=over_snaps,
        t_ext=None if censored else t,
        censored=censored,
    )


# -- coupled CP/BRW run --------------------------------------------------------


def coupled_cp_brw(g: MultiGraph, p: PenaltySpec, xi0, horizon: float, rng):
    """Joint run in which the contact process rides designated BRW particles.

    Each CP-infected vertex owns one designated particle. A death removes a
    uniformly chosen particle; if it was designated the vertex heals. A birth
    from a designated particle infects a susceptible target (the newborn
    becomes its designated particle). Both marginals are exact and the
    inclusion ``infected set <= occupied set`` holds pointwise; the run
    asserts it after every event.

    Returns ``(cp_report_dict, brw_alive, containment_ok)``.
    """
    rng = as_generator(rng)
    uni = UniformBuffer(rng)
    cum, out, base, col = _rate_structure(g, p, include_loops=True)

    counts = {}
    designated = set()
    for v in xi0:
        v = int(v)
        counts[v] = counts.get(v, 0) + 1
        designated.add(v)
    fen = Fenwick(max(2, g.n))
    for v, c in counts.items():
        fen.set(v, c * (1.0 + out[v]))

    t = 0.0
    containment_ok = True
    cp_t_ext = None
    total_particles = sum(counts.values())
    while total_particles and t <= horizon:
        total = fen.total()
        t += -math.log(1.0 - uni()) / total
        if t > horizon:
            break
        v, rem = fen.find(uni() * total)
        cv = counts.get(v, 0)
        if cv == 0:
            continue
        if rem < cv:
            # the dying particle is the designated one with prob 1/cv;
            # reuse the remainder, uniform on [0, cv)
            dies_designated = (v in designated) and rem < 1.0
            cv -= 1
            total_particles -= 1
            if cv:
                counts[v] = cv
            else:
                del counts[v]
            fen.set(v, cv * (1.0 + out[v]))
            if dies_designated:
                designated.discard(v)
        else:
            x = (rem - cv) / cv
            j = int(np.searchsorted(cum, base[v] + x, side="right"))
            w = int(col[j])
            birth_from_designated = (v in designated) and uni() * cv < 1.0
            cw = counts.get(w, 0) + 1
            counts[w] = cw
            total_particles += 1
            fen.set(w, cw * (1.0 + out[w]))
            if birth_from_designated and w not in designated:
                designated.add(w)
        if designated and cp_t_ext is None:
            for u in designated:
                if counts.get(u, 0) == 0:
                    containment_ok = False
        if not designated and cp_t_ext is None:
            cp_t_ext = t

    return (
        {"t_ext": cp_t_ext, "censored": cp_t_ext is None and bool(designated)},
        bool(total_particles),
        containment_ok,
    )


# -- weighted particle counts ---------------------------------------------------


def martingale_series(result: BRWResult, degrees, alpha: float, x0):
    """M_t = sum_v x_t(v) d_v^alpha at every event time of a traced run.

    Returns ``(times, values)`` with ``times[0] = 0`` and the initial value
    first. Vertices of degree zero contribute zero.
    """
    if result.trace_times is None:
        raise ValueError("run simulate_brw with track_trace=True")
    deg = np.asarray(degrees, dtype=float)
    wdeg = np.where(deg > 0, deg**alpha, 0.0)
    if isinstance(x0, dict):
        m0 = sum(c * wdeg[v] for v, c in x0.items())
    else:
        m0 = sum(wdeg[int(v)] for v in x0)
    increments = wdeg[result.trace_vertex] * result.trace_delta
    values = np.concatenate([[m0], m0 + np.cumsum(increments)])
    times = np.concatenate([[0.0], result.trace_times])
    return times, values


def martingale_drift(
    g: MultiGraph, p: PenaltySpec, x0, alpha: float, t_grid, reps: int, rng, cap: int = 10**6
):
    """Ensemble estimate of the drift of log E[M_t] on a fixed time grid.

    Runs ``reps`` independent traced BRWs, averages M_t at the grid times and
    fits a line to log of the means. Returns a dict with the grid, means,
    slope, intercept, and the per-time standard errors.
    """
    try:
        lo, hi = p.admissible_alpha()
        flagged = not (lo - 1e-12 <= alpha <= hi + 1e-12)
    except ValueError:
        flagged = True
    rng = as_generator(rng)
    t_grid = np.asarray(t_grid, dtype=float)
    acc = np.zeros((reps, t_grid.size))
    for i in range(reps):
        res = simulate_brw(g, p, x0, float(t_grid.max()), rng, cap=cap, track_trace=True)
        times, values = martingale_series(res, g.degrees, alpha, x0)
        idx = np.searchsorted(times, t_grid, side="right") - 1
        acc[i] = values[np.clip(idx, 0, values.size - 1)]
    means = acc.mean(axis=0)
    ses = acc.std(axis=0, ddof=1) / math.sqrt(reps)
    logm = np.log(np.maximum(means, 1e-300))
    A = np.vstack([t_grid, np.ones_like(t_grid)]).T
    coef, *_ = np.linalg.lstsq(A, logm, rcond=None)
    return {
        "t": t_grid,
        "mean": means,
        "se": ses,
        "slope": float(coef[0]),
        "intercept": float(coef[1]),
        "alpha_out_of_range": flagged,
    }
