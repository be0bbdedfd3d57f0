"""Pre-sampled Poisson event streams and deterministic replay.

A :class:`GraphicalRep` holds, on a fixed horizon, one rate-1 healing stream
per vertex and one transmission stream per directed edge. Replaying a rep
from an initial set is a pure function, which is what makes monotone
couplings and thinning comparisons exact per run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import MultiGraph
from .penalty import PenaltySpec
from .rng import as_generator

__all__ = ["GraphicalRep", "build_graphical_rep", "run_cp_from_rep", "thin_rep", "Replay"]


@dataclass
class GraphicalRep:
    n: int
    T: float
    heal: list  # per vertex: sorted ndarray of healing times
    inf: dict  # (u, v) -> sorted ndarray of transmission timesu->v
    rates: dict  # (u, v) -> rate used to sample the stream


def _ppp(rate: float, T: float, rng) -> np.ndarray:
    if rate <= 0:
        return np.empty(0)
    k = rng.poisson(rate * T)
    return np.sort(rng.random(k) * T)


def build_graphical_rep(g: MultiGraph, p: PenaltySpec, T: float, rng) -> GraphicalRep:
    """Sample healing and per-directed-edge transmission streams on [0, T]."""
    if T <= 0:
        raise ValueError("T must be positive")
    rng = as_generator(rng)
    heal = [_ppp(1.0, T, rng) for _ in range(g.n)]
    inf = {}
    rates = {}
    deg = g.degrees
    for u in range(g.n):
        ids, mult = g.neighbors(u)
        for v, m in zip(ids, mult):
            v = int(v)
            r = p.rate(int(m), int(deg[u]), int(deg[v]))
            if r > 0:
                inf[(u, v)] = _ppp(r, T, rng)
                rates[(u, v)] = r
    return GraphicalRep(g.n, float(T), heal, inf, rates)


@dataclass
class Replay:
    """Deterministic replay of a rep from a fixed initial set."""

    times: np.ndarray
    kinds: np.ndarray  # 0 heal, 1 transmission
    src: np.ndarray
    dst: np.ndarray
    applied: np.ndarray  # transmission landed on a susceptible target
    initial: frozenset
    T: float

    def infected_at(self, t: float) -> frozenset:
        state = set(self.initial)
        for i in range(self.times.size):
            if self.times[i] > t:
                break
            k = self.kinds[i]
            if k == 0:
                state.discard(int(self.src[i]))
            elif self.applied[i]:
                state.add(int(self.dst[i]))
        return frozenset(state)

    @property
    def t_ext(self):
        """Extinction time within the horizon, or None if still alive at T."""
        state = set(self.initial)
        for i in range(self.times.size):
            k = self.kinds[i]
            if k == 0:
                state.discard(int(self.src[i]))
                if not state:
                    return float(self.times[i])
            elif self.applied[i]:
                state.add(int(self.dst[i]))
        return None


def run_cp_from_rep(rep: GraphicalRep, xi0) -> Replay:
    """Replay the contact process encoded by ``rep`` from ``xi0``.

    A vertex is infected at time t exactly when an infection path from the
    initial set reaches it; equivalently, sweep the merged events in time
    order, applying each healing and every transmission whose source is
    currently infected.
    """
    times = []
    kinds = []
    src = []
    dst = []
    for v, arr in enumerate(rep.heal):
        times.append(arr)
        kinds.append(np.zeros(arr.size, dtype=np.int8))
        src.append(np.full(arr.size, v, dtype=np.int64))
        dst.append(np.full(arr.size, -1, dtype=np.int64))
    for (u, v), arr in rep.inf.items():
        times.append(arr)
        kinds.append(np.ones(arr.size, dtype=np.int8))
        src.append(np.full(arr.size, u, dtype=np.int64))
        dst.append(np.full(arr.size, v, dtype=np.int64))
    times = np.concatenate(times) if times else np.empty(0)
    kinds = np.concatenate(kinds) if kinds else np.empty(0, dtype=np.int8)
    src = np.concatenate(src) if src else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dst) if dst else np.empty(0, dtype=np.int64)
    order = np.argsort(times, kind="stable")
    times, kinds, src, dst = times[order], kinds[order], src[order], dst[order]

    state = bytearray(rep.n)
    for v in xi0:
        state[int(v)] = 1
    applied = np.zeros(times.size, dtype=bool)
    for i in range(times.size):
        if kinds[i] == 0:
            state[src[i]] = 0
        else:
            if state[src[i]] and not state[dst[i]]:
                state[dst[i]] = 1
                applied[i] = True
    return Replay(times, kinds, src, dst, applied, frozenset(int(v) for v in xi0), rep.T)


def thin_rep(rep: GraphicalRep, g: MultiGraph, p_slow: PenaltySpec, rng) -> GraphicalRep:
    """Thin a rep down to a pointwise smaller penalty's rates.

    Each transmission stream keeps its points independently with probability
    ``r_slow/r_fast``; the healing streams are shared. Replaying the thinned
    rep from the same initial set is dominated, event by event, by replaying
    the original. Raises when the requested rates exceed the rep's anywhere.
    """
    rng = as_generator(rng)
    deg = g.degrees
    new_inf = {}
    new_rates = {}
    for (u, v), arr in rep.inf.items():
        r_fast = rep.rates[(u, v)]
        r_slow = p_slow.rate(g.e(u, v), int(deg[u]), int(deg[v]))
        if r_slow > r_fast + 1e-12:
            raise ValueError(f"target rate exceeds the rep's on edge {(u, v)}")
        keep_p = 0.0 if r_fast == 0 else min(1.0, r_slow / r_fast)
        if keep_p >= 1.0:
            kept = arr.copy()
        elif keep_p <= 0.0:
            kept = np.empty(0)
        else:
            kept = arr[rng.random(arr.size) < keep_p]
        new_inf[(u, v)] = kept
        new_rates[(u, v)] = r_slow
    return GraphicalRep(rep.n, rep.T, [h.copy() for h in rep.heal], new_inf, new_rates)
