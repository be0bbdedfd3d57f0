"""Oriented percolation on the cone lattice and the renormalized comparison
with the contact process on a row of stars.

Sites are (x, y) with x, y >= 1 and x + y even; the directed edges go from
(x, y) to (x +/- 1, y + 1) and are open with probability 1 - delta. The two
out-edges of a site may share their randomness (the default), matching the
dependence the renormalization produces; an independent-edges mode is kept
as a baseline.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .cp import simulate_cp, star_survival_experiment, infestation_threshold
from .graphs import build_star_row
from .penalty import PenaltySpec
from .rng import as_generator

__all__ = [
    "ConeConfig",
    "ClusterResult",
    "op_cluster",
    "survival_estimate",
    "survival_curve",
    "SurvivalEstimate",
    "peierls_bound",
    "peierls_partial_sums",
    "renorm_compare",
    "write_survival_csv",
]


@dataclass(frozen=True)
class ConeConfig:
    delta: float
    depth: int
    mode: str = "shared-source"  # or "independent-edges"

    def __post_init__(self):
        if not 0 <= self.delta <= 1:
            raise ValueError("delta in [0, 1] required")
        if self.depth < 1:
            raise ValueError("depth >= 1 required")
        if self.mode not in ("shared-source", "independent-edges"):
            raise ValueError("mode must be 'shared-source' or 'independent-edges'")


@dataclass
class ClusterResult:
    eta: list  # per layer y=1..depth: bool array over x = 1..width
    y_max: int  # largest y with (1, y) occupied; == depth means censored
    y_max_censored: bool  # cluster still alive at the last computed layer
    size: int


def _field(cfg: ConeConfig, rng, reps: int):
    """Uniforms driving edge openness: shape (reps, depth-1, width).

    Shared-source mode uses one uniform per (site, layer): the right edge is
    open iff U <= 1-delta, the left iff U >= delta (both marginals 1-delta,
    dependent). Independent mode draws separately per direction.
    """
    width = cfg.depth + 1
    if cfg.mode == "shared-source":
        u = rng.random((reps, cfg.depth - 1, width))
        open_right = u <= 1 - cfg.delta
        open_left = u >= cfg.delta
    else:
        u1 = rng.random((reps, cfg.depth - 1, width))
        u2 = rng.random((reps, cfg.depth - 1, width))
        open_right = u1 <= 1 - cfg.delta
        open_left = u2 <= 1 - cfg.delta
    return open_left, open_right


def _evolve(cfg: ConeConfig, open_left, open_right):
    """Layer-by-layer recursion, vectorized over replicas.

    eta[rep, x] on layer y; occupation spreads along open diagonal edges.
    """
    reps = open_left.shape[0]
    width = cfg.depth + 1
    eta = np.zeros((reps, width + 2), dtype=bool)  # 1-based x with halo
    eta[:, 1] = True  # (1, 1)
    layers = [eta[:, 1:width + 1].copy()]
    for y in range(1, cfg.depth):
        prev = eta
        nxt = np.zeros_like(prev)
        # from x-1 rightwards: site (x-1, y) open-right reaches (x, y+1)
        nxt[:, 2:width + 1] |= prev[:, 1:width] & open_right[:, y - 1, : width - 1]
        # from x+1 leftwards
        nxt[:, 1:width] |= prev[:, 2:width + 1] & open_left[:, y - 1, 1:width]
        eta = nxt
        layers.append(eta[:, 1:width + 1].copy())
    return layers


def op_cluster(cfg: ConeConfig, rng, method: str = "recursion") -> ClusterResult:
    """One cluster of the oriented cone percolation, evaluated exactly.

    ``method`` selects the layer recursion or an explicit reachability
    search on the same realized edge field; the two agree exactly.
    """
    rng = as_generator(rng)
    open_left, open_right = _field(cfg, rng, 1)
    layers = _evolve(cfg, open_left, open_right)
    if method == "reachability":
        layers = _reach_layers(cfg, open_left, open_right)
    eta = [lay[0] for lay in layers]
    size = int(sum(lay.sum() for lay in eta))
    alive = bool(eta[-1].any())
    y_max = cfg.depth if alive else 0
    if not alive:
        for y in range(cfg.depth, 0, -1):
            if eta[y - 1][0]:  # x = 1 occupied on layer y
                y_max = y
                break
    return ClusterResult(eta, y_max, alive, size)


def _reach_layers(cfg, open_left, open_right):
    """Breadth-first reachability from (1, 1) over the open directed edges."""
    width = cfg.depth + 1
    layers = [np.zeros((1, width), dtype=bool) for _ in range(cfg.depth)]
    layers[0][0, 0] = True  # x = 1
    frontier = {(1, 1)}
    while frontier:
        nxt = set()
        for (x, y) in frontier:
            if y >= cfg.depth:
                continue
            if x + 1 <= width and open_right[0, y - 1, x - 1]:
                if not layers[y][0, x]:  # (x+1, y+1): index x
                    layers[y][0, x] = True
                    nxt.add((x + 1, y + 1))
            if x - 1 >= 1 and open_left[0, y - 1, x - 1]:
                if not layers[y][0, x - 2]:
                    layers[y][0, x - 2] = True
                    nxt.add((x - 1, y + 1))
        frontier = nxt
    return layers


@dataclass
class SurvivalEstimate:
    delta: float
    depth: int
    reps: int
    p: float
    ci_lo: float
    ci_hi: float


def survival_estimate(delta: float, depth: int, reps: int, rng,
                      mode: str = "shared-source") -> SurvivalEstimate:
    """Monte Carlo estimate of surviving to the last layer (Y_max >= depth)."""
    if reps < 1:
        raise ValueError("reps >= 1 required")
    rng = as_generator(rng)
    cfg = ConeConfig(delta, depth, mode)
    open_left, open_right = _field(cfg, rng, reps)
    layers = _evolve(cfg, open_left, open_right)
    alive = layers[-1].any(axis=1)
    p = float(alive.mean())
    se = math.sqrt(max(p * (1 - p), 1e-12) / reps)
    return SurvivalEstimate(delta, depth, reps, p, max(0.0, p - 1.96 * se),
                            min(1.0, p + 1.96 * se))


def survival_curve(deltas, depth: int, reps: int, rng, mode: str = "shared-source"):
    """Survival estimates across deltas under common random numbers.

    The same uniform field drives every delta, so the estimates are exactly
    monotone non-increasing in delta.
    """
    rng = as_generator(rng)
    width = depth + 1
    if mode == "shared-source":
        u = rng.random((reps, depth - 1, width))
        fields = [(u >= d, u <= 1 - d) for d in deltas]  # (left, right)
    else:
        u1 = rng.random((reps, depth - 1, width))
        u2 = rng.random((reps, depth - 1, width))
        fields = [(u2 <= 1 - d, u1 <= 1 - d) for d in deltas]
    out = []
    for d, (ol, orr) in zip(deltas, fields):
        cfg = ConeConfig(d, depth, mode)
        layers = _evolve(cfg, ol, orr)
        alive = layers[-1].any(axis=1)
        p = float(alive.mean())
        se = math.sqrt(max(p * (1 - p), 1e-12) / reps)
        out.append(SurvivalEstimate(d, depth, reps, p, max(0.0, p - 1.96 * se),
                                    min(1.0, p + 1.96 * se)))
    return out


def peierls_bound(delta: float) -> float:
    """sum_{k>=1} 3^k delta^(k/4) = 3 d^(1/4) / (1 - 3 d^(1/4)).

    Infinite in the divergent regime 3 delta^(1/4) >= 1.
    """
    x = 3.0 * delta**0.25
    if x >= 1.0:
        return math.inf
    return x / (1.0 - x)


def peierls_partial_sums(delta: float, k_max: int) -> np.ndarray:
    terms = np.array([3.0**k * delta ** (k / 4.0) for k in range(1, k_max + 1)])
    return np.cumsum(terms)


def write_survival_csv(estimates, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta", "depth", "survival", "ci_lo", "ci_hi"])
        for e in estimates:
            w.writerow([repr(e.delta), e.depth, repr(e.p), repr(e.ci_lo), repr(e.ci_hi)])


# -- renormalized comparison -----------------------------------------------------


def renorm_compare(K: int, ell: int, mu: float, lam: float, y_layers: int, reps: int, rng,
                   t_fit: float | None = None, fit_reps: int = 200):
    """Compare star-row infestation frequencies against the cone recursion.

    Fits a renormalization time from the median star survival (unless given),
    runs the contact process on a star row recording which stars are
    infested at times y * t_fit, estimates the one-step transfer frequency,
    and runs the cone recursion with delta set to one minus that frequency.
    Returns a dict with the per-site frequency tables and delta_hat.
    """
    if not mu < 0.5:
        raise ValueError("the renormalized comparison targets mu < 1/2")
    rng = as_generator(rng)
    p = PenaltySpec.product(lam, mu)
    if t_fit is None:
        fit = star_survival_experiment(K, p, fit_reps, horizon=200.0, rng=rng)
        t_fit = max(1.0, fit.median)
    num_stars = y_layers + 2
    row = build_star_row(K, ell, num_stars)
    r_rate = p.rate(1, K + 2, 1)
    thr = infestation_threshold(r_rate, K)
    stars = [(c, row.leaves[i], thr) for i, c in enumerate(row.centers)]

    width = len(row.centers)
    infest_freq = np.zeros((y_layers, width))
    transfer_num = 0
    transfer_den = 0
    horizon = (y_layers + 1) * t_fit
    for _ in range(reps):
        rep = simulate_cp(row.graph, p, [row.centers[0]], horizon, rng, stars=stars)
        infested = np.zeros((y_layers, width), dtype=bool)
        for i, c in enumerate(row.centers):
            for (t0, t1) in rep.infestation_intervals.get(c, []):
                for y in range(1, y_layers + 1):
                    if t0 <= y * t_fit <= t1:
                        infested[y - 1, i] = True
        infest_freq += infested
        for y in range(y_layers - 1):
            for i in range(width - 1):
                if infested[y, i]:
                    transfer_den += 1
                    if infested[y + 1, i + 1]:
                        transfer_num += 1
    infest_freq /= reps
    delta_hat = 1.0 - (transfer_num / transfer_den if transfer_den else 0.0)

    cfg = ConeConfig(min(1.0, max(0.0, delta_hat)), y_layers, "shared-source")
    ol, orr = _field(cfg, rng, reps)
    layers = _evolve(cfg, ol, orr)
    eta_freq = np.zeros((y_layers, width))
    for y, lay in enumerate(layers):
        for x in range(1, min(width, lay.shape[1]) + 1):
            eta_freq[y, x - 1] = lay[:, x - 1].mean()
    return {
        "t_fit": t_fit,
        "delta_hat": delta_hat,
        "transfer_freq": 1.0 - delta_hat,
        "infest_freq": infest_freq,
        "eta_freq": eta_freq,
        "reps": reps,
    }
