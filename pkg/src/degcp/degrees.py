"""Finite-support degree distributions and their transforms.

All probability mass functions here live on a finite set of non-negative
integers. Heavy-tail classes (weak power law, heavier-than-stretched-
exponential) are realized as explicit finite pmfs carrying a tail tag with
their nominal parameters, so downstream checks can recover the intent.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .rng import as_generator

__all__ = [
    "DegreePMF",
    "explicit_pmf",
    "delta_pmf",
    "uniform_pmf",
    "binomial_pmf",
    "power_law_pmf",
    "stretched_heavy_pmf",
    "size_biased",
    "hash_transform",
    "binomial_thinning_pmf",
    "check_weak_power_law",
    "TailReport",
    "iid_degree_sequence",
]

_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DegreePMF:
    """Probability mass function on distinct non-negative integers.

    ``tail`` is one of ``explicit``, ``weak-power-law``, ``stretched-heavier``
    or ``truncated``; ``tail_params`` carries the nominal parameters of that
    class (e.g. ``alpha``/``tau`` and ``eps`` for power laws).
    """

    values: np.ndarray
    probs: np.ndarray
    tail: str = "explicit"
    tail_params: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        p = np.asarray(self.probs, dtype=np.float64)
        if v.ndim != 1 or p.shape != v.shape:
            raise ValueError("values and probs must be 1-d and aligned")
        if v.size == 0:
            raise ValueError("empty support")
        if np.any(v < 0):
            raise ValueError("support values must be non-negative")
        if np.any(np.diff(v) <= 0):
            raise ValueError("support values must be distinct and ascending")
        if np.any(p < -_TOL):
            raise ValueError("negative probability")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))
        object.__setattr__(self, "_cum", np.cumsum(self.probs))

    # -- moments and tails -------------------------------------------------

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def moment(self, q: float) -> float:
        vals = self.values.astype(np.float64)
        out = np.zeros_like(vals)
        pos = vals > 0
        out[pos] = vals[pos] ** q
        if q == 0:
            out[~pos] = 1.0
        return float(np.dot(out, self.probs))

    def pmf(self, z: int) -> float:
        j = np.searchsorted(self.values, z)
        if j < self.values.size and self.values[j] == z:
            return float(self.probs[j])
        return 0.0

    def cdf(self, z) -> float:
        """P(D <= z)."""
        j = np.searchsorted(self.values, z, side="right")
        return float(self._cum[j - 1]) if j > 0 else 0.0

    def sf_geq(self, z) -> float:
        """P(D >= z)."""
        return 1.0 - self.cdf(z - 1)

    def tail_gt(self, z) -> float:
        """P(D > z)."""
        return 1.0 - self.cdf(z)

    @property
    def support_min(self) -> int:
        return int(self.values[self.probs > 0].min())

    @property
    def support_max(self) -> int:
        return int(self.values[self.probs > 0].max())

    # -- sampling -----------------------------------------------------------

    def sample(self, rng, size=None):
        rng = as_generator(rng)
        return rng.choice(self.values, size=size, p=self.probs)

    def quantile(self, u: float) -> int:
        """Inverse cdf; deterministic given u in [0, 1)."""
        j = bisect_left(self._cum, u)
        if j >= self.values.size:
            j = self.values.size - 1
        return int(self.values[j])


def explicit_pmf(values, probs, tail="explicit", tail_params=None) -> DegreePMF:
    order = np.argsort(np.asarray(values))
    return DegreePMF(
        np.asarray(values)[order],
        np.asarray(probs, dtype=np.float64)[order],
        tail,
        dict(tail_params or {}),
    )


def delta_pmf(c: int) -> DegreePMF:
    return DegreePMF(np.array([c]), np.array([1.0]))


def uniform_pmf(values) -> DegreePMF:
    values = sorted(set(int(v) for v in values))
    n = len(values)
    return DegreePMF(np.array(values), np.full(n, 1.0 / n))


def binomial_pmf(n: int, p: float) -> DegreePMF:
    vals = np.arange(n + 1)
    probs = np.array([math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in vals])
    return DegreePMF(vals, probs / probs.sum())


def power_law_pmf(tau: float, z_min: int = 1, z_max: int = 10**4, eps: float = 0.0) -> DegreePMF:
    """Pure power law nu(z) proportional to z^(-tau) on {z_min..z_max}.

    Tagged as a truncated weak power law with tail exponent alpha = tau - 1.
    """
    if tau <= 1:
        raise ValueError("tau > 1 required")
    vals = np.arange(z_min, z_max + 1, dtype=np.int64)
    w = vals.astype(np.float64) ** (-tau)
    return DegreePMF(
        vals,
        w / w.sum(),
        tail="weak-power-law",
        tail_params={"tau": tau, "alpha": tau - 1.0, "eps": eps, "z_max": int(z_max)},
    )


def stretched_heavy_pmf(zeta: float, g, z_grid, filler: int = 3) -> DegreePMF:
    """Masses exp(-g(z) z^zeta) along ``z_grid``, remaining mass at ``filler``.

    ``g`` may be a constant or a callable. This realizes, at finite size, a
    tail that is heavier than stretched exponential with stretch exponent
    ``zeta`` along the given subsequence.
    """
    gfun = g if callable(g) else (lambda _z: float(g))
    grid = sorted(set(int(z) for z in z_grid))
    if any(z <= filler for z in grid):
        raise ValueError("grid values must exceed the filler atom")
    masses = [math.exp(-gfun(z) * z**zeta) for z in grid]
    total = sum(masses)
    if total >= 1.0:
        raise ValueError("grid masses exceed 1; thin the grid or increase g")
    vals = [filler] + grid
    probs = [1.0 - total] + masses
    return explicit_pmf(
        vals, probs, tail="stretched-heavier", tail_params={"zeta": zeta, "grid": tuple(grid)}
    )


def iid_degree_sequence(pmf: DegreePMF, n: int, rng, auto_fix: bool = True):
    """n iid degrees; adds one half-edge to the last vertex if the sum is odd."""
    rng = as_generator(rng)
    deg = pmf.sample(rng, size=n).astype(np.int64)
    if int(deg.sum()) % 2 == 1:
        if not auto_fix:
            raise ValueError("odd half-edge sum")
        deg[-1] += 1
    return deg


# -- measure transforms ----------------------------------------------------


def size_biased(pmf: DegreePMF, shifted: bool = False) -> DegreePMF:
    """Size-biased version z nu(z)/E[D]; if ``shifted``, (z+1) nu(z+1)/E[D]."""
    m = pmf.mean()
    if m <= 0:
        raise ValueError("size-biasing needs E[D] > 0")
    if shifted:
        keep = pmf.values >= 1
        vals = pmf.values[keep] - 1
        probs = pmf.values[keep] * pmf.probs[keep] / m
    else:
        vals = pmf.values
        probs = pmf.values * pmf.probs / m
    keep = probs > 0
    return explicit_pmf(vals[keep], probs[keep] / probs[keep].sum())


def hash_transform(pmf: DegreePMF, eta: float):
    """Heavier-tail renormalized power nu(z)^(1-eta)/Z above a cutoff.

    Returns ``(transformed_pmf, z0, Z)`` where ``z0`` is the smallest support
    point such that every retained atom satisfies nu(z)^(-eta) >= 8/7 and the
    retained raw mass sum is < 7/8; the result assigns zero mass at or below
    ``z0`` and stochastically dominates the input. Rejected with a diagnostic
    when no admissible cutoff exists.
    """
    if not (0 < eta < 1):
        raise ValueError("eta must lie in (0, 1)")
    vals = pmf.values[pmf.probs > 0]
    probs = pmf.probs[pmf.probs > 0]
    raw = probs ** (1.0 - eta)
    # conditions only change when the cutoff crosses a support point, so the
    # smallest admissible integer is 1 or one of the support values
    for z0 in sorted({1, *(int(v) for v in vals)}):
        tail_idx = vals > z0
        if not tail_idx.any():
            break
        if float(probs[tail_idx].max()) ** (-eta) < 8.0 / 7.0:
            continue
        Z = float(raw[tail_idx].sum())
        if Z < 7.0 / 8.0:
            out = explicit_pmf(vals[tail_idx], raw[tail_idx] / Z)
            return out, z0, Z
    raise ValueError(
        "no admissible cutoff: need an upper support region with atom masses "
        "<= (7/8)^(1/eta) and renormalizer sum < 7/8; extend the support or "
        "lower eta"
    )


def binomial_thinning_pmf(pmf: DegreePMF, M: int):
    """Law of Bin(D, q_M) given D <= M, with q_M = E[D 1{D<=M}]/E[D].

    Returns ``(thinned_pmf, q_M)``. This is the limiting degree distribution
    of the subgraph kept by a targeted attack at threshold ``M``.
    """
    m = pmf.mean()
    if m <= 0:
        raise ValueError("E[D] > 0 required")
    below = pmf.values <= M
    p_below = float(pmf.probs[below].sum())
    if p_below <= 0:
        raise ValueError("P(D <= M) > 0 required")
    q = float(np.dot(pmf.values[below], pmf.probs[below])) / m
    out = np.zeros(M + 1, dtype=np.float64)
    for j, pj in zip(pmf.values[below], pmf.probs[below]):
        j = int(j)
        w = pj / p_below
        for i in range(j + 1):
            out[i] += w * math.comb(j, i) * q**i * (1 - q) ** (j - i)
    out = out / out.sum()
    vals = np.arange(M + 1)
    keep = out > 0
    return explicit_pmf(vals[keep], out[keep] / out[keep].sum()), q


# -- empirical tail checks ---------------------------------------------------


@dataclass
class TailReport:
    """Per-z verdicts for the two-sided weak power-law tail bounds."""

    z_checked: list
    lower_ok: list  # P(D >= z) >= z^-(alpha+eps)
    upper_ok: list  # P(D >= z) <= z^-(alpha-eps)
    pointmass_ok: bool
    maxdeg_ok: bool
    n: int

    @property
    def tail_ok(self) -> bool:
        return all(self.lower_ok) and all(self.upper_ok)

    @property
    def all_ok(self) -> bool:
        return self.tail_ok and self.pointmass_ok and self.maxdeg_ok

    def failures(self):
        return [
            (z, lo, up)
            for z, lo, up in zip(self.z_checked, self.lower_ok, self.upper_ok)
            if not (lo and up)
        ]


def check_weak_power_law(samples, alpha: float, eps: float, z0: int, z_max: int,
                         c_u: float = 1.0) -> TailReport:
    """Empirical check of the two-sided tail bounds on ``[z0, z_max]``.

    Checks ``1/z^(alpha+eps) <= P(D >= z) <= 1/z^(alpha-eps)`` for each
    integer ``z`` in the window, plus the companion point-mass bound
    ``nu_n(z) <= c_u z^(-tau(1-eps))`` with ``tau = alpha + 1`` for z >= z0,
    and the max-degree bound ``max d <= c_u n^(1/(tau(1-eps)-1))``.
    """
    x = np.asarray(samples, dtype=np.int64)
    if x.size == 0:
        raise ValueError("empty sample")
    n = x.size
    tau = alpha + 1.0
    xs = np.sort(x)
    zs = list(range(int(z0), int(z_max) + 1))
    lower_ok, upper_ok = [], []
    for z in zs:
        tail = 1.0 - np.searchsorted(xs, z, side="left") / n  # P(D >= z)
        lower_ok.append(tail >= z ** -(alpha + eps))
        upper_ok.append(tail <= z ** -(alpha - eps))
    vals, counts = np.unique(xs, return_counts=True)
    mass_ok = True
    for v, c in zip(vals, counts):
        if v >= z0 and c / n > c_u * float(v) ** (-tau * (1 - eps)):
            mass_ok = False
            break
    exponent = 1.0 / (tau * (1 - eps) - 1.0)
    maxdeg_ok = bool(xs[-1] <= c_u * n**exponent)
    return TailReport(zs, lower_ok, upper_ok, mass_ok, maxdeg_ok, n)
