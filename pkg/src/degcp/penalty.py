"""Degree-penalty specifications and infection rates.

The transmission rate across an edge is r(u, v) = lam * e(u, v) / f(d_u, d_v)
where ``f`` is one of: product (x*y)^mu, max(x, y)^mu, a monomial a x^mu y^nu,
or a constant. Loops never transmit (they only raise degrees).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["PenaltySpec", "infection_rate"]


@dataclass(frozen=True)
class PenaltySpec:
    lam: float
    kind: str  # "product" | "max" | "monomial" | "constant"
    mu: float = 0.0
    nu: float = 0.0
    a: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam >= 0 required")
        if self.kind not in ("product", "max", "monomial", "constant"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "constant" and self.c < 1:
            raise ValueError("constant penalty needs c >= 1")
        if self.kind in ("product", "max") and self.mu < 0:
            raise ValueError("mu >= 0 required")
        if self.kind == "monomial" and (self.a <= 0 or self.mu < 0 or self.nu < 0):
            raise ValueError("monomial penalty needs a > 0 and mu, nu >= 0")

    @staticmethod
    def product(lam: float, mu: float) -> "PenaltySpec":
        return PenaltySpec(lam, "product", mu=mu)

    @staticmethod
    def max_(lam: float, mu: float) -> "PenaltySpec":
        return PenaltySpec(lam, "max", mu=mu)

    @staticmethod
    def monomial(lam: float, a: float, mu: float, nu: float) -> "PenaltySpec":
        return PenaltySpec(lam, "monomial", mu=mu, nu=nu, a=a)

    @staticmethod
    def constant(lam: float, c: float = 1.0) -> "PenaltySpec":
        return PenaltySpec(lam, "constant", c=c)

    def f(self, x: float, y: float) -> float:
        """Penalty value on a degree pair."""
        if self.kind == "product":
            return (x * y) ** self.mu
        if self.kind == "max":
            return max(x, y) ** self.mu
        if self.kind == "monomial":
            return self.a * x**self.mu * y**self.nu
        return self.c

    def rate(self, mult: int, du: int, dv: int) -> float:
        """lam * mult / f(du, dv); zero for a missing edge."""
        if mult <= 0 or self.lam == 0.0:
            return 0.0
        fv = self.f(du, dv)
        if math.isinf(fv):
            return 0.0
        return self.lam * mult / fv

    def admissible_alpha(self):
        """Exponent interval [1 - mu, nu] for the weighted particle count
        whose drift is controlled; only monomial-type penalties qualify."""
        if self.kind == "product":
            return (1.0 - self.mu, self.mu)
        if self.kind == "monomial":
            return (1.0 - self.mu, self.nu)
        raise ValueError("alpha interval is defined for product/monomial penalties")


def infection_rate(p: PenaltySpec, g, u: int, v: int) -> float:
    """Exact transmission rate from ``u`` to ``v`` on graph ``g``."""
    if u == v:
        return 0.0
    du = int(g.degrees[u])
    dv = int(g.degrees[v])
    return p.rate(g.e(u, v), du, dv)
