"""Degree pmfs: transforms, thinning law, tail checks."""

import math

import numpy as np
import pytest

from degcp import (
    binomial_thinning_pmf,
    check_weak_power_law,
    delta_pmf,
    explicit_pmf,
    hash_transform,
    power_law_pmf,
    size_biased,
    stretched_heavy_pmf,
    uniform_pmf,
)
from degcp.rng import stream


def test_pmf_validation():
    with pytest.raises(ValueError):
        explicit_pmf([1, 2], [0.5, 0.6])
    with pytest.raises(ValueError):
        explicit_pmf([2, 2], [0.5, 0.5])
    with pytest.raises(ValueError):
        explicit_pmf([-1, 2], [0.5, 0.5])


def test_size_biased_hand_values():
    pmf = uniform_pmf([1, 2])
    sb = size_biased(pmf)
    assert abs(sb.pmf(1) - 1 / 3) < 1e-14
    assert abs(sb.pmf(2) - 2 / 3) < 1e-14
    sh = size_biased(pmf, shifted=True)
    assert abs(sh.pmf(0) - 1 / 3) < 1e-14
    assert abs(sh.pmf(1) - 2 / 3) < 1e-14


def test_size_biased_point_mass_invariant():
    pmf = delta_pmf(5)
    sb = size_biased(pmf)
    assert sb.pmf(5) == 1.0


def test_size_biased_dominates_exactly():
    rng = stream(7, 0)
    for _ in range(20):
        vals = np.sort(rng.choice(np.arange(1, 30), size=5, replace=False))
        probs = rng.random(5)
        pmf = explicit_pmf(vals, probs / probs.sum())
        sb = size_biased(pmf)
        for z in range(0, 31):
            assert sb.cdf(z) <= pmf.cdf(z) + 1e-12


def test_hash_transform_dominance_and_Z():
    pmf = power_law_pmf(3.5, 1, 10**4)
    out, z0, Z = hash_transform(pmf, 0.1)
    assert Z < 7 / 8
    assert out.cdf(z0) == 0.0
    # exhaustive CDF comparison at every support point
    for z in pmf.values[::7]:
        assert out.cdf(int(z)) <= pmf.cdf(int(z)) + 1e-12
    # exact tail dominance for all z
    zs = np.concatenate([pmf.values, [0]])
    for z in zs[:: max(1, zs.size // 500)]:
        assert out.tail_gt(int(z)) >= pmf.tail_gt(int(z)) - 1e-12


def test_hash_transform_rejects_degenerate():
    with pytest.raises(ValueError):
        hash_transform(delta_pmf(4), 0.2)


def test_binomial_thinning_hand_values():
    out, q = binomial_thinning_pmf(delta_pmf(2), 2)
    assert q == 1.0 and out.pmf(2) == 1.0
    out, q = binomial_thinning_pmf(uniform_pmf([1, 3]), 1)
    assert abs(q - 0.25) < 1e-14
    assert abs(out.pmf(0) - 0.75) < 1e-14
    assert abs(out.pmf(1) - 0.25) < 1e-14


def test_binomial_thinning_is_a_pmf():
    pmf = power_law_pmf(2.5, 1, 500)
    out, q = binomial_thinning_pmf(pmf, 30)
    assert 0 < q < 1
    assert abs(out.probs.sum() - 1) < 1e-12
    assert out.support_max <= 30


def test_stretched_pmf_masses():
    pmf = stretched_heavy_pmf(0.5, 0.4, [8, 16, 32, 64], filler=3)
    for z in (8, 16, 32, 64):
        assert abs(pmf.pmf(z) - math.exp(-0.4 * z**0.5)) < 1e-12
    assert abs(pmf.probs.sum() - 1) < 1e-12
    assert pmf.tail == "stretched-heavier"
    with pytest.raises(ValueError):
        stretched_heavy_pmf(0.5, 0.01, [8, 16, 32, 64])  # masses exceed 1


def _discrete_pareto(alpha, zmax):
    # exact tails P(D >= z) = z^-alpha for z <= zmax
    sf = np.array([z ** -alpha for z in range(1, zmax + 2)])
    probs = sf[:-1] - sf[1:]
    probs[-1] += sf[-1]  # fold the far tail into the last atom
    return explicit_pmf(np.arange(1, zmax + 1), probs / probs.sum())


def test_weak_power_law_exact_pareto_zero_margin():
    # the analytic cdf itself passes with eps = 0: evaluate tails exactly
    alpha = 1.5
    pmf = _discrete_pareto(alpha, 500)
    for z in range(2, 400):
        t = pmf.sf_geq(z)
        assert z ** -(alpha + 1e-12) <= t <= z ** -(alpha - 1e-12)


def test_weak_power_law_pareto_samples_pass():
    # at 1e5 samples the eps = 0.1 corridor is still inside Poisson noise at
    # the top of the window; one order more makes the whp display concrete
    alpha = 1.5
    pmf = _discrete_pareto(alpha, 10**4)
    rng = stream(8, 0)
    n = 10**6
    samples = pmf.sample(rng, size=n)
    rep = check_weak_power_law(samples, alpha, 0.1, 10, int(n ** (1 / (alpha * 1.1))))
    assert all(rep.lower_ok) and all(rep.upper_ok)
    assert rep.maxdeg_ok


def test_weak_power_law_pointmass_truncated():
    # with the maximum degree well below n^(1/tau), the point-mass bound
    # holds at small eps; untruncated samples instead need eps > 1/tau
    pmf = power_law_pmf(2.5, 1, 80)
    rng = stream(8, 2)
    samples = pmf.sample(rng, size=10**5)
    rep = check_weak_power_law(samples, 1.5, 0.1, 10, 60)
    assert rep.pointmass_ok


def test_weak_power_law_exponential_fails_lower():
    rng = stream(8, 1)
    samples = np.minimum(rng.geometric(0.5, size=10**5), 60)
    rep = check_weak_power_law(samples, 1.5, 0.1, 8, 40)
    assert not all(rep.lower_ok)
