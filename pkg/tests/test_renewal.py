from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from oracles import ml_half_negative, prabhakar_ref, weibull_mc_free_mean
from prabhakar import (
    DomainError,
    InterarrivalLaw,
    PrecisionError,
    ParamSet,
    density,
    make_rng,
    moments,
    sample_count,
    sample_interarrival,
    survival,
    survival_quantile,
    weibull_moment,
    weibull_moments,
    weibull_variance,
    weibull_variance_beta,
)
from prabhakar.mlf import ShiftedGammaCache
from prabhakar.renewal import _SurvivalInverse, open_uniforms, splitmix64

GENERAL = InterarrivalLaw(ParamSet(0.8, 1.0, 1.2, 0.8, 1.0))


def test_survival_examples():
    assert survival(GENERAL, 0.0) == 1.0
    assert survival(ParamSet(1, 1, 1, 1, 1), 1.0) == pytest.approx(math.exp(-1), rel=1e-14)
    assert survival(ParamSet(0.5, 1, 1, 0.5, 1), 1.0) == pytest.approx(ml_half_negative(1.0), rel=1e-13)
    with pytest.raises(DomainError):
        survival(GENERAL, -1.0)


def test_survival_monotone_in_unit_interval():
    taus = np.geomspace(1e-4, 200, 60)
    vals = [survival(GENERAL, t) for t in taus]
    assert all(0 <= v <= 1 for v in vals)
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_density_examples():
    assert density(ParamSet(1, 1, 1, 1, 2), 0.5) == pytest.approx(2 * math.exp(-1), rel=1e-14)
    assert density(ParamSet(1, 1, 1, 0.5, 1), 1.0) == pytest.approx(0.5 * math.exp(-1), rel=1e-14)
    with pytest.raises(DomainError):
        density(GENERAL, 0.0)


def test_density_fractional_poisson_form():
    # lambda tau^(mu-1) E_{mu,mu}(-lambda tau^mu) at mu = 1/2, tau = 1
    expected = float(prabhakar_ref(1, 0.5, 0.5, -1.0))
    assert density(ParamSet(0.5, 1, 1, 0.5, 1), 1.0) == pytest.approx(expected, rel=1e-12)
    h = 1e-4
    fd = -(survival(ParamSet(0.5, 1, 1, 0.5, 1), 1 + h) - survival(ParamSet(0.5, 1, 1, 0.5, 1), 1 - h)) / (2 * h)
    assert fd == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize(
    "params",
    [ParamSet(0.8, 1.0, 1.2, 0.8, 1.0), ParamSet(0.6, 1.5, 2.0, 0.4, 0.5), ParamSet(1.0, 2.0, 1.5, 1.0, 1.3), ParamSet(0.95, 0.4, 0.3, 0.7, 2.0)],
)
def test_density_is_minus_survival_derivative(params):
    law = InterarrivalLaw(params)
    for tau in np.geomspace(0.1, 10, 7):
        h = 1e-3 * tau
        f = lambda s: survival(law, s)  # noqa: E731
        fd = -(-f(tau + 2 * h) + 8 * f(tau + h) - 8 * f(tau - h) + f(tau - 2 * h)) / (12 * h)
        assert fd == pytest.approx(density(law, tau), rel=1e-6)


def test_weibull_reduction():
    law = InterarrivalLaw(ParamSet(1, 1, 1, 0.4, 1.7))
    for tau in (0.01, 0.5, 3.0, 40.0):
        assert survival(law, tau) == pytest.approx(math.exp(-1.7 * tau**0.4), rel=1e-13)


@pytest.mark.parametrize("sigma, lam, k, expected", [(1, 2, 1, 0.5), (0.5, 1, 1, 2.0), (0.5, 1, 2, 24.0)])
def test_weibull_moment_examples(sigma, lam, k, expected):
    assert weibull_moment(sigma, lam, k) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("sigma", [0.05, 0.2, 0.5, 0.8, 1.0])
@pytest.mark.parametrize("lam", [0.3, 1.0, 4.0])
def test_weibull_variance_forms_agree(sigma, lam):
    assert weibull_variance_beta(sigma, lam) == pytest.approx(weibull_variance(sigma, lam), rel=1e-10)


def test_weibull_mean_quadrature_oracle():
    for sigma, lam in ((0.5, 1.0), (0.8, 2.0), (1.0, 0.5)):
        assert weibull_moments(sigma, lam).mean == pytest.approx(weibull_mc_free_mean(sigma, lam), rel=1e-10)


def test_weibull_exponential_variance():
    assert weibull_variance(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert weibull_variance_beta(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)


def test_forced_uniform_hook():
    b = sample_interarrival(ParamSet(1, 1, 1, 1, 1), 1, uniforms=[math.exp(-1)])
    assert b.method == "analytic_inverse"
    assert b.values[0] == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        sample_interarrival(ParamSet(1, 1, 1, 1, 1), 1, uniforms=[0.0])


def test_weibull_sample_mean():
    b = sample_interarrival(ParamSet(1, 1, 1, 0.5, 1), 10**6, seed=123)
    se = b.values.std(ddof=1) / math.sqrt(len(b.values))
    assert abs(b.values.mean() - 2.0) <= 3 * se


def test_general_sampler_empirical_survival():
    b = sample_interarrival(GENERAL, 10**5, seed=99)
    assert b.method == "numeric_inverse"
    for tau in (0.5, 1.0, 2.0):
        s = survival(GENERAL, tau)
        emp = np.mean(b.values >= tau)
        assert abs(emp - s) <= 3 * math.sqrt(s * (1 - s) / len(b.values))


def test_general_sampler_kolmogorov_smirnov():
    """KS distance against the exact survival function, bracketed on a fine grid.

    F is monotone, so for a sample between grid points the exact CDF is
    bracketed by its values there; the bound D_upper >= D is compared with
    the 1% critical value. Grid points are every 20th order statistic, up to
    the largest argument the evaluator can certify.
    """
    n = 10**5
    vals = np.sort(sample_interarrival(GENERAL, n, seed=2024).values)
    cache = ShiftedGammaCache(0.8, 1.0)
    grid, cdf = [], []
    for t in np.unique(np.concatenate([vals[::20], vals[-1:]])):
        try:
            cdf.append(1 - survival(GENERAL, t, cache=cache))
        except PrecisionError:
            break  # beyond the evaluable range; later samples get the bracket [F(last), 1]
        grid.append(t)
    grid, cdf = np.array(grid), np.array(cdf)
    idx = np.searchsorted(grid, vals, side="right")  # grid[idx-1] <= v < grid[idx]
    lo = np.where(idx > 0, cdf[np.clip(idx - 1, 0, len(grid) - 1)], 0.0)
    hi = np.where(idx < len(grid), cdf[np.clip(idx, 0, len(grid) - 1)], 1.0)
    ecdf_right = np.arange(1, n + 1) / n
    ecdf_left = np.arange(0, n) / n
    d_upper = max(np.max(ecdf_right - lo), np.max(hi - ecdf_left))
    crit = stats.kstwo.ppf(0.99, n)
    assert d_upper < crit


def test_surrogate_matches_exact_quantiles():
    inv = _SurvivalInverse(GENERAL)
    us = np.array([0.999999, 0.9, 0.5, 0.1, 1e-3])
    approx, n_ext = inv.quantiles(us)
    assert n_ext == 0
    for u, a in zip(us, approx):
        assert a == pytest.approx(survival_quantile(GENERAL, float(u)), rel=1e-10)


def test_sampler_reproducible_and_streams_differ():
    a = sample_interarrival(GENERAL, 200, seed=7)
    b = sample_interarrival(GENERAL, 200, seed=7)
    c = sample_interarrival(GENERAL, 200, seed=7, stream=1)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_batch_csv_header():
    b = sample_interarrival(ParamSet(1, 1, 1, 0.5, 1), 3, seed=5)
    lines = b.to_csv().splitlines()
    assert lines[0].startswith("# ") and '"seed": 5' in lines[0] and '"analytic_inverse"' in lines[0]
    assert [float(x) for x in lines[1:]] == list(b.values)


def test_uniforms_open_interval():
    u = open_uniforms(make_rng(0), 10**5)
    assert u.min() > 0 and u.max() < 1
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    with pytest.raises(DomainError):
        make_rng(-1)


def test_sample_count_examples():
    assert np.all(sample_count(ParamSet(0.7, 1.2, 1.5, 0.8), 0.0, 100, seed=1) == 0)
    draws = sample_count(ParamSet(1, 1, 1, 1, 1), 4.0, 10**6, seed=3)
    assert abs(draws.mean() - 4) <= 3 * math.sqrt(4 / len(draws))
    frac = ParamSet(0.5, 1, 1, 0.5, 1)
    draws = sample_count(frac, 1.0, 10**6, seed=4)
    m = moments(frac, 1.0)
    assert abs(draws.mean() - 1 / math.gamma(1.5)) <= 3 * math.sqrt(m.variance / len(draws))


def test_sample_count_reproducible():
    p = ParamSet(0.7, 1.2, 1.5, 0.8)
    assert np.array_equal(sample_count(p, 2.0, 1000, seed=11), sample_count(p, 2.0, 1000, seed=11))


def test_survival_beyond_range_raises_not_overflows():
    with pytest.raises(PrecisionError):
        survival(GENERAL, 3000.0)
