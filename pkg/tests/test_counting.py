from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from oracles import fractional_poisson_ref, ml_half_negative, pmf_ref, poisson_ref, vandermonde_coefficients
from prabhakar import (
    DomainError,
    ParamSet,
    beta_ratio,
    cumulative_intensity,
    mgf,
    moment_m,
    moment_sum,
    moments,
    pgf,
    pmf,
    pmf_dimensionless,
    pmf_table,
    rate,
)
from prabhakar.combinatorics import bell_number

POISSON = ParamSet(1, 1, 1, 1, 1)


def valid_params():
    return st.builds(
        lambda mu, g, extra, sigma, lam: ParamSet(mu, mu * g + extra, g, sigma, lam),
        st.floats(0.5, 1.0),
        st.floats(0.2, 3.0),
        st.floats(0.0, 2.0),
        st.floats(0.2, 1.0),
        st.floats(0.1, 2.0),
    )


@pytest.mark.parametrize(
    "kwargs, fragment",
    [
        (dict(mu=0, nu=1, gamma=1, sigma=1), "0 < mu <= 1"),
        (dict(mu=1.2, nu=1, gamma=1, sigma=1), "0 < mu <= 1"),
        (dict(mu=1, nu=1, gamma=0, sigma=1), "gamma > 0"),
        (dict(mu=0.8, nu=0.5, gamma=1, sigma=1), "nu >= mu*gamma"),
        (dict(mu=1, nu=1, gamma=1, sigma=0), "0 < sigma <= 1"),
        (dict(mu=1, nu=1, gamma=1, sigma=1, lambda_sigma=-1), "lambda_sigma > 0"),
    ],
)
def test_paramset_names_violated_constraint(kwargs, fragment):
    with pytest.raises(DomainError, match=fragment.replace("*", r"\*")):
        ParamSet(**kwargs)


def test_pmf_examples():
    assert pmf(POISSON, 2, 3) == pytest.approx(8 * math.exp(-2) / 6, rel=1e-14)
    assert pmf(ParamSet(0.7, 1.2, 1.5, 0.8, 1.3), 0, 0) == 1.0
    assert pmf(ParamSet(0.7, 1.2, 1.5, 0.8, 1.3), 0, 4) == 0.0
    assert pmf(ParamSet(0.5, 1, 1, 0.5, 1), 1, 0) == pytest.approx(ml_half_negative(1.0), rel=1e-13)
    assert pmf(ParamSet(1, 1, 1, 0.5, 1), 4, 1) == pytest.approx(2 * math.exp(-2), rel=1e-14)


def test_pmf_dimensionless_examples():
    assert pmf_dimensionless(ParamSet(0.6, 1, 1, 0.5), 0.0, 0) == 1.0
    assert pmf_dimensionless(POISSON, 1.0, 1) == pytest.approx(math.exp(-1), rel=1e-14)
    p = ParamSet(0.9, 1, 1, 1)
    assert pmf_dimensionless(p, 0.5, 2) == pytest.approx(pmf(p, 0.5, 2), rel=1e-12)


def test_pmf_domain_errors():
    with pytest.raises(DomainError):
        pmf(POISSON, -1, 0)
    with pytest.raises(DomainError):
        pmf(POISSON, 1, -1)


@pytest.mark.parametrize("n", [0, 1, 3, 7, 15])
@pytest.mark.parametrize("x", [0.3, 2.0, 6.0])
def test_pmf_matches_double_series_reference(n, x):
    p = ParamSet(0.7, 1.2, 1.5, 1.0, 1.0)
    assert pmf(p, x, n) == pytest.approx(float(pmf_ref(0.7, 1.2, 1.5, x, n)), rel=1e-12)


def test_poisson_table():
    tab = pmf_table(POISSON, 1.0)
    fact = np.array([math.factorial(k) for k in range(tab.n_max + 1)], dtype=float)
    assert np.allclose(tab.probs, math.exp(-1) / fact, rtol=1e-14, atol=0)
    assert abs(tab.probs.sum() - 1) <= 1e-12
    assert tab.tail_bound <= 1e-12 and not tab.truncated


def test_table_at_time_zero():
    tab = pmf_table(ParamSet(0.7, 1.2, 1.5, 0.8), 0.0)
    assert list(tab.probs) == [1.0] and tab.tail_bound == 0.0


def test_table_normalization_example():
    tab = pmf_table(ParamSet(0.7, 1.2, 1.5, 0.8, 1), 1.0)
    assert abs(tab.probs.sum() + tab.tail_bound - 1) <= 1e-9
    assert abs(tab.probs.sum() - 1) <= 1e-9


def test_table_fixed_size_and_serialization():
    tab = pmf_table(POISSON, 2.0, 10)
    assert tab.n_max == 10
    lines = tab.to_csv().splitlines()
    assert lines[0] == "n,p"
    assert lines[4] == "3,0.18044704431548367"
    assert float(lines[4].split(",")[1]) == tab.probs[3]
    d = json.loads(tab.to_json())
    assert d["params"]["mu"] == 1 and d["tail_bound"] >= 0 and len(d["probs"]) == 11


@settings(max_examples=25, deadline=None)
@given(p=valid_params(), t=st.sampled_from([0.1, 1.0, 10.0]))
def test_table_normalized_and_nonnegative(p, t):
    tab = pmf_table(p, t)
    assert abs(tab.probs.sum() + tab.tail_bound - 1) <= 1e-9
    assert np.all(tab.probs >= -max(tab.abs_error, 1e-300))


def test_pgf_examples():
    assert pgf(ParamSet(0.7, 1.2, 1.5, 0.8), 2.0, 1.0) == 1.0
    assert pgf(POISSON, 2.0, 0.5) == pytest.approx(math.exp(-1), rel=1e-14)
    assert pgf(ParamSet(0.5, 1, 1, 0.5), 1.0, 0.0) == pytest.approx(ml_half_negative(1.0), rel=1e-13)
    p = ParamSet(0.7, 1.2, 1.5, 0.8)
    assert pgf(p, 1.5, 0.0) == pytest.approx(pmf(p, 1.5, 0), rel=1e-13)


def test_pgf_coefficients_give_pmf():
    """Fit the PGF on Chebyshev nodes and read off the power-series coefficients."""
    p = ParamSet(0.8, 1.1, 1.2, 0.9, 0.7)
    t = 1.0
    deg = 16
    k = np.arange(deg)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * deg))
    coef = vandermonde_coefficients(lambda s: pgf(p, t, s), deg, nodes)
    for n in range(7):
        assert coef[n] == pytest.approx(pmf(p, t, n), abs=1e-8)


def test_mgf_examples():
    p = ParamSet(0.7, 1.2, 1.5, 0.8)
    assert mgf(p, 2.0, 0.0) == 1.0
    assert mgf(POISSON, 1.0, math.log(2)) == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert mgf(p, 2.0, 40.0) == pytest.approx(pmf(p, 2.0, 0), abs=1e-12)
    vals = [mgf(p, 2.0, s) for s in np.linspace(0, 5, 20)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        mgf(p, 1.0, -0.1)


def test_moment_examples():
    m = moments(POISSON, 3.0)
    assert m.mean == pytest.approx(3) and m.variance == pytest.approx(3)
    frac = ParamSet(0.5, 1, 1, 1, 1)
    assert moments(frac, 2.0).mean == pytest.approx(2 / math.gamma(1.5), rel=1e-14)
    assert moments(frac, 1.0).second_moment == pytest.approx(1 / math.gamma(1.5) + 2, rel=1e-14)


@settings(max_examples=10, deadline=None)
@given(p=valid_params(), t=st.sampled_from([0.1, 1.0, 3.0]))
def test_moment_consistency(p, t):
    ms = moments(p, t)
    mean = moment_sum(p, t, 1)
    second = moment_sum(p, t, 2)
    assert ms.mean == pytest.approx(mean, rel=1e-9, abs=1e-12)
    assert ms.variance == pytest.approx(second - mean**2, rel=1e-8, abs=1e-12)
    assert ms.variance_beta_form == pytest.approx(ms.variance, rel=1e-9, abs=1e-12)
    assert ms.variance >= 0


def test_beta_ratio_poisson():
    # (1 + 1) B(2, 2) / B(3, 1) = 2 * (1/6) / (1/3) = 1
    assert beta_ratio(1, 1, 1) == pytest.approx(1.0, rel=1e-15)


def test_moment_m_examples():
    p = ParamSet(0.7, 1.2, 1.5, 0.8, 1.1)
    assert moment_m(p, 2.0, 0) == 1.0
    assert moment_m(p, 2.0, 1) == pytest.approx(moments(p, 2.0).mean, rel=1e-12)
    assert moment_m(POISSON, 1.0, 3) == pytest.approx(5.0, rel=1e-13)
    assert moment_m(POISSON, 1.0, 3) == pytest.approx(bell_number(1, 1, 1, 3), rel=1e-15)
    with pytest.raises(DomainError):
        moment_m(p, 1.0, 31)


@pytest.mark.parametrize("sigma, lam", [(0.5, 1.0), (0.3, 2.0), (1.0, 0.7)])
@pytest.mark.parametrize("n", [0, 1, 4, 12])
def test_stretched_poisson_closed_form(sigma, lam, n):
    p = ParamSet(1, 1, 1, sigma, lam)
    for t in (0.2, 1.0, 7.0):
        x = lam * t**sigma
        assert pmf(p, t, n) == pytest.approx(float(poisson_ref(x, n)), rel=1e-13)


@pytest.mark.parametrize("mu", [0.5, 0.75, 0.95])
@pytest.mark.parametrize("n", [0, 2, 9])
def test_fractional_poisson_series(mu, n):
    p = ParamSet(mu, 1, 1, mu, 1.0)
    for t in (0.5, 2.0):
        x = t**mu
        assert pmf(p, t, n) == pytest.approx(float(fractional_poisson_ref(mu, x, n)), rel=1e-12)


def test_rate_integrates_to_cumulative_intensity():
    p = ParamSet(1, 1, 1, 0.6, 1.7)
    for t in (0.3, 1.0, 4.0):
        # substitute s = u^(1/sigma) to remove the endpoint singularity of the rate
        val, _ = integrate.quad(lambda u: rate(p, u ** (1 / p.sigma)) * u ** (1 / p.sigma - 1) / p.sigma, 0, t**p.sigma, epsabs=1e-14, epsrel=1e-13)
        assert val == pytest.approx(cumulative_intensity(p, t), rel=1e-10)
        # the stretched law is a non-homogeneous Poisson law with intensity Lambda(t)
        assert pmf(p, t, 2) == pytest.approx(cumulative_intensity(p, t) ** 2 / 2 * math.exp(-cumulative_intensity(p, t)), rel=1e-13)
