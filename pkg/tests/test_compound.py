from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import ml_half_negative
from prabhakar import (
    DomainError,
    JumpLaw,
    ParamSet,
    compound_mean,
    compound_mgf,
    compound_mgf_from_g,
    make_rng,
    simulate_compound,
)

POISSON = ParamSet(1, 1, 1, 1, 1)
FRAC = ParamSet(0.5, 1, 1, 0.5, 1)
GENERAL = ParamSet(0.8, 1.0, 1.2, 0.8, 1.0)


def test_mgf_examples():
    # unit jumps, Poisson(1): exp(e^s - 1) at s = ln 2 is e
    assert compound_mgf(POISSON, 1.0, JumpLaw.constant(1), math.log(2)) == pytest.approx(math.e, rel=1e-14)
    assert compound_mgf(GENERAL, 1.0, JumpLaw.gaussian(0.3, 2.0), 0.0) == pytest.approx(1.0, rel=1e-15)
    # g = 0 leaves the no-jump probability E_{1/2}(-1)
    assert compound_mgf_from_g(FRAC, 1.0, 0.0) == pytest.approx(ml_half_negative(1.0), rel=1e-13)


@pytest.mark.parametrize(
    "params, t, jump, expected",
    [
        (POISSON, 3.0, JumpLaw.gaussian(0.0, 1.0), 0.0),
        (POISSON, 1.0, JumpLaw.constant(1.0), 1.0),
        (FRAC, 1.0, JumpLaw.uniform(0.0, 1.0), 0.5 / math.gamma(1.5)),
        (POISSON, 2.0, JumpLaw.exponential(4.0), 0.5),
        (POISSON, 2.0, JumpLaw.empirical([1, 2, 6]), 6.0),
    ],
)
def test_mean_examples(params, t, jump, expected):
    assert compound_mean(params, t, jump) == pytest.approx(expected, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("jump", [JumpLaw.gaussian(0.4, 1.0), JumpLaw.exponential(2.0), JumpLaw.uniform(-1.0, 3.0)])
@pytest.mark.parametrize("params", [POISSON, GENERAL, ParamSet(0.6, 1.5, 2.0, 0.4, 0.5)])
def test_mgf_derivative_gives_mean(params, jump):
    h = 1e-4
    f = lambda s: compound_mgf(params, 1.5, jump, s)  # noqa: E731
    fd = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)
    assert fd == pytest.approx(compound_mean(params, 1.5, jump), rel=1e-7)


def test_jump_mgf_closed_forms():
    assert JumpLaw.gaussian(1.0, 2.0).mgf(0.5) == pytest.approx(math.exp(0.5 + 0.5), rel=1e-15)
    assert JumpLaw.exponential(2.0).mgf(1.0) == pytest.approx(2.0, rel=1e-15)
    assert JumpLaw.uniform(0.0, 1.0).mgf(1.0) == pytest.approx(math.e - 1, rel=1e-14)
    assert JumpLaw.uniform(0.0, 1.0).mgf(0.0) == 1.0
    with pytest.raises(DomainError):
        JumpLaw.exponential(2.0).mgf(2.0)


@pytest.mark.parametrize(
    "kind, params",
    [("constant", ()), ("uniform", (1.0, 1.0)), ("gaussian", (0.0, -1.0)), ("exponential", (0.0,)), ("cauchy", (0.0, 1.0)), ("empirical", ())],
)
def test_jump_law_validation(kind, params):
    with pytest.raises(DomainError):
        JumpLaw(kind, params)


def test_simulation_matches_poisson_mean():
    r = simulate_compound(POISSON, 3.0, JumpLaw.gaussian(1.0, 0.5), 10**5, seed=8)
    assert r.consistent
    assert abs(r.empirical_mean - 3.0) <= 4 * r.std_error


def test_simulation_general_mean():
    r = simulate_compound(GENERAL, 2.0, JumpLaw.exponential(0.5), 10**5, seed=9)
    assert abs(r.empirical_mean - r.analytic_mean) <= 4 * r.std_error


def test_constant_unit_jumps_equal_counts():
    r = simulate_compound(GENERAL, 1.0, JumpLaw.constant(1.0), 5000, seed=3)
    assert np.array_equal(r.samples, r.counts.astype(float))


def test_zero_time_gives_zero():
    r = simulate_compound(GENERAL, 0.0, JumpLaw.gaussian(5.0, 1.0), 100, seed=1)
    assert np.all(r.samples == 0) and r.consistent


def test_simulation_reproducible():
    a = simulate_compound(GENERAL, 1.0, JumpLaw.uniform(0, 2), 2000, seed=21)
    b = simulate_compound(GENERAL, 1.0, JumpLaw.uniform(0, 2), 2000, seed=21)
    assert a.to_csv() == b.to_csv()
    c = simulate_compound(GENERAL, 1.0, JumpLaw.uniform(0, 2), 2000, seed=22)
    assert not np.array_equal(a.samples, c.samples)


def test_n_paths_validation():
    with pytest.raises(DomainError):
        simulate_compound(POISSON, 1.0, JumpLaw.constant(1), 0)


def test_from_csv(tmp_path):
    f = tmp_path / "jumps.csv"
    f.write_text("size,weight\n1.5,0\n2.5,1\n4.0,2\n")
    law = JumpLaw.from_csv(f, "size")
    assert law.kind == "empirical" and law.params == (1.5, 2.5, 4.0)
    assert JumpLaw.from_csv(f, 1).params == (0.0, 1.0, 2.0)
    assert law.mean == pytest.approx(8.0 / 3, rel=1e-15)
    draws = law.sample(make_rng(0), 1000)
    assert set(np.unique(draws)) <= {1.5, 2.5, 4.0}
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DomainError):
        JumpLaw.from_csv(empty)
