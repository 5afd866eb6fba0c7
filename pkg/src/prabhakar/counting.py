"""Fractional generalized counting distribution.

P(n, t) = Gamma(nu) (x^n / n!) (gamma)_n E^{gamma+n}_{mu, nu+n mu}(-x),
with x = lambda_sigma t^sigma, together with its generating functions and
moments. The Poisson law is the corner mu = nu = gamma = sigma = 1.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError
from .mlf import DEFAULT_POLICY, PrecisionPolicy, ShiftedGammaCache, _context, _normalized, beta_fn, gamma_fn

AUTO_MASS = 1 - 1e-12
AUTO_CAP = 100_000


@dataclass(frozen=True)
class ParamSet:
    """Fractality parameters and rate; ``lambda_sigma`` has units time^-sigma."""

    mu: float
    nu: float
    gamma: float
    sigma: float
    lambda_sigma: float = 1.0

    def __post_init__(self):
        vals = {k: float(v) for k, v in asdict(self).items()}
        if not all(math.isfinite(v) for v in vals.values()):
            raise DomainError("parameters must be finite")
        if not 0 < self.mu <= 1:
            raise DomainError(f"0 < mu <= 1 violated (mu={self.mu})")
        if not self.gamma > 0:
            raise DomainError(f"gamma > 0 violated (gamma={self.gamma})")
        if not self.nu >= self.mu * self.gamma:
            raise DomainError(
                f"nu >= mu*gamma violated (nu={self.nu}, mu*gamma={self.mu * self.gamma})"
            )
        if not 0 < self.sigma <= 1:
            raise DomainError(f"0 < sigma <= 1 violated (sigma={self.sigma})")
        if not self.lambda_sigma > 0:
            raise DomainError(f"lambda_sigma > 0 violated (lambda_sigma={self.lambda_sigma})")

    def scale(self, t: float) -> float:
        """lambda_sigma * t^sigma, the argument every quantity depends on."""
        if not t >= 0:
            raise DomainError(f"t must be non-negative, got {t}")
        return self.lambda_sigma * t**self.sigma

    def as_dict(self) -> dict:
        return asdict(self)


def _log_prefactor(p: ParamSet, x: float, n: int) -> float:
    # log[ Gamma(nu) x^n (gamma)_n / (n! Gamma(nu + n mu)) ] at 96 bits
    ctx = _context(96)
    mu, nu, g = ctx.mpf(p.mu), ctx.mpf(p.nu), ctx.mpf(p.gamma)
    lg = ctx.loggamma
    val = lg(nu) - lg(nu + n * mu) + lg(g + n) - lg(g) - lg(n + 1)
    if n:
        val += n * ctx.log(ctx.mpf(x))
    return float(val)


def _pmf_x(p: ParamSet, x: float, n: int, policy: PrecisionPolicy, cache=None) -> tuple[float, float]:
    """(probability, absolute error bound) at scale argument x."""
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    n = int(n)
    if x == 0:
        return (1.0 if n == 0 else 0.0), 0.0
    shared = (cache, n) if cache is not None else None
    r = _normalized(p.gamma + n, p.mu, p.nu + n * p.mu, -x, policy, shared)
    f = math.exp(_log_prefactor(p, x, n))
    val = r.value * f
    return val, r.abs_error_bound * f + abs(val) * 2e-16 * (n + 8)


def pmf(params: ParamSet, t: float, n: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Probability of exactly n counts in [0, t]."""
    return _pmf_x(params, params.scale(t), n, policy)[0]


def pmf_dimensionless(params: ParamSet, x: float, n: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """The same law with lambda_sigma t^sigma replaced by x^sigma."""
    if not x >= 0:
        raise DomainError(f"x must be non-negative, got {x}")
    return _pmf_x(params, x**params.sigma, n, policy)[0]


@dataclass
class PmfTable:
    params: ParamSet
    t: float
    probs: np.ndarray
    tail_bound: float
    abs_error: float = 0.0
    truncated: bool = False
    notes: list = field(default_factory=list)

    @property
    def n_max(self) -> int:
        return len(self.probs) - 1

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "p"])
        for n, p in enumerate(self.probs):
            w.writerow([n, f"{p:.17g}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "t": self.t,
            "n_max": self.n_max,
            "probs": [float(p) for p in self.probs],
            "tail_bound": self.tail_bound,
            "abs_error": self.abs_error,
            "truncated": self.truncated,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _moment_tail_bounds(params: ParamSet, x: float, kmax: int = 30) -> list[float]:
    """Raw moments <N^k>, k = 1..kmax, for Markov bounds on the tail."""
    from .combinatorics import stirling_table

    table = stirling_table(params.mu, params.nu, params.gamma, kmax)
    out = []
    for k in range(1, kmax + 1):
        val = math.fsum(table.value(k, l) * x**l for l in range(k + 1))
        if not math.isfinite(val):
            break
        out.append(val)
    return out


def markov_tail(moms: list[float], n: int) -> float:
    """Certified bound on P(N >= n) from raw moments: min_k <N^k> / n^k."""
    if n <= 0:
        return 1.0
    best = 1.0
    for k, mk in enumerate(moms, start=1):
        b = mk / float(n) ** k
        if b < best:
            best = b
    return best


def pmf_table(
    params: ParamSet,
    t: float,
    n_max: int | Literal["auto"] = "auto",
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> PmfTable:
    """Probabilities for n = 0..N.

    With ``n_max="auto"``, N is the first index at which the cumulative mass
    reaches 1 - 1e-12, or at which the moment (Markov) bound certifies that
    the remaining mass is below 1e-13 -- whichever comes first. The search is
    capped at 10^5 and ``truncated`` flags the cap.
    """
    x = params.scale(t)
    if x == 0:
        return PmfTable(params, t, np.array([1.0]), 0.0)
    cache = ShiftedGammaCache(params.mu, params.nu)
    probs: list[float] = []
    err = 0.0
    truncated = False
    if n_max == "auto":
        moms = _moment_tail_bounds(params, x)
        n = 0
        while True:
            p, e = _pmf_x(params, x, n, policy, cache)
            probs.append(p)
            err += e
            if math.fsum(probs) >= AUTO_MASS or markov_tail(moms, n + 1) <= 1e-13:
                break
            n += 1
            if n > AUTO_CAP:
                truncated = True
                break
    else:
        if int(n_max) < 0:
            raise DomainError("n_max must be non-negative")
        for n in range(int(n_max) + 1):
            p, e = _pmf_x(params, x, n, policy, cache)
            probs.append(p)
            err += e
    tail = max(0.0, 1.0 - math.fsum(probs))
    notes = ["cap reached before cumulative target"] if truncated else []
    return PmfTable(params, t, np.array(probs), tail, err, truncated, notes)


def pgf(params: ParamSet, t: float, s: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Probability generating function sum_n s^n P(n, t)."""
    x = params.scale(t)
    return _normalized(params.gamma, params.mu, params.nu, x * (s - 1), policy).value


def pgf_dimensionless(params: ParamSet, x: float, s: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    return _normalized(params.gamma, params.mu, params.nu, x**params.sigma * (s - 1), policy).value


def mgf(params: ParamSet, t: float, s: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Moment generating function sum_n exp(-s n) P(n, t); note the minus sign."""
    if not s >= 0:
        raise DomainError(f"s must be non-negative, got {s}")
    x = params.scale(t)
    return _normalized(params.gamma, params.mu, params.nu, x * math.expm1(-s), policy).value


def mgf_dimensionless(params: ParamSet, x: float, s: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    if not s >= 0:
        raise DomainError(f"s must be non-negative, got {s}")
    return _normalized(params.gamma, params.mu, params.nu, x**params.sigma * math.expm1(-s), policy).value


@dataclass(frozen=True)
class MomentSet:
    mean: float
    second_moment: float
    variance: float
    beta_ratio: float

    @property
    def variance_beta_form(self) -> float:
        """Variance written with the Beta-function ratio instead of Gammas."""
        return self.mean + self.mean**2 * (self.beta_ratio - 1)


def beta_ratio(mu: float, nu: float, gamma: float) -> float:
    """(1 + 1/gamma) B(mu+nu, mu+nu) / B(2mu+nu, nu)."""
    return (1 + 1 / gamma) * beta_fn(mu + nu, mu + nu) / beta_fn(2 * mu + nu, nu)


def moments(params: ParamSet, t: float) -> MomentSet:
    """Closed-form mean, second moment and variance of the count."""
    p = params
    x = p.scale(t)
    lgnu = gamma_fn(p.nu, log=True)
    c1 = p.gamma * math.exp(lgnu - gamma_fn(p.mu + p.nu, log=True))
    c2 = p.gamma * (p.gamma + 1) * math.exp(lgnu - gamma_fn(2 * p.mu + p.nu, log=True))
    mean = c1 * x
    second = mean + c2 * x * x
    return MomentSet(mean, second, second - mean * mean, beta_ratio(p.mu, p.nu, p.gamma))


def moment_m(params: ParamSet, t: float, m: int) -> float:
    """m-th raw moment as a polynomial in lambda_sigma t^sigma with fractional Stirling coefficients."""
    from .combinatorics import stirling_table

    if not 0 <= m <= 30:
        raise DomainError("moment order must lie in 0..30")
    x = params.scale(t)
    if m == 0:
        return 1.0
    table = stirling_table(params.mu, params.nu, params.gamma, m)
    return math.fsum(table.value(m, l) * x**l for l in range(m + 1))


def moment_sum(params: ParamSet, t: float, m: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """sum_n n^m P(n, t) by direct summation of the probability table.

    The automatic table is extended until the last weighted term n^m P(n, t)
    is negligible against the running sum, so the n^m weighting cannot hide
    truncated mass.
    """
    if m < 0 or int(m) != m:
        raise DomainError("moment order must be a non-negative integer")
    tab = pmf_table(params, t, "auto", policy)
    while True:
        w = np.arange(tab.n_max + 1, dtype=float) ** m * tab.probs
        total = math.fsum(w)
        if total == 0 or (len(w) > 2 and w[-1] <= 1e-18 * total and w[-1] <= w[-2]):
            return total
        if tab.n_max >= AUTO_CAP:
            return total
        tab = pmf_table(params, t, min(2 * tab.n_max + 10, AUTO_CAP), policy)


def rate(params: ParamSet, t: float) -> float:
    """Instantaneous rate sigma lambda t^(sigma-1) of the mu=nu=gamma=1 process."""
    if not t > 0:
        raise DomainError("rate is defined for t > 0")
    return params.sigma * params.lambda_sigma * t ** (params.sigma - 1)


def cumulative_intensity(params: ParamSet, t: float) -> float:
    return params.scale(t)
