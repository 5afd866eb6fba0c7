"""Fractional generalized Bell polynomials/numbers and Stirling numbers.

Every fractional Stirling number of the second kind factors as a real
prefactor depending only on l times the classical integer S(m, l):

    S^gamma_{mu,nu}(m, l) = Gamma(nu) (gamma)_l / Gamma(mu l + nu) * S(m, l)

because d^m/ds^m (e^s - 1)^l at s = 0 equals l! S(m, l). Bell polynomials
are then finite sums over l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import DomainError
from .mlf import DEFAULT_POLICY, PrecisionPolicy, _normalized, gamma_fn, pochhammer

CLASSIC_MAX = 200
REAL_MAX = 30


def _check_params(mu: float, nu: float, gamma: float) -> None:
    if not 0 < mu <= 1:
        raise DomainError(f"0 < mu <= 1 violated (mu={mu})")
    if not gamma > 0:
        raise DomainError(f"gamma > 0 violated (gamma={gamma})")
    if not nu >= mu * gamma:
        raise DomainError(f"nu >= mu*gamma violated (nu={nu}, mu*gamma={mu * gamma})")


@lru_cache(maxsize=None)
def _stirling_row(m: int) -> tuple[int, ...]:
    if m == 0:
        return (1,)
    prev = _stirling_row(m - 1)
    row = [0] * (m + 1)
    for l in range(1, m + 1):
        left = prev[l] if l < len(prev) else 0
        row[l] = l * left + prev[l - 1]
    return tuple(row)


def classic_stirling(m: int, l: int) -> int:
    """Stirling number of the second kind S(m, l), exact."""
    if not (isinstance(m, int) and isinstance(l, int)) or not 0 <= m <= CLASSIC_MAX or l < 0:
        raise DomainError(f"indices must satisfy 0 <= l, 0 <= m <= {CLASSIC_MAX}")
    if l > m:
        return 0
    # build rows bottom-up so the recursion depth stays bounded
    for k in range(0, m, 50):
        _stirling_row(k)
    return _stirling_row(m)[l]


def stirling_prefactor(mu: float, nu: float, gamma: float, l: int) -> float:
    """Gamma(nu) (gamma)_l / Gamma(mu l + nu)."""
    if l == 0:
        return 1.0
    if nu < 171 and mu * l + nu < 171:
        return gamma_fn(nu) * pochhammer(gamma, l) / gamma_fn(mu * l + nu)
    return math.exp(
        gamma_fn(nu, log=True) + pochhammer(gamma, l, log=True) - gamma_fn(mu * l + nu, log=True)
    )


def frac_stirling(mu: float, nu: float, gamma: float, m: int, l: int) -> float:
    """Fractional generalized Stirling number of the second kind."""
    _check_params(mu, nu, gamma)
    if not 0 <= m <= REAL_MAX:
        raise DomainError(f"m must lie in 0..{REAL_MAX} for real-valued Stirling numbers")
    if l < 0 or l > m:
        return 0.0
    s = classic_stirling(m, l)
    if s == 0:
        return 0.0
    return stirling_prefactor(mu, nu, gamma, l) * s


@dataclass(frozen=True)
class StirlingTable:
    mu: float
    nu: float
    gamma: float
    max_m: int
    entries: dict = field(repr=False)

    def classic(self, m: int, l: int) -> int:
        return self.entries[m, l][0] if (m, l) in self.entries else 0

    def prefactor(self, l: int) -> float:
        return self.entries[l, l][1]

    def value(self, m: int, l: int) -> float:
        if (m, l) not in self.entries:
            return 0.0
        c, p = self.entries[m, l]
        return p * c if c else 0.0

    def rows(self):
        for m in range(self.max_m + 1):
            for l in range(m + 1):
                yield m, l, self.classic(m, l), self.entries[m, l][1], self.value(m, l)


def stirling_table(mu: float, nu: float, gamma: float, max_m: int) -> StirlingTable:
    _check_params(mu, nu, gamma)
    if not 0 <= max_m <= REAL_MAX:
        raise DomainError(f"max_m must lie in 0..{REAL_MAX}")
    pref = [stirling_prefactor(mu, nu, gamma, l) for l in range(max_m + 1)]
    entries = {(m, l): (classic_stirling(m, l), pref[l]) for m in range(max_m + 1) for l in range(m + 1)}
    return StirlingTable(mu, nu, gamma, max_m, entries)


@dataclass(frozen=True)
class BellValue:
    order: int
    x: float
    value: float


def bell_polynomial(mu: float, nu: float, gamma: float, x: float, m: int) -> BellValue:
    """B^gamma_{mu,nu}(x, m) = sum_l S^gamma_{mu,nu}(m, l) x^l."""
    _check_params(mu, nu, gamma)
    if not x >= 0:
        raise DomainError("x must be non-negative")
    if not 0 <= m <= REAL_MAX:
        raise DomainError(f"m must lie in 0..{REAL_MAX}")
    if m == 0:
        return BellValue(0, x, 1.0)
    val = math.fsum(frac_stirling(mu, nu, gamma, m, l) * x**l for l in range(1, m + 1))
    return BellValue(m, x, val)


def bell_number(mu: float, nu: float, gamma: float, m: int) -> float:
    return bell_polynomial(mu, nu, gamma, 1.0, m).value


def bell_polynomial_series(
    mu: float, nu: float, gamma: float, x: float, m: int, policy: PrecisionPolicy = DEFAULT_POLICY
) -> float:
    """Dobinski-type sum over n of n^m times the counting probabilities at x.

    Independent of the Stirling construction; used to cross-check it.
    """
    from .counting import ParamSet, moment_sum

    if m == 0:
        return 1.0
    return moment_sum(ParamSet(mu, nu, gamma, 1.0, 1.0), x, m, policy)


def bell_generating_fn(mu: float, nu: float, gamma: float, s: float, x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """sum_m s^m/m! B(x, m) = Gamma(nu) E^gamma_{mu,nu}(x (e^s - 1))."""
    _check_params(mu, nu, gamma)
    return _normalized(gamma, mu, nu, x * math.expm1(s), policy).value


def stirling_generating_fns(
    mu: float, nu: float, gamma: float, s: float, t: float, l: int, policy: PrecisionPolicy = DEFAULT_POLICY
) -> tuple[float, float]:
    """(column generating function at l, bivariate generating function at t)."""
    _check_params(mu, nu, gamma)
    if l < 0:
        raise DomainError("l must be non-negative")
    e = math.expm1(s)
    col = stirling_prefactor(mu, nu, gamma, l) * e**l / math.factorial(l)
    full = _normalized(gamma, mu, nu, t * e, policy).value
    return col, full
