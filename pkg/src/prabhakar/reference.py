"""Slow brute-force references in mpmath, independent of the production evaluator.

Each function sums its defining series term by term (each term from a fresh
Gamma/rgamma call, no recurrences, no escalation logic) at a decimal
precision sized from the largest term, and repeats at a higher precision
until two runs agree. Used by the verification suite and tests only.
"""

from __future__ import annotations

import mpmath


def _series(term, dps0: int = 30, max_terms: int = 200_000):
    """Sum term(m, mp) for m = 0, 1, ... until terms are negligible."""
    prev = None
    dps = dps0
    while True:
        ctx = mpmath.MPContext()
        ctx.dps = dps
        s = ctx.zero
        biggest = ctx.zero
        small_run = 0
        for m in range(max_terms):
            t = term(m, ctx)
            s += t
            at = abs(t)
            if at > biggest:
                biggest = at
            if s != 0 and at < abs(s) * ctx.mpf(10) ** (-dps) and m > 4:
                small_run += 1
                if small_run >= 3:
                    break
            else:
                small_run = 0
        else:
            raise ArithmeticError("reference series did not converge")
        lost = 0 if s == 0 or biggest == 0 else int(ctx.log10(biggest / abs(s))) + 1
        if prev is not None and s != 0 and abs(s - prev) <= abs(s) * ctx.mpf(10) ** (-25):
            return s
        prev = s
        dps = max(2 * dps, dps0 + lost + 25)
        if dps > 20_000:
            raise ArithmeticError("reference needs more than 20000 digits")


def prabhakar_ref(gamma, mu, nu, z):
    """E^gamma_{mu,nu}(z) as an mpmath number."""

    def term(m, ctx):
        g, a, b, zz = ctx.mpf(gamma), ctx.mpf(mu), ctx.mpf(nu), ctx.mpmathify(z)
        return ctx.rf(g, m) * zz**m / (ctx.factorial(m) * ctx.gamma(a * m + b))

    return _series(term)


def pmf_ref(mu, nu, gamma, x, n):
    """Gamma(nu) x^n/n! (gamma)_n E^{gamma+n}_{mu,nu+n mu}(-x), via the double series."""

    def term(k, ctx):
        # coefficient of x^(n+k) in the power-series form of the probability
        g, a, b, xx = ctx.mpf(gamma), ctx.mpf(mu), ctx.mpf(nu), ctx.mpf(x)
        return (
            ctx.gamma(b)
            * ctx.rf(g, n + k)
            / (ctx.factorial(n) * ctx.factorial(k))
            * (-1) ** k
            * xx ** (n + k)
            / ctx.gamma(a * (n + k) + b)
        )

    return _series(term)


def poisson_ref(x, n):
    ctx = mpmath.MPContext()
    ctx.dps = 50
    xx = ctx.mpf(x)
    return xx**n / ctx.factorial(n) * ctx.exp(-xx)


def fractional_poisson_ref(mu, x, n):
    """(x^n/n!) sum_k (k+n)!/k! (-x)^k / Gamma(mu(k+n)+1)."""

    def term(k, ctx):
        a, xx = ctx.mpf(mu), ctx.mpf(x)
        return (
            xx**n
            / ctx.factorial(n)
            * ctx.factorial(k + n)
            / ctx.factorial(k)
            * (-xx) ** k
            / ctx.gamma(a * (k + n) + 1)
        )

    return _series(term)
