"""Three-parameter (Prabhakar) Mittag-Leffler function and Gamma helpers.

The evaluator sums the defining power series

    E^g_{mu,v}(z) = sum_m (g)_m z^m / (m! Gamma(mu m + v))

with a certified geometric tail bound and an a-priori rounding bound. It
starts in native double precision and restarts at doubled precision (via
mpmath) whenever cancellation between terms would eat into the requested
tolerance. Derivatives are reduced to undifferentiated evaluations with

    d^n/dz^n E^g_{mu,v}(z) = (g)_n E^{g+n}_{mu,v+n mu}(z).

Internally everything is computed for the *normalized* series
Gamma(v) E^g_{mu,v}(z), whose leading term is exactly one; this keeps the
terms in floating-point range even when Gamma(v) itself is astronomically
large.
"""

from __future__ import annotations

import cmath
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import mpmath

from .errors import ConvergenceError, DomainError, PrecisionError

__all__ = [
    "MLQuery",
    "MLResult",
    "PrecisionPolicy",
    "DEFAULT_POLICY",
    "gamma_fn",
    "pochhammer",
    "beta_fn",
    "ml3_eval",
    "ml3_eval_batch",
    "normalized_prabhakar",
    "prabhakar",
]

DOUBLE_BITS = 53
_EPS = 2.0**-DOUBLE_BITS
_GAMMA_MAX = 171.0  # math.gamma overflows just above 171.62
_POCH_PRODUCT_MAX = 10_000
_GUARD_BITS = 8
# Truncate well below the tolerance: the extra terms are cheap because the
# tail decays super-geometrically, and it leaves the budget to rounding.
_TRUNCATION_FRACTION = 2.0**-12


def _check_positive(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be a finite positive number, got {x!r}")
    return x


def gamma_fn(x: float, log: bool = False) -> float:
    """Gamma(x) for x > 0, or log Gamma(x) when ``log`` is true.

    Values above ~171.6 overflow a double; request ``log=True`` there.
    """
    x = _check_positive("x", x)
    if log:
        return math.lgamma(x)
    if x > _GAMMA_MAX + 0.6:
        raise OverflowError(f"Gamma({x}) overflows a double; use log=True")
    return math.gamma(x)


def pochhammer(a: float, m: int, log: bool = False) -> float:
    """Rising factorial (a)_m = a (a+1) ... (a+m-1).

    Uses the product recurrence for m up to 10^4, so moderate m never
    overflows through an intermediate Gamma value.
    """
    a = _check_positive("a", a)
    if m < 0 or int(m) != m:
        raise DomainError(f"m must be a non-negative integer, got {m!r}")
    m = int(m)
    if m <= _POCH_PRODUCT_MAX:
        if log:
            return math.fsum(math.log(a + k) for k in range(m))
        p = 1.0
        for k in range(m):
            p *= a + k
        return p
    lp = math.lgamma(a + m) - math.lgamma(a)
    return lp if log else math.exp(lp)


def beta_fn(a: float, b: float) -> float:
    """Euler Beta function through log-Gamma differences."""
    a = _check_positive("a", a)
    b = _check_positive("b", b)
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


@dataclass(frozen=True)
class PrecisionPolicy:
    target_rel_tol: float = 1e-12
    base_precision_bits: int = DOUBLE_BITS
    max_precision_bits: int = 1024
    max_terms: int = 10**6

    def __post_init__(self):
        if not 0 < self.target_rel_tol < 1:
            raise DomainError("target_rel_tol must lie in (0, 1)")
        if self.base_precision_bits < DOUBLE_BITS:
            raise DomainError("base_precision_bits must be at least 53 (native double)")
        if self.base_precision_bits > self.max_precision_bits:
            raise DomainError("base_precision_bits exceeds max_precision_bits")
        if self.max_terms < 1:
            raise DomainError("max_terms must be positive")


DEFAULT_POLICY = PrecisionPolicy()


@dataclass(frozen=True)
class MLQuery:
    mu: float
    nu: float
    gamma: float
    z: complex
    deriv_order: int = 0

    def __post_init__(self):
        for name in ("mu", "nu", "gamma"):
            _check_positive(name, getattr(self, name))
        z = complex(self.z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError(f"z must be finite, got {self.z!r}")
        if self.deriv_order < 0 or int(self.deriv_order) != self.deriv_order:
            raise DomainError("deriv_order must be a non-negative integer")


@dataclass(frozen=True)
class MLResult:
    value: complex
    abs_error_bound: float
    terms_used: int
    precision_bits_used: int
    escalated: bool


class _Pass(NamedTuple):
    value: float | complex
    bound: float
    terms: int
    cancellation_bits: float


_local = threading.local()


def _context(prec: int) -> mpmath.ctx_mp.MPContext:
    # mpmath's global context is shared mutable state; keep one per thread.
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = _local.ctx = mpmath.MPContext()
    ctx.prec = prec
    return ctx


def _ratio_bound(az: float, g: float, mu: float, v: float, m: int) -> float:
    """Upper bound on |t_{k+1}/t_k| valid for every k >= m.

    (g+k)/(k+1) is monotone towards one and Gamma(x)/Gamma(x+mu) is
    decreasing in x > 0, so the value at k = m (with the first factor
    floored at one) dominates all later ratios.
    """
    x = mu * m + v
    gr = math.exp(math.lgamma(x) - math.lgamma(x + mu))
    return az * max(1.0, (g + m) / (m + 1)) * gr * (1 + 1e-9)


def _double_pass(g, mu, v, z, tol, max_terms):
    """One summation sweep in native double; None if an overflow occurs."""
    cplx = isinstance(z, complex)
    az = abs(z)
    lgv = math.lgamma(v)
    gv = math.gamma(v) if v < _GAMMA_MAX else None
    re_parts, im_parts = [], []
    c = 1.0  # (g)_m z^m / m!
    t = 1.0
    maxabs = 0.0
    naive = 0.0
    rounding = 0.0
    m = 0
    while True:
        at = abs(t)
        if not math.isfinite(at):
            return None
        if cplx:
            re_parts.append(t.real)
            im_parts.append(t.imag)
        else:
            re_parts.append(t)
        naive += t
        maxabs = max(maxabs, at)
        q = _ratio_bound(az, g, mu, v, m)
        if q < 0.5:
            tail = at * q / (1 - q)
            if tail == 0.0 or tail <= _TRUNCATION_FRACTION * tol * abs(naive):
                break
        m += 1
        if m >= max_terms:
            partial = complex(naive) if cplx else naive
            raise ConvergenceError(
                f"series needed more than {max_terms} terms", partial, m
            )
        c = c * z * ((g + m - 1) / m)
        if c == 0:
            t = 0.0
            kappa = 0.0
        else:
            x = mu * m + v
            if gv is not None and x < _GAMMA_MAX:
                t = c * (gv / math.gamma(x))
                kappa = 6 * m + 64
            else:
                ac = abs(c)
                if not math.isfinite(ac):
                    return None
                lgx = math.lgamma(x)
                lc = math.log(ac)
                t = (c / ac) * math.exp(lc + lgv - lgx)
                kappa = 6 * m + 16 + 4 * (abs(lgv) + abs(lgx) + abs(lc))
        rounding += abs(t) * kappa
    value = math.fsum(re_parts)
    if cplx:
        value = complex(value, math.fsum(im_parts))
    av = abs(value)
    bound = tail + rounding * _EPS + (len(re_parts) + 2) * _EPS * av
    cancel = math.inf if av == 0 else math.log2(maxabs / av) if maxabs > 0 else 0.0
    return _Pass(value, bound, m + 1, cancel)


def _mp_pass(g, mu, v, z, tol, max_terms, prec, shared=None):
    """One summation sweep at ``prec`` bits using mpmath."""
    ctx = _context(prec)
    cplx = isinstance(z, complex)
    az = abs(z)
    zz = ctx.mpc(z) if cplx else ctx.mpf(z)
    G, MU, V = ctx.mpf(g), ctx.mpf(mu), ctx.mpf(v)
    unit_mu = mu == 1.0 and shared is None
    if shared is not None:
        cache, shift = shared
        inv_gv = 1 / cache.rgamma(ctx, prec, shift)
    else:
        gv = ctx.gamma(V)
    terms = []
    c = ctx.one
    ratio = ctx.one  # Gamma(v) / Gamma(mu m + v)
    t = ctx.one
    maxabs = ctx.zero
    naive = ctx.zero
    rounding = ctx.zero
    m = 0
    while True:
        at = abs(t)
        terms.append(t)
        naive += t
        if at > maxabs:
            maxabs = at
        q = _ratio_bound(az, g, mu, v, m)
        if q < 0.5:
            tail = at * q / (1 - q)
            if tail == 0 or tail <= _TRUNCATION_FRACTION * tol * abs(naive):
                break
        m += 1
        if m >= max_terms:
            raise ConvergenceError(
                f"series needed more than {max_terms} terms", complex(naive), m
            )
        c = c * zz * (G + (m - 1)) / m
        if unit_mu:
            ratio = ratio / (V + (m - 1))
        elif shared is not None:
            ratio = cache.rgamma(ctx, prec, shift + m) * inv_gv
        else:
            ratio = gv * ctx.rgamma(MU * m + V)
        t = c * ratio
        rounding += abs(t) * (6 * m + 40)
    s = ctx.fsum(terms)
    av = abs(s)
    ulp = ctx.ldexp(ctx.one, -prec)
    bound_mp = tail + rounding * ulp + len(terms) * ulp * av
    cancel = math.inf if av == 0 else float(ctx.log(maxabs / av, 2))
    value = complex(s) if cplx else float(s)
    bound = float(bound_mp) + abs(value) * _EPS
    return _Pass(value, bound, m + 1, cancel)


class _Normalized(NamedTuple):
    value: float | complex
    abs_error_bound: float
    terms_used: int
    precision_bits_used: int
    escalated: bool


def _as_scalar(z) -> float | complex:
    z = complex(z)
    return z.real if z.imag == 0 else z


class ShiftedGammaCache:
    """Memo of 1/Gamma(nu + mu j) per working precision.

    The derivative family E^{gamma+n}_{mu,nu+n mu}, n = 0, 1, ..., reuses the
    same reciprocal Gamma values at shifted indices; sharing them makes a
    whole probability table cost little more than one evaluation.
    """

    def __init__(self, mu: float, nu: float):
        self.mu = mu
        self.nu = nu
        self._store: dict[tuple[int, int], object] = {}

    def rgamma(self, ctx, prec: int, j: int):
        key = (prec, j)
        val = self._store.get(key)
        if val is None:
            val = self._store[key] = ctx.rgamma(ctx.mpf(self.nu) + j * ctx.mpf(self.mu))
        return val


def _normalized(g: float, mu: float, v: float, z, policy: PrecisionPolicy, shared=None) -> _Normalized:
    """Gamma(v) E^g_{mu,v}(z) with precision escalation.

    ``shared`` is an optional ``(ShiftedGammaCache, n)`` pair declaring that
    v == cache.nu + n * cache.mu.
    """
    z = _as_scalar(z)
    tol = policy.target_rel_tol
    allowed = lambda prec: prec - (-math.log2(tol)) - _GUARD_BITS  # noqa: E731
    prec = policy.base_precision_bits
    escalated = False
    while True:
        if prec <= DOUBLE_BITS:
            res = _double_pass(g, mu, v, z, tol, policy.max_terms)
        else:
            res = _mp_pass(g, mu, v, z, tol, policy.max_terms, prec, shared)
        if res is not None:
            finite = cmath.isfinite(res.value) and math.isfinite(res.bound)
            meets = finite and res.value != 0 and res.bound <= tol * abs(res.value)
            if meets and (res.cancellation_bits <= allowed(prec) or prec >= policy.max_precision_bits):
                return _Normalized(res.value, res.bound, res.terms, prec, escalated)
        if prec >= policy.max_precision_bits:
            value = res.value if res is not None else math.nan
            bound = res.bound if res is not None else math.inf
            raise PrecisionError(
                f"tolerance {tol:g} unmet at {prec} bits "
                f"(error bound {bound:.3g}, |value| {abs(value):.3g})",
                value,
                bound,
                prec,
            )
        # Keep doubling, but skip levels the measured cancellation already rules out.
        needed = res.cancellation_bits if res is not None and res.value != 0 else 0.0
        prec = min(2 * prec, policy.max_precision_bits)
        while prec < policy.max_precision_bits and allowed(prec) < needed:
            prec = min(2 * prec, policy.max_precision_bits)
        escalated = True


def normalized_prabhakar(gamma: float, mu: float, nu: float, z, policy: PrecisionPolicy = DEFAULT_POLICY) -> MLResult:
    """Gamma(nu) * E^gamma_{mu,nu}(z).

    Every generating function in the library has this form; it equals one at
    z = 0 and never overflows through the Gamma(nu) factor.
    """
    MLQuery(mu, nu, gamma, z)
    r = _normalized(gamma, mu, nu, z, policy)
    return MLResult(complex(r.value), r.abs_error_bound, r.terms_used, r.precision_bits_used, r.escalated)


def _log_scale(gamma: float, mu: float, nu: float, n: int) -> tuple[float, float]:
    """log of (gamma)_n / Gamma(nu + n mu) and of 1 / Gamma(nu + n mu)."""
    ctx = _context(96)
    lg = ctx.loggamma(ctx.mpf(nu) + n * ctx.mpf(mu))
    lp = ctx.loggamma(ctx.mpf(gamma) + n) - ctx.loggamma(ctx.mpf(gamma)) if n else ctx.zero
    return float(lp - lg), float(-lg)


def ml3_eval(q: MLQuery, policy: PrecisionPolicy = DEFAULT_POLICY) -> MLResult:
    """Evaluate the ``deriv_order``-th z-derivative of E^gamma_{mu,nu}(z)."""
    n = int(q.deriv_order)
    g = q.gamma + n
    v = q.nu + n * q.mu
    r = _normalized(g, q.mu, v, q.z, policy)
    log_factor, _ = _log_scale(q.gamma, q.mu, q.nu, n)
    factor = math.exp(log_factor)
    return MLResult(
        value=complex(r.value) * factor,
        abs_error_bound=r.abs_error_bound * factor + abs(r.value) * factor * 4 * _EPS,
        terms_used=r.terms_used,
        precision_bits_used=r.precision_bits_used,
        escalated=r.escalated,
    )


def prabhakar(mu: float, nu: float, gamma: float, z, deriv_order: int = 0, policy: PrecisionPolicy = DEFAULT_POLICY) -> complex | float:
    """Convenience wrapper returning only the value (real for real z)."""
    res = ml3_eval(MLQuery(mu, nu, gamma, z, deriv_order), policy)
    return res.value.real if complex(z).imag == 0 else res.value


def _safe_eval(q: MLQuery, policy: PrecisionPolicy):
    try:
        return ml3_eval(q, policy)
    except (ArithmeticError, ValueError) as exc:
        return exc


def ml3_eval_batch(
    queries: Sequence[MLQuery],
    policy: PrecisionPolicy = DEFAULT_POLICY,
    max_workers: int | None = None,
) -> list[MLResult | Exception]:
    """Evaluate many queries; a failing query yields its exception in place.

    Invalid queries can be passed as a ``(mu, nu, gamma, z, deriv_order)``
    tuple so that construction errors are isolated per slot as well.
    """

    def one(q):
        if not isinstance(q, MLQuery):
            try:
                q = MLQuery(*q)
            except (ValueError, TypeError) as exc:
                return exc
        return _safe_eval(q, policy)

    if not max_workers or max_workers <= 1:
        return [one(q) for q in queries]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, queries))


def principal_power(z: complex, p: float) -> complex:
    """z**p on the principal branch (arg in (-pi, pi]); 0**p = 0 for p > 0."""
    if z == 0:
        return 0j
    return cmath.exp(p * cmath.log(z))
