"""Interarrival-time law: survival, density, Weibull moments and samplers.

The survival function of the waiting time is the zero-count probability,
S(tau) = Gamma(nu) E^gamma_{mu,nu}(-lambda_sigma tau^sigma), and the density
is psi = -dS/dtau. At mu = nu = gamma = 1 this is the Weibull
(stretched-exponential) law, which is sampled by its analytic inverse.

Random numbers come from numpy's Philox-4x64 counter-based generator keyed
by a 64-bit seed. Independent streams use the key ``seed ^ splitmix64(k)``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .counting import ParamSet, pmf_table
from .errors import DomainError, PrecisionError, SamplerError
from .mlf import DEFAULT_POLICY, PrecisionPolicy, ShiftedGammaCache, _normalized, beta_fn, gamma_fn

_MASK64 = (1 << 64) - 1
_U_SCALE = 2.0**-53


# -- random streams ---------------------------------------------------------


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 mixer; used to hash stream indices."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _check_seed(seed: int) -> int:
    if int(seed) != seed or not 0 <= int(seed) <= _MASK64:
        raise DomainError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return int(seed)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for ``seed``; stream k > 0 is keyed by seed ^ splitmix64(k)."""
    seed = _check_seed(seed)
    key = seed if stream == 0 else seed ^ splitmix64(int(stream))
    return np.random.Generator(np.random.Philox(key=key))


def open_uniforms(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    k = rng.integers(0, 1 << 53, size=count, dtype=np.int64)
    return (k.astype(np.float64) + 0.5) * _U_SCALE


# -- the law ----------------------------------------------------------------


@dataclass(frozen=True)
class InterarrivalLaw:
    params: ParamSet

    @property
    def is_weibull(self) -> bool:
        p = self.params
        return p.mu == 1 and p.nu == 1 and p.gamma == 1


def _as_law(law) -> InterarrivalLaw:
    if isinstance(law, InterarrivalLaw):
        return law
    if isinstance(law, ParamSet):
        return InterarrivalLaw(law)
    raise TypeError("expected an InterarrivalLaw or ParamSet")


def _small_deficit(p: ParamSet, x: float) -> float:
    """1 - S for small x, summed from the first term on so no digits cancel."""
    # term m of S - 1 is Gamma(nu) (gamma)_m (-x)^m / (m! Gamma(nu + mu m))
    lg_nu = math.lgamma(p.nu)
    terms = []
    c = 1.0
    for m in range(1, 60):
        c *= -x * (p.gamma + m - 1) / m
        t = c * math.exp(lg_nu - math.lgamma(p.nu + p.mu * m))
        terms.append(t)
        if abs(t) < 1e-18 * abs(terms[0]):
            break
    return -math.fsum(terms)


_DEFICIT_SWITCH = 0.05


def survival(law, tau: float, policy: PrecisionPolicy = DEFAULT_POLICY, cache: ShiftedGammaCache | None = None) -> float:
    """P(waiting time >= tau)."""
    p = _as_law(law).params
    if not tau >= 0:
        raise DomainError(f"tau must be non-negative, got {tau}")
    x = p.scale(tau)
    if x == 0:
        return 1.0
    shared = (cache, 0) if cache is not None else None
    return _normalized(p.gamma, p.mu, p.nu, -x, policy, shared).value


def survival_deficit(law, tau: float, policy: PrecisionPolicy = DEFAULT_POLICY, cache=None) -> float:
    """1 - survival(tau), accurate even when it is far below machine epsilon."""
    p = _as_law(law).params
    x = p.scale(tau)
    if x == 0:
        return 0.0
    if x <= _DEFICIT_SWITCH:
        return _small_deficit(p, x)
    return 1.0 - survival(law, tau, policy, cache)


def density(law, tau: float, policy: PrecisionPolicy = DEFAULT_POLICY, cache: ShiftedGammaCache | None = None) -> float:
    """psi(tau) = gamma sigma lambda tau^(sigma-1) Gamma(nu) E^{gamma+1}_{mu,nu+mu}(-lambda tau^sigma)."""
    p = _as_law(law).params
    if not tau > 0:
        raise DomainError(f"density is defined for tau > 0, got {tau}")
    x = p.scale(tau)
    shared = (cache, 1) if cache is not None else None
    r = _normalized(p.gamma + 1, p.mu, p.nu + p.mu, -x, policy, shared)
    pref = p.gamma * p.sigma * p.lambda_sigma * tau ** (p.sigma - 1)
    return pref * math.exp(math.lgamma(p.nu) - math.lgamma(p.nu + p.mu)) * r.value


# -- Weibull special case -----------------------------------------------------


def _check_weibull(sigma: float, lambda_sigma: float) -> None:
    if not 0 < sigma <= 1:
        raise DomainError(f"0 < sigma <= 1 violated (sigma={sigma})")
    if not lambda_sigma > 0:
        raise DomainError(f"lambda_sigma > 0 violated (lambda_sigma={lambda_sigma})")


def weibull_moment(sigma: float, lambda_sigma: float, k: int) -> float:
    """<tau^k> = (k/sigma) Gamma(k/sigma) / lambda^(k/sigma)."""
    _check_weibull(sigma, lambda_sigma)
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    a = k / sigma
    return math.exp(math.lgamma(1 + a) - a * math.log(lambda_sigma))


def weibull_variance(sigma: float, lambda_sigma: float) -> float:
    """{2 Gamma(2/sigma) - Gamma(1/sigma)^2 / sigma} / (sigma lambda^(2/sigma))."""
    _check_weibull(sigma, lambda_sigma)
    s = 1 / sigma
    g1, g2 = gamma_fn(s, log=True), gamma_fn(2 * s, log=True)
    scale = -2 * s * math.log(lambda_sigma) - math.log(sigma)
    return math.exp(scale + math.log(2) + g2) - math.exp(scale + 2 * g1 - math.log(sigma))


def weibull_variance_beta(sigma: float, lambda_sigma: float) -> float:
    """Variance via the duplication formula:
    Gamma(1/sigma)^2 / (sigma^2 lambda^(2/sigma)) * {sigma 2^(2/sigma) / B(1/sigma, 1/2) - 1}.
    """
    _check_weibull(sigma, lambda_sigma)
    s = 1 / sigma
    lead = math.exp(2 * gamma_fn(s, log=True) - 2 * math.log(sigma) - 2 * s * math.log(lambda_sigma))
    ratio = math.exp(math.log(sigma) + 2 * s * math.log(2) - math.log(beta_fn(s, 0.5)))
    return lead * (ratio - 1)


@dataclass(frozen=True)
class WeibullMoments:
    mean: float
    second_moment: float
    variance: float
    variance_beta: float


def weibull_moments(sigma: float, lambda_sigma: float) -> WeibullMoments:
    return WeibullMoments(
        weibull_moment(sigma, lambda_sigma, 1),
        weibull_moment(sigma, lambda_sigma, 2),
        weibull_variance(sigma, lambda_sigma),
        weibull_variance_beta(sigma, lambda_sigma),
    )


# -- numeric inversion --------------------------------------------------------


def survival_quantile(law, u: float, policy: PrecisionPolicy = DEFAULT_POLICY, rel_width: float = 1e-12) -> float:
    """tau with survival(tau) = u, by doubling from tau = 1 and bisection.

    Every step evaluates the exact survival function; this is the reference
    the batch sampler is checked against.
    """
    law = _as_law(law)
    if not 0 < u < 1:
        raise DomainError("u must lie in (0, 1)")
    cache = ShiftedGammaCache(law.params.mu, law.params.nu)
    w = -math.log(u)

    def above(tau):  # survival(tau) > u
        return _neg_log_survival(law, tau, policy, cache) < w

    lo = hi = 1.0
    if above(1.0):
        while above(hi):
            lo, hi = hi, hi * 2
            if hi > 1e300:
                raise SamplerError("could not bracket the quantile")
    else:
        while not above(lo):
            hi, lo = lo, lo / 2
            if lo < 1e-300:
                raise SamplerError("could not bracket the quantile")
    while hi - lo > rel_width * hi:
        mid = 0.5 * (lo + hi)
        if above(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _neg_log_survival(law: InterarrivalLaw, tau: float, policy, cache) -> float:
    p = law.params
    x = p.scale(tau)
    if x == 0:
        return 0.0
    if x <= _DEFICIT_SWITCH:
        return -math.log1p(-_small_deficit(p, x))
    return -math.log(survival(law, tau, policy, cache))


_PANEL_DEGREE = 16
_PANEL_TOL = 5e-12
_MAX_LOG_SURVIVAL = 40.0  # -log of the smallest uniform is about 36.7


class _SurvivalInverse:
    """Piecewise Chebyshev model of h(y) = log(-log S(e^y)).

    h is smooth and increasing: linear in y as tau -> 0 and slowly varying
    in the tail. Panels are refined until the model matches the exact
    evaluator at off-node points to 5e-12. Beyond the largest tau the
    evaluator can certify, -log S is continued linearly in log tau (a power
    law for S) with the local slope tau psi / S.
    """

    def __init__(self, law: InterarrivalLaw, policy: PrecisionPolicy = DEFAULT_POLICY):
        self.law = law
        self.policy = policy
        p = law.params
        self.cache = ShiftedGammaCache(p.mu, p.nu)
        c = p.gamma * math.exp(math.lgamma(p.nu) - math.lgamma(p.nu + p.mu))
        # below y_lo, -log S < 2^-56, beneath every uniform we can draw
        self.y_lo = (math.log(2.0**-56 / c) - math.log(p.lambda_sigma)) / p.sigma
        self.y_hi, self.d_hi, self.slope_hi = self._upper_end()
        self.edges, self.coefs = self._build()

    def _h(self, y: float) -> float:
        return math.log(_neg_log_survival(self.law, math.exp(float(y)), self.policy, self.cache))

    def _upper_end(self):
        y, last = 0.0, None
        while True:
            try:
                d = _neg_log_survival(self.law, math.exp(y), self.policy, self.cache)
            except PrecisionError:
                break
            if not math.isfinite(d) or y > 700:
                break
            last = (y, d)
            if d >= _MAX_LOG_SURVIVAL:
                return y, d, None
            y += math.log(2)
        if last is None:
            raise SamplerError("survival function cannot be evaluated at tau = 1")
        y, d = last
        tau = math.exp(y)
        s = math.exp(-d)
        slope = tau * density(self.law, tau, self.policy, self.cache) / s
        if not slope > 0:
            raise SamplerError("non-positive tail slope; cannot extrapolate")
        return y, d, slope

    def _fit(self, a: float, b: float):
        def f(t):
            return np.array([self._h(0.5 * (b - a) * ti + 0.5 * (a + b)) for ti in t])

        return cheb.chebinterpolate(f, _PANEL_DEGREE)

    def _build(self):
        edges = [self.y_lo]
        coefs = []
        stack = list(np.linspace(self.y_hi, self.y_lo, max(2, int(math.ceil((self.y_hi - self.y_lo) / 4))) + 1)[:-1])
        a = self.y_lo
        while stack:
            b = stack[-1]
            c = self._fit(a, b)
            probe = np.array([-0.93, -0.41, 0.17, 0.66, 0.97])
            exact = np.array([self._h(0.5 * (b - a) * t + 0.5 * (a + b)) for t in probe])
            if np.max(np.abs(cheb.chebval(probe, c) - exact)) <= _PANEL_TOL or b - a < 1e-3:
                coefs.append(c)
                edges.append(b)
                stack.pop()
                a = b
            else:
                stack.append(0.5 * (a + b))
        return np.array(edges), np.array(coefs)

    def neg_log_survival(self, y: np.ndarray) -> np.ndarray:
        """Model of -log S at log-times y (vectorised)."""
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        inside = (y >= self.y_lo) & (y <= self.y_hi)
        idx = np.clip(np.searchsorted(self.edges, y[inside], side="right") - 1, 0, len(self.coefs) - 1)
        a, b = self.edges[idx], self.edges[idx + 1]
        t = (2 * y[inside] - a - b) / (b - a)
        c = self.coefs[idx]
        # Clenshaw recurrence, one coefficient row per point
        b1 = np.zeros_like(t)
        b2 = np.zeros_like(t)
        for k in range(c.shape[1] - 1, 0, -1):
            b1, b2 = 2 * t * b1 - b2 + c[:, k], b1
        out[inside] = np.exp(t * b1 - b2 + c[:, 0])
        low = y < self.y_lo
        out[low] = np.exp(cheb.chebval(-1.0, self.coefs[0]) + self.law.params.sigma * (y[low] - self.y_lo))
        high = y > self.y_hi
        if self.slope_hi is None:
            # the modelled range already reaches below every drawable u
            out[high] = self.d_hi * np.exp(y[high] - self.y_hi)
        else:
            out[high] = self.d_hi + self.slope_hi * (y[high] - self.y_hi)
        return out

    def quantiles(self, u: np.ndarray, rel_width: float = 1e-12) -> tuple[np.ndarray, int]:
        """Solve S(tau) = u by doubling from tau = 1 then bisection in log tau."""
        w = -np.log(u)
        step = math.log(2)
        lo = np.zeros_like(w)
        hi = np.zeros_like(w)
        above = self.neg_log_survival(lo) < w  # S(1) > u, so tau > 1
        hi[above] = step
        lo[~above] = -step
        for _ in range(4096):
            grow = above & (self.neg_log_survival(hi) < w)
            shrink = ~above & (self.neg_log_survival(lo) >= w)
            if not grow.any() and not shrink.any():
                break
            lo[grow] = hi[grow]
            hi[grow] += step
            hi[shrink] = lo[shrink]
            lo[shrink] -= step
        else:
            raise SamplerError("could not bracket the quantile")
        tol = math.log1p(rel_width)
        while True:
            wide = hi - lo > tol
            if not wide.any():
                break
            mid = 0.5 * (lo + hi)
            go_up = self.neg_log_survival(mid) < w
            sel_up = wide & go_up
            sel_dn = wide & ~go_up
            lo[sel_up] = mid[sel_up]
            hi[sel_dn] = mid[sel_dn]
        y = 0.5 * (lo + hi)
        n_ext = int(np.count_nonzero(y > self.y_hi)) if self.slope_hi is not None else 0
        return np.exp(y), n_ext


# -- samplers -----------------------------------------------------------------


@dataclass
class SampleBatch:
    seed: int
    values: np.ndarray
    method: Literal["analytic_inverse", "numeric_inverse"]
    params: ParamSet | None = None
    n_extrapolated: int = 0
    stream: int = 0
    notes: list = field(default_factory=list)

    def header(self) -> dict:
        return {
            "params": self.params.as_dict() if self.params is not None else None,
            "seed": self.seed,
            "stream": self.stream,
            "method": self.method,
            "count": int(len(self.values)),
            "n_extrapolated": self.n_extrapolated,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        for v in self.values:
            buf.write(f"{v:.17g}\n")
        return buf.getvalue()


def sample_interarrival(
    law,
    count: int,
    seed: int = 0,
    *,
    stream: int = 0,
    uniforms: np.ndarray | None = None,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> SampleBatch:
    """Draw ``count`` waiting times by inverse transform.

    ``uniforms`` overrides the generator (test hook); values must lie in (0, 1).
    """
    law = _as_law(law)
    p = law.params
    if int(count) != count or count < 0:
        raise DomainError("count must be a non-negative integer")
    if uniforms is None:
        u = open_uniforms(make_rng(seed, stream), int(count))
    else:
        u = np.asarray(uniforms, dtype=float)
        if np.any((u <= 0) | (u >= 1)):
            raise DomainError("forced uniforms must lie in (0, 1)")
    if law.is_weibull:
        vals = (-np.log(u) / p.lambda_sigma) ** (1 / p.sigma)
        return SampleBatch(seed, vals, "analytic_inverse", p, 0, stream)
    if len(u) == 0:
        return SampleBatch(seed, np.empty(0), "numeric_inverse", p, 0, stream)
    inv = _SurvivalInverse(law, policy)
    vals, n_ext = inv.quantiles(u)
    notes = []
    if n_ext:
        notes.append(f"{n_ext} draws beyond tau={math.exp(inv.y_hi):.6g} used the power-law tail continuation")
    return SampleBatch(seed, vals, "numeric_inverse", p, n_ext, stream, notes)


def sample_count(
    params: ParamSet,
    t: float,
    count: int,
    seed: int = 0,
    *,
    stream: int = 0,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> np.ndarray:
    """Counts at time t drawn by inverting the cumulative probability table.

    Uniforms above the tabulated mass land in the bucket N + 1; that mass is
    the table's tail (below 1e-12 for the automatic table).
    """
    if int(count) != count or count < 0:
        raise DomainError("count must be a non-negative integer")
    table = pmf_table(params, t, "auto", policy)
    if table.n_max == 0 and table.probs[0] == 1.0:
        return np.zeros(int(count), dtype=np.int64)
    u = open_uniforms(make_rng(seed, stream), int(count))
    cdf = np.cumsum(table.probs)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)
