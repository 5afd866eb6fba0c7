"""Self-verification suite: one check per acceptance criterion.

Each ``criterion_k`` returns a ``CheckResult`` with the worst observed
discrepancy and the threshold it was held to. The CLI ``verify`` command
and the acceptance tests both call these functions. ``quick=True`` shrinks
Monte Carlo sizes and grids for a fast smoke run; it is never used to
decide acceptance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from . import reference as ref
from .coherent import (
    CoherentLabel,
    FockVector,
    annihilation_eigen_check,
    coherent_state,
    displacement_operator,
    overlap,
    photon_statistics,
    stretched_coherent_state,
)
from .combinatorics import (
    bell_number,
    bell_polynomial,
    bell_polynomial_series,
    classic_stirling,
    frac_stirling,
)
from .compound import JumpLaw, compound_mean, compound_mgf, simulate_compound
from .counting import ParamSet, _pmf_x, moment_m, moment_sum, moments, pmf, pmf_table
from .errors import PrecisionError
from .mlf import DEFAULT_POLICY, MLQuery, PrecisionPolicy, ShiftedGammaCache, _normalized, ml3_eval
from .renewal import InterarrivalLaw, density, make_rng, sample_interarrival, survival, weibull_moments

GRID_SEED = 20240611


@dataclass
class CheckResult:
    name: str
    passed: bool
    metric: float
    threshold: float
    seconds: float = 0.0
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: worst={self.metric:.3g} (limit {self.threshold:.3g}) {self.seconds:.1f}s {self.detail}".rstrip()


def param_grid(count: int = 50, seed: int = GRID_SEED) -> list[ParamSet]:
    """Random valid parameter sets.

    mu in [0.5, 1], gamma in [0.2, 3], nu = mu*gamma + U(0, 2),
    sigma in [0.2, 1], lambda in [0.1, 2]. The mu and lambda ranges keep
    lambda t^sigma (up to 20 at t = 10) inside what a 1024-bit series
    evaluation can resolve for every probability up to n = 50.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        mu = rng.uniform(0.5, 1.0)
        g = rng.uniform(0.2, 3.0)
        nu = mu * g + rng.uniform(0.0, 2.0)
        out.append(ParamSet(mu, nu, g, rng.uniform(0.2, 1.0), rng.uniform(0.1, 2.0)))
    return out


TIMES = (0.1, 1.0, 10.0)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def criterion_1(quick: bool = False) -> CheckResult:
    """Normalization of the automatic probability tables."""
    grid = param_grid(10 if quick else 50)
    worst_total = 0.0
    worst_mass = 0.0
    for p in grid:
        for t in TIMES:
            tab = pmf_table(p, t)
            s = math.fsum(tab.probs)
            worst_total = max(worst_total, abs(s + tab.tail_bound - 1))
            worst_mass = max(worst_mass, abs(s - 1))
    metric = max(worst_total, worst_mass)
    return CheckResult(
        "1 normalization",
        metric <= 1e-9,
        metric,
        1e-9,
        detail=f"|sum+tail-1|={worst_total:.2g}, |sum-1|={worst_mass:.2g} over {len(grid) * 3} tables",
    )


@_timed
def criterion_2(quick: bool = False) -> CheckResult:
    """Every probability n <= 50 is >= -(its error bound)."""
    grid = param_grid(10 if quick else 50)
    violations = 0
    worst = 0.0
    for p in grid:
        for t in TIMES:
            x = p.scale(t)
            cache = ShiftedGammaCache(p.mu, p.nu)
            for n in range(51):
                v, e = _pmf_x(p, x, n, DEFAULT_POLICY, cache)
                if v < -e:
                    violations += 1
                if v < 0:
                    worst = max(worst, -v)
    return CheckResult("2 non-negativity", violations == 0, float(violations), 0.0, detail=f"most negative value {-worst:.2g}")


@_timed
def criterion_3(quick: bool = False) -> CheckResult:
    """Poisson, fractional Poisson and stretched Poisson closed forms."""
    xs = (0.1, 0.5, 1.0, 2.5, 5.0, 10.0) if not quick else (0.5, 5.0)
    ns = range(0, 21, 1 if not quick else 5)
    worst_p = worst_f = worst_s = 0.0
    poisson = ParamSet(1, 1, 1, 1, 1)
    for x in xs:
        for n in ns:
            exact = float(ref.poisson_ref(x, n))
            worst_p = max(worst_p, abs(pmf(poisson, x, n) / exact - 1))
            for mu in (0.5, 0.75, 0.9):
                fp = ParamSet(mu, 1, 1, mu, 1)
                val = pmf(fp, x ** (1 / mu), n)
                exact = float(ref.fractional_poisson_ref(mu, x, n))
                worst_f = max(worst_f, abs(val / exact - 1))
            for sigma, lam in ((0.5, 1.0), (0.3, 2.0)):
                sp = ParamSet(1, 1, 1, sigma, lam)
                tt = (x / lam) ** (1 / sigma)
                exact = float(ref.poisson_ref(sp.scale(tt), n))
                worst_s = max(worst_s, abs(pmf(sp, tt, n) / exact - 1))
    ok = worst_p <= 1e-12 and worst_f <= 1e-12 and worst_s <= 1e-13
    return CheckResult(
        "3 reductions",
        ok,
        max(worst_p / 1e-12, worst_f / 1e-12, worst_s / 1e-13),
        1.0,
        detail=f"poisson={worst_p:.2g} frac-poisson={worst_f:.2g} (limit 1e-12) stretched={worst_s:.2g} (limit 1e-13); metric is error/limit",
        extra={"poisson": worst_p, "fractional": worst_f, "stretched": worst_s},
    )


@_timed
def criterion_4(quick: bool = False) -> CheckResult:
    """Closed-form mean/variance against direct summation; Beta-ratio algebra."""
    grid = param_grid(10 if quick else 50)
    worst_m = worst_v = worst_b = 0.0
    for p in grid:
        for t in TIMES:
            tab = pmf_table(p, t)
            n = np.arange(tab.n_max + 1, dtype=float)
            m1 = math.fsum(n * tab.probs)
            m2 = math.fsum(n * n * tab.probs)
            ms = moments(p, t)
            worst_m = max(worst_m, abs(m1 - ms.mean) / max(1.0, ms.mean))
            worst_v = max(worst_v, abs((m2 - m1 * m1) - ms.variance) / max(1.0, ms.variance))
        # (1 + 1/gamma) B(mu+nu, mu+nu) / B(2mu+nu, nu) against Gamma(nu)(gamma)_2/Gamma(2mu+nu) over the squared mean coefficient
        ms = moments(p, 1.0 / p.lambda_sigma ** (1 / p.sigma))
        c1, c2 = ms.mean, ms.second_moment - ms.mean
        worst_b = max(worst_b, abs(ms.beta_ratio / (c2 / c1**2) - 1))
    ok = worst_m <= 1e-8 and worst_v <= 1e-8 and worst_b <= 1e-12
    return CheckResult(
        "4 moment closure",
        ok,
        max(worst_m, worst_v),
        1e-8,
        detail=f"mean={worst_m:.2g} var={worst_v:.2g} beta-ratio={worst_b:.2g} (limit 1e-12)",
    )


def _fd_derivative(f, x: float, h: float) -> float:
    # five-point central difference
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


@_timed
def criterion_5(quick: bool = False) -> CheckResult:
    """density = -dS/dtau on [0.1, 10]; density integrates to one."""
    grid = param_grid(4 if quick else 10, seed=GRID_SEED + 5)
    taus = np.geomspace(0.1, 10, 4 if quick else 9)
    worst_fd = 0.0
    worst_int = 0.0
    for p in grid:
        law = InterarrivalLaw(p)
        cache = ShiftedGammaCache(p.mu, p.nu)
        for tau in taus:
            fd = -_fd_derivative(lambda s: survival(law, s, cache=cache), tau, 1e-3 * tau)
            ps = density(law, tau, cache=cache)
            worst_fd = max(worst_fd, abs(fd / ps - 1))
        # integrate in x = lambda tau^sigma, which removes the tau^(sigma-1) singularity;
        # the mass beyond x_end is the (exactly evaluated) survival there
        coef = p.gamma * math.exp(math.lgamma(p.nu) - math.lgamma(p.nu + p.mu))
        def integrand(x):
            return coef * _normalized(p.gamma + 1, p.mu, p.nu + p.mu, -x, DEFAULT_POLICY, (cache, 1)).value

        x_end = 15.0
        pts = [0.0, 0.5, 2.0, 6.0, x_end]
        mass = math.fsum(
            scipy.integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0] for a, b in zip(pts, pts[1:])
        )
        tail = survival(law, (x_end / p.lambda_sigma) ** (1 / p.sigma), cache=cache)
        worst_int = max(worst_int, abs(mass + tail - 1))
    ok = worst_fd <= 1e-6 and worst_int <= 1e-6
    return CheckResult(
        "5 interarrival calculus",
        ok,
        max(worst_fd, worst_int),
        1e-6,
        detail=f"finite-difference={worst_fd:.2g} integral={worst_int:.2g}",
    )


@_timed
def criterion_6(quick: bool = False) -> CheckResult:
    """Weibull variance forms; Monte Carlo mean of analytic-inverse samples."""
    worst_var = 0.0
    for sigma in np.linspace(0.05, 1.0, 40):
        for lam in (0.3, 1.0, 2.5):
            w = weibull_moments(float(sigma), lam)
            worst_var = max(worst_var, abs(w.variance_beta / w.variance - 1))
    count = 10**5 if quick else 10**6
    zmax = 0.0
    for k, sigma in enumerate((0.5, 0.8, 1.0)):
        law = InterarrivalLaw(ParamSet(1, 1, 1, sigma, 1.0))
        vals = sample_interarrival(law, count, seed=GRID_SEED + k).values
        mean = math.fsum(vals) / count
        se = float(np.std(vals, ddof=1)) / math.sqrt(count)
        target = math.gamma(1 / sigma) / sigma
        zmax = max(zmax, abs(mean - target) / se)
    ok = worst_var <= 1e-10 and zmax <= 3
    return CheckResult(
        "6 weibull moments",
        ok,
        worst_var,
        1e-10,
        detail=f"max |z| of MC mean = {zmax:.2f} (limit 3) over {count} samples",
    )


@_timed
def criterion_7(quick: bool = False) -> CheckResult:
    """Compound means by simulation and by differentiating the MGF."""
    n_paths = 10**4 if quick else 10**5
    params = ParamSet(0.7, 1.2, 1.5, 0.8, 1.0)
    t = 2.0
    jumps = (JumpLaw.gaussian(1.0, 0.5), JumpLaw.uniform(0.0, 1.0), JumpLaw.exponential(2.0))
    zmax = 0.0
    worst_d = 0.0
    for k, jump in enumerate(jumps):
        res = simulate_compound(params, t, jump, n_paths, seed=GRID_SEED + k)
        zmax = max(zmax, abs(res.empirical_mean - res.analytic_mean) / res.std_error)
        h = 1e-3
        d = _fd_derivative(lambda s: compound_mgf(params, t, jump, s), 0.0, h)
        worst_d = max(worst_d, abs(d / compound_mean(params, t, jump) - 1))
    ok = zmax <= 4 and worst_d <= 1e-6
    return CheckResult(
        "7 compound mean",
        ok,
        worst_d,
        1e-6,
        detail=f"max |z| of simulated mean = {zmax:.2f} (limit 4), {n_paths} paths x 3 laws",
    )


@_timed
def criterion_8(quick: bool = False) -> CheckResult:
    """Stirling/Bell reductions, Dobinski-type series, moment bridge."""
    exact = all(
        frac_stirling(1, 1, 1, m, l) == classic_stirling(m, l) for m in range(13) for l in range(m + 1)
    )
    bells = [bell_number(1, 1, 1, m) for m in range(6)]
    bells_ok = bells == [1, 1, 2, 5, 15, 52]
    worst_dob = 0.0
    for mu, nu, g in ((1, 1, 1), (0.5, 1, 1), (0.7, 1.3, 1.5), (0.9, 2.0, 0.6)):
        for m in range(9):
            a = bell_number(mu, nu, g, m)
            b = bell_polynomial_series(mu, nu, g, 1.0, m)
            worst_dob = max(worst_dob, abs(a - b) / max(1.0, abs(a)))
    worst_bridge = 0.0
    for p in param_grid(3 if quick else 8, seed=GRID_SEED + 8):
        for t in (0.5, 3.0):
            for m in range(6):
                direct = moment_sum(p, t, m)
                closed = moment_m(p, t, m)
                worst_bridge = max(worst_bridge, abs(direct - closed) / max(1.0, abs(closed)))
    ok = exact and bells_ok and worst_dob <= 1e-9 and worst_bridge <= 1e-8
    return CheckResult(
        "8 combinatorics",
        ok,
        max(worst_dob, worst_bridge),
        1e-8,
        detail=f"exact={exact} bell={bells_ok} dobinski={worst_dob:.2g} (limit 1e-9) bridge={worst_bridge:.2g}",
    )


@_timed
def criterion_9(quick: bool = False) -> CheckResult:
    """Coherent-state identities."""
    q0 = max(
        abs(photon_statistics(CoherentLabel(s, 1, 1, 1, sig)).mandel_q)
        for s in (0.3, 1.0, 2 + 1j, -1.5j, 4.0)
        for sig in (0.3, 0.7, 1.0)
    )
    worst_q = 0.0
    for lab in (
        CoherentLabel(1.0, 0.5, 1, 1, 0.5),
        CoherentLabel(0.8 + 0.6j, 0.7, 1.2, 1.5, 0.8),
        CoherentLabel(2.0, 0.9, 2.0, 0.6, 1.0),
        CoherentLabel(-1.3, 0.6, 1.0, 0.4, 0.3),
    ):
        st = photon_statistics(lab)
        q_moments = st.variance / st.mean - 1
        worst_q = max(worst_q, abs(st.mandel_q - q_moments) / max(abs(st.mandel_q), 1e-300))
    worst_ov = 0.0
    for s, sig in ((2.0, 1.0), (1.5 + 1.2j, 1.0), (4.0, 0.5), (-3.0j, 0.6)):
        d = displacement_operator(s, sig, 100)
        v = stretched_coherent_state(s, sig, 100)
        worst_ov = max(worst_ov, 1 - abs(overlap(v, FockVector(d.matrix[:, 0]))))
    res = max(annihilation_eigen_check(1.0, 1.0, 60), annihilation_eigen_check(2.0, 0.5, 120))
    worst_bell = 0.0
    for mu, nu, g, sig in ((1, 1, 1, 1), (0.5, 1, 1, 0.5), (0.7, 1.2, 1.5, 0.8)):
        state = coherent_state(CoherentLabel(1.0, mu, nu, g, sig), 100)
        for n in range(7):
            b = bell_number(mu, nu, g, n)
            worst_bell = max(worst_bell, abs(state.number_moment(n) - b) / max(1.0, b))
    ok = q0 <= 1e-12 and worst_q <= 1e-12 and worst_ov <= 1e-8 and res <= 1e-9 and worst_bell <= 1e-7
    return CheckResult(
        "9 quantum module",
        ok,
        max(q0, worst_q),
        1e-12,
        detail=f"Q0={q0:.2g} Q-identity={worst_q:.2g} overlap-deficit={worst_ov:.2g} residual={res:.2g} bell={worst_bell:.2g}",
    )


@_timed
def criterion_10(quick: bool = False) -> CheckResult:
    """Base vs doubled precision agree within the reported bounds."""
    count = 100 if quick else 1000
    rng = make_rng(GRID_SEED, 10)
    base = DEFAULT_POLICY
    doubled = PrecisionPolicy(base.target_rel_tol, 2 * base.base_precision_bits, 2 * base.max_precision_bits)
    violations = 0
    escalations = 0
    unmet = 0
    worst = 0.0
    for _ in range(count):
        mu = float(rng.uniform(0.75, 1.0))
        g = float(rng.uniform(0.2, 3.0))
        nu = float(rng.uniform(0.1, 3.0))
        z = float(rng.uniform(-100.0, 10.0))
        n = int(rng.integers(0, 4))
        q = MLQuery(mu, nu, g, z, n)
        try:
            r = ml3_eval(q, base)
            v, b = r.value, r.abs_error_bound
            escalations += r.escalated
        except PrecisionError as exc:
            unmet += 1
            v, b = exc.value, exc.abs_error_bound
        r2 = ml3_eval(q, doubled)
        diff = abs(v - r2.value)
        allowed = b + r2.abs_error_bound
        if not diff <= allowed:
            violations += 1
        if allowed > 0:
            worst = max(worst, diff / allowed)
    return CheckResult(
        "10 evaluator robustness",
        violations == 0,
        worst,
        1.0,
        detail=f"{count} queries, {escalations} escalated, {unmet} tolerance-unmet, {violations} violations (metric = diff/bound)",
    )


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
]


def run_all(quick: bool = False) -> list[CheckResult]:
    return [c(quick=quick) for c in CRITERIA]
