"""Coherent-state family on a truncated Fock space.

Amplitudes are <n|s> = sqrt(P(n)) exp(i sigma n arg s), where P is the
counting law at dimensionless argument |s|^(2 sigma). Powers s^sigma use
the principal branch, arg s in (-pi, pi]; for negative real s and sigma < 1
this gives a non-real phase, which is a convention, not a derived fact.

Dense operators are (N+1) x (N+1) arrays with entry [m, n] = <m|A|n>.
"""

from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.special

from .counting import ParamSet, pmf_table
from .errors import DomainError, TruncationError
from .mlf import DEFAULT_POLICY, PrecisionPolicy, _normalized, gamma_fn, principal_power

LOSS_TARGET = 1e-9
N_CAP = 10_000


@dataclass(frozen=True)
class CoherentLabel:
    varsigma: complex
    mu: float = 1.0
    nu: float = 1.0
    gamma: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "varsigma", complex(self.varsigma))
        if not cmath.isfinite(self.varsigma):
            raise DomainError("varsigma must be finite")
        # reuse the parameter-domain checks
        self.params

    @property
    def params(self) -> ParamSet:
        return ParamSet(self.mu, self.nu, self.gamma, self.sigma, 1.0)

    @property
    def x(self) -> float:
        """|varsigma|^(2 sigma)."""
        return abs(self.varsigma) ** (2 * self.sigma)

    @property
    def power(self) -> complex:
        """varsigma^sigma on the principal branch."""
        return principal_power(self.varsigma, self.sigma)


@dataclass(frozen=True)
class FockVector:
    amplitudes: np.ndarray
    truncation_loss: float = 0.0
    notes: tuple = field(default=(), compare=False)

    @property
    def n_max(self) -> int:
        return len(self.amplitudes) - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm2(self) -> float:
        return math.fsum(self.probabilities())

    def number_moment(self, k: int) -> float:
        """<n^k> = diagonal element of (a+ a)^k in this state."""
        n = np.arange(self.n_max + 1, dtype=float)
        return math.fsum(n**k * self.probabilities())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,re,im,prob\n")
        for n, a in enumerate(self.amplitudes):
            buf.write(f"{n},{a.real:.17g},{a.imag:.17g},{abs(a) ** 2:.17g}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class FockOperator:
    matrix: np.ndarray

    @property
    def n_max(self) -> int:
        return self.matrix.shape[0] - 1

    def apply(self, v: FockVector | np.ndarray) -> np.ndarray:
        amps = v.amplitudes if isinstance(v, FockVector) else np.asarray(v)
        return self.matrix @ amps

    def dagger(self) -> FockOperator:
        return FockOperator(self.matrix.conj().T)

    def __matmul__(self, other: FockOperator) -> FockOperator:
        return FockOperator(self.matrix @ other.matrix)

    def interior(self, size: int | None = None) -> np.ndarray:
        """Upper-left block over n <= size (default n_max // 2)."""
        k = (self.n_max // 2 if size is None else size) + 1
        return self.matrix[:k, :k]


def annihilation(n_max: int) -> FockOperator:
    a = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    idx = np.arange(1, n_max + 1)
    a[idx - 1, idx] = np.sqrt(idx)
    return FockOperator(a)


def creation(n_max: int) -> FockOperator:
    return annihilation(n_max).dagger()


def number_operator(n_max: int) -> FockOperator:
    return FockOperator(np.diag(np.arange(n_max + 1, dtype=complex)))


def _phases(varsigma: complex, sigma: float, n_max: int) -> np.ndarray:
    theta = sigma * cmath.phase(varsigma) if varsigma != 0 else 0.0
    return np.exp(1j * theta * np.arange(n_max + 1))


def _check_n_max(n_max) -> None:
    if n_max != "auto" and (int(n_max) != n_max or n_max < 0):
        raise DomainError("n_max must be a non-negative integer or 'auto'")


def _auto_start(mean: float) -> int:
    return max(16, int(math.ceil(2 * mean + 10 * math.sqrt(mean + 1))))


def coherent_state(label: CoherentLabel, n_max: int | str = "auto", policy: PrecisionPolicy = DEFAULT_POLICY) -> FockVector:
    """|s> truncated to n <= n_max; 'auto' doubles n_max until the lost norm is <= 1e-9."""
    _check_n_max(n_max)
    if label.varsigma == 0:
        size = 1 if n_max == "auto" else int(n_max) + 1
        amps = np.zeros(size, dtype=complex)
        amps[0] = 1.0
        return FockVector(amps, 0.0)
    x = label.x

    def build(n):
        table = pmf_table(label.params, abs(label.varsigma) ** 2, n, policy)
        probs = np.clip(table.probs, 0.0, None)
        return np.sqrt(probs) * _phases(label.varsigma, label.sigma, n), table.tail_bound

    if n_max != "auto":
        amps, loss = build(int(n_max))
        return FockVector(amps, loss)
    mean = label.gamma * math.exp(gamma_fn(label.nu, log=True) - gamma_fn(label.mu + label.nu, log=True)) * x
    n = min(_auto_start(mean), N_CAP)
    while True:
        amps, loss = build(n)
        if loss <= LOSS_TARGET:
            return FockVector(amps, loss)
        if n >= N_CAP:
            raise TruncationError(f"lost norm {loss:.3g} still above {LOSS_TARGET} at n_max={n}", loss, n)
        n = min(2 * n, N_CAP)


@dataclass(frozen=True)
class PhotonStatistics:
    mean: float
    second_moment: float
    mandel_q: float

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2


def photon_statistics(label: CoherentLabel) -> PhotonStatistics:
    """Closed-form mean, second moment and Mandel Q."""
    g, mu, nu = label.gamma, label.mu, label.nu
    x = label.x
    lg = lambda a: gamma_fn(a, log=True)  # noqa: E731
    c1 = g * math.exp(lg(nu) - lg(mu + nu))
    c2 = g * (g + 1) * math.exp(lg(nu) - lg(2 * mu + nu))
    mean = c1 * x
    second = mean + c2 * x * x
    q = ((g + 1) * math.exp(lg(mu + nu) - lg(2 * mu + nu)) - c1) * x
    return PhotonStatistics(mean, second, q)


def evolution_diagonal(label: CoherentLabel, omega_t: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> complex:
    """<s| exp(-i omega t a+a) |s> = Gamma(nu) E^gamma_{mu,nu}(|s|^(2 sigma) (exp(-i omega t) - 1))."""
    z = label.x * (cmath.exp(-1j * omega_t) - 1)
    if z == 0:
        return 1 + 0j
    return complex(_normalized(label.gamma, label.mu, label.nu, z, policy).value)


def _poisson_loss(x: float, n_max: int) -> float:
    # P(N > n_max) for a Poisson(x) count
    return float(scipy.special.gammainc(n_max + 1, x)) if x > 0 else 0.0


def stretched_coherent_state(varsigma: complex, sigma: float, n_max: int | str = "auto") -> FockVector:
    """Amplitudes exp(-|s|^(2 sigma)/2) s^(sigma n) / sqrt(n!)."""
    if not 0 < sigma <= 1:
        raise DomainError(f"0 < sigma <= 1 violated (sigma={sigma})")
    _check_n_max(n_max)
    varsigma = complex(varsigma)
    x = abs(varsigma) ** (2 * sigma)

    def build(n):
        k = np.arange(n + 1)
        if x == 0:
            mag = (k == 0).astype(float)
        else:
            logmag = -0.5 * x + k * (0.5 * math.log(x)) - 0.5 * scipy.special.gammaln(k + 1)
            mag = np.exp(logmag)
        return mag * _phases(varsigma, sigma, n), _poisson_loss(x, n)

    if n_max != "auto":
        amps, loss = build(int(n_max))
        return FockVector(amps, loss)
    n = min(_auto_start(x), N_CAP)
    while True:
        amps, loss = build(n)
        if loss <= LOSS_TARGET:
            return FockVector(amps, loss)
        if n >= N_CAP:
            raise TruncationError(f"lost norm {loss:.3g} still above {LOSS_TARGET} at n_max={n}", loss, n)
        n = min(2 * n, N_CAP)


def overlap(bra: FockVector, ket: FockVector) -> complex:
    """<bra|ket> over the common truncated basis."""
    k = min(len(bra.amplitudes), len(ket.amplitudes))
    return complex(np.vdot(bra.amplitudes[:k], ket.amplitudes[:k]))


def stretched_overlap(eta: complex, varsigma: complex, sigma: float) -> complex:
    """Closed form exp(-|e|^(2s)/2 - |v|^(2s)/2 + conj(e^s) v^s)."""
    a, b = principal_power(eta, sigma), principal_power(varsigma, sigma)
    return cmath.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + a.conjugate() * b)


def annihilation_eigen_check(varsigma: complex, sigma: float, n_max: int) -> float:
    """|| a v - s^sigma v || for the truncated stretched state v."""
    v = stretched_coherent_state(varsigma, sigma, n_max)
    a = annihilation(int(n_max))
    r = a.apply(v) - principal_power(complex(varsigma), sigma) * v.amplitudes
    return float(np.linalg.norm(r))


def displacement_operator(varsigma: complex, sigma: float, n_max: int) -> FockOperator:
    """exp(s^sigma a+ - conj(s^sigma) a) on the truncated basis (Pade scaling and squaring)."""
    if not 0 < sigma <= 1:
        raise DomainError(f"0 < sigma <= 1 violated (sigma={sigma})")
    _check_n_max(n_max)
    alpha = principal_power(complex(varsigma), sigma)
    a = annihilation(int(n_max)).matrix
    gen = alpha * a.conj().T - alpha.conjugate() * a
    d = scipy.linalg.expm(gen)
    if not np.all(np.isfinite(d)):
        raise ArithmeticError("matrix exponential produced non-finite entries")
    return FockOperator(d)
