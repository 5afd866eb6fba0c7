"""Compound counting process X(t) = Y_1 + ... + Y_N(t) with iid jumps.

The moment generating function here follows the jump convention
<exp(+sY)>, so J(s) = Gamma(nu) E^gamma_{mu,nu}(lambda t^sigma (g(s) - 1)),
the opposite sign to the count-only ``counting.mgf``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .counting import ParamSet, moments
from .errors import DomainError
from .mlf import DEFAULT_POLICY, PrecisionPolicy, _normalized
from .renewal import make_rng, sample_count

JumpKind = Literal["constant", "uniform", "gaussian", "exponential", "empirical"]


@dataclass(frozen=True)
class JumpLaw:
    kind: JumpKind
    params: tuple = ()

    def __post_init__(self):
        k, p = self.kind, self.params
        arity = {"constant": 1, "uniform": 2, "gaussian": 2, "exponential": 1}
        if k == "empirical":
            if len(p) == 0:
                raise DomainError("empirical jump law needs at least one value")
            if not all(math.isfinite(v) for v in p):
                raise DomainError("empirical values must be finite")
            return
        if k not in arity:
            raise DomainError(f"unknown jump kind {k!r}")
        if len(p) != arity[k]:
            raise DomainError(f"{k} jumps take {arity[k]} parameter(s), got {len(p)}")
        if not all(math.isfinite(v) for v in p):
            raise DomainError("jump parameters must be finite")
        if k == "uniform" and not p[0] < p[1]:
            raise DomainError("uniform(a, b) needs a < b")
        if k == "gaussian" and not p[1] >= 0:
            raise DomainError("gaussian sd must be non-negative")
        if k == "exponential" and not p[0] > 0:
            raise DomainError("exponential rate must be positive")

    # constructors
    @classmethod
    def constant(cls, c: float) -> JumpLaw:
        return cls("constant", (float(c),))

    @classmethod
    def uniform(cls, a: float, b: float) -> JumpLaw:
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def gaussian(cls, mean: float, sd: float) -> JumpLaw:
        return cls("gaussian", (float(mean), float(sd)))

    @classmethod
    def exponential(cls, rate: float) -> JumpLaw:
        return cls("exponential", (float(rate),))

    @classmethod
    def empirical(cls, values) -> JumpLaw:
        return cls("empirical", tuple(float(v) for v in values))

    @classmethod
    def from_csv(cls, path, column: int | str = 0) -> JumpLaw:
        """Empirical law from one CSV column; a non-numeric first row is a header."""
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows:
            raise DomainError(f"{path}: no rows")
        if isinstance(column, str):
            column = rows[0].index(column)
            rows = rows[1:]
        else:
            try:
                float(rows[0][column])
            except ValueError:
                rows = rows[1:]
        return cls.empirical(float(r[column]) for r in rows)

    @property
    def mean(self) -> float:
        k, p = self.kind, self.params
        if k == "constant":
            return p[0]
        if k == "uniform":
            return 0.5 * (p[0] + p[1])
        if k == "gaussian":
            return p[0]
        if k == "exponential":
            return 1 / p[0]
        return math.fsum(p) / len(p)

    def mgf(self, s: float) -> float:
        """g(s) = <exp(s Y)>."""
        k, p = self.kind, self.params
        if k == "constant":
            return math.exp(s * p[0])
        if k == "uniform":
            a, b = p
            w = s * (b - a)
            return math.exp(s * a) * (math.expm1(w) / w if w != 0 else 1.0)
        if k == "gaussian":
            return math.exp(s * p[0] + 0.5 * (s * p[1]) ** 2)
        if k == "exponential":
            if not s < p[0]:
                raise DomainError(f"exponential jump MGF diverges for s >= rate ({s} >= {p[0]})")
            return p[0] / (p[0] - s)
        return math.fsum(math.exp(s * v) for v in p) / len(p)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        k, p = self.kind, self.params
        if k == "constant":
            return np.full(size, p[0])
        if k == "uniform":
            return rng.uniform(p[0], p[1], size)
        if k == "gaussian":
            return rng.normal(p[0], p[1], size)
        if k == "exponential":
            return rng.exponential(1 / p[0], size)
        return rng.choice(np.asarray(p), size)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


def compound_mgf_from_g(params: ParamSet, t: float, g: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """J expressed through the jump MGF value g directly."""
    if not math.isfinite(g):
        raise DomainError("jump MGF value must be finite")
    return _normalized(params.gamma, params.mu, params.nu, params.scale(t) * (g - 1), policy).value


def compound_mgf(params: ParamSet, t: float, jump: JumpLaw, s: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """<exp(s X(t))>."""
    try:
        g = jump.mgf(s)
    except OverflowError:
        raise DomainError(f"jump MGF overflows at s={s}") from None
    return compound_mgf_from_g(params, t, g, policy)


def compound_mean(params: ParamSet, t: float, jump: JumpLaw) -> float:
    """<X(t)> = <Y> <N(t)>."""
    return jump.mean * moments(params, t).mean


@dataclass
class CompoundResult:
    samples: np.ndarray
    analytic_mean: float
    empirical_mean: float
    std_error: float
    consistent: bool
    seed: int = 0
    counts: np.ndarray | None = field(default=None, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x\n")
        for v in self.samples:
            buf.write(f"{v:.17g}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "n_paths": int(len(self.samples)),
            "analytic_mean": self.analytic_mean,
            "empirical_mean": self.empirical_mean,
            "std_error": self.std_error,
            "consistent": self.consistent,
            "seed": self.seed,
        }


def simulate_compound(
    params: ParamSet,
    t: float,
    jump: JumpLaw,
    n_paths: int,
    seed: int = 0,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> CompoundResult:
    """Monte Carlo paths: N from the count law at t, then N iid jumps.

    Counts use stream 0 of ``seed`` and jumps stream 1, so the result is a
    pure function of the arguments. ``consistent`` reports whether the
    empirical mean lies within 4 standard errors of the analytic mean.
    """
    if int(n_paths) != n_paths or n_paths < 1:
        raise DomainError("n_paths must be a positive integer")
    n_paths = int(n_paths)
    counts = sample_count(params, t, n_paths, seed, stream=0, policy=policy)
    total = int(counts.sum())
    draws = jump.sample(make_rng(seed, 1), total)
    owner = np.repeat(np.arange(n_paths), counts)
    samples = np.bincount(owner, weights=draws, minlength=n_paths).astype(float)
    emp = math.fsum(samples) / n_paths
    if n_paths > 1:
        var = math.fsum((samples - emp) ** 2) / (n_paths - 1)
        se = math.sqrt(var / n_paths)
    else:
        se = 0.0
    analytic = compound_mean(params, t, jump)
    if se > 0:
        ok = abs(emp - analytic) <= 4 * se
    else:
        ok = math.isclose(emp, analytic, rel_tol=1e-12, abs_tol=1e-12)
    return CompoundResult(samples, analytic, emp, se, ok, seed, counts)
