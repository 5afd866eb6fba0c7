"""Fractional generalized counting distributions built on the three-parameter
(Prabhakar) Mittag-Leffler function."""

from __future__ import annotations

__version__ = "0.1.0"

from .coherent import (
    CoherentLabel,
    FockOperator,
    FockVector,
    PhotonStatistics,
    annihilation,
    annihilation_eigen_check,
    coherent_state,
    creation,
    displacement_operator,
    evolution_diagonal,
    number_operator,
    overlap,
    photon_statistics,
    stretched_coherent_state,
    stretched_overlap,
)
from .combinatorics import (
    BellValue,
    StirlingTable,
    bell_generating_fn,
    bell_number,
    bell_polynomial,
    bell_polynomial_series,
    classic_stirling,
    frac_stirling,
    stirling_generating_fns,
    stirling_table,
)
from .compound import CompoundResult, JumpLaw, compound_mean, compound_mgf, compound_mgf_from_g, simulate_compound
from .counting import (
    MomentSet,
    ParamSet,
    PmfTable,
    beta_ratio,
    cumulative_intensity,
    mgf,
    mgf_dimensionless,
    moment_m,
    moment_sum,
    moments,
    pgf,
    pgf_dimensionless,
    pmf,
    pmf_dimensionless,
    pmf_table,
    rate,
)
from .errors import ConvergenceError, DomainError, PrecisionError, SamplerError, TruncationError
from .mlf import (
    DEFAULT_POLICY,
    MLQuery,
    MLResult,
    PrecisionPolicy,
    beta_fn,
    gamma_fn,
    ml3_eval,
    ml3_eval_batch,
    normalized_prabhakar,
    pochhammer,
    prabhakar,
)
from .renewal import (
    InterarrivalLaw,
    SampleBatch,
    WeibullMoments,
    density,
    make_rng,
    sample_count,
    sample_interarrival,
    survival,
    survival_quantile,
    weibull_moment,
    weibull_moments,
    weibull_variance,
    weibull_variance_beta,
)
