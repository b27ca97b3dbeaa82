"""Spin-glass free energies and the Legendre duality between F and V.

Closed forms for the random energy model, the Parisi variational formula
for Ising mixed p-spin models, the Crisanti-Sommers formula for spherical
models, a model-agnostic Legendre-transform engine relating the free
energy F(beta) to the squared-interaction free energy V(m), and an exact
finite-N enumeration oracle for cross-checking everything against one
disorder realization at a time.
"""

from .cli import RunConfig, emit_phase_table
from .core import (
    DualityReport,
    EnergyVector,
    MixtureSpec,
    StepDistribution,
    TemperatureVector,
    alpha_eval,
    alpha_integral_s_xi_second,
    alpha_integral_xi_prime,
    energy_vector_from_alpha_spherical,
    mixture_eval,
    xi_beta_eval,
)
from .duality import (
    FreeEnergyHandle,
    GridFunction,
    SearchBox,
    concavity_check,
    corollary_check,
    gamma_star,
    ising_handle,
    l_star,
    legendre_inf_F,
    legendre_sup_V,
    oracle_handle,
    rem_handle,
    roundtrip_gap,
    spherical_handle,
    stationary_energy,
)
from .errors import DomainError, NumericsError, ResourceError, UsageError
from .ising import (
    GammaResult,
    ParisiNumerics,
    ParisiSolution,
    gamma_transform,
    ising_derivative,
    parisi_family,
    parisi_functional,
    parisi_minimize,
    parisi_pde_value,
    verify_thm7,
)
from .oracle import (
    DisorderSample,
    SupNormStats,
    disorder_average,
    exact_free_energy,
    exact_squared_free_energy,
    finite_n_inequality_check,
    sample_disorder,
    sup_norm_stats,
)
from .rem import (
    rem_critical_beta,
    rem_duality_roundtrip,
    rem_free_energy,
    rem_parisi_minimize,
    rem_squared_free_energy,
)
from .spherical import (
    CSResult,
    cs_functional,
    cs_minimize,
    lambda_functional,
    spherical_partial,
    verify_thm10,
)

__version__ = "0.1.0"

__all__ = [
    "DualityReport",
    "EnergyVector",
    "MixtureSpec",
    "StepDistribution",
    "TemperatureVector",
    "alpha_eval",
    "alpha_integral_s_xi_second",
    "alpha_integral_xi_prime",
    "energy_vector_from_alpha_spherical",
    "mixture_eval",
    "xi_beta_eval",
    "FreeEnergyHandle",
    "GridFunction",
    "SearchBox",
    "concavity_check",
    "corollary_check",
    "gamma_star",
    "ising_handle",
    "l_star",
    "legendre_inf_F",
    "legendre_sup_V",
    "oracle_handle",
    "rem_handle",
    "roundtrip_gap",
    "spherical_handle",
    "stationary_energy",
    "DomainError",
    "NumericsError",
    "ResourceError",
    "UsageError",
    "GammaResult",
    "ParisiNumerics",
    "ParisiSolution",
    "gamma_transform",
    "ising_derivative",
    "parisi_family",
    "parisi_functional",
    "parisi_minimize",
    "parisi_pde_value",
    "verify_thm7",
    "DisorderSample",
    "SupNormStats",
    "disorder_average",
    "exact_free_energy",
    "exact_squared_free_energy",
    "finite_n_inequality_check",
    "sample_disorder",
    "sup_norm_stats",
    "rem_critical_beta",
    "rem_duality_roundtrip",
    "rem_free_energy",
    "rem_parisi_minimize",
    "rem_squared_free_energy",
    "CSResult",
    "cs_functional",
    "cs_minimize",
    "lambda_functional",
    "spherical_partial",
    "verify_thm10",
    "RunConfig",
    "emit_phase_table",
    "__version__",
]
