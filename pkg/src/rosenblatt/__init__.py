"""Cumulants of the Rosenblatt distribution.

Closed forms for the second through fifth cumulants as functions of the
memory parameter d in [0, 0.5], verified against two independent
numerical routes: the integral-operator recursion and Monte-Carlo /
quadrature evaluation of the defining singular integrals.
"""

from .cumulants import (
    CharacteristicFunctionValue,
    CumulantReport,
    DomainError,
    c2_closed,
    c3_closed,
    c4_closed,
    c4_region,
    c5_closed,
    c5_region,
    characteristic_function,
    cumulant_table,
    kappa,
    kappa_from_c,
    sigma,
)
from .oracle import MCEstimate, RegionSpec, mc_ck, mc_region, quad_c3, region_catalog
from .quadrature import QuadratureError, tanh_sinh
from .specfun import (
    DivergenceError,
    EvalConfig,
    HypParams,
    NonConvergenceError,
    ParameterDomainError,
    PoleError,
    SeriesResult,
    SpecialFunctionError,
    gamma_ratio,
    gauss_2f1_at_1,
    hyp_2f1,
    log_gamma,
    pfq_at_1,
    pochhammer,
    product_binomial_integral,
    prudnikov_product_integral,
)
from .thomae import (
    SplitForm,
    ThomaeForm,
    best_convergence_form,
    shift_negative_bottom,
    split_4f3_alternative,
    split_4f3_contiguous,
    thomae_fixed_top,
    thomae_full,
    thomae_split,
)
from .veillette_taqqu import (
    GFunction,
    apply_kernel,
    c_k_via_operator,
    g1,
    g2,
    g3,
    g4_closed,
    g_function,
    kernel_hyp2f1_moment,
    kernel_one_minus_power,
)

__version__ = "0.1.0"

__all__ = [
    "CharacteristicFunctionValue", "CumulantReport", "DivergenceError",
    "DomainError", "EvalConfig", "GFunction", "HypParams", "MCEstimate",
    "NonConvergenceError", "ParameterDomainError", "PoleError",
    "QuadratureError", "RegionSpec", "SeriesResult", "SpecialFunctionError",
    "SplitForm", "ThomaeForm", "apply_kernel", "best_convergence_form",
    "c2_closed", "c3_closed", "c4_closed", "c4_region", "c5_closed",
    "c5_region", "c_k_via_operator", "characteristic_function",
    "cumulant_table", "g1", "g2", "g3", "g4_closed", "g_function",
    "gamma_ratio", "gauss_2f1_at_1", "hyp_2f1", "kappa", "kappa_from_c",
    "kernel_hyp2f1_moment", "kernel_one_minus_power", "log_gamma", "mc_ck",
    "mc_region", "pfq_at_1", "pochhammer", "product_binomial_integral",
    "prudnikov_product_integral", "quad_c3", "region_catalog",
    "shift_negative_bottom", "sigma", "split_4f3_alternative",
    "split_4f3_contiguous", "tanh_sinh", "thomae_fixed_top", "thomae_full",
    "thomae_split",
]
