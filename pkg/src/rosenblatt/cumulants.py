"""Closed forms for the Rosenblatt cumulants of orders 2 through 5.

The k-th cumulant is kappa_k = 2^(k-1) (k-1)! sigma(d)^k c_k, where c_k
is the cyclic singular integral over the unit hypercube and
sigma(d) = sqrt((1/2)(1-2d)(1-d)).  c_3 is a pure ratio of Gamma
functions; c_4 and c_5 decompose over ordered-simplex regions whose
closed forms mix Gamma ratios with 3F2/4F3 values at unit argument.

Region conventions: c_4 = 8 (c_4(1)+c_4(2)+c_4(3)) over three regions,
c_5 = 10 * sum of twelve regions.  Regions 9 and 10 of order five share
the closed forms of regions 2 and 5 (they reduce to the same expression
from different starting integrals), and regions 6 and 12 carry
Gamma(2d-1) factors that pole at both endpoints, so they are only
defined on the open interval.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .specfun import (
    DEFAULT_CONFIG,
    EvalConfig,
    HypParams,
    ParameterDomainError,
    SeriesResult,
    gamma,
    gamma_ratio,
    pfq_at_1,
)
from .thomae import eval_3f2_optimized

_EPS = 2.220446049250313e-16

METHOD_CLOSED = "closed-form"
METHOD_VT = "vt-operator"
METHOD_MC = "mc-oracle"


class DomainError(ParameterDomainError):
    """d outside [0, 0.5] (or an endpoint where a region form poles)."""


@dataclass(frozen=True)
class CumulantReport:
    """One computed cumulant: value, provenance, and error accounting."""

    order: int
    d: float
    value: float
    method: str
    error_estimate: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("cumulant order must be >= 2")
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be >= 0")


def _check_d(d: float, *, open_interval: bool = False) -> float:
    d = float(d)
    if open_interval:
        if not (0.0 < d < 0.5):
            raise DomainError(f"d={d} outside the open interval (0, 0.5)")
    elif not (0.0 <= d <= 0.5):
        raise DomainError(f"d={d} outside [0, 0.5]")
    return d


def sigma(d: float) -> float:
    """Normalizing constant sqrt((1/2)(1-2d)(1-d))."""
    d = _check_d(d)
    return math.sqrt(0.5 * (1.0 - 2.0 * d) * (1.0 - d))


def kappa_from_c(k: int, d: float, c_k: float) -> float:
    """kappa_k = 2^(k-1) (k-1)! sigma(d)^k c_k."""
    if k < 2:
        raise ValueError("cumulant order must be >= 2")
    d = _check_d(d)
    return 2.0 ** (k - 1) * math.factorial(k - 1) * sigma(d) ** k * c_k


def _f32(top, bottom, cfg: EvalConfig) -> SeriesResult:
    return eval_3f2_optimized(HypParams(top, bottom), cfg)


# ---------------------------------------------------------------------------
# orders 2 and 3
# ---------------------------------------------------------------------------

def c2_closed(d: float) -> float:
    """c_2 = 1/((1-2d)(1-d)), the double integral of |x-u|^(-2d); kappa_2 = 1."""
    d = _check_d(d)
    if d == 0.5:
        raise DomainError("c_2 diverges at d = 0.5 (kappa_2 stays 1 via sigma -> 0)")
    return 1.0 / ((1.0 - 2.0 * d) * (1.0 - d))


def c3_closed(d: float) -> float:
    """c_3 = 6 Gamma(1-d)^2 Gamma(2-3d) / (Gamma(2-2d) Gamma(4-3d))."""
    d = _check_d(d)
    return (
        6.0 * gamma(1 - d) ** 2
        * gamma_ratio(2 - 3 * d, 2 - 2 * d)
        / gamma(4 - 3 * d)
    )


def kappa3(d: float) -> CumulantReport:
    d = _check_d(d)
    if d == 0.5:
        return CumulantReport(3, d, 0.0, METHOD_CLOSED, 0.0)
    if d == 0.0:
        return CumulantReport(3, d, 8.0 * 0.5**1.5, METHOD_CLOSED, 0.0)
    value = kappa_from_c(3, d, c3_closed(d))
    return CumulantReport(3, d, value, METHOD_CLOSED, 8 * _EPS * abs(value))


# ---------------------------------------------------------------------------
# order 4
# ---------------------------------------------------------------------------

def c4_region(i: int, d: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Closed form of ordered-simplex region i (1..3) of the order-4 integral."""
    d = _check_d(d)
    if i == 1:
        return gamma(1 - d) ** 3 * gamma(3 - 4 * d) / (gamma(3 - 3 * d) * gamma(5 - 4 * d))
    if i == 2:
        return gamma(1 - d) ** 4 * gamma(3 - 4 * d) / (
            2 * gamma(2 - 2 * d) ** 2 * gamma(5 - 4 * d)
        )
    if i == 3:
        f = _f32((1.0, d, 2 - 2 * d), (2 - d, 3 - 2 * d), cfg)
        return gamma(3 - 4 * d) / (2 * (1 - d) ** 2 * gamma(5 - 4 * d)) * f.value
    raise ValueError("order-4 region index must be 1, 2 or 3")


def c4_region3_alt(d: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Region 3 by the product-of-2F1 route: two terms carrying Gamma(2d-1).

    Interior d only; equals c4_region(3, d).
    """
    d = _check_d(d, open_interval=True)
    t1 = (
        gamma(3 - 4 * d) * gamma(1 - d) ** 2 * gamma(2 - 2 * d)
        * gamma_ratio(2 * d - 1, d)
        / (gamma(5 - 4 * d) * gamma(3 - 3 * d))
    )
    f = _f32((2 * d - 1, d, 1.0), (2 * d, 2 - d), cfg)
    t2 = (
        gamma(3 - 4 * d) * gamma_ratio(2 * d - 1, 2 * d)
        / ((1 - d) * gamma(5 - 4 * d))
        * f.value
    )
    return t1 - t2


def c4_closed(d: float, cfg: EvalConfig = DEFAULT_CONFIG) -> SeriesResult:
    """c_4 as the three-term bracket over (1-d)^3 (3-4d); 8 times the region sum.

    Equivalently kappa_4 = 12(1-2d)^2/((1-d)(3-4d)) * bracket.
    """
    d = _check_d(d)
    f = _f32((2 - 2 * d, 1.0, d), (3 - 2 * d, 2 - d), cfg)
    g1 = gamma(1 - d)
    g2 = gamma(2 - d)
    bracket = f.value + g1**2 * g2**2 / gamma(2 - 2 * d) ** 2 + 2 * g1 * g2**2 / gamma(3 - 3 * d)
    scale = 1.0 / ((1 - d) ** 3 * (3 - 4 * d))
    return SeriesResult(scale * bracket, scale * (f.error_estimate + 8 * _EPS * bracket), f.n_terms)


def kappa4(d: float, cfg: EvalConfig = DEFAULT_CONFIG) -> CumulantReport:
    d = _check_d(d)
    if d == 0.5:
        return CumulantReport(4, d, 0.0, METHOD_CLOSED, 0.0)
    if d == 0.0:
        return CumulantReport(4, d, 12.0, METHOD_CLOSED, 0.0)
    c4 = c4_closed(d, cfg)
    scale = 12.0 * (1 - 2 * d) ** 2 * (1 - d) ** 2
    return CumulantReport(
        4, d, scale * c4.value, METHOD_CLOSED, scale * c4.error_estimate,
        {"series_terms": c4.n_terms},
    )


# ---------------------------------------------------------------------------
# order 5
# ---------------------------------------------------------------------------

REGION3_VARIANTS = ("corrected", "printed")


def c5_region(i: int, d: float, cfg: EvalConfig = DEFAULT_CONFIG, *,
              region3_variant: str = "corrected") -> float:
    """Closed form of ordered-simplex region i (1..12) of the order-5 integral.

    Regions 6 and 12 require 0 < d < 0.5 (Gamma(2d-1) poles at both
    endpoints).  Region 3's second term is printed with denominator
    Gamma(6-5d)^2 in the source; the Monte-Carlo oracle selects the
    "corrected" reading Gamma(6-5d)Gamma(4-4d), under which the term is
    exactly the region-2 value.  The rejected reading stays available as
    region3_variant="printed".
    """
    if region3_variant not in REGION3_VARIANTS:
        raise ValueError(f"unknown region3_variant {region3_variant!r}")
    d = _check_d(d, open_interval=i in (6, 12))
    g1d = gamma(1 - d)
    g45 = gamma(4 - 5 * d)
    g65 = gamma(6 - 5 * d)
    g44 = gamma(4 - 4 * d)
    g33 = gamma(3 - 3 * d)
    g22 = gamma(2 - 2 * d)

    if i == 1:
        return g1d**4 * g45 / (g44 * g65)
    if i in (2, 9):
        f = _f32((d, 1 - d, 2 - 2 * d), (2 - d, 4 - 4 * d), cfg)
        return g1d**2 / (1 - d) * g45 * g22 / (g65 * g44) * f.value
    if i == 3:
        f = _f32((d, 1 - d, 3 - 3 * d), (2 - d, 4 - 4 * d), cfg)
        first = g1d**3 / ((1 - d) * g22) * (g45 / g44) * (g33 / g65) * f.value
        if region3_variant == "corrected":
            return first - c5_region(2, d, cfg)
        f2 = _f32((d, 1 - d, 2 - 2 * d), (2 - d, 4 - 4 * d), cfg)
        return first - g1d**2 / (1 - d) * g45 * g22 / (g65 * g65) * f2.value
    if i == 4:
        f = _f32((1.0, d, 2 - 2 * d), (2 - d, 3 - 2 * d), cfg)
        return gamma(1 - d) / (2 * (1 - d) ** 2) * g33 * g45 / (g44 * g65) * f.value
    if i in (5, 10):
        f = pfq_at_1(
            HypParams((1.0, d, 2 - 2 * d, 3 - 3 * d), (2 - d, 3 - 2 * d, 4 - 4 * d)), cfg
        )
        return g1d / (2 * (1 - d) ** 2) * g33 * g45 / (g44 * g65) * f.value
    if i == 6:
        f1 = _f32((1.0, d, 2 * d - 1), (2 - d, 2 * d), cfg)
        f3 = _f32((1.0, d, 3 - 3 * d), (2 - d, 4 - 3 * d), cfg)
        return (
            g1d / (1 - d) * gamma_ratio(2 * d - 1, 2 * d) * g33 * g45 / (g65 * g44) * f1.value
            - g1d**3 * g45 / (g44 * g65) * g22 * gamma_ratio(2 * d - 1, d)
            + g1d**2 / (3 * (1 - d) ** 2) * g45 / (g65 * g22) * f3.value
        )
    if i == 7:
        f1 = _f32((1.0, d, 2 - 2 * d), (2 - d, 3 - 2 * d), cfg)
        f2 = pfq_at_1(
            HypParams((1.0, d, 2 - 2 * d, 3 - 3 * d), (2 - d, 3 - 2 * d, 4 - 4 * d)), cfg
        )
        return (
            g1d**2 / (2 * (1 - d) ** 2) * g45 / (g65 * g22) * f1.value
            - g1d / (1 - d) ** 2 * (g33 / g44) * (g45 / g65) * f2.value
        )
    if i == 8:
        f = _f32((1.0, d, 3 - 3 * d), (3 - 2 * d, 4 - 3 * d), cfg)
        return g1d**2 / (3 * (1 - d)) * g45 / (g65 * gamma(3 - 2 * d)) * f.value
    if i == 11:
        f1 = _f32((1.0, d, 3 - 3 * d), (2 - d, 4 - 3 * d), cfg)
        f2 = _f32((1.0, d, 2 - 2 * d), (2 - d, 3 - 2 * d), cfg)
        return (
            g1d**2 / (3 * (1 - d) ** 2) * g45 / (g65 * g22) * f1.value
            - g1d * g45 * g33 / (2 * (1 - d) ** 2 * g65 * g44) * f2.value
        )
    if i == 12:
        f = _f32((1.0, d, 2 * d - 1), (2 - d, 2 * d), cfg)
        return (
            g1d**3 * g45 / (g44 * g65) * g22 * gamma_ratio(2 * d - 1, d)
            - g1d / (1 - d) * gamma_ratio(2 * d - 1, 2 * d) * g33 * g45 / (g44 * g65) * f.value
        )
    raise ValueError("order-5 region index must be in 1..12")


def c5_closed(d: float, cfg: EvalConfig = DEFAULT_CONFIG) -> SeriesResult:
    """c_5 = 10 S, where S collects the six surviving terms of the region sum.

    The 4F3 contributions of regions 5, 7 and 10 cancel in the sum, as do
    the Gamma(2d-1) pieces of regions 6 and 12; what survives is a
    Gamma(4-5d)/Gamma(6-5d) factor times six 3F2-type terms.
    """
    d = _check_d(d)
    g1d = gamma(1 - d)
    g22 = gamma(2 - 2 * d)
    g33 = gamma(3 - 3 * d)
    g44 = gamma(4 - 4 * d)
    one = 1.0 - d

    terms = [
        (g1d**4 / g44, SeriesResult(1.0, 0.0, 0)),
        (g1d**3 / (one * g22) * g33 / g44, _f32((d, 1 - d, 3 - 3 * d), (2 - d, 4 - 4 * d), cfg)),
        (g1d**2 * g22 / (one * g44), _f32((d, 1 - d, 2 - 2 * d), (2 - d, 4 - 4 * d), cfg)),
        (g1d**2 / (6 * one**2 * g22), _f32((1.0, d, 3 - 3 * d), (3 - 2 * d, 4 - 3 * d), cfg)),
        (2 * g1d**2 / (3 * one**2 * g22), _f32((1.0, d, 3 - 3 * d), (2 - d, 4 - 3 * d), cfg)),
        (g1d**2 / (2 * one**2 * g22), _f32((1.0, d, 2 - 2 * d), (2 - d, 3 - 2 * d), cfg)),
    ]
    ratio = gamma_ratio(4 - 5 * d, 6 - 5 * d)
    value = 10.0 * ratio * sum(w * f.value for w, f in terms)
    err = 10.0 * abs(ratio) * (
        sum(abs(w) * f.error_estimate for w, f in terms) + 16 * _EPS * abs(value)
    )
    n = max(f.n_terms for _, f in terms)
    return SeriesResult(value, err, n)


def kappa5(d: float, cfg: EvalConfig = DEFAULT_CONFIG) -> CumulantReport:
    d = _check_d(d)
    if d == 0.5:
        return CumulantReport(5, d, 0.0, METHOD_CLOSED, 0.0)
    if d == 0.0:
        return CumulantReport(5, d, 384.0 * 0.5**2.5, METHOD_CLOSED, 0.0)
    c5 = c5_closed(d, cfg)
    scale = 384.0 * (0.5 * (1 - 2 * d) * (1 - d)) ** 2.5
    return CumulantReport(
        5, d, scale * c5.value, METHOD_CLOSED, scale * c5.error_estimate,
        {"series_terms": c5.n_terms},
    )


# ---------------------------------------------------------------------------
# dispatch, characteristic function, tables
# ---------------------------------------------------------------------------

SUPPORTED_ORDERS = (2, 3, 4, 5)


def kappa(k: int, d: float, cfg: EvalConfig = DEFAULT_CONFIG) -> CumulantReport:
    """kappa_k(d) for k in 2..5; kappa_2 is identically 1."""
    d = _check_d(d)
    if k == 2:
        return CumulantReport(2, d, 1.0, METHOD_CLOSED, 0.0)
    if k == 3:
        return kappa3(d)
    if k == 4:
        return kappa4(d, cfg)
    if k == 5:
        return kappa5(d, cfg)
    raise ValueError(f"unsupported cumulant order {k} (supported: 2..5)")


@dataclass(frozen=True)
class CharacteristicFunctionValue:
    value: complex
    diverged: bool


def characteristic_function(theta: float, d: float, K: int = 5,
                            cfg: EvalConfig = DEFAULT_CONFIG) -> CharacteristicFunctionValue:
    """Truncated characteristic function exp(sum_{k=2}^K (i theta)^k kappa_k / k!).

    Equivalent to the exponent (1/2) sum (2 i theta sigma)^k c_k / k written
    through the cumulants.  The power series converges only near the
    origin; the value is flagged (not rejected) when the last included
    term grows over its predecessor.
    """
    d = _check_d(d)
    if K > 5:
        raise ValueError("orders above 5 are not supported")
    if K < 2:
        raise ValueError("truncation order must be at least 2")
    total = 0.0j
    mags = []
    for k in range(2, K + 1):
        term = (1j * theta) ** k * kappa(k, d, cfg).value / math.factorial(k)
        total += term
        mags.append(abs(term))
    diverged = len(mags) >= 2 and mags[-1] > mags[-2] > 0.0
    if total.real > 709.0:  # exp would overflow; the series left its disc anyway
        return CharacteristicFunctionValue(complex(math.inf, 0.0), True)
    return CharacteristicFunctionValue(cmath.exp(total), diverged)


def cumulant_table(grid, orders, cfg: EvalConfig = DEFAULT_CONFIG) -> list[CumulantReport]:
    """Closed-form reports for every (order, d) pair, sorted by (order, d)."""
    pairs = sorted((int(k), _check_d(d)) for k in orders for d in grid)
    return [kappa(k, d, cfg) for k, d in pairs]
