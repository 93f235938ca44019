"""Operator-recursion route to the cumulant factors.

The kernel operator (K f)(x) = int_0^1 |x-u|^(-d) f(u) du generates a
sequence of functions starting from G_1(x) = (1-x)^(-d)/sqrt(1-d), and
the cumulant factor c_k equals int_0^1 G_mu G_nu dx for any mu+nu = k.
G_2 and G_3 have closed forms; G_4 is assembled here from the kernel
images of G_3's four pieces, with direct numerical application of the
operator kept as an independent cross-check.

The closed forms repeatedly produce sums of the family

    T(x) = sum_k u_k 2F1(-(k+beta), d; 1-(k+beta); x),

whose inner functions telescope:  2F1(-g, d; 1-g; x)
= sum_j (d)_j x^j/j! * g/(g-j).  Swapping the sums turns T into
sum_j c_j(x) E_j with x-independent tables E_j = sum_k u_k g_k/(g_k-j),
computed once per (d, weight family) by FFT convolution.  Beyond the
table the E_j follow a fitted inverse-power law, so the j-tail reduces
to a few Watson-type integrals; this keeps every evaluation accurate
uniformly in x, including exponentially close to the endpoints where
quadrature nodes land.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import digamma, gammaln, roots_laguerre

from .quadrature import tanh_sinh
from .specfun import (
    DEFAULT_CONFIG,
    EvalConfig,
    ParameterDomainError,
    gamma,
    gamma_ratio,
    gauss_2f1_at_1,
    hyp_2f1,
)

_K_WEIGHTS = 1 << 16   # weight range entering the E tables
_J_TABLE = 1 << 14     # tabulated E_j range; tails are fitted beyond
_GL_NODES, _GL_WEIGHTS = roots_laguerre(24)


def _check_interior(x: float) -> None:
    if not (0.0 < x < 1.0):
        raise ParameterDomainError(f"x={x} must lie in (0, 1)")


def _omx(x: float, one_minus_x: float | None) -> float:
    return (1.0 - x) if one_minus_x is None else one_minus_x


def _position(x: float, one_minus_x: float | None) -> float:
    """Distance to 1 for an abscissa that may have saturated to an endpoint.

    Quadrature nodes exponentially close to 0 or 1 round to the endpoint
    itself; the caller then supplies the exact distance.  The open-interval
    contract is enforced on the effective position.
    """
    z = (1.0 - x) if one_minus_x is None else one_minus_x
    if x < 0.0 or z <= 0.0 or z > 1.0:
        raise ParameterDomainError(f"x={x} (1-x={z}) must lie in (0, 1)")
    return z


# ---------------------------------------------------------------------------
# E tables: sum_k u_k * g_k/(g_k - j) for integer j
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ETable:
    beta: float
    E: np.ndarray
    tail_exponents: tuple[float, ...]
    tail_coefs: tuple[float, ...]


def _build_e_table(u: np.ndarray, beta: float, p_decay: float, m1: float) -> _ETable:
    """Table of E_j = sum_k u_k (k+beta)/(k+beta-j) with a fitted large-j law.

    The k-sum is a correlation against 1/(m+beta), done by FFT; the
    truncated k-range is completed with a three-term expansion of the
    integral comparison (weights decay like k^-p_decay).  On j beyond the
    table, E_j = -m1/j + c j^(1-p) + c2/j^2 + ...: the leading 1/j
    coefficient is the exact first moment m1 = sum_k u_k (k+beta); the
    subleading terms (the k ~ j resonance and the incomplete-moment
    corrections) are fitted over the top three octaves of the table.
    """
    K = len(u)
    J = _J_TABLE
    k = np.arange(K)
    a = u * (k + beta)
    h = 1.0 / (beta - np.arange(-(K - 1), J, dtype=float))
    E = fftconvolve(a, h)[K - 1:K - 1 + J].copy()

    # k >= K completion: sum a_k/(k+beta-j), a_k ~ A k^(1-p)
    j = np.arange(J, dtype=float)
    q = p_decay - 1.0
    A = a[-1] * (K - 1) ** q
    Kh = K - 0.5
    base = A * Kh ** (-q) / q
    E += base * (1.0 + (j - beta) * q / ((q + 1.0) * Kh)
                 + (j - beta) ** 2 * q / ((q + 2.0) * Kh**2))

    exps = [-2.0, -3.0]
    for cand in (1.0 - p_decay, -p_decay):
        if all(abs(cand - e) > 0.1 for e in exps) and cand > -4.0:
            exps.append(cand)
    lo = J // 8
    jj = np.arange(lo, J, dtype=float)
    design = np.stack([jj**e for e in exps], axis=1)
    coefs, *_ = np.linalg.lstsq(design, E[lo:] + m1 / jj, rcond=None)
    return _ETable(beta, E, (-1.0, *exps), (-m1, *coefs))


def _series_tail(d: float, x: float, lam: float, q: float, J0: int,
                 bottom: float | None) -> float:
    """sum_{j>=J0} c_j j^q by midpoint Euler-Maclaurin + Gauss-Laguerre.

    c_j = (d)_j x^j / j!  (bottom=None) or (d)_j x^j / (bottom)_j.
    lam = -ln x.  The summand extends to continuous t through loggamma;
    the integral is taken in u = ln(t/t0), where a pure power law becomes
    exactly exponential, so Gauss-Laguerre stays accurate down to lam = 0.
    """
    t0 = J0 - 0.5
    s = 1.0 if bottom is None else bottom
    const = -gammaln(d) + (0.0 if bottom is None else gammaln(bottom))

    def logf(t):
        # ln Gamma(d+t) - ln Gamma(s+t), asymptotic branch dodges the
        # catastrophic cancellation of huge lgamma values
        t = np.asarray(t, dtype=float)
        small = t < 1e7
        ratio = np.where(
            small,
            gammaln(d + np.where(small, t, 1.0)) - gammaln(s + np.where(small, t, 1.0)),
            (d - s) * np.log(t) + (d - s) * (d + s - 1.0) / (2.0 * t),
        )
        return ratio + const - t * lam + q * np.log(t)

    lf0 = logf(t0)
    if lf0 < -700.0:
        return 0.0
    # decay rate of t*f(t) in u = ln(t/t0); nu+1 = d+q (+ lam t0 when x < 1)
    slope = digamma(d + t0) - (digamma(t0 + 1.0) if bottom is None
                               else digamma(bottom + t0)) - lam + q / t0
    rate = -(t0 * slope + 1.0)
    if rate <= 0.05:
        raise ParameterDomainError("tail summand is not decaying in log scale")
    t = t0 * np.exp(_GL_NODES / rate)
    with np.errstate(under="ignore"):
        vals = np.exp(np.clip(logf(t) + np.log(t) - lf0 + _GL_NODES, -745.0, 50.0))
    integral = math.exp(lf0) * t0 / rate * float(np.sum(_GL_WEIGHTS * vals / t0))
    deriv_correction = math.exp(lf0) * slope / 24.0
    return integral + deriv_correction


def _series_dot(table: _ETable, d: float, x: float, lam: float,
                bottom: float | None = None) -> float:
    """sum_j c_j(x) E_j over all j, tables plus fitted tail."""
    J = len(table.E)
    if x <= 0.0:
        return float(table.E[0])
    jj = np.arange(J - 1, dtype=float)
    if bottom is None:
        ratios = (d + jj) * x / (jj + 1.0)
    else:
        ratios = (d + jj) * x / (bottom + jj)
    c = np.empty(J)
    c[0] = 1.0
    np.cumprod(ratios, out=c[1:])
    main = float(c @ table.E)
    if c[-1] == 0.0 or abs(c[-1]) < 1e-280:
        return main
    tail = 0.0
    for e, coef in zip(table.tail_exponents, table.tail_coefs):
        tail += coef * _series_tail(d, x, lam, e, J, bottom)
    return main + tail


# ---------------------------------------------------------------------------
# weight families
# ---------------------------------------------------------------------------

def _cum_ratio(first: float, num: tuple[float, ...], den: tuple[float, ...],
               K: int) -> np.ndarray:
    """w_0 = first, w_{k+1} = w_k * prod(num+k)/prod(den+k)."""
    k = np.arange(K - 1, dtype=float)
    r = np.ones(K - 1)
    for a in num:
        r *= a + k
    for b in den:
        r /= b + k
    out = np.empty(K)
    out[0] = first
    np.cumprod(r, out=out[1:])
    out[1:] *= first
    return out


@lru_cache(maxsize=64)
def _family_table(d: float, name: str) -> _ETable:
    # first moments sum_k u_k (k+beta) collapse to Gauss sums in each family
    K = _K_WEIGHTS
    if name == "g3":
        # (d)_k (2-2d)_k / ((2-d)_k (3-2d)_k): decay k^(2d-3)
        u = _cum_ratio(1.0, (d, 2 - 2 * d), (2 - d, 3 - 2 * d), K)
        m1 = (2 - 2 * d) * gauss_2f1_at_1(d, 1.0, 2 - d)
        return _build_e_table(u, 2 - 2 * d, 3 - 2 * d, m1)
    if name == "i1":
        # (d)_m / (3-2d)_m / (3-3d+m): decay k^(3d-4)
        u = _cum_ratio(1.0, (d,), (3 - 2 * d,), K) / (3 - 3 * d + np.arange(K))
        return _build_e_table(u, 3 - 3 * d, 4 - 3 * d, gauss_2f1_at_1(d, 1.0, 3 - 2 * d))
    if name == "i3":
        # (2d-1)_m / (2-d)_m / (2-2d+m): decay k^(3d-4), sign fixed after m=1
        u = _cum_ratio(1.0, (2 * d - 1,), (2 - d,), K) / (2 - 2 * d + np.arange(K))
        return _build_e_table(u, 2 - 2 * d, 4 - 3 * d, gauss_2f1_at_1(2 * d - 1, 1.0, 2 - d))
    if name == "i2":
        # (d)_j / (j! (1-d+j)) * E^{g3}_j against the beta = 1-d family
        g3_table = _family_table(d, "g3")
        J = len(g3_table.E)
        w = _cum_ratio(1.0, (d,), (1.0,), J) / (1 - d + np.arange(J))
        u = w * g3_table.E
        m1 = _series_dot(g3_table, d, 1.0, 0.0)
        # dominant decay: j^(d-1)/j/j = 3-d
        return _build_e_table(u, 1.0 - d, 3.0 - d, m1)
    raise ValueError(f"unknown family {name!r}")


def _decay_rate(x: float, z: float) -> float:
    """lam = -ln(x) from whichever of x, 1-x is known accurately."""
    if x <= 0.0:
        return math.inf
    return -math.log1p(-z) if z < 0.5 else -math.log(x)


def _phi_family_sum(d: float, name: str, x: float, one_minus_x: float | None,
                    bottom: float | None = None) -> float:
    z = _omx(x, one_minus_x)
    return _series_dot(_family_table(d, name), d, x, _decay_rate(x, z), bottom)


# ---------------------------------------------------------------------------
# G functions
# ---------------------------------------------------------------------------

def g1(x: float, d: float, one_minus_x: float | None = None) -> float:
    """G_1(x) = (1-x)^(-d) / (1-d)^(1/2)."""
    z = _position(x, one_minus_x)
    return z ** (-d) / math.sqrt(1.0 - d)


def g2(x: float, d: float, cfg: EvalConfig = DEFAULT_CONFIG,
       one_minus_x: float | None = None) -> float:
    """G_2(x) = x^(1-d)/(1-d)^(3/2) 2F1(1,d;2-d;x) + G(1-d)^2/G(2-2d) (1-x)^(1-2d)/sqrt(1-d)."""
    z = _position(x, one_minus_x)
    f = hyp_2f1(1.0, d, 2.0 - d, x, cfg, one_minus_x=z)
    return (
        x ** (1 - d) / (1 - d) ** 1.5 * f
        + gamma(1 - d) ** 2 / (math.sqrt(1 - d) * gamma(2 - 2 * d)) * z ** (1 - 2 * d)
    )


def _g3_pole_ratio(d: float) -> float:
    """Gamma(2d-2)/Gamma(d-1) reduced to Gamma(2d+1)(d-1)/(Gamma(d+1) 2(2d-1)(2d-2)).

    The reduction realizes the d->0 limit -1/4 exactly (the raw ratio is a
    different-rate pole pair there); valid for d in [0, 0.5).
    """
    return gamma(2 * d + 1) * (d - 1) / (gamma(d + 1) * 2 * (2 * d - 1) * (2 * d - 2))


def _g3_coefs(d: float) -> tuple[float, float, float, float]:
    pre = (1 - d) ** 1.5
    a_coef = gamma(1 - d) / pre * (gamma(2 - d) / gamma(3 - 2 * d) + _g3_pole_ratio(d))
    s_coef = gamma(2 - 2 * d) / (pre * gamma(3 - 2 * d))
    c_coef = gamma(1 - d) ** 2 / (pre * gamma(2 - 2 * d))
    d_coef = gamma(1 - d) ** 3 / (math.sqrt(1 - d) * gamma(3 - 3 * d))
    return a_coef, s_coef, c_coef, d_coef


def g3(x: float, d: float, cfg: EvalConfig = DEFAULT_CONFIG,
       one_minus_x: float | None = None) -> float:
    """Closed form of G_3 = K(G_2): two 2F1 pieces, a power of 1-x, and the
    telescoping series summed through its E table.

    At d = 0 the operator is the identity on constants and several pieces
    become 0*inf limits, so that point is returned exactly.
    """
    z = _position(x, one_minus_x)
    if d == 0.0:
        return 1.0
    a_coef, s_coef, c_coef, d_coef = _g3_coefs(d)
    return (
        a_coef * x ** (2 - 2 * d) * hyp_2f1(1.0, d, 3 - 2 * d, x, cfg, one_minus_x=z)
        + s_coef * _phi_family_sum(d, "g3", x, z)
        + c_coef * x ** (1 - d) * hyp_2f1(1.0, 2 * d - 1, 2 - d, x, cfg, one_minus_x=z)
        + d_coef * z ** (2 - 3 * d)
    )


def g4_closed(x: float, d: float, cfg: EvalConfig = DEFAULT_CONFIG,
              one_minus_x: float | None = None) -> float:
    """G_4 = K(G_3) assembled from the kernel images of G_3's four pieces.

    Each piece is an instance of the two kernel integrals below; the
    telescoping-series piece aggregates into two further E-table sums.
    """
    z = _position(x, one_minus_x)
    if d == 0.0:
        return 1.0
    a_coef, s_coef, c_coef, d_coef = _g3_coefs(d)

    # image of x^(2-2d) 2F1(1,d;3-2d;x)
    p1 = gamma(1 - d) * (
        gamma(3 - 2 * d) / gamma(4 - 3 * d) + gamma_ratio(3 * d - 3, 2 * d - 2)
    )
    i1 = (
        p1 * x ** (3 - 3 * d) * hyp_2f1(1.0, d, 4 - 3 * d, x, cfg, one_minus_x=z)
        + _phi_family_sum(d, "i1", x, z)
    )
    # image of the telescoping series, aggregated over its weights
    lam = _decay_rate(x, z)
    i2 = (
        x ** (1 - d) / (1 - d) * _series_dot(_family_table(d, "g3"), d, x, lam, bottom=2 - d)
        + _series_dot(_family_table(d, "i2"), d, x, lam)
    )
    # image of x^(1-d) 2F1(1,2d-1;2-d;x)
    p3 = gamma(1 - d) * (gamma(2 - d) / gamma(3 - 2 * d) + _g3_pole_ratio(d))
    i3 = (
        p3 * x ** (2 - 2 * d) * hyp_2f1(1.0, 2 * d - 1, 3 - 2 * d, x, cfg, one_minus_x=z)
        + _phi_family_sum(d, "i3", x, z)
    )
    i4 = kernel_one_minus_power(2, d, x, one_minus_x=z, cfg=cfg)
    return a_coef * i1 + s_coef * i2 + c_coef * i3 + d_coef * i4


@dataclass(frozen=True)
class GFunction:
    """A member of the operator recursion: pointwise evaluator plus endpoint profile."""

    order: int
    d: float
    evaluator: Callable[..., float]
    left_exponent: float
    right_exponent: float

    def __call__(self, x: float, one_minus_x: float | None = None) -> float:
        return self.evaluator(x, one_minus_x=one_minus_x)


def g_function(order: int, d: float, cfg: EvalConfig = DEFAULT_CONFIG) -> GFunction:
    """G_k for k in 1..4 (closed forms; order 4 uses the assembled image)."""
    if order == 1:
        return GFunction(1, d, lambda x, one_minus_x=None: g1(x, d, one_minus_x), 0.0, -d)
    if order == 2:
        return GFunction(2, d, lambda x, one_minus_x=None: g2(x, d, cfg, one_minus_x), 0.0, 0.0)
    if order == 3:
        return GFunction(3, d, lambda x, one_minus_x=None: g3(x, d, cfg, one_minus_x), 0.0, 0.0)
    if order == 4:
        return GFunction(4, d, lambda x, one_minus_x=None: g4_closed(x, d, cfg, one_minus_x), 0.0, 0.0)
    raise ValueError("orders 1..4 are supported")


# ---------------------------------------------------------------------------
# kernel integrals (closed forms)
# ---------------------------------------------------------------------------

def kernel_hyp2f1_moment(a: float, b: float, c: float, e: float, d: float, x: float,
                         cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """int_0^1 |x-u|^(-d) u^e 2F1(a,b;c;u) du in closed form.

    Requires c > a+b (so the integrand is finite at u=1), 0 < x < 1 and
    0 <= d <= 0.5.  Value:

      B-prefactor * x^(1-d+e) 3F2(a,b,e+1; c,2-d+e; x)
      + sum_m (a)_m (b)_m / ((c)_m m!) / (1-d+e+m)
              * 2F1(d-1-e-m, d; d-e-m; x)

    where the prefactor Gamma(1-d)(Gamma(1+e)/Gamma(2-d+e)
    + Gamma(d-1-e)/Gamma(-e)) equals B(1-d, d-1-e) + B(1-d, 1+e).
    """
    _check_interior(x)
    if c - a - b <= 0:
        raise ParameterDomainError("closed form requires c > a + b")
    if not (0.0 <= d <= 0.5):
        raise ParameterDomainError("requires 0 <= d <= 0.5")
    pre = gamma(1 - d) * (
        gamma_ratio(1 + e, 2 - d + e) + gamma_ratio(d - 1 - e, -e)
    )
    front = pre * x ** (1 - d + e) * _pfq_x((a, b, e + 1.0), (c, 2 - d + e), x, cfg)

    K = 1 << 13
    u = _cum_ratio(1.0, (a, b), (c, 1.0), K) / (1 - d + e + np.arange(K))
    table = _build_e_table(u, 1 - d + e, c - a - b + 2.0, gauss_2f1_at_1(a, b, c))
    return front + _series_dot(table, d, x, _decay_rate(x, 1.0 - x))


def kernel_one_minus_power(p: int, d: float, x: float,
                           one_minus_x: float | None = None,
                           cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """int_0^1 |x-u|^(-d) (1-u)^(p-(p+1)d) du in closed form.

    Gamma(1-d)Gamma((p+1)(1-d))/Gamma((p+2)(1-d)) (1-x)^((p+1)-(p+2)d)
    + x^(1-d)/(1-d) 2F1(1, (p+1)d-p; 2-d; x).
    """
    if p < 0:
        raise ParameterDomainError("p must be a non-negative integer")
    if not (0.0 <= d <= 0.5):
        raise ParameterDomainError("requires 0 <= d <= 0.5")
    z = _position(x, one_minus_x)
    first = (
        gamma(1 - d) * gamma((p + 1) * (1 - d)) / gamma((p + 2) * (1 - d))
        * z ** ((p + 1) - (p + 2) * d)
    )
    return first + x ** (1 - d) / (1 - d) * hyp_2f1(
        1.0, (p + 1) * d - p, 2 - d, x, cfg, one_minus_x=z
    )


def _pfq_x(top, bottom, x, cfg: EvalConfig) -> float:
    from .specfun import HypParams, pfq

    return pfq(HypParams(top, bottom), x, cfg).value


# ---------------------------------------------------------------------------
# numerical operator and inner products
# ---------------------------------------------------------------------------

def apply_kernel(f: Callable[..., float], d: float, x: float, *,
                 abs_tol: float = 1e-9) -> float:
    """(K f)(x) = int_0^1 |x-u|^(-d) f(u) du by split double-exponential quadrature.

    The interval is split at the kernel point u = x; on each piece the
    tanh-sinh nodes absorb both the |x-u|^(-d) endpoint singularity and
    any integrable singularity of f at 0 or 1.  f(u, one_minus_x=...) is
    called with the exact distance to 1 so endpoint factors stay accurate.
    """
    _check_interior(x)
    z = 1.0 - x

    def left_piece(u, dl, dr):
        return np.array([f(ui, one_minus_x=z + ri) * ri ** (-d) for ui, ri in zip(u, dr)])

    def right_piece(u, dl, dr):
        return np.array([f(ui, one_minus_x=ri) * li ** (-d) for ui, li, ri in zip(u, dl, dr)])

    v1, _ = tanh_sinh(left_piece, 0.0, x, abs_tol=abs_tol / 2)
    v2, _ = tanh_sinh(right_piece, x, 1.0, abs_tol=abs_tol / 2)
    return v1 + v2


def c_k_via_operator(mu: int, nu: int, d: float, cfg: EvalConfig = DEFAULT_CONFIG, *,
                     abs_tol: float | None = None, g4_route: str = "closed") -> float:
    """c_k = int_0^1 G_mu(x) G_nu(x) dx with mu + nu = k in {2,...,5}.

    The order-4 factor uses the closed-form assembly by default;
    g4_route="operator" integrates K(G_3) numerically instead (slow,
    used as a cross-check).
    """
    k = mu + nu
    if k not in (2, 3, 4, 5) or min(mu, nu) < 1 or max(mu, nu) > 4:
        raise ValueError("need mu, nu in 1..4 with mu+nu in 2..5")
    if not (0.0 <= d < 0.5):
        raise ParameterDomainError("operator route requires 0 <= d < 0.5")
    if abs_tol is None:
        abs_tol = 1e-10 if k <= 4 else 1e-8

    def build(order: int) -> GFunction:
        if order == 4 and g4_route == "operator":
            g3f = g_function(3, d, cfg)
            return GFunction(
                4, d,
                lambda x, one_minus_x=None: apply_kernel(g3f, d, x, abs_tol=abs_tol / 10),
                0.0, 0.0,
            )
        return g_function(order, d, cfg)

    gm = build(mu)
    gn = gm if nu == mu else build(nu)

    def integrand(u, dl, dr):
        return np.array([
            gm(ui, one_minus_x=ri) * gn(ui, one_minus_x=ri)
            for ui, ri in zip(u, dr)
        ])

    value, _ = tanh_sinh(integrand, 0.0, 1.0, abs_tol=abs_tol)
    return value
