"""Numerically exact moments of the collection time via quadrature.

The waiting time T until every one of the N types has been drawn at least m
times has (by Poissonization)

    E[T]        = int_0^inf  [1 - prod_j P(m, p_j t)] dt,
    E[T(T+1)]   = 2 int_0^inf t [1 - prod_j P(m, p_j t)] dt,

where P(m, x) is the regularized lower incomplete gamma function, i.e. the
probability that a Poisson(x) count reaches m.  Both integrals are evaluated
with adaptive quadrature on a truncated interval; the truncation remainder is
bounded in closed form and folded into the reported error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammainc, gammaincc

from .families import CouponDistribution


class ConvergenceFailure(RuntimeError):
    """Adaptive quadrature exhausted its panel budget before reaching rel_tol."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    tail_epsilon: float = 1e-14
    max_panels: int = 2**20

    def __post_init__(self) -> None:
        if min(self.rel_tol, self.abs_tol, self.tail_epsilon) <= 0:
            raise ValueError("all tolerances must be strictly positive")
        if self.max_panels < 2:
            raise ValueError("max_panels must be at least 2")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class MomentReport:
    """Moment values with provenance and an error estimate.

    Fields not produced by the computation that generated the report are None
    (e.g. `expectation_exact` fills only `expectation`).
    """

    expectation: float | None = None
    rising_moment: float | None = None
    variance: float | None = None
    method: str = "quadrature"
    error_estimate: float = 0.0
    truncation_point: float | None = None
    rel_tol: float | None = None
    abs_tol: float | None = None

    def to_dict(self) -> dict:
        return {
            "expectation": self.expectation,
            "rising_moment": self.rising_moment,
            "variance": self.variance,
            "method": self.method,
            "error_estimate": self.error_estimate,
            "truncation_point": self.truncation_point,
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
        }


def partial_sum_exp(y: float, m: int) -> float:
    """m-th partial sum of the exponential series: sum_{l<m} y^l / l!."""
    if y < 0:
        raise ValueError("y must be nonnegative")
    if m < 1:
        raise ValueError("m must be a positive integer")
    total = 1.0
    term = 1.0
    for l in range(1, m):
        term *= y / l
        total += term
    return total


def deficiency(x: float, m: int) -> float:
    """Probability that a Poisson(x) count has reached m: 1 - S_m(x) e^{-x}.

    Evaluated as the regularized lower incomplete gamma P(m, x), which avoids
    the catastrophic cancellation of the direct difference for x << m.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if m < 1:
        raise ValueError("m must be a positive integer")
    return float(gammainc(m, x))


def _log_completion_probability(probs: np.ndarray, m: int, t: float) -> float:
    """log prod_j P(m, p_j t), or -inf when any factor underflows to zero."""
    x = probs * t
    complement = gammaincc(m, x)
    if np.any(complement >= 1.0):
        return -math.inf
    # log1p keeps full accuracy for the near-1 factors that dominate at large t.
    return float(np.sum(np.log1p(-complement)))


def survival_probability_integrand(dist: CouponDistribution, m: int, t: float) -> float:
    """P(T > t) in the Poissonized clock: 1 - prod_j P(m, p_j t)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 1.0
    log_p = _log_completion_probability(dist.probs, m, t)
    return float(-np.expm1(log_p))


def _union_bound(probs: np.ndarray, m: int, t: float) -> float:
    """sum_j Q(m, p_j t), an upper bound for the survival integrand."""
    return float(np.sum(gammaincc(m, probs * t)))


def truncation_point(dist: CouponDistribution, m: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Smallest t (up to bisection slack) with sum_j Q(m, p_j t) < tail_epsilon."""
    probs = dist.probs
    hi = (m + math.log(dist.n_types + 1.0) + 40.0) / dist.min_prob
    while _union_bound(probs, m, hi) >= cfg.tail_epsilon:
        hi *= 2.0
    lo = hi / 2.0
    if _union_bound(probs, m, lo) < cfg.tail_epsilon:
        lo = 1e-3 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _union_bound(probs, m, mid) < cfg.tail_epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def _tail_bound_expectation(probs: np.ndarray, m: int, t_star: float) -> float:
    """Bound on int_{t*}^inf [1 - prod P] dt via the union bound.

    Uses int_x^inf Q(m, u) du = m Q(m+1, x) - x Q(m, x).
    """
    x = probs * t_star
    per_type = m * gammaincc(m + 1, x) - x * gammaincc(m, x)
    return float(np.sum(np.maximum(per_type, 0.0) / probs))


def _tail_bound_rising(probs: np.ndarray, m: int, t_star: float) -> float:
    """Bound on 2 int_{t*}^inf t [1 - prod P] dt via the union bound.

    Uses int_x^inf u Q(m, u) du = (m(m+1) Q(m+2, x) - x^2 Q(m, x)) / 2.
    """
    x = probs * t_star
    per_type = 0.5 * (m * (m + 1) * gammaincc(m + 2, x) - x * x * gammaincc(m, x))
    return float(np.sum(2.0 * np.maximum(per_type, 0.0) / probs**2))


def _transition_point(dist: CouponDistribution, m: int, t_star: float) -> float:
    """t where the union bound crosses ~0.7, i.e. the survival drop-off."""
    probs = dist.probs
    lo, hi = 0.0, t_star
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _union_bound(probs, m, mid) > 0.7:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _integrate(dist: CouponDistribution, m: int, cfg: QuadratureConfig, weight_t: bool):
    """Adaptive quadrature of the (optionally t-weighted) survival integrand.

    Integration runs in the scaled variable s = t / A_N so the transition
    region sits at an N-independent location for each family; the returned
    value is in unscaled t units.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    probs = dist.probs
    a_n = dist.normalizer
    t_star = truncation_point(dist, m, cfg)
    t_mid = _transition_point(dist, m, t_star)
    s_star = t_star / a_n

    if weight_t:
        def integrand(s: float) -> float:
            return 2.0 * s * survival_probability_integrand(dist, m, a_n * s)
        tail = _tail_bound_rising(probs, m, t_star)
        scale = a_n * a_n
    else:
        def integrand(s: float) -> float:
            return survival_probability_integrand(dist, m, a_n * s)
        tail = _tail_bound_expectation(probs, m, t_star)
        scale = a_n

    with np.errstate(divide="ignore"):
        value, quad_err, info = quad(
            integrand,
            0.0,
            s_star,
            points=[t_mid / a_n],
            epsabs=cfg.abs_tol,
            epsrel=cfg.rel_tol,
            limit=int(cfg.max_panels),
            full_output=True,
        )[:3]
    value *= scale
    quad_err *= scale
    if info["last"] >= cfg.max_panels and quad_err > cfg.rel_tol * abs(value) + cfg.abs_tol:
        raise ConvergenceFailure(
            f"quadrature used all {cfg.max_panels} panels, error {quad_err:g} on value {value:g}"
        )
    return value, quad_err + tail, t_star


def expectation_exact(
    dist: CouponDistribution, m: int, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> MomentReport:
    """E[T] by quadrature, with quadrature + truncation error estimate."""
    value, err, t_star = _integrate(dist, m, cfg, weight_t=False)
    return MomentReport(
        expectation=value,
        method="quadrature",
        error_estimate=err,
        truncation_point=t_star,
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
    )


def rising_moment_exact(
    dist: CouponDistribution, m: int, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> MomentReport:
    """E[T(T+1)] by quadrature of the t-weighted survival integral."""
    value, err, t_star = _integrate(dist, m, cfg, weight_t=True)
    return MomentReport(
        rising_moment=value,
        method="quadrature",
        error_estimate=err,
        truncation_point=t_star,
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
    )


def variance_exact(
    dist: CouponDistribution, m: int, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> MomentReport:
    """V[T] = E[T(T+1)] - E[T] - E[T]^2 from the two quadratures."""
    e_rep = expectation_exact(dist, m, cfg)
    q_rep = rising_moment_exact(dist, m, cfg)
    e = e_rep.expectation
    q = q_rep.rising_moment
    variance = q - e - e * e
    # First-order propagation: dV = dQ - (1 + 2E) dE.
    err = q_rep.error_estimate + (1.0 + 2.0 * e) * e_rep.error_estimate
    return MomentReport(
        expectation=e,
        rising_moment=q,
        variance=variance,
        method="quadrature",
        error_estimate=err,
        truncation_point=max(e_rep.truncation_point, q_rep.truncation_point),
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
    )
