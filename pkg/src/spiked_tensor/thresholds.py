"""Detection-threshold bounds for the spiked tensor model.

Lower bounds come from the noise-conditioned second-moment criterion: the
largest snr with ``snr^2/2 * t^d/(1+t^d) <= f(t)`` on (0,1), i.e.

    snr* = sqrt(2 * inf_t (1+t^d)/t^d * f(t)),

with the additional cap ``snr* <= 1/sigma`` at d=2 (local subgaussianity).
For the spherical prior the same number solves a tangency system in closed
form, which provides an independent solver route.

Upper bounds: for discrete priors, exhaustive-search MLE gives 2*sqrt(c)
with c the log-cardinality density (2*sqrt(s) for the MAP/entropy variant);
for the spherical prior, the spiked injective norm exceeds the unspiked
limit mu_d once snr crosses the unique root of L_d(snr) = mu_d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .rates import RateFunction, collision_entropy, rate_function_for
from .solvers import BracketError, bisect_root, geometric_grid, golden_min
from .tensors import SpikePrior

GRID_POINTS = 10_000
# below ~1e-6 the sparse rate evaluates as a difference of O(1) entropies and
# is cancellation noise; the t->0 boundary is covered exactly by the 1/sigma cap
SPARSE_T_FLOOR = 1e-6


class LowerBoundResult(NamedTuple):
    value: float
    t_star: float
    capped_by_sigma: bool
    grid_refinement_gap: float


class TangencyResult(NamedTuple):
    t_star: float
    value: float
    residual: float


class SpikedNormLowerBound(NamedTuple):
    value: float
    m_star: float
    beta_star: float


def lower_bound_lambda(rate: RateFunction, d: int) -> LowerBoundResult:
    """sqrt(2 inf (1+t^d)/t^d f(t)) on a boundary-refined grid + golden polish."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    tmin = SPARSE_T_FLOOR if rate.prior.kind == "sparse_rademacher" else 1e-9
    ts = geometric_grid(GRID_POINTS, tmin=tmin)
    fvals = np.maximum(rate.eval_batch(ts), 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        td = ts**d
        ratio = np.where(td > 0.0, (1.0 + td) / td * fvals, np.inf)
    i = int(np.argmin(ratio))

    def objective(t: float) -> float:
        td = t**d
        if td <= 0.0:
            return math.inf
        return (1.0 + td) / td * max(rate.eval(t), 0.0)

    a = ts[max(0, i - 1)]
    b = ts[min(len(ts) - 1, i + 1)]
    _t, refined = golden_min(objective, float(a), float(b), tol=1e-10)
    best = min(refined, float(ratio[i]))
    t_star = _t if refined <= ratio[i] else float(ts[i])
    value = math.sqrt(2.0 * best)
    capped = False
    if d == 2:
        cap = 1.0 / math.sqrt(rate.local_subgaussian_sigma2)
        if cap < value:
            value, capped = cap, True
    return LowerBoundResult(value, t_star, capped, abs(refined - float(ratio[i])))


def spherical_tangency(d: int) -> TangencyResult:
    """Tangency point of the spherical criterion; agrees with lower_bound_lambda.

    Solves (2/d)(1+t^d) t^2/(1-t^2) + log(1-t^2) = 0 on (0,1) (unique root),
    then value^2 = 2 (1+t^d)^2 / (d (1-t^2) t^(d-2)).
    """
    if d < 3:
        raise ValueError(f"tangency route requires d >= 3, got {d}")

    def h(t: float) -> float:
        t2 = t * t
        return (2.0 / d) * (1.0 + t**d) * t2 / (1.0 - t2) + math.log1p(-t2)

    res = bisect_root(h, 1e-8, 1.0 - 1e-15, xtol=1e-16, max_iter=200)
    t = res.root
    lam_sq = 2.0 * (1.0 + t**d) ** 2 / (d * (1.0 - t * t) * t ** (d - 2))
    return TangencyResult(t, math.sqrt(lam_sq), res.residual)


def injective_norm_mu(d: int) -> float:
    """Limiting injective norm mu_d of an unspiked tensor (d >= 3).

    Root of the characteristic equation in x >= 2 sqrt(d-1), with
    z(x) = (x - sqrt(x^2 - 4(d-1))) / ((d-1) sqrt(2d)); mu_d = x sqrt(2/d).
    """
    if d < 3:
        raise ValueError(f"mu_d is computed for d >= 3, got {d}")

    def g_of_x(x: float) -> float:
        z = (x - math.sqrt(max(x * x - 4.0 * (d - 1), 0.0))) / ((d - 1) * math.sqrt(2.0 * d))
        z2 = z * z
        return (2.0 - d) / d - math.log(d * z2 / 2.0) + 0.5 * (d - 1) * z2 - 2.0 / (d * d * z2)

    lo = 2.0 * math.sqrt(d - 1.0) + 1e-12
    hi = math.sqrt(d * (2.0 * math.log(d) + 2.0 * math.log(math.log(d)) + 4.0))
    try:
        res = bisect_root(g_of_x, lo, hi, xtol=1e-10, max_iter=300)
    except BracketError:
        res = bisect_root(g_of_x, lo, 2.0 * hi, xtol=1e-10, max_iter=300)
    return res.root * math.sqrt(2.0 / d)


def spiked_norm_lower_Ld(d: int, snr: float) -> SpikedNormLowerBound:
    """Lower bound L_d(snr) on the spiked injective norm, with its maximizer.

    Maximizes m^d (snr + sqrt(2d/(d-1)) sqrt(M(1+M))), M = (d-1)(1-m^2)/m^2,
    over m in [0,1]; the m=1 endpoint gives snr, so L_d(snr) >= snr always.
    Also reports the matching deformation weight beta(m)=sqrt(1+m^2/((1-m^2)(d-1))).
    """
    if d < 3:
        raise ValueError(f"d must be >= 3, got {d}")
    if snr < 0:
        raise ValueError(f"snr must be >= 0, got {snr}")
    coef = math.sqrt(2.0 * d / (d - 1.0))

    def value(m: float) -> float:
        if m <= 0.0:
            return 0.0
        if m >= 1.0:
            return snr
        big_m = (d - 1.0) * (1.0 - m * m) / (m * m)
        return m**d * (snr + coef * math.sqrt(big_m * (1.0 + big_m)))

    ms = np.linspace(1e-9, 1.0, GRID_POINTS)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = (d - 1.0) * (1.0 - ms**2) / ms**2
        vals = ms**d * (snr + coef * np.sqrt(big * (1.0 + big)))
    vals[-1] = snr
    i = int(np.argmax(vals))
    a = ms[max(0, i - 1)]
    b = ms[min(len(ms) - 1, i + 1)]
    m_star, neg = golden_min(lambda m: -value(m), float(a), float(b), tol=1e-12)
    best = max(-neg, float(vals[i]))
    if -neg < vals[i]:
        m_star = float(ms[i])
    if m_star >= 1.0:
        beta = math.inf
    else:
        beta = math.sqrt(1.0 + m_star**2 / ((1.0 - m_star**2) * (d - 1.0)))
    return SpikedNormLowerBound(best, m_star, beta)


def upper_bound_spherical(d: int, mu: float | None = None) -> float:
    """Spherical detection upper bound: unique snr with L_d(snr) = mu_d."""
    if d < 3:
        raise ValueError(f"d must be >= 3, got {d}")
    if mu is None:
        mu = injective_norm_mu(d)
    res = bisect_root(
        lambda lam: spiked_norm_lower_Ld(d, lam).value - mu, 0.0, mu, xtol=1e-8
    )
    return res.root


def upper_bound_cardinality(prior: SpikePrior, d: int) -> float:
    """MLE union-bound threshold 2 sqrt(c), c the log-support density."""
    if not prior.is_discrete:
        raise ValueError("cardinality bound requires a discrete prior")
    return 2.0 * math.sqrt(prior.support_size_log_density())


def upper_bound_entropy(prior: SpikePrior, d: int) -> float:
    """MAP threshold 2 sqrt(s); equals the cardinality bound for uniform priors."""
    if not prior.is_discrete:
        raise ValueError("entropy bound requires a discrete prior")
    # both supported priors are uniform on their support, so s = c exactly
    return 2.0 * math.sqrt(prior.support_size_log_density())


ASYMPTOTIC_KINDS = ("mu_sq", "lower_sph_sq", "upper_sph_sq", "sparse_rho_lower")


def asymptotics(kind: str, value: float) -> float:
    """Leading large-d / small-rho expressions with the o(1) / O(rho) term dropped."""
    if kind == "mu_sq":
        d = value
        return 2.0 * math.log(d) + 2.0 * math.log(math.log(d)) + 2.0
    if kind == "lower_sph_sq":
        d = value
        return 2.0 * math.log(d) + 2.0 * math.log(math.log(d)) + 2.0 - 4.0 * math.log(2.0)
    if kind == "upper_sph_sq":
        d = value
        return 2.0 * math.log(d) + 2.0 * math.log(math.log(d))
    if kind == "sparse_rho_lower":
        rho = value
        if not 0.0 < rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {rho}")
        return 2.0 * math.sqrt(-rho * math.log(rho))
    raise ValueError(f"unknown asymptotics kind {kind!r}; expected one of {ASYMPTOTIC_KINDS}")


@dataclass(frozen=True)
class ThresholdReport:
    """Per (prior, d) summary of all applicable bounds."""

    prior: SpikePrior
    d: int
    lambda_lower: float
    lambda_upper: float
    mu_d: float | None = None
    replica_prediction: float | None = None
    asymptotic_lower: float | None = None
    asymptotic_upper: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lambda_lower > self.lambda_upper + 1e-9:
            raise ValueError(
                f"bound ordering violated: lower {self.lambda_lower} > upper {self.lambda_upper}"
            )
        if (
            self.prior.kind == "spherical"
            and self.mu_d is not None
            and not self.lambda_upper < self.mu_d
        ):
            raise ValueError(f"expected upper bound {self.lambda_upper} < mu_d {self.mu_d}")


def threshold_report(
    prior: SpikePrior, d: int, include_replica: bool = False
) -> ThresholdReport:
    """Aggregate lower/upper bounds, mu_d, replica prediction and asymptotics.

    d=2 with the spherical or Rademacher prior is the exactly known case:
    both strong detection and weak recovery transition at snr = 1, so the
    report pins both bounds there (the generic optimization value is kept in
    the diagnostics for comparison).
    """
    rate = rate_function_for(prior)
    lower = lower_bound_lambda(rate, d)
    diagnostics: dict = {
        "lower_t_star": lower.t_star,
        "lower_capped_by_sigma": lower.capped_by_sigma,
        "lower_grid_refinement_gap": lower.grid_refinement_gap,
        "sigma2": rate.local_subgaussian_sigma2,
        "collision_entropy": rate.collision_entropy,
    }
    replica_prediction = None
    asym_lower = asym_upper = None

    if d == 2:
        mu = None
        if prior.kind in ("spherical", "rademacher"):
            lam_lo = lam_hi = 1.0
            diagnostics["generic_lambda_lower"] = lower.value
            diagnostics["exact_d2_threshold"] = True
        else:
            lam_lo = lower.value
            lam_hi = upper_bound_cardinality(prior, d)
            if prior.rho < 1.0:
                asym_lower = asymptotics("sparse_rho_lower", prior.rho)
    else:
        mu = injective_norm_mu(d)
        diagnostics["mu_residual"] = _mu_residual(d, mu)
        if prior.kind == "spherical":
            tang = spherical_tangency(d)
            diagnostics["tangency_t_star"] = tang.t_star
            diagnostics["tangency_residual"] = tang.residual
            diagnostics["tangency_value"] = tang.value
            lam_lo = lower.value
            lam_hi = upper_bound_spherical(d, mu)
            diagnostics["upper_residual"] = abs(
                spiked_norm_lower_Ld(d, lam_hi).value - mu
            )
            asym_lower = math.sqrt(asymptotics("lower_sph_sq", d))
            asym_upper = math.sqrt(asymptotics("upper_sph_sq", d))
        else:
            lam_lo = lower.value
            lam_hi = upper_bound_cardinality(prior, d)
            if prior.kind == "rademacher":
                asym_lower = asym_upper = 2.0 * math.sqrt(math.log(2.0))
            elif prior.rho < 1.0:
                asym_lower = asymptotics("sparse_rho_lower", prior.rho)
        if include_replica and prior.kind in ("spherical", "rademacher"):
            from . import replica

            if prior.kind == "spherical":
                replica_prediction = replica.spherical_replica_threshold(d)
            else:
                replica_prediction = replica.rademacher_replica_thresholds(d)[1]

    return ThresholdReport(
        prior=prior,
        d=d,
        lambda_lower=lam_lo,
        lambda_upper=lam_hi,
        mu_d=mu,
        replica_prediction=replica_prediction,
        asymptotic_lower=asym_lower,
        asymptotic_upper=asym_upper,
        diagnostics=diagnostics,
    )


def _mu_residual(d: int, mu: float) -> float:
    x = mu * math.sqrt(d / 2.0)
    z = (x - math.sqrt(max(x * x - 4.0 * (d - 1), 0.0))) / ((d - 1) * math.sqrt(2.0 * d))
    z2 = z * z
    return abs(
        (2.0 - d) / d - math.log(d * z2 / 2.0) + 0.5 * (d - 1) * z2 - 2.0 / (d * d * z2)
    )


def collision_entropy_cap(prior: SpikePrior) -> float:
    """t->1 limit of the criterion: snr* <= 2 sqrt(F) for discrete priors."""
    f = collision_entropy(prior)
    return math.inf if math.isinf(f) else 2.0 * math.sqrt(f)
