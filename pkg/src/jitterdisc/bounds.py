"""Pure scalar evaluators for the probabilistic discrepancy bounds.

Each function evaluates one published inequality or constant; all are
deterministic, use double precision, and go through log/exp forms where a
direct power would overflow for large arguments.  Values are annotations
for experiment reports and empirical dominance checks, never assertions by
themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "BoundEvaluation",
    "jittered_mean_star_upper",
    "jittered_mean_star_lower",
    "refined_upper_constant",
    "dkw_tail",
    "ks_exp_moment_bound",
    "bernstein_sum_tail",
    "hnww_tail",
    "hammersley_leading_bound",
    "inverse_star_bounds",
    "bigbox_fraction",
    "kolmogorov_limit_constant",
    "conjectured_star_rate",
    "evaluate_all",
]


@dataclass(frozen=True)
class BoundEvaluation:
    """One bound evaluated at named scalar inputs."""

    name: str
    inputs: dict = field(default_factory=dict)
    value: float = float("nan")


def _check_positive_int(value, name):
    if value < 1:
        raise ValueError(f"{name} must be >= 1")


def jittered_mean_star_upper(n, d: int) -> float:
    """Upper bound ``sqrt(d) (log n)^(1/2) / n^(1/2 + 1/(2d))`` on the mean
    star discrepancy of a jittered set of ``n = m^d`` points."""
    _check_positive_int(d, "d")
    if n < 2:
        raise ValueError("n must be >= 2 (log nonpositive below)")
    return math.sqrt(d) * math.sqrt(math.log(n)) * math.exp(-(0.5 + 0.5 / d) * math.log(n))


def jittered_mean_star_lower(n, d: int) -> float:
    """Lower bound ``(1/10) d / n^(1/2 + 1/(2d))`` on the same mean."""
    _check_positive_int(d, "d")
    _check_positive_int(n, "n")
    return 0.1 * d * math.exp(-(0.5 + 0.5 / d) * math.log(n))


def refined_upper_constant(d: int) -> float:
    """Sharper leading constant ``sqrt(3/4 + 1/(4d))`` attainable in the
    jittered upper bound for large n."""
    _check_positive_int(d, "d")
    return math.sqrt(0.75 + 0.25 / d)


def dkw_tail(n, eps: float) -> float:
    """Dvoretzky-Kiefer-Wolfowitz tail ``2 exp(-2 n eps^2)`` (Massart's
    sharp constant) for the 1-d empirical-process supremum."""
    _check_positive_int(n, "n")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    return 2.0 * math.exp(-2.0 * n * eps * eps)


def ks_exp_moment_bound(t: float, n) -> float:
    """Bound ``1 + sqrt(2 pi) (t/sqrt(n)) exp(t^2/(8n))`` on the exponential
    moment ``E exp(t X_n)`` of the 1-d discrepancy of n uniforms."""
    _check_positive_int(n, "n")
    if t < 0:
        raise ValueError("t must be >= 0")
    return 1.0 + math.sqrt(2.0 * math.pi) * (t / math.sqrt(n)) * math.exp(t * t / (8.0 * n))


def bernstein_sum_tail(y: float, n, d: int) -> float:
    """Tail ``(1 + sqrt(32 pi n) y / d)^d exp(-2 n y^2 / d)`` for a sum of d
    independent variables with the KS exponential-moment bound."""
    _check_positive_int(n, "n")
    _check_positive_int(d, "d")
    if y < 0:
        raise ValueError("y must be >= 0")
    log_poly = d * math.log1p(math.sqrt(32.0 * math.pi * n) * y / d)
    return math.exp(log_poly - 2.0 * n * y * y / d)


def hnww_tail(delta: float, n, d: int) -> float:
    """Heinrich-Novak-Wasilkowski-Wozniakowski tail
    ``2 (d/delta + 2)^d exp(-delta^2 n / 2)`` for the star discrepancy of n
    i.i.d. uniform points exceeding ``2 delta``."""
    _check_positive_int(d, "d")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if n < 0:
        raise ValueError("n must be >= 0")
    exponent = d * math.log(d / delta + 2.0) - delta * delta * n / 2.0
    if exponent > 709.0:  # beyond double range the bound is vacuous anyway
        return math.inf
    return 2.0 * math.exp(exponent)


def hammersley_leading_bound(n, d: int) -> float:
    """Leading term ``7 / (2^(d-1) (d-1)) (log n)^(d-1) / n`` of the known
    Hammersley star-discrepancy bound (remainder excluded; label results
    leading-term only)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if n < 2:
        raise ValueError("n must be >= 2")
    return 7.0 / (2.0 ** (d - 1) * (d - 1)) * math.log(n) ** (d - 1) / n


def inverse_star_bounds(n, d: int):
    """Pair ``(10 sqrt(d/n), 10 sqrt(d/n * min(1, log n / n^(1/d))))``.

    The first is the established inverse-star-discrepancy bound; the second
    the improvement implied by the jittered upper bound, which bites once n
    is slightly larger than d^d.
    """
    _check_positive_int(d, "d")
    if n < 2:
        raise ValueError("n must be >= 2")
    base = 10.0 * math.sqrt(d / n)
    improved = 10.0 * math.sqrt(d / n * min(1.0, math.log(n) / n ** (1.0 / d)))
    return base, improved


def bigbox_fraction(n, d: int) -> float:
    """Fraction ``(1 - 1/n^(1/d))^d`` of points in the largest sub-grid box
    strictly inside an anchored box; tends to 1/e at ``n = d^d``."""
    _check_positive_int(d, "d")
    _check_positive_int(n, "n")
    return (1.0 - 1.0 / float(n) ** (1.0 / d)) ** d


def kolmogorov_limit_constant() -> float:
    """Mean of the Kolmogorov distribution, ``sqrt(pi/2) log 2``."""
    return math.sqrt(math.pi / 2.0) * math.log(2.0)


def conjectured_star_rate(n, d: int) -> float:
    """Conjectural rate ``(d + (log n)^(1/2)) / n^(1/2 + 1/(2d))``.

    Diagnostic only; printed under a conjectural label and never asserted
    as a bound.
    """
    _check_positive_int(d, "d")
    if n < 2:
        raise ValueError("n must be >= 2")
    return (d + math.sqrt(math.log(n))) * math.exp(-(0.5 + 0.5 / d) * math.log(n))


def evaluate_all(n: int, d: int, eps: float = 0.1, t: float = 1.0, y: float = 0.1, delta: float = 0.1) -> list:
    """All evaluators at ``(n, d)``, auxiliary scalars at documented defaults.

    Used by the CLI table and by report annotations.
    """
    rows = [
        BoundEvaluation("jittered_mean_star_upper", {"n": n, "d": d}, jittered_mean_star_upper(n, d)),
        BoundEvaluation("jittered_mean_star_lower", {"n": n, "d": d}, jittered_mean_star_lower(n, d)),
        BoundEvaluation("refined_upper_constant", {"d": d}, refined_upper_constant(d)),
        BoundEvaluation("dkw_tail", {"n": n, "eps": eps}, dkw_tail(n, eps)),
        BoundEvaluation("ks_exp_moment_bound", {"t": t, "n": n}, ks_exp_moment_bound(t, n)),
        BoundEvaluation("bernstein_sum_tail", {"y": y, "n": n, "d": d}, bernstein_sum_tail(y, n, d)),
        BoundEvaluation("hnww_tail", {"delta": delta, "n": n, "d": d}, hnww_tail(delta, n, d)),
        BoundEvaluation(
            "inverse_star_bound", {"n": n, "d": d}, inverse_star_bounds(n, d)[0]
        ),
        BoundEvaluation(
            "inverse_star_bound_improved", {"n": n, "d": d}, inverse_star_bounds(n, d)[1]
        ),
        BoundEvaluation("bigbox_fraction", {"n": n, "d": d}, bigbox_fraction(n, d)),
        BoundEvaluation("kolmogorov_limit_constant", {}, kolmogorov_limit_constant()),
        BoundEvaluation(
            "conjectured_star_rate[conjectural]", {"n": n, "d": d}, conjectured_star_rate(n, d)
        ),
    ]
    if d >= 2:
        rows.insert(
            9,
            BoundEvaluation(
                "hammersley_leading_bound", {"n": n, "d": d}, hammersley_leading_bound(n, d)
            ),
        )
    return rows
