"""Student's-t confidence of superiority between paired trial results.

The t CDF is evaluated through the regularized incomplete beta function
computed with the Lentz continued fraction, accurate to well below 1e-10
over the degrees of freedom used here.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, NumericError

_MAX_ITER = 500
_EPS = 1e-15
_TINY = 1e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NumericError("incomplete beta continued fraction did not converge")


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x < 0.0 or x > 1.0:
        raise ConfigError(f"incomplete beta argument x={x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return float(x)
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    """P(T <= t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ConfigError(f"degrees of freedom must be positive, got {df}")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def confidence_of_superiority(results_a: np.ndarray, results_b: np.ndarray,
                              direction: str = "greater") -> float:
    """Confidence that the per-trial difference a - b is > 0 (or < 0).

    The difference is modeled as a located-scaled Student's t with the
    sample mean and standard deviation of the paired differences.
    """
    a = np.asarray(results_a, dtype=np.float64)
    b = np.asarray(results_b, dtype=np.float64)
    if direction not in ("greater", "less"):
        raise ConfigError(f"direction must be 'greater' or 'less', got {direction!r}")
    if a.ndim != 1 or b.ndim != 1 or a.size != b.size:
        raise ConfigError("trial result lists must be 1-d and of equal length")
    if a.size < 2:
        raise ConfigError("need at least two trials")
    diff = a - b
    mean = float(diff.mean())
    std = float(diff.std(ddof=1))
    if std == 0.0:
        raise NumericError(
            "zero variance of trial differences; confidence is degenerate 0/1")
    t_stat = mean * math.sqrt(diff.size) / std
    df = diff.size - 1
    # P(X > 0) = P(T > -t_stat) = F(t_stat); mirrored for 'less'.
    return t_cdf(t_stat if direction == "greater" else -t_stat, df)
