"""Student's-t confidence against a numeric-integration oracle."""

import math

import numpy as np
import pytest

from vecboost import ConfigError, NumericError, confidence_of_superiority, t_cdf


def t_density(x, df):
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2))
    c /= math.sqrt(df * math.pi)
    return c * (1 + x * x / df) ** (-(df + 1) / 2)


def t_cdf_by_quadrature(t, df, steps=200001):
    """Oracle: CDF(t) = 1/2 + integral of the density from 0 to t (Simpson).

    Integrating from the symmetric center avoids any tail truncation.
    """
    if t == 0.0:
        return 0.5
    xs = np.linspace(0.0, t, steps)
    ys = np.array([t_density(x, df) for x in xs])
    h = t / (steps - 1)
    weights = np.ones(steps)
    weights[1:-1:2] = 4
    weights[2:-1:2] = 2
    return float(0.5 + h / 3 * np.dot(weights, ys))


class TestTCdf:
    def test_center_is_half(self):
        for df in (1, 3, 9, 50):
            assert t_cdf(0.0, df) == 0.5

    def test_symmetry(self):
        for df in (2, 9, 30):
            for t in (0.3, 1.0, 2.5):
                np.testing.assert_allclose(t_cdf(t, df) + t_cdf(-t, df), 1.0,
                                           atol=1e-12)

    def test_against_quadrature_oracle(self):
        for df, t in ((9, 1.0), (9, -1.0), (4, 0.7), (24, 2.2), (1, 1.5)):
            np.testing.assert_allclose(t_cdf(t, df), t_cdf_by_quadrature(t, df),
                                       atol=1e-8)

    def test_known_t9_value(self):
        # oracle value for the t statistic 1.0 with 9 degrees of freedom
        oracle = t_cdf_by_quadrature(1.0, 9)
        np.testing.assert_allclose(t_cdf(1.0, 9), oracle, atol=1e-10)
        np.testing.assert_allclose(oracle, 0.8282818019310043, atol=1e-9)

    def test_large_t_saturates(self):
        assert t_cdf(60.0, 9) > 1 - 1e-9
        assert t_cdf(-60.0, 9) < 1e-9


class TestConfidence:
    def test_symmetric_differences_give_half(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        b = np.array([2.0, 1.0, 4.0, 3.0])  # differences -1, 1, -1, 1
        np.testing.assert_allclose(confidence_of_superiority(a, b, "greater"),
                                   0.5, atol=1e-9)

    def test_tiny_spread_saturates(self):
        a = np.full(10, 1.0) + np.linspace(-1e-12, 1e-12, 10)
        b = np.zeros(10)
        assert confidence_of_superiority(a, b, "greater") > 1 - 1e-9
        assert confidence_of_superiority(a, b, "less") < 1e-9

    def test_t_statistic_one_matches_oracle(self):
        # ten trials whose mean/std give exactly t = 1
        rng = np.random.default_rng(0)
        diffs = rng.normal(size=10)
        diffs = (diffs - diffs.mean()) / diffs.std(ddof=1)  # mean 0, sd 1
        diffs = diffs + 1.0 / math.sqrt(10)                 # t = 1.0
        conf = confidence_of_superiority(diffs, np.zeros(10), "greater")
        np.testing.assert_allclose(conf, t_cdf_by_quadrature(1.0, 9), atol=1e-6)

    def test_direction_mirrors(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=8) + 0.4
        b = rng.normal(size=8)
        g = confidence_of_superiority(a, b, "greater")
        l = confidence_of_superiority(a, b, "less")
        np.testing.assert_allclose(g + l, 1.0, atol=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(NumericError):
            confidence_of_superiority(np.ones(5), np.zeros(5), "greater")

    def test_too_few_trials(self):
        with pytest.raises(ConfigError):
            confidence_of_superiority(np.array([1.0]), np.array([0.0]))

    def test_unequal_lengths(self):
        with pytest.raises(ConfigError):
            confidence_of_superiority(np.ones(3), np.ones(4))
