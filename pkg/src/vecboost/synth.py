"""Synthetic multi-output regression dataset generators."""

from __future__ import annotations

import numpy as np

from .data import RawDataset
from .errors import ConfigError

FRIEDMAN1_INPUT_DIM = 10
FRIEDMAN1_OUTPUT_DIM = 5
PROJECTION_INPUT_DIM = 4
PROJECTION_OUTPUT_DIM = 8


def friedman1_signal(x: np.ndarray) -> np.ndarray:
    """The noiseless target sin(pi x1 x2) + 2 (x3 - 0.5)^2 + x4 + 0.5 x5."""
    x = np.atleast_2d(x)
    return (np.sin(np.pi * x[:, 0] * x[:, 1]) + 2.0 * (x[:, 2] - 0.5) ** 2
            + x[:, 3] + 0.5 * x[:, 4])


def friedman1(n: int, seed: int) -> RawDataset:
    """friedman1 inputs in U(-1, 1)^10; five outputs sharing the signal with
    independent N(0, 0.1^2) noise per output."""
    if n <= 0:
        raise ConfigError(f"sample count must be positive, got {n}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, FRIEDMAN1_INPUT_DIM))
    f = friedman1_signal(x)
    y = f[:, None] + 0.1 * rng.standard_normal((n, FRIEDMAN1_OUTPUT_DIM))
    return RawDataset(x, y)


def random_projection(n: int, seed: int) -> RawDataset:
    """Linear targets y = W^T x with W in U(-1, 1)^{4 x 8} drawn once per seed."""
    if n <= 0:
        raise ConfigError(f"sample count must be positive, got {n}")
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1.0, 1.0, size=(PROJECTION_INPUT_DIM, PROJECTION_OUTPUT_DIM))
    x = rng.uniform(-1.0, 1.0, size=(n, PROJECTION_INPUT_DIM))
    return RawDataset(x, x @ w)


SYNTH_KINDS = {"friedman1": friedman1, "random_projection": random_projection}


def generate(kind: str, n: int, seed: int) -> RawDataset:
    if kind not in SYNTH_KINDS:
        raise ConfigError(f"unknown synthetic dataset {kind!r}")
    return SYNTH_KINDS[kind](n, seed)


def train_test(kind: str, n_train: int, n_test: int, seed: int
               ) -> tuple[RawDataset, RawDataset]:
    """One generation split in two, so dataset-level parameters are shared."""
    full = generate(kind, n_train + n_test, seed)
    train = RawDataset(full.features[:n_train], full.targets[:n_train])
    test = RawDataset(full.features[n_train:], full.targets[n_train:])
    return train, test
