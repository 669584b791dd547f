"""Second-order losses and evaluation metrics.

Each loss maps raw predictions and targets to per-sample, per-output first
and second derivatives.  The squared error convention is l = 1/2 (p - y)^2
per output, so its hessian is identically one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

LOSS_KINDS = ("mse", "softmax_ce")
METRIC_KINDS = ("rmse", "top1_accuracy")


@dataclass
class GradHessBuffer:
    """Per-sample derivatives: g and diagonal h are (n, d); full_h is (n, d, d)."""

    g: np.ndarray
    h: np.ndarray
    full_h: np.ndarray | None = None


def _check_shapes(pred, target):
    if pred.shape != target.shape or pred.ndim != 2:
        raise DataError(f"prediction shape {pred.shape} != target shape {target.shape}")


def mse_grad_hess(pred: np.ndarray, target: np.ndarray,
                  want_full: bool = False) -> GradHessBuffer:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_shapes(pred, target)
    g = pred - target
    h = np.ones_like(g)
    full = None
    if want_full:
        n, d = g.shape
        full = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    return GradHessBuffer(g, h, full)


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction; rows sum to one."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_grad_hess(logits: np.ndarray, target_onehot: np.ndarray,
                      want_full: bool = False) -> GradHessBuffer:
    logits = np.asarray(logits, dtype=np.float64)
    target = np.asarray(target_onehot, dtype=np.float64)
    _check_shapes(logits, target)
    onehot = np.isin(target, (0.0, 1.0)).all(axis=1) & (target.sum(axis=1) == 1.0)
    if not onehot.all():
        raise DataError(f"target row {np.argmin(onehot) + 1} is not one-hot")
    p = softmax_probs(logits)
    g = p - target
    h = p * (1.0 - p)
    full = None
    if want_full:
        full = -p[:, :, None] * p[:, None, :]
        ii = np.arange(p.shape[1])
        full[:, ii, ii] += p
    return GradHessBuffer(g, h, full)


def grad_hess(loss: str, pred: np.ndarray, target: np.ndarray,
              want_full: bool = False) -> GradHessBuffer:
    if loss == "mse":
        return mse_grad_hess(pred, target, want_full)
    if loss == "softmax_ce":
        return softmax_grad_hess(pred, target, want_full)
    raise ConfigError(f"unknown loss {loss!r}")


def loss_value(loss: str, pred: np.ndarray, target: np.ndarray) -> float:
    """Mean training loss over samples, used for history and early stopping."""
    if loss == "mse":
        diff = pred - target
        return float(0.5 * np.mean(np.sum(diff * diff, axis=1)))
    if loss == "softmax_ce":
        z = pred - pred.max(axis=1, keepdims=True)
        logsumexp = np.log(np.exp(z).sum(axis=1))
        picked = np.sum(z * target, axis=1)
        return float(np.mean(logsumexp - picked))
    raise ConfigError(f"unknown loss {loss!r}")


def evaluate_metric(kind: str, pred: np.ndarray, target: np.ndarray) -> float:
    """rmse over all n*d entries, or top-1 accuracy with lowest-index ties."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_shapes(pred, target)
    if kind == "rmse":
        return float(np.sqrt(np.mean((pred - target) ** 2)))
    if kind == "top1_accuracy":
        return float(np.mean(pred.argmax(axis=1) == target.argmax(axis=1)))
    raise ConfigError(f"unknown metric {kind!r}")


def default_metric(loss: str) -> str:
    return "rmse" if loss == "mse" else "top1_accuracy"


def metric_is_higher_better(kind: str) -> bool:
    return kind == "top1_accuracy"
