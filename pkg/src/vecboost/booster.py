"""The boosting loop.

Each round computes per-sample derivatives against the current raw
predictions, grows one vector-output tree (or, in the single-output
baseline mode, one tree per output column from the same prediction
snapshot), and adds the learning-rate-scaled tree outputs to the
predictions.  Training stops at the round budget or when the monitored
metric has not improved for ``patience`` consecutive rounds; the returned
ensemble is truncated at the best round.

All multi-output modes except mo_exact use the diagonal of the hessian.
When the true hessian is dominated by its diagonal, the diagonal update
minimizes an upper bound of the loss whose tightness constant only
rescales the step; that constant is absorbed by learning_rate and lam
rather than exposed as a parameter.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .data import BinnedMatrix, RawDataset, bin_matrix, build_bin_mapper
from .errors import ConfigError, DataError
from .losses import (GradHessBuffer, default_metric, evaluate_metric,
                     grad_hess, loss_value, metric_is_higher_better,
                     softmax_probs, LOSS_KINDS)
from .split import DENSE, EXACT, EXACT_MODE_DIM_LIMIT, RESTRICTED, SPARSE
from .tree import NODE_STORE_LIMIT, GrowthResult, Tree, TreeConfig, grow_tree

MODES = ("mo_dense", "mo_sparse", "mo_restricted", "mo_exact", "so_baseline")

_SPLIT_MODE_OF = {
    "mo_dense": DENSE,
    "mo_sparse": SPARSE,
    "mo_restricted": RESTRICTED,
    "mo_exact": EXACT,
    "so_baseline": DENSE,
}


def default_max_leaves(max_depth: int) -> int:
    """Leaf budget 0.75 * 2^depth, clamped to the minimum of one split."""
    return max(2, int(0.75 * (2 ** max_depth)))


@dataclass
class BoosterConfig:
    loss: str = "mse"
    mode: str = "mo_dense"
    learning_rate: float = 0.1
    lam: float = 1.0
    max_depth: int = 5
    max_leaves: int | None = None     # None -> 0.75 * 2^max_depth
    min_samples: int = 4
    gain_threshold: float = 1e-6
    max_bins: int = 32
    sparse_k: int | None = None
    max_rounds: int = 100
    patience: int = 25
    seed: int = 0
    base_score: str = "zero"          # zero keeps softmax symmetric, MSE unbiased
    workers: int | None = None        # reserved; recorded for benchmark reports
    node_store_limit: int = NODE_STORE_LIMIT

    def resolved_max_leaves(self) -> int:
        if self.max_leaves is not None:
            return self.max_leaves
        return default_max_leaves(self.max_depth)

    def validate(self, d: int) -> None:
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.max_rounds < 1:
            raise ConfigError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.max_bins < 2:
            raise ConfigError(f"max_bins must be >= 2, got {self.max_bins}")
        if self.base_score != "zero":
            raise ConfigError(f"unknown base_score policy {self.base_score!r}")
        if self.mode in ("mo_sparse", "mo_restricted"):
            if self.sparse_k is None:
                raise ConfigError(f"mode {self.mode} requires sparse_k (topk)")
            if not 1 <= self.sparse_k <= d:
                raise ConfigError(
                    f"sparse_k must lie in [1, {d}], got {self.sparse_k}")
        if self.mode == "mo_exact" and d > EXACT_MODE_DIM_LIMIT:
            raise ConfigError(
                f"mo_exact supports at most d = {EXACT_MODE_DIM_LIMIT} outputs, got {d}")
        tree_d = 1 if self.mode == "so_baseline" else d
        self.tree_config(tree_d).validate(tree_d)

    def tree_config(self, d: int) -> TreeConfig:
        return TreeConfig(
            mode=_SPLIT_MODE_OF[self.mode],
            lam=self.lam,
            max_depth=self.max_depth,
            max_leaves=self.resolved_max_leaves(),
            min_samples=self.min_samples,
            gain_threshold=self.gain_threshold,
            sparse_k=self.sparse_k,
            node_store_limit=self.node_store_limit,
        )


@dataclass
class HistoryRecord:
    round: int
    train_loss: float
    eval_metric: float  # nan when no eval set was given
    seconds: float


@dataclass
class Ensemble:
    """An ordered tree sequence with a shared learning rate.

    ``tree_targets[i]`` is the output column served by tree i in the
    single-output baseline, or None for vector-output trees.
    """

    trees: list[Tree]
    tree_targets: list[int | None]
    learning_rate: float
    base_score: np.ndarray
    loss: str
    mode: str
    n_features: int
    n_outputs: int
    feature_names: list[str] | None = None

    def predict_raw(self, features: np.ndarray) -> np.ndarray:
        """base_score plus the scaled sum of tree outputs (logits for softmax)."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.n_features:
            raise DataError(
                f"expected {self.n_features} feature columns, got "
                f"{features.shape[1] if features.ndim == 2 else 'non-2d input'}")
        out = np.tile(self.base_score, (features.shape[0], 1))
        for tree, target in zip(self.trees, self.tree_targets):
            tree.add_predictions(features, out, self.learning_rate, target)
        return out

    def predict(self, features: np.ndarray, proba: bool = False) -> np.ndarray:
        raw = self.predict_raw(features)
        if proba:
            if self.loss != "softmax_ce":
                raise ConfigError("probability output requires the softmax_ce loss")
            return softmax_probs(raw)
        return raw


@dataclass
class TrainResult:
    ensemble: Ensemble
    history: list[HistoryRecord]
    best_round: int
    best_metric: float
    exact_fallbacks: int = 0


def _monitor_value(record: HistoryRecord, use_eval: bool) -> float:
    return record.eval_metric if use_eval else record.train_loss


def train(dataset: RawDataset, config: BoosterConfig,
          eval_set: RawDataset | None = None) -> TrainResult:
    """Fit a boosted ensemble; returns the ensemble, history and best round."""
    d = dataset.d
    config.validate(d)
    if eval_set is not None:
        if eval_set.m != dataset.m or eval_set.d != dataset.d:
            raise DataError(
                f"eval set shape ({eval_set.m} features, {eval_set.d} outputs) does not "
                f"match training data ({dataset.m}, {dataset.d})")
    # At d = 1 the single-output baseline is definitionally the multi-output
    # dense algorithm (one tree per round over the one output); normalize the
    # recorded mode so artifacts of the two runs are interchangeable.
    mode = config.mode
    if mode == "so_baseline" and d == 1:
        mode = "mo_dense"
        config = replace(config, mode=mode)

    mapper = build_bin_mapper(dataset.features, config.max_bins)
    binned = bin_matrix(mapper, dataset.features)
    want_full = mode == "mo_exact"

    base = np.zeros(d, dtype=np.float64)
    pred = np.tile(base, (dataset.n, 1))
    eval_pred = None
    if eval_set is not None:
        eval_pred = np.tile(base, (eval_set.n, 1))
    metric_kind = default_metric(config.loss)
    higher_better = metric_is_higher_better(metric_kind)
    use_eval = eval_set is not None

    ensemble = Ensemble(
        trees=[], tree_targets=[], learning_rate=config.learning_rate,
        base_score=base, loss=config.loss, mode=mode,
        n_features=dataset.m, n_outputs=d, feature_names=dataset.feature_names)
    all_samples = np.arange(dataset.n, dtype=np.intp)
    history: list[HistoryRecord] = []
    best_value = None
    best_round = 0
    exact_fallbacks = 0
    trees_per_round = d if mode == "so_baseline" else 1

    for rnd in range(1, config.max_rounds + 1):
        t0 = time.perf_counter()
        grads = grad_hess(config.loss, pred, dataset.targets, want_full)
        if mode == "so_baseline":
            results = _grow_so_round(all_samples, binned, grads, config, d)
            for j, res in enumerate(results):
                _apply_tree_outputs(pred, res, config.learning_rate, target=j)
                ensemble.trees.append(res.tree)
                ensemble.tree_targets.append(j)
                if eval_pred is not None:
                    res.tree.add_predictions(eval_set.features, eval_pred,
                                             config.learning_rate, target_column=j)
        else:
            res = grow_tree(all_samples, binned, grads, config.tree_config(d))
            exact_fallbacks += res.exact_fallbacks
            _apply_tree_outputs(pred, res, config.learning_rate, target=None)
            ensemble.trees.append(res.tree)
            ensemble.tree_targets.append(None)
            if eval_pred is not None:
                res.tree.add_predictions(eval_set.features, eval_pred,
                                         config.learning_rate)
        train_loss = loss_value(config.loss, pred, dataset.targets)
        eval_metric = float("nan")
        if eval_pred is not None:
            eval_metric = evaluate_metric(metric_kind, eval_pred, eval_set.targets)
        history.append(HistoryRecord(rnd, train_loss,
                                     eval_metric, time.perf_counter() - t0))

        value = eval_metric if use_eval else train_loss
        better = (best_value is None
                  or (value > best_value if use_eval and higher_better
                      else value < best_value))
        if better:
            best_value = value
            best_round = rnd
        elif rnd - best_round >= config.patience:
            break

    del ensemble.trees[best_round * trees_per_round:]
    del ensemble.tree_targets[best_round * trees_per_round:]
    return TrainResult(ensemble, history, best_round, float(best_value),
                       exact_fallbacks)


def _grow_so_round(samples: np.ndarray, binned: BinnedMatrix,
                   grads: GradHessBuffer, config: BoosterConfig,
                   d: int) -> list[GrowthResult]:
    """One baseline round: d single-output trees from one gradient snapshot."""
    tree_cfg = config.tree_config(1)
    results = []
    for j in range(d):
        col = GradHessBuffer(grads.g[:, j:j + 1], grads.h[:, j:j + 1])
        results.append(grow_tree(samples, binned, col, tree_cfg))
    return results


def _apply_tree_outputs(pred: np.ndarray, res: GrowthResult, lr: float,
                        target: int | None) -> None:
    """Scatter leaf values onto the training predictions via leaf sample sets."""
    for node_id, idx in res.leaf_samples:
        node = res.tree.nodes[node_id]
        if node.weights is not None:
            if target is None:
                pred[idx] += lr * node.weights
            else:
                pred[idx, target] += lr * node.weights[0]
        elif node.columns is not None and node.columns.size:
            pred[np.ix_(idx, node.columns)] += lr * node.values
