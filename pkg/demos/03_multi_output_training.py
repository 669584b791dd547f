"""Train vector-leaf ensembles against the single-output baseline.

Run with: python demos/03_multi_output_training.py
"""

import numpy as np

from vecboost import BoosterConfig, evaluate_metric, train
from vecboost.synth import train_test

train_ds, test_ds = train_test("friedman1", 4000, 4000, seed=7)
print(f"friedman1: {train_ds.n} train rows, {train_ds.m} features, "
      f"{train_ds.d} outputs")

shared = dict(loss="mse", learning_rate=0.1, lam=1.0, max_depth=5,
              max_rounds=250, patience=25)

for mode in ("mo_dense", "so_baseline"):
    cfg = BoosterConfig(mode=mode, **shared)
    res = train(train_ds, cfg, eval_set=test_ds)
    per_round_trees = train_ds.d if mode == "so_baseline" else 1
    print(f"{mode:12s} best round {res.best_round:4d} "
          f"({len(res.ensemble.trees)} trees, {per_round_trees}/round)  "
          f"test rmse {res.best_metric:.4f}")

# One vector-leaf tree serves all five outputs; inspect a leaf.
cfg = BoosterConfig(mode="mo_dense", **shared)
res = train(train_ds, cfg, eval_set=test_ds)
first_leaf = next(n for n in res.ensemble.trees[0].nodes if n.is_leaf)
print("a leaf from the first tree predicts all outputs:",
      np.round(first_leaf.weights, 3))

pred = res.ensemble.predict_raw(test_ds.features)
print("ensemble rmse recomputed:",
      round(evaluate_metric("rmse", pred, test_ds.targets), 4))
