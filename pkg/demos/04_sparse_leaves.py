"""Automatic output-column selection with sparse leaves.

Targets are built so only a few outputs depend on the inputs; sparse
leaves should concentrate on those columns.

Run with: python demos/04_sparse_leaves.py
"""

from collections import Counter

import numpy as np

from vecboost import BoosterConfig, RawDataset, evaluate_metric, train

rng = np.random.default_rng(11)
n, d = 3000, 6
x = rng.normal(size=(n, 4))
y = np.zeros((n, d))
y[:, 0] = 2.0 * x[:, 0] - x[:, 1]          # strongly input-driven
y[:, 3] = np.sin(x[:, 2]) * 1.5            # strongly input-driven
y[:, 1] = 0.05 * rng.normal(size=n)        # essentially noise
y[:, 2] = 0.05 * rng.normal(size=n)
y[:, 4] = 0.05 * rng.normal(size=n)
y[:, 5] = 0.05 * rng.normal(size=n)
ds = RawDataset(x, y)

for mode in ("mo_sparse", "mo_restricted"):
    cfg = BoosterConfig(mode=mode, sparse_k=2, max_rounds=40,
                        learning_rate=0.2, max_depth=4)
    res = train(ds, cfg)
    used = Counter()
    for tree in res.ensemble.trees:
        for node in tree.nodes:
            if node.is_leaf:
                used.update(node.columns.tolist())
    pred = res.ensemble.predict_raw(ds.features)
    print(f"{mode}: train rmse {evaluate_metric('rmse', pred, ds.targets):.4f}  "
          f"leaf column usage {dict(sorted(used.items()))}")
    top2 = {c for c, _ in used.most_common(2)}
    print(f"  -> most used columns {sorted(top2)} "
          f"(signal lives in columns 0 and 3)")
