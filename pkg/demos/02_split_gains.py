"""Dense, sparse, restricted, and exact-hessian split gains on one example.

Run with: python demos/02_split_gains.py
"""

import numpy as np

from vecboost import (GradStats, dense_gain, exact_gain,
                      restricted_sparse_gain, sparse_gain)

# Summed statistics of a candidate split over 3 output columns.
left = GradStats(g=np.array([4.0, 0.5, -2.0]), h=np.array([3.0, 3.0, 3.0]),
                 count=3)
right = GradStats(g=np.array([-4.0, 0.5, 2.5]), h=np.array([4.0, 4.0, 4.0]),
                  count=4)
lam = 1.0

print("dense gain (all columns):", round(dense_gain(left, right, lam), 4))

# Sparse gain keeps the k most valuable columns per side independently.
gain, cols_l, cols_r = sparse_gain(left, right, lam, k=2)
print(f"sparse k=2: gain={gain:.4f} left columns={cols_l} right columns={cols_r}")

# The restricted variant forces one shared column set; never better.
r_gain, shared = restricted_sparse_gain(left, right, lam, k=2)
print(f"restricted k=2: gain={r_gain:.4f} shared columns={shared}")
assert r_gain <= gain + 1e-12

# With full hessians the objective couples outputs; diagonal hessians
# reduce to exactly half the dense score (the 1/2 factor is kept here).
left.full = np.diag(left.h)
right.full = np.diag(right.h)
print("exact gain with diagonal hessians:", round(exact_gain(left, right, lam), 4))
print("half the dense gain:             ", round(0.5 * dense_gain(left, right, lam), 4))

coupled = np.array([[3.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 3.0]])
left.full = coupled
right.full = coupled * 1.5
print("exact gain with coupled hessians:", round(exact_gain(left, right, lam), 4))
