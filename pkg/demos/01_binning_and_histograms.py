"""Feature binning and gradient histograms, step by step.

Run with: python demos/01_binning_and_histograms.py
"""

import numpy as np

from vecboost import (GradHessBuffer, NodeHistograms, bin_matrix,
                      build_bin_mapper, build_histogram, subtract_histogram)

rng = np.random.default_rng(0)

# A small table: 12 samples, 2 features with very different distributions.
features = np.column_stack([
    rng.uniform(0, 10, 12),          # smooth
    np.repeat([1.0, 2.0, 7.0], 4),   # three distinct values only
])
print("features:\n", np.round(features, 2))

# Boundaries fall at midpoints between distinct values, thinned to
# empirical quantiles when a column has more distinct values than bins.
mapper = build_bin_mapper(features, max_bins=4)
for j in range(2):
    print(f"feature {j}: {mapper.n_bins(j)} bins, boundaries",
          np.round(mapper.boundaries(j), 3))

binned = bin_matrix(mapper, features)
print("bin codes (features x samples):\n", binned.codes)

# Histograms accumulate per-bin gradient sums for every output at once.
targets = np.column_stack([features[:, 0] * 0.5, features[:, 1] < 3])
grads = GradHessBuffer(g=-targets, h=np.ones_like(targets))  # squared error at 0

hist = build_histogram(np.arange(12), feature=0, binned=binned, grads=grads)
print("feature-0 histogram counts:", hist.count)
print("feature-0 gradient sums per bin:\n", np.round(hist.g_sum, 2))

# The subtraction trick: a sibling histogram is parent minus built child.
left = np.arange(5)
right = np.arange(5, 12)
parent = build_histogram(np.arange(12), 0, binned, grads)
child = build_histogram(left, 0, binned, grads)
sibling = subtract_histogram(parent, child)
direct = build_histogram(right, 0, binned, grads)
print("sibling-by-subtraction matches direct build:",
      np.allclose(sibling.g_sum, direct.g_sum))

# The stacked per-node form used by the tree grower.
node_hists = NodeHistograms.build(np.arange(12), binned, grads)
print("stacked histograms shape (features, bins, outputs):", node_hists.g.shape)
