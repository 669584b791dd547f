"""Per-bin gradient statistic accumulation.

For one feature, a histogram holds the sum of each output's gradient and
hessian per bin plus a sample count.  Sibling histograms are derived by
subtracting the smaller, freshly built child from the stored parent, which
bounds construction work at half the parent size.

Accumulation is always float64: the subtraction trick amplifies
cancellation error in narrower types.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .data import BinnedMatrix
from .errors import DataError
from .losses import GradHessBuffer


@dataclass
class Histogram:
    """Gradient statistics of one feature: g_sum/h_sum are (b, d), count is (b,)."""

    feature: int
    g_sum: np.ndarray
    h_sum: np.ndarray
    count: np.ndarray
    full_sum: np.ndarray | None = None  # (b, d, d) when exact hessians are tracked

    @property
    def n_bins(self) -> int:
        return self.g_sum.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.g_sum.shape[1]


def build_histogram(samples: np.ndarray, feature: int, binned: BinnedMatrix,
                    grads: GradHessBuffer, n_bins: int | None = None,
                    want_full: bool = False) -> Histogram:
    """Accumulate g, h and counts of ``samples`` into the bins of one feature."""
    samples = np.asarray(samples, dtype=np.intp)
    if n_bins is None:
        n_bins = binned.mapper.n_bins(feature)
    bins = binned.codes[feature, samples].astype(np.intp)
    d = grads.g.shape[1]
    count = np.bincount(bins, minlength=n_bins).astype(np.int64)
    fused = bins[:, None] * d + np.arange(d)
    g_sum = np.bincount(fused.ravel(), weights=grads.g[samples].ravel(),
                        minlength=n_bins * d).reshape(n_bins, d)
    h_sum = np.bincount(fused.ravel(), weights=grads.h[samples].ravel(),
                        minlength=n_bins * d).reshape(n_bins, d)
    full = None
    if want_full:
        if grads.full_h is None:
            raise DataError("full hessians requested but not present in the gradient buffer")
        fused2 = bins[:, None] * (d * d) + np.arange(d * d)
        full = np.bincount(fused2.ravel(), weights=grads.full_h[samples].reshape(samples.size, -1).ravel(),
                           minlength=n_bins * d * d).reshape(n_bins, d, d)
    return Histogram(feature, g_sum, h_sum, count, full)


def subtract_histogram(parent: Histogram, child: Histogram) -> Histogram:
    """Element-wise parent minus child; the result is the sibling's histogram."""
    if parent.feature != child.feature:
        raise DataError(f"feature mismatch: {parent.feature} vs {child.feature}")
    if parent.g_sum.shape != child.g_sum.shape:
        raise DataError(
            f"shape mismatch: {parent.g_sum.shape} vs {child.g_sum.shape}")
    count = parent.count - child.count
    if (count < 0).any():
        raise DataError("child histogram has counts exceeding its parent")
    full = None
    if parent.full_sum is not None and child.full_sum is not None:
        full = parent.full_sum - child.full_sum
    return Histogram(parent.feature, parent.g_sum - child.g_sum,
                     parent.h_sum - child.h_sum, count, full)


class NodeHistograms:
    """Histograms of every feature for one tree node, stored stacked.

    Arrays are ``g``/``h`` with shape (m, b, d), ``count`` with shape (m, b)
    and optionally ``full`` with shape (m, b, d, d), where b is the
    mapper-wide maximum bin count.  Features with fewer bins leave trailing
    bins at zero; the split scan skips the resulting empty candidates.
    """

    def __init__(self, g, h, count, full=None):
        self.g = g
        self.h = h
        self.count = count
        self.full = full

    @property
    def n_features(self) -> int:
        return self.g.shape[0]

    @property
    def n_bins(self) -> int:
        return self.g.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.g.shape[2]

    @classmethod
    def build(cls, samples: np.ndarray, binned: BinnedMatrix,
              grads: GradHessBuffer, want_full: bool = False) -> "NodeHistograms":
        """Build all m feature histograms in one pass.

        The scan is expressed as one sparse matrix product: the (ns, m*b)
        bin-membership indicator times the (ns, d) gradient block.
        """
        samples = np.asarray(samples, dtype=np.intp)
        ns = samples.size
        m = binned.m
        b = binned.max_bins
        d = grads.g.shape[1]
        codes = binned.codes[:, samples]
        cols = (codes.T.astype(np.int32) + (np.arange(m, dtype=np.int32) * b)).ravel()
        count = np.bincount(cols, minlength=m * b).astype(np.int64).reshape(m, b)
        indptr = np.arange(ns + 1, dtype=np.int32) * m
        ind = sparse.csr_matrix(
            (np.ones(ns * m, dtype=np.float64), cols, indptr), shape=(ns, m * b))
        g = (ind.T @ grads.g[samples]).reshape(m, b, d)
        h = (ind.T @ grads.h[samples]).reshape(m, b, d)
        full = None
        if want_full:
            if grads.full_h is None:
                raise DataError("full hessians requested but not present in the gradient buffer")
            full = (ind.T @ grads.full_h[samples].reshape(ns, d * d)).reshape(m, b, d, d)
        return cls(g, h, count, full)

    def subtract(self, child: "NodeHistograms") -> "NodeHistograms":
        if self.g.shape != child.g.shape:
            raise DataError(f"shape mismatch: {self.g.shape} vs {child.g.shape}")
        count = self.count - child.count
        if (count < 0).any():
            raise DataError("child histograms have counts exceeding their parent")
        full = None
        if self.full is not None and child.full is not None:
            full = self.full - child.full
        return NodeHistograms(self.g - child.g, self.h - child.h, count, full)

    def feature_histogram(self, j: int) -> Histogram:
        return Histogram(j, self.g[j], self.h[j], self.count[j],
                         None if self.full is None else self.full[j])

    @classmethod
    def from_histograms(cls, hists: list[Histogram]) -> "NodeHistograms":
        """Stack per-feature histograms (features must be 0..m-1 in order)."""
        b = max(h.n_bins for h in hists)
        d = hists[0].n_outputs
        m = len(hists)
        g = np.zeros((m, b, d))
        h_ = np.zeros((m, b, d))
        cnt = np.zeros((m, b), dtype=np.int64)
        full = None
        if all(h.full_sum is not None for h in hists):
            full = np.zeros((m, b, d, d))
        for j, hist in enumerate(hists):
            if hist.feature != j:
                raise DataError("histogram list must cover features 0..m-1 in order")
            g[j, :hist.n_bins] = hist.g_sum
            h_[j, :hist.n_bins] = hist.h_sum
            cnt[j, :hist.n_bins] = hist.count
            if full is not None:
                full[j, :hist.n_bins] = hist.full_sum
        return cls(g, h_, cnt, full)
