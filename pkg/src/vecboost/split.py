"""Split gain computation and best-split search over bin histograms.

Gains sum per-output objective improvements G^2/(H + lambda) over left and
right children minus the undivided node.  The 1/2 factor is dropped from
the dense and sparse scores (it does not affect ranking) but kept in the
exact-hessian objective so the diagonal case reduces to half the dense
score difference.

Sparse modes keep only the k most valuable output columns per side; the
restricted variant forces both sides to share one column set.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConfigError, NumericError
from .histogram import NodeHistograms

DENSE = "dense"
SPARSE = "sparse"
RESTRICTED = "restricted"
EXACT = "exact"
SPLIT_MODES = (DENSE, SPARSE, RESTRICTED, EXACT)

EXACT_MODE_DIM_LIMIT = 64

JITTERS = (0.0, 1e-10, 1e-8, 1e-6)


@dataclass
class GradStats:
    """Summed gradient statistics of one sample set: g and h are (d,)."""

    g: np.ndarray
    h: np.ndarray
    count: int = 0
    full: np.ndarray | None = None  # (d, d) summed exact hessian

    def __add__(self, other: "GradStats") -> "GradStats":
        full = None
        if self.full is not None and other.full is not None:
            full = self.full + other.full
        return GradStats(self.g + other.g, self.h + other.h,
                         self.count + other.count, full)

    def __sub__(self, other: "GradStats") -> "GradStats":
        full = None
        if self.full is not None and other.full is not None:
            full = self.full - other.full
        return GradStats(self.g - other.g, self.h - other.h,
                         self.count - other.count, full)


@dataclass
class SplitInfo:
    """A candidate split: bins <= bin go left on the given feature."""

    feature: int = -1
    bin: int = -1
    gain: float = -np.inf
    valid: bool = False
    left_columns: np.ndarray | None = None
    right_columns: np.ndarray | None = None

    @property
    def n_involved_outputs(self) -> int | None:
        if self.left_columns is None:
            return None
        return len(self.left_columns)


def _score_terms(g: np.ndarray, h: np.ndarray, lam: float) -> np.ndarray:
    """Per-column G^2/(H + lambda) with a zero-denominator guard."""
    denom = h + lam
    out = np.zeros_like(g)
    np.divide(g * g, denom, out=out, where=denom > 0)
    return out


def dense_gain(left: GradStats, right: GradStats, lam: float) -> float:
    """Objective decrease of a split, summed over all output columns."""
    g = left.g + right.g
    h = left.h + right.h
    return float(_score_terms(left.g, left.h, lam).sum()
                 + _score_terms(right.g, right.h, lam).sum()
                 - _score_terms(g, h, lam).sum())


def top_k_columns(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest values via a size-k min-heap.

    Ties at the k-th slot keep the lower column index.  The result is
    sorted by column index.
    """
    heap: list[tuple[float, int]] = []
    for j, v in enumerate(values):
        # Key (v, -j): among equal values the higher index is evicted first.
        if len(heap) < k:
            heapq.heappush(heap, (v, -j))
        elif (v, -j) > heap[0]:
            heapq.heapreplace(heap, (v, -j))
    return np.array(sorted(-j for _, j in heap), dtype=np.intp)


def sparse_gain(left: GradStats, right: GradStats, lam: float,
                k: int) -> tuple[float, np.ndarray, np.ndarray]:
    """Gain keeping the k best output columns independently per side.

    Returns (gain, left columns, right columns).  The undivided node's
    top-k objective is subtracted so the gain is an actual improvement,
    comparable across candidate splits and against the stop threshold.
    """
    d = left.g.shape[0]
    if not 1 <= k <= d:
        raise ConfigError(f"sparse constraint k={k} outside [1, {d}]")
    vl = _score_terms(left.g, left.h, lam)
    vr = _score_terms(right.g, right.h, lam)
    cols_l = top_k_columns(vl, k)
    cols_r = top_k_columns(vr, k)
    vp = _score_terms(left.g + right.g, left.h + right.h, lam)
    const = vp[top_k_columns(vp, k)].sum()
    return float(vl[cols_l].sum() + vr[cols_r].sum() - const), cols_l, cols_r


def restricted_sparse_gain(left: GradStats, right: GradStats, lam: float,
                           k: int) -> tuple[float, np.ndarray]:
    """Sparse gain with one shared column set maximizing the summed score."""
    d = left.g.shape[0]
    if not 1 <= k <= d:
        raise ConfigError(f"sparse constraint k={k} outside [1, {d}]")
    v = _score_terms(left.g, left.h, lam) + _score_terms(right.g, right.h, lam)
    cols = top_k_columns(v, k)
    vp = _score_terms(left.g + right.g, left.h + right.h, lam)
    const = vp[top_k_columns(vp, k)].sum()
    return float(v[cols].sum() - const), cols


def solve_regularized(full_h: np.ndarray, lam: float, g: np.ndarray) -> np.ndarray:
    """Solve (full_h + lam*I) x = g by Cholesky with jitter escalation.

    A diagonal matrix short-circuits to guarded element-wise division, so
    diagonal hessians reproduce the diagonal formulas bit for bit.
    """
    d = g.shape[0]
    diag = np.diagonal(full_h)
    if not (full_h - np.diag(diag)).any():
        denom = diag + lam
        out = np.zeros_like(g)
        np.divide(g, denom, out=out, where=denom > 0)
        return out
    a = full_h + lam * np.eye(d)
    for jitter in JITTERS:
        try:
            c = cho_factor(a + jitter * np.eye(d), lower=True)
            return cho_solve(c, g)
        except np.linalg.LinAlgError:
            continue
    raise NumericError("regularized hessian solve failed after jitter escalation")


def _exact_objective(stats: GradStats, lam: float) -> float:
    """Optimal leaf objective -1/2 G^T (sum H + lam I)^-1 G."""
    if not stats.g.any():
        return 0.0
    x = solve_regularized(stats.full, lam, stats.g)
    return float(-0.5 * stats.g @ x)


def exact_gain(left: GradStats, right: GradStats, lam: float) -> float:
    """Gain under the full d x d hessian objective (keeps the 1/2 factor)."""
    if left.full is None or right.full is None:
        raise ConfigError("exact gain requires full hessian statistics")
    d = left.g.shape[0]
    if d > EXACT_MODE_DIM_LIMIT:
        raise ConfigError(
            f"exact-hessian split finding limited to d <= {EXACT_MODE_DIM_LIMIT}, got {d}")
    parent = left + right
    return float(_exact_objective(parent, lam)
                 - _exact_objective(left, lam) - _exact_objective(right, lam))


def _best_dense(hists: NodeHistograms, lam: float) -> tuple[float, int, int]:
    """Vectorized left-to-right scan over all features and interior bins."""
    if hists.n_bins < 2:
        return -np.inf, -1, -1
    gl = np.cumsum(hists.g, axis=1)
    hl = np.cumsum(hists.h, axis=1)
    cl = np.cumsum(hists.count, axis=1)
    g_tot = gl[:, -1:, :]
    h_tot = hl[:, -1:, :]
    c_tot = cl[:, -1:]
    gr = g_tot - gl
    hr = h_tot - hl
    parent = _score_terms(g_tot, h_tot, lam).sum(axis=2)
    gains = (_score_terms(gl, hl, lam).sum(axis=2)
             + _score_terms(gr, hr, lam).sum(axis=2) - parent)
    gains = gains[:, :-1]  # last bin boundary leaves an empty right side
    empty = (cl[:, :-1] == 0) | (cl[:, :-1] == c_tot)
    gains[empty] = -np.inf
    best_gain, best_feature, best_bin = -np.inf, -1, -1
    for j in range(hists.n_features):
        t = int(np.argmax(gains[j]))
        if gains[j, t] > best_gain:
            best_gain, best_feature, best_bin = float(gains[j, t]), j, t
    return best_gain, best_feature, best_bin


def _best_sparse(hists: NodeHistograms, lam: float, k: int,
                 restricted: bool) -> tuple[float, int, int]:
    """Scan maintaining running sums, scoring each boundary with top-k heaps.

    The constant parent term is identical for every candidate, so ranking
    uses the raw two-side (or shared-set) score.
    """
    best_score, best_feature, best_bin = -np.inf, -1, -1
    for j in range(hists.n_features):
        g = hists.g[j]
        h = hists.h[j]
        cnt = hists.count[j]
        g_tot = g.sum(axis=0)
        h_tot = h.sum(axis=0)
        c_tot = int(cnt.sum())
        gl = np.zeros_like(g_tot)
        hl = np.zeros_like(h_tot)
        c_left = 0
        for t in range(hists.n_bins - 1):
            gl += g[t]
            hl += h[t]
            c_left += int(cnt[t])
            if c_left == 0 or c_left == c_tot:
                continue
            vl = _score_terms(gl, hl, lam)
            vr = _score_terms(g_tot - gl, h_tot - hl, lam)
            if restricted:
                v = vl + vr
                score = float(v[top_k_columns(v, k)].sum())
            else:
                score = float(vl[top_k_columns(vl, k)].sum()
                              + vr[top_k_columns(vr, k)].sum())
            if score > best_score:
                best_score, best_feature, best_bin = score, j, t
    return best_score, best_feature, best_bin


def _best_exact(hists: NodeHistograms, lam: float) -> tuple[float, int, int]:
    if hists.full is None:
        raise ConfigError("exact split finding requires full-hessian histograms")
    d = hists.n_outputs
    if d > EXACT_MODE_DIM_LIMIT:
        raise ConfigError(
            f"exact-hessian split finding limited to d <= {EXACT_MODE_DIM_LIMIT}, got {d}")
    best_gain, best_feature, best_bin = -np.inf, -1, -1
    for j in range(hists.n_features):
        g = hists.g[j]
        h = hists.h[j]
        full = hists.full[j]
        cnt = hists.count[j]
        g_tot = g.sum(axis=0)
        h_tot = h.sum(axis=0)
        f_tot = full.sum(axis=0)
        c_tot = int(cnt.sum())
        try:
            parent = _exact_objective(GradStats(g_tot, h_tot, c_tot, f_tot), lam)
        except NumericError:
            continue
        gl = np.zeros(d)
        hl = np.zeros(d)
        fl = np.zeros((d, d))
        c_left = 0
        for t in range(hists.n_bins - 1):
            gl += g[t]
            hl += h[t]
            fl += full[t]
            c_left += int(cnt[t])
            if c_left == 0 or c_left == c_tot:
                continue
            try:
                obj_l = _exact_objective(GradStats(gl, hl, c_left, fl), lam)
                obj_r = _exact_objective(
                    GradStats(g_tot - gl, h_tot - hl, c_tot - c_left, f_tot - fl), lam)
            except NumericError:
                continue  # candidate marked invalid; scan continues
            gain = parent - obj_l - obj_r
            if gain > best_gain:
                best_gain, best_feature, best_bin = float(gain), j, t
    return best_gain, best_feature, best_bin


def _stats_of_prefix(hists: NodeHistograms, feature: int, last_bin: int,
                     left: bool) -> GradStats:
    g = hists.g[feature]
    h = hists.h[feature]
    cnt = hists.count[feature]
    full = None if hists.full is None else hists.full[feature]
    sl = slice(0, last_bin + 1) if left else slice(last_bin + 1, None)
    return GradStats(g[sl].sum(axis=0), h[sl].sum(axis=0), int(cnt[sl].sum()),
                     None if full is None else full[sl].sum(axis=0))


def find_best_split(hists: NodeHistograms, mode: str, lam: float,
                    k: int | None = None) -> SplitInfo:
    """Best (feature, bin) candidate under the given gain mode.

    Ties break toward the lower feature id, then the lower bin; candidates
    with an empty side are skipped.  Returns an invalid SplitInfo when no
    candidate survives.
    """
    if mode not in SPLIT_MODES:
        raise ConfigError(f"unknown split mode {mode!r}")
    if mode in (SPARSE, RESTRICTED):
        if k is None or not 1 <= k <= hists.n_outputs:
            raise ConfigError(
                f"sparse split modes need 1 <= k <= {hists.n_outputs}, got {k}")
        score, feature, t = _best_sparse(hists, lam, k, mode == RESTRICTED)
    elif mode == EXACT:
        score, feature, t = _best_exact(hists, lam)
    else:
        score, feature, t = _best_dense(hists, lam)
    if feature < 0 or not np.isfinite(score):
        return SplitInfo()
    info = SplitInfo(feature=feature, bin=t, gain=score, valid=True)
    if mode in (SPARSE, RESTRICTED):
        left = _stats_of_prefix(hists, feature, t, left=True)
        right = _stats_of_prefix(hists, feature, t, left=False)
        if mode == SPARSE:
            info.gain, info.left_columns, info.right_columns = sparse_gain(
                left, right, lam, k)
        else:
            info.gain, cols = restricted_sparse_gain(left, right, lam, k)
            info.left_columns = cols
            info.right_columns = cols
    return info
