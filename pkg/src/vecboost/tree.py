"""Best-first growth of a single vector-output decision tree.

The frontier of undivided nodes is a priority queue ordered by split gain.
Each expansion builds histograms for the smaller child and derives the
larger child's by subtraction.  At most ``node_store_limit`` frontier
candidates keep materialized histograms; further children are parked with
their sample sets only and re-materialized (histograms rebuilt from
scratch) once the store has room.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .data import BinnedMatrix
from .errors import ConfigError, NumericError
from .histogram import NodeHistograms
from .losses import GradHessBuffer
from .split import (DENSE, EXACT, RESTRICTED, SPARSE, GradStats, SplitInfo,
                    find_best_split, solve_regularized, top_k_columns,
                    _score_terms)

logger = logging.getLogger(__name__)

NODE_STORE_LIMIT = 48


@dataclass
class TreeNode:
    """Either an internal split node or a leaf holding output weights."""

    is_leaf: bool
    feature: int = -1
    bin: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    weights: np.ndarray | None = None        # dense leaves: (d,)
    columns: np.ndarray | None = None        # sparse leaves: column ids
    values: np.ndarray | None = None         # sparse leaves: matching weights


@dataclass
class Tree:
    """A grown tree; node 0 is the root."""

    nodes: list[TreeNode]
    n_outputs: int

    @property
    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    def add_predictions(self, features: np.ndarray, out: np.ndarray,
                        scale: float, target_column: int | None = None) -> None:
        """Route raw feature rows and add scaled leaf values into ``out``.

        ``target_column`` remaps a single-output tree onto one column of a
        wider prediction matrix (single-output baseline ensembles).
        """
        idx = np.arange(features.shape[0])
        stack = [(0, idx)]
        while stack:
            node_id, rows = stack.pop()
            if rows.size == 0:
                continue
            node = self.nodes[node_id]
            if node.is_leaf:
                if node.weights is not None:
                    if target_column is None:
                        out[rows] += scale * node.weights
                    else:
                        out[rows, target_column] += scale * node.weights[0]
                elif node.columns is not None and node.columns.size:
                    out[np.ix_(rows, node.columns)] += scale * node.values
                continue
            mask = features[rows, node.feature] <= node.threshold
            stack.append((node.left, rows[mask]))
            stack.append((node.right, rows[~mask]))


@dataclass
class TreeConfig:
    """Growth hyper-parameters for one tree."""

    mode: str = DENSE                 # dense | sparse | restricted | exact
    lam: float = 1.0
    max_depth: int = 5
    max_leaves: int = 24
    min_samples: int = 1
    gain_threshold: float = 1e-6
    sparse_k: int | None = None
    node_store_limit: int = NODE_STORE_LIMIT

    def validate(self, d: int) -> None:
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.max_leaves < 2:
            raise ConfigError(f"max_leaves must be >= 2, got {self.max_leaves}")
        if self.min_samples < 1:
            raise ConfigError(f"min_samples must be >= 1, got {self.min_samples}")
        if self.mode in (SPARSE, RESTRICTED):
            if self.sparse_k is None or not 1 <= self.sparse_k <= d:
                raise ConfigError(
                    f"sparse modes need 1 <= sparse_k <= {d}, got {self.sparse_k}")
        if self.node_store_limit < 1:
            raise ConfigError("node_store_limit must be >= 1")


@dataclass
class GrowthResult:
    """A grown tree plus the bookkeeping the booster and tests need."""

    tree: Tree
    leaf_samples: list[tuple[int, np.ndarray]]
    expanded_gains: list[float] = field(default_factory=list)
    built_child_sizes: list[tuple[int, int]] = field(default_factory=list)
    exact_fallbacks: int = 0


def compute_leaf_diagonal(stats: GradStats, lam: float) -> np.ndarray:
    """Per-column optimal weights -G/(H + lambda) with a zero guard."""
    denom = stats.h + lam
    out = np.zeros_like(stats.g)
    np.divide(-stats.g, denom, out=out, where=denom > 0)
    return out


def compute_leaf_sparse(stats: GradStats, lam: float, k: int,
                        columns: np.ndarray | None = None
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Top-k sparse leaf: (columns, weights); other columns are implicit zeros.

    A preselected column set (shared-set splits) is honored when given,
    otherwise the k columns with largest G^2/(H + lambda) are kept.
    """
    d = stats.g.shape[0]
    if not 1 <= k <= d:
        raise ConfigError(f"sparse constraint k={k} outside [1, {d}]")
    if columns is None:
        v = _score_terms(stats.g, stats.h, lam)
        columns = top_k_columns(v, k)
    dense = compute_leaf_diagonal(stats, lam)
    return columns, dense[columns]


def compute_leaf_exact(stats: GradStats, lam: float) -> np.ndarray:
    """Solve (sum H + lam I) w = -G; falls back to the diagonal leaf on failure."""
    if stats.full is None:
        raise ConfigError("exact leaf requires full hessian statistics")
    return solve_regularized(stats.full, lam, -stats.g)


def apply_split(samples: np.ndarray, binned: BinnedMatrix,
                split: SplitInfo) -> tuple[np.ndarray, np.ndarray]:
    """Partition a sample index set: bins <= split.bin go left, order preserved."""
    codes = binned.codes[split.feature, samples]
    mask = codes <= split.bin
    left = samples[mask]
    right = samples[~mask]
    if left.size == 0 or right.size == 0:
        raise NumericError("split produced an empty side; histogram/split mismatch")
    return left, right


@dataclass
class _Candidate:
    node_id: int
    samples: np.ndarray
    depth: int
    hists: NodeHistograms
    split: SplitInfo
    stats: GradStats
    from_columns: np.ndarray | None  # shared-set columns of the creating split


@dataclass
class _Parked:
    node_id: int
    samples: np.ndarray
    depth: int
    stats: GradStats
    from_columns: np.ndarray | None


def _stats_from_histograms(hists: NodeHistograms) -> GradStats:
    """Node totals from the first feature's bins (every feature scans the
    same samples, so any feature's sums are the node's sums)."""
    full = None if hists.full is None else hists.full[0].sum(axis=0)
    return GradStats(hists.g[0].sum(axis=0), hists.h[0].sum(axis=0),
                     int(hists.count[0].sum()), full)


def _direct_stats(samples: np.ndarray, grads: GradHessBuffer,
                  want_full: bool) -> GradStats:
    """Node totals straight from the gradient rows (no histograms needed)."""
    g = grads.g[samples].sum(axis=0)
    h = grads.h[samples].sum(axis=0)
    full = None
    if want_full:
        full = grads.full_h[samples].sum(axis=0)
    return GradStats(g, h, int(samples.size), full)


def grow_tree(samples: np.ndarray, binned: BinnedMatrix, grads: GradHessBuffer,
              config: TreeConfig) -> GrowthResult:
    """Grow one tree over ``samples`` in best-first order."""
    d = grads.g.shape[1]
    config.validate(d)
    mode = config.mode
    want_full = mode == EXACT
    lam = config.lam
    k = config.sparse_k
    gain_denominator = float(k if mode in (SPARSE, RESTRICTED) else d)

    samples = np.asarray(samples, dtype=np.intp)
    nodes: list[TreeNode] = []
    result = GrowthResult(tree=Tree(nodes, d), leaf_samples=[])
    counter = itertools.count()  # FIFO tiebreak inside the heap
    heap: list[tuple[float, int, _Candidate]] = []
    parked: deque[_Parked] = deque()
    n_leaves = 1  # leaves the tree would have if growth stopped now

    def finalize_leaf(node_id, cand_samples, stats, from_columns):
        node = nodes[node_id]
        node.is_leaf = True
        if mode in (SPARSE, RESTRICTED):
            cols, vals = compute_leaf_sparse(
                stats, lam, k, columns=from_columns if mode == RESTRICTED else None)
            node.columns, node.values = cols, vals
        elif mode == EXACT:
            try:
                node.weights = compute_leaf_exact(stats, lam)
            except NumericError:
                result.exact_fallbacks += 1
                logger.warning("exact leaf solve failed at node %d; using diagonal leaf",
                               node_id)
                node.weights = compute_leaf_diagonal(stats, lam)
        else:
            node.weights = compute_leaf_diagonal(stats, lam)
        result.leaf_samples.append((node_id, cand_samples))

    def selectable(split: SplitInfo) -> bool:
        return split.valid and split.gain / gain_denominator > config.gain_threshold

    def materialize(node_id, cand_samples, depth, stats, from_columns,
                    hists=None) -> None:
        """Find a node's best split; queue it as a candidate or seal a leaf."""
        if hists is None:
            hists = NodeHistograms.build(cand_samples, binned, grads, want_full)
            if stats is None:
                stats = _stats_from_histograms(hists)
        split = find_best_split(hists, mode, lam, k)
        if selectable(split):
            n_left = int(hists.count[split.feature, :split.bin + 1].sum())
            if min(n_left, cand_samples.size - n_left) < config.min_samples:
                finalize_leaf(node_id, cand_samples, stats, from_columns)
                return
            cand = _Candidate(node_id, cand_samples, depth, hists, split, stats,
                              from_columns)
            if len(heap) < config.node_store_limit:
                heapq.heappush(heap, (-split.gain, next(counter), cand))
            else:
                parked.append(_Parked(node_id, cand_samples, depth, stats,
                                      from_columns))
        else:
            finalize_leaf(node_id, cand_samples, stats, from_columns)

    nodes.append(TreeNode(is_leaf=True))
    root_hists = NodeHistograms.build(samples, binned, grads, want_full)
    materialize(0, samples, 0, _stats_from_histograms(root_hists), None,
                hists=root_hists)

    while heap and n_leaves < config.max_leaves:
        _, _, cand = heapq.heappop(heap)
        split = cand.split
        result.expanded_gains.append(split.gain)
        left_idx, right_idx = apply_split(cand.samples, binned, split)
        node = nodes[cand.node_id]
        node.is_leaf = False
        node.feature = split.feature
        node.bin = split.bin
        node.threshold = binned.mapper.upper_boundary(split.feature, split.bin)
        node.left = len(nodes)
        nodes.append(TreeNode(is_leaf=True))
        node.right = len(nodes)
        nodes.append(TreeNode(is_leaf=True))
        n_leaves += 1

        if left_idx.size <= right_idx.size:
            small_idx, small_node = left_idx, node.left
            large_idx, large_node = right_idx, node.right
        else:
            small_idx, small_node = right_idx, node.right
            large_idx, large_node = left_idx, node.left
        child_cols = {node.left: split.left_columns, node.right: split.right_columns}
        child_depth = cand.depth + 1

        # Children that can never split skip histogram construction entirely.
        if child_depth >= config.max_depth or n_leaves >= config.max_leaves:
            small_stats = _direct_stats(small_idx, grads, want_full)
            large_stats = cand.stats - small_stats
            finalize_leaf(small_node, small_idx, small_stats,
                          child_cols[small_node])
            finalize_leaf(large_node, large_idx, large_stats,
                          child_cols[large_node])
        else:
            small_hists = NodeHistograms.build(small_idx, binned, grads, want_full)
            result.built_child_sizes.append((cand.samples.size, small_idx.size))
            large_hists = cand.hists.subtract(small_hists)
            small_stats = _stats_from_histograms(small_hists)
            large_stats = cand.stats - small_stats
            materialize(small_node, small_idx, child_depth, small_stats,
                        child_cols[small_node], hists=small_hists)
            materialize(large_node, large_idx, child_depth, large_stats,
                        child_cols[large_node], hists=large_hists)

        # Re-materialize parked nodes (oldest first) while the store has room.
        while parked and len(heap) < config.node_store_limit:
            p = parked.popleft()
            materialize(p.node_id, p.samples, p.depth, p.stats, p.from_columns)

    for _, _, cand in heap:
        finalize_leaf(cand.node_id, cand.samples, cand.stats, cand.from_columns)
    for p in parked:
        finalize_leaf(p.node_id, p.samples, p.stats, p.from_columns)
    return result
