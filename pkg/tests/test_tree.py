"""Leaf value computation and best-first tree growth."""

import numpy as np
import pytest

from vecboost import (ConfigError, GradHessBuffer, GradStats, NumericError,
                      SplitInfo, TreeConfig, apply_split, compute_leaf_diagonal,
                      compute_leaf_exact, compute_leaf_sparse, grow_tree)
from vecboost.data import bin_matrix, build_bin_mapper
from vecboost.split import _score_terms
from tests.test_histogram import make_binned


class TestLeafValues:
    def test_diagonal_example(self):
        stats = GradStats(np.array([3.0, 3.0]), np.array([2.0, 2.0]), 4)
        np.testing.assert_allclose(compute_leaf_diagonal(stats, 1.0), [-1.0, -1.0])

    def test_diagonal_zero_gradient(self):
        stats = GradStats(np.zeros(3), np.ones(3), 2)
        assert not compute_leaf_diagonal(stats, 1.0).any()

    def test_diagonal_scalar(self):
        stats = GradStats(np.array([2.0]), np.array([3.0]), 3)
        np.testing.assert_allclose(compute_leaf_diagonal(stats, 1.0), [-0.5])

    def test_diagonal_guard(self):
        stats = GradStats(np.array([1.0]), np.array([0.0]), 1)
        assert compute_leaf_diagonal(stats, 0.0)[0] == 0.0

    def test_sparse_keeps_top_values(self):
        stats = GradStats(np.array([4.0, -2.0, 1.0]), np.ones(3), 5)
        cols, vals = compute_leaf_sparse(stats, 1.0, k=2)
        assert cols.tolist() == [0, 1]
        np.testing.assert_allclose(vals, [-2.0, 1.0])
        v = _score_terms(stats.g, stats.h, 1.0)
        np.testing.assert_allclose(-0.5 * v[cols].sum(), -5.0)

    def test_sparse_k_equals_d_is_dense(self):
        rng = np.random.default_rng(0)
        stats = GradStats(rng.normal(size=4), rng.uniform(0.1, 1, 4), 6)
        cols, vals = compute_leaf_sparse(stats, 0.5, k=4)
        np.testing.assert_allclose(vals, compute_leaf_diagonal(stats, 0.5))

    def test_sparse_tie_prefers_lower_column(self):
        stats = GradStats(np.array([2.0, 1.0, 1.0]), np.ones(3), 4)
        cols, _ = compute_leaf_sparse(stats, 1.0, k=2)
        assert cols.tolist() == [0, 1]

    def test_sparse_honors_preselected_columns(self):
        stats = GradStats(np.array([4.0, -2.0, 1.0]), np.ones(3), 5)
        cols, vals = compute_leaf_sparse(stats, 1.0, k=2,
                                         columns=np.array([1, 2]))
        assert cols.tolist() == [1, 2]
        np.testing.assert_allclose(vals, [1.0, -0.5])

    def test_exact_two_by_two(self):
        stats = GradStats(np.array([3.0, 3.0]), np.array([2.0, 2.0]), 4,
                          full=np.array([[2.0, 1.0], [1.0, 2.0]]))
        w = compute_leaf_exact(stats, 1.0)
        np.testing.assert_allclose(w, [-0.75, -0.75])
        np.testing.assert_allclose((stats.full + np.eye(2)) @ w, -stats.g,
                                   atol=1e-12)

    def test_exact_diagonal_matches_diagonal_leaf(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            d = rng.integers(1, 6)
            h = rng.uniform(0.1, 3, d)
            stats = GradStats(rng.normal(size=d), h, 7, full=np.diag(h))
            np.testing.assert_allclose(compute_leaf_exact(stats, 0.8),
                                       compute_leaf_diagonal(stats, 0.8),
                                       rtol=1e-12, atol=1e-14)

    def test_exact_zero_gradient(self):
        stats = GradStats(np.zeros(2), np.ones(2), 3, full=np.eye(2))
        np.testing.assert_allclose(compute_leaf_exact(stats, 1.0), [0.0, 0.0])

    def test_exact_residual_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            d = rng.integers(1, 17)
            a = rng.normal(size=(d, d))
            stats = GradStats(rng.normal(size=d) * 4, rng.uniform(0.1, 1, d),
                              9, full=a @ a.T)
            lam = rng.uniform(0.01, 2)
            w = compute_leaf_exact(stats, lam)
            resid = np.abs((stats.full + lam * np.eye(d)) @ w + stats.g).max()
            assert resid <= 1e-8 * (1 + np.abs(stats.g).max())


class TestApplySplit:
    def test_partition_by_threshold_bin(self):
        binned = make_binned([[0, 1, 0, 2]])
        split = SplitInfo(feature=0, bin=0, gain=1.0, valid=True)
        left, right = apply_split(np.arange(4), binned, split)
        assert left.tolist() == [0, 2]
        assert right.tolist() == [1, 3]

    def test_order_stability(self):
        binned = make_binned([[1, 0, 1, 0, 1]])
        split = SplitInfo(feature=0, bin=0, gain=1.0, valid=True)
        left, right = apply_split(np.array([4, 2, 0, 1, 3]), binned, split)
        assert left.tolist() == [1, 3]
        assert right.tolist() == [4, 2, 0]

    def test_empty_side_is_internal_error(self):
        binned = make_binned([[0, 0, 0]])
        split = SplitInfo(feature=0, bin=0, gain=1.0, valid=True)
        with pytest.raises(NumericError):
            apply_split(np.arange(3), binned, split)


def grow_on_raw(features, g, h, **cfg_kwargs):
    mapper = build_bin_mapper(features, cfg_kwargs.pop("max_bins", 32))
    binned = bin_matrix(mapper, features)
    grads = GradHessBuffer(np.asarray(g, dtype=float), np.asarray(h, dtype=float))
    config = TreeConfig(**cfg_kwargs)
    return grow_tree(np.arange(features.shape[0]), binned, grads, config), binned


class TestGrowth:
    def xor_setup(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([[0.0], [1.0], [1.0], [0.0]])
        g = 0.0 - y  # squared error gradient at zero predictions
        h = np.ones_like(y)
        return x, g, h

    def test_xor_needs_depth_two(self):
        x, g, h = self.xor_setup()
        res, _ = grow_on_raw(x, g, h, mode="dense", lam=0.0, max_depth=2,
                             max_leaves=4, min_samples=1, gain_threshold=-1.0)
        assert res.tree.n_leaves == 4
        # with lr 1 the tree alone reproduces y exactly
        pred = np.zeros((4, 1))
        res.tree.add_predictions(x, pred, 1.0)
        np.testing.assert_allclose(pred, [[0], [1], [1], [0]], atol=1e-12)

    def test_zero_gradient_single_leaf(self):
        x = np.array([[0.0], [1.0], [2.0], [3.0]])
        res, _ = grow_on_raw(x, np.zeros((4, 1)), np.ones((4, 1)),
                             mode="dense", lam=0.0, gain_threshold=1e-6)
        assert res.tree.n_leaves == 1
        assert res.tree.nodes[0].is_leaf

    def test_two_leaf_budget_takes_best_root_split(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(60, 3))
        g = rng.normal(size=(60, 2))
        h = np.ones((60, 2))
        res, _ = grow_on_raw(x, g, h, mode="dense", lam=1.0, max_leaves=2,
                             min_samples=1, gain_threshold=-np.inf)
        assert res.tree.n_leaves == 2
        assert len(res.expanded_gains) == 1

    def test_leaf_partition_covers_all_samples(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(100, 4))
        g = rng.normal(size=(100, 3))
        h = np.abs(rng.normal(size=(100, 3))) + 0.1
        res, _ = grow_on_raw(x, g, h, mode="dense", lam=1.0, max_depth=4,
                             max_leaves=12, min_samples=1)
        seen = np.concatenate([idx for _, idx in res.leaf_samples])
        assert np.array_equal(np.sort(seen), np.arange(100))
        leaf_ids = {nid for nid, _ in res.leaf_samples}
        assert leaf_ids == {i for i, n in enumerate(res.tree.nodes) if n.is_leaf}

    def test_depth_and_leaf_bounds(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(200, 3))
        g = rng.normal(size=(200, 2))
        h = np.ones((200, 2))
        res, _ = grow_on_raw(x, g, h, mode="dense", lam=0.1, max_depth=3,
                             max_leaves=6, min_samples=1, gain_threshold=-np.inf)
        assert res.tree.n_leaves <= 6

        def depth_of(nid, d=0):
            node = res.tree.nodes[nid]
            if node.is_leaf:
                return d
            return max(depth_of(node.left, d + 1), depth_of(node.right, d + 1))

        assert depth_of(0) <= 3

    def test_min_samples_respected(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(50, 2))
        g = rng.normal(size=(50, 1))
        res, _ = grow_on_raw(x, g, np.ones((50, 1)), mode="dense", lam=0.1,
                             max_depth=6, max_leaves=32, min_samples=8,
                             gain_threshold=-np.inf)
        for _, idx in res.leaf_samples:
            assert idx.size >= 8

    def test_expanded_node_is_frontier_maximum(self):
        # best-first: each expansion pops the current best candidate, so every
        # later-expanded gain is either lower or comes from a fresh child
        rng = np.random.default_rng(7)
        x = rng.normal(size=(150, 3))
        g = rng.normal(size=(150, 2))
        res, _ = grow_on_raw(x, g, np.ones((150, 2)), mode="dense", lam=1.0,
                             max_depth=5, max_leaves=10, min_samples=1,
                             gain_threshold=-np.inf)
        assert len(res.expanded_gains) == res.tree.n_leaves - 1

    def test_smaller_child_is_always_built(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(300, 4))
        g = rng.normal(size=(300, 2))
        res, _ = grow_on_raw(x, g, np.ones((300, 2)), mode="dense", lam=1.0,
                             max_depth=5, max_leaves=20, min_samples=1)
        assert res.built_child_sizes  # at least the root was expanded
        for parent_n, built_n in res.built_child_sizes:
            assert built_n <= parent_n // 2 + 1

    def test_sparse_leaves_bounded_by_k(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(120, 3))
        g = rng.normal(size=(120, 5))
        res, _ = grow_on_raw(x, g, np.ones((120, 5)), mode="sparse", lam=1.0,
                             max_depth=4, max_leaves=10, min_samples=1,
                             sparse_k=2)
        for node in res.tree.nodes:
            if node.is_leaf:
                assert node.columns.size <= 2

    def test_restricted_children_share_split_columns(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(120, 3))
        g = rng.normal(size=(120, 4))
        res, _ = grow_on_raw(x, g, np.ones((120, 4)), mode="restricted",
                             lam=1.0, max_depth=2, max_leaves=4,
                             min_samples=1, sparse_k=2)
        root = res.tree.nodes[0]
        if not root.is_leaf:
            left, right = res.tree.nodes[root.left], res.tree.nodes[root.right]
            if left.is_leaf and right.is_leaf:
                assert left.columns.tolist() == right.columns.tolist()

    def test_node_store_limit_parks_and_recovers(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(400, 4))
        g = rng.normal(size=(400, 2))
        res_small, _ = grow_on_raw(x, g, np.ones((400, 2)), mode="dense",
                                   lam=0.5, max_depth=8, max_leaves=30,
                                   min_samples=1, gain_threshold=-np.inf,
                                   node_store_limit=2)
        assert res_small.tree.n_leaves == 30

    def test_raw_threshold_reproduces_binned_routing(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(200, 3))
        g = rng.normal(size=(200, 2))
        res, binned = grow_on_raw(x, g, np.ones((200, 2)), mode="dense",
                                  lam=1.0, max_depth=4, max_leaves=10,
                                  min_samples=1)
        by_leaf = np.zeros((200, 2))
        for nid, idx in res.leaf_samples:
            by_leaf[idx] = res.tree.nodes[nid].weights
        by_routing = np.zeros((200, 2))
        res.tree.add_predictions(x, by_routing, 1.0)
        np.testing.assert_array_equal(by_leaf, by_routing)

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            TreeConfig(max_depth=0).validate(2)
        with pytest.raises(ConfigError):
            TreeConfig(max_leaves=1).validate(2)
        with pytest.raises(ConfigError):
            TreeConfig(mode="sparse", sparse_k=None).validate(2)
        with pytest.raises(ConfigError):
            TreeConfig(mode="sparse", sparse_k=5).validate(2)
