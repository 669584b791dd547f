"""Gradient boosted decision trees with vector-valued leaves.

Each tree predicts a full output vector (or an automatically selected
sparse subset of outputs) per leaf, trained with second-order gradients
and histogram-approximated split finding.
"""

from .booster import (BoosterConfig, Ensemble, HistoryRecord, TrainResult,
                      default_max_leaves, train)
from .data import (BinMapper, BinnedMatrix, LabelSpec, RawDataset,
                   bin_matrix, bin_value, build_bin_mapper, load_csv,
                   load_dataset)
from .errors import ConfigError, DataError, NumericError, VecboostError
from .histogram import Histogram, NodeHistograms, build_histogram, subtract_histogram
from .losses import (GradHessBuffer, evaluate_metric, mse_grad_hess,
                     softmax_grad_hess)
from .model_io import load_model, save_model
from .split import (GradStats, SplitInfo, dense_gain, exact_gain,
                    find_best_split, restricted_sparse_gain, sparse_gain)
from .stats import confidence_of_superiority, t_cdf
from .synth import friedman1, friedman1_signal, random_projection
from .tree import (Tree, TreeConfig, TreeNode, apply_split,
                   compute_leaf_diagonal, compute_leaf_exact,
                   compute_leaf_sparse, grow_tree)

__version__ = "0.1.0"

__all__ = [
    "BinMapper", "BinnedMatrix", "BoosterConfig", "ConfigError", "DataError",
    "Ensemble", "GradHessBuffer", "GradStats", "Histogram", "HistoryRecord",
    "LabelSpec", "NodeHistograms", "NumericError", "RawDataset", "SplitInfo",
    "TrainResult", "Tree", "TreeConfig", "TreeNode", "VecboostError",
    "apply_split", "bin_matrix", "bin_value", "build_bin_mapper",
    "build_histogram", "compute_leaf_diagonal", "compute_leaf_exact",
    "compute_leaf_sparse", "confidence_of_superiority", "default_max_leaves",
    "dense_gain", "evaluate_metric", "exact_gain", "find_best_split",
    "friedman1", "friedman1_signal", "grow_tree", "load_csv", "load_dataset",
    "load_model", "mse_grad_hess", "random_projection",
    "restricted_sparse_gain", "save_model", "softmax_grad_hess",
    "sparse_gain", "subtract_histogram", "t_cdf", "train",
]
