"""Versioned text serialization of ensembles.

One node per line; all reals are written with Python's shortest
round-tripping float representation, so load(save(  )) reproduces
predictions bit for bit.  The grammar is documented in
``docs/model_format.md``.
"""

from __future__ import annotations

import numpy as np

from .booster import MODES, Ensemble
from .errors import DataError
from .losses import LOSS_KINDS
from .tree import Tree, TreeNode

FORMAT_HEADER = "vecboost model v1"


def _fmt(x: float) -> str:
    return repr(float(x))


def _render(ensemble: Ensemble) -> str:
    lines = [FORMAT_HEADER]
    lines.append(f"loss {ensemble.loss}")
    lines.append(f"mode {ensemble.mode}")
    lines.append(f"n_features {ensemble.n_features}")
    lines.append(f"n_outputs {ensemble.n_outputs}")
    lines.append(f"learning_rate {_fmt(ensemble.learning_rate)}")
    lines.append("base_score " + " ".join(_fmt(v) for v in ensemble.base_score))
    lines.append(f"n_trees {len(ensemble.trees)}")
    for i, (tree, target) in enumerate(zip(ensemble.trees, ensemble.tree_targets)):
        head = f"tree {i} nodes={len(tree.nodes)}"
        if target is not None:
            head += f" target={target}"
        lines.append(head)
        for nid, node in enumerate(tree.nodes):
            if node.is_leaf:
                if node.weights is not None:
                    lines.append(f"node {nid} leaf dense "
                                 + " ".join(_fmt(w) for w in node.weights))
                else:
                    pairs = " ".join(f"{c}:{_fmt(v)}"
                                     for c, v in zip(node.columns, node.values))
                    lines.append(f"node {nid} leaf sparse" + (" " + pairs if pairs else ""))
            else:
                lines.append(
                    f"node {nid} split feature={node.feature} "
                    f"threshold={_fmt(node.threshold)} left={node.left} right={node.right}")
        lines.append("end tree")
    lines.append("end model")
    return "\n".join(lines) + "\n"


def save_model(ensemble: Ensemble, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_render(ensemble))
    except OSError as exc:
        raise DataError(f"cannot write model file {path}: {exc}") from None


class _Reader:
    def __init__(self, path: str, text: str):
        self.path = path
        self.lines = text.split("\n")
        self.pos = 0

    def fail(self, msg: str):
        raise DataError(f"{self.path}: line {self.pos}: {msg}")

    def next_line(self) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos]
            self.pos += 1
            if line.strip():
                return line.strip()
        raise DataError(f"{self.path}: unexpected end of file")

    def expect_field(self, key: str) -> str:
        line = self.next_line()
        if not line.startswith(key + " "):
            self.fail(f"expected '{key} ...', found {line!r}")
        return line[len(key) + 1:]


def _parse_int(reader: _Reader, text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        reader.fail(f"bad integer {text!r} for {what}")


def _parse_float(reader: _Reader, text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        reader.fail(f"bad real {text!r} for {what}")


def load_model(path: str) -> Ensemble:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from None
    reader = _Reader(path, text)
    header = reader.next_line()
    if header != FORMAT_HEADER:
        reader.fail(f"unsupported model header {header!r} (expected {FORMAT_HEADER!r})")
    loss = reader.expect_field("loss")
    if loss not in LOSS_KINDS:
        reader.fail(f"unknown loss {loss!r}")
    mode = reader.expect_field("mode")
    if mode not in MODES:
        reader.fail(f"unknown mode {mode!r}")
    m = _parse_int(reader, reader.expect_field("n_features"), "n_features")
    d = _parse_int(reader, reader.expect_field("n_outputs"), "n_outputs")
    if m < 1 or d < 1:
        reader.fail("n_features and n_outputs must be positive")
    lr = _parse_float(reader, reader.expect_field("learning_rate"), "learning_rate")
    base_txt = reader.expect_field("base_score").split()
    if len(base_txt) != d:
        reader.fail(f"base_score needs {d} values, found {len(base_txt)}")
    base = np.array([_parse_float(reader, v, "base_score") for v in base_txt])
    n_trees = _parse_int(reader, reader.expect_field("n_trees"), "n_trees")
    if n_trees < 0:
        reader.fail("n_trees must be >= 0")

    trees: list[Tree] = []
    targets: list[int | None] = []
    for i in range(n_trees):
        line = reader.next_line()
        parts = line.split()
        if len(parts) < 3 or parts[0] != "tree":
            reader.fail(f"expected 'tree {i} ...', found {line!r}")
        if _parse_int(reader, parts[1], "tree index") != i:
            reader.fail(f"expected tree index {i}, found {parts[1]}")
        fields = dict(p.split("=", 1) for p in parts[2:] if "=" in p)
        if "nodes" not in fields:
            reader.fail("tree header missing nodes=<count>")
        n_nodes = _parse_int(reader, fields["nodes"], "node count")
        target = None
        if "target" in fields:
            target = _parse_int(reader, fields["target"], "target")
            if not 0 <= target < d:
                reader.fail(f"tree target {target} outside [0, {d})")
        tree_d = 1 if target is not None else d
        nodes = [None] * n_nodes
        for _ in range(n_nodes):
            nodes_line = reader.next_line()
            node = _parse_node(reader, nodes_line, n_nodes, m, tree_d)
            nid, parsed = node
            if nodes[nid] is not None:
                reader.fail(f"duplicate node id {nid}")
            nodes[nid] = parsed
        if reader.next_line() != "end tree":
            reader.fail("expected 'end tree'")
        _validate_tree(reader, nodes)
        trees.append(Tree(nodes, tree_d))
        targets.append(target)
    if reader.next_line() != "end model":
        reader.fail("expected 'end model'")
    return Ensemble(trees=trees, tree_targets=targets, learning_rate=lr,
                    base_score=base, loss=loss, mode=mode,
                    n_features=m, n_outputs=d)


def _parse_node(reader: _Reader, line: str, n_nodes: int, m: int,
                d: int) -> tuple[int, TreeNode]:
    parts = line.split()
    if len(parts) < 3 or parts[0] != "node":
        reader.fail(f"expected a node record, found {line!r}")
    nid = _parse_int(reader, parts[1], "node id")
    if not 0 <= nid < n_nodes:
        reader.fail(f"node id {nid} outside [0, {n_nodes})")
    kind = parts[2]
    if kind == "split":
        fields = dict(p.split("=", 1) for p in parts[3:] if "=" in p)
        for key in ("feature", "threshold", "left", "right"):
            if key not in fields:
                reader.fail(f"split node missing {key}=")
        feature = _parse_int(reader, fields["feature"], "feature")
        if not 0 <= feature < m:
            reader.fail(f"feature id {feature} outside [0, {m})")
        left = _parse_int(reader, fields["left"], "left child")
        right = _parse_int(reader, fields["right"], "right child")
        if not (0 <= left < n_nodes and 0 <= right < n_nodes):
            reader.fail(f"child reference outside [0, {n_nodes})")
        thr = _parse_float(reader, fields["threshold"], "threshold")
        return nid, TreeNode(is_leaf=False, feature=feature, threshold=thr,
                             left=left, right=right)
    if kind == "leaf":
        if len(parts) < 4 or parts[3] not in ("dense", "sparse"):
            reader.fail("leaf node must declare 'dense' or 'sparse'")
        if parts[3] == "dense":
            weights = [_parse_float(reader, w, "leaf weight") for w in parts[4:]]
            if len(weights) != d:
                reader.fail(f"dense leaf needs {d} weights, found {len(weights)}")
            return nid, TreeNode(is_leaf=True, weights=np.array(weights))
        cols, vals = [], []
        for pair in parts[4:]:
            if ":" not in pair:
                reader.fail(f"bad sparse pair {pair!r}")
            c_txt, v_txt = pair.split(":", 1)
            c = _parse_int(reader, c_txt, "leaf column")
            if not 0 <= c < d:
                reader.fail(f"leaf column {c} outside [0, {d})")
            cols.append(c)
            vals.append(_parse_float(reader, v_txt, "leaf value"))
        if len(set(cols)) != len(cols):
            reader.fail("sparse leaf repeats a column")
        return nid, TreeNode(is_leaf=True, columns=np.array(cols, dtype=np.intp),
                             values=np.array(vals))
    reader.fail(f"unknown node kind {kind!r}")


def _validate_tree(reader: _Reader, nodes: list[TreeNode | None]) -> None:
    for nid, node in enumerate(nodes):
        if node is None:
            reader.fail(f"node {nid} missing from tree")
    seen = set()
    stack = [0]
    while stack:
        nid = stack.pop()
        if nid in seen:
            reader.fail(f"node {nid} is referenced twice")
        seen.add(nid)
        node = nodes[nid]
        if not node.is_leaf:
            stack.extend((node.left, node.right))
    if len(seen) != len(nodes):
        reader.fail("tree has nodes unreachable from the root")
