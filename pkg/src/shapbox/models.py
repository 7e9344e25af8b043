"""Built-in model adapters: linear models and gradient-boosted tree ensembles.

Every adapter is an immutable callable taking a (rows, features) matrix and
returning one prediction per row, so it plugs straight into the explainer.
Documents follow a small JSON schema; see ``load_model``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ModelContractError,
    ModelValidationError,
    ShapeMismatchError,
    UnsupportedModelError,
)


def predict_batch(model, rows) -> np.ndarray:
    """Run a model adapter on a batch of rows with contract checks."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ShapeMismatchError(f"rows must be 2-D, got shape {rows.shape}")
    expected = getattr(model, "n_features", None)
    if expected is not None and rows.shape[1] != expected:
        raise ShapeMismatchError(
            f"row width {rows.shape[1]} != model width {expected}"
        )
    out = np.asarray(model(rows), dtype=float).reshape(-1)
    if out.size != rows.shape[0]:
        raise ModelContractError(
            f"model returned {out.size} outputs for {rows.shape[0]} rows"
        )
    if not np.all(np.isfinite(out)):
        raise ModelContractError("model returned non-finite outputs")
    return out


@dataclass(frozen=True)
class LinearModel:
    """weights . v + bias"""

    weights: np.ndarray
    bias: float

    @property
    def n_features(self) -> int:
        return self.weights.size

    def __call__(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if rows.shape[1] != self.n_features:
            raise ShapeMismatchError(
                f"row width {rows.shape[1]} != model width {self.n_features}"
            )
        return rows @ self.weights + self.bias

    def to_document(self) -> dict:
        return {
            "type": "linear",
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
        }


@dataclass(frozen=True)
class _Tree:
    """One binary tree in flat-array form; leaves marked by feature == -1."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_value: np.ndarray
    root: int

    def evaluate(self, rows: np.ndarray) -> np.ndarray:
        node = np.full(rows.shape[0], self.root, dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            n = node[active]
            go_left = rows[active, self.feature[n]] < self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])
            active = active[self.feature[node[active]] >= 0]
        return self.leaf_value[node]


@dataclass(frozen=True)
class TreeEnsembleModel:
    """Additive binary trees with an optional sigmoid output transform.

    Traversal rule: descend left iff value < threshold.  Inputs are assumed
    finite (the explainer guarantees this), so there is no missing-value
    routing.
    """

    trees: tuple[_Tree, ...]
    base_score: float
    transform: str  # "identity" | "sigmoid"
    n_features: int

    def __call__(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if rows.shape[1] < self.n_features:
            raise ShapeMismatchError(
                f"row width {rows.shape[1]} < model width {self.n_features}"
            )
        raw = np.full(rows.shape[0], self.base_score, dtype=float)
        for tree in self.trees:
            raw += tree.evaluate(rows)
        if self.transform == "sigmoid":
            return 1.0 / (1.0 + np.exp(-raw))
        return raw

    def raw_margin(self, rows) -> np.ndarray:
        """Pre-transform score; handy for locating decision boundaries."""
        rows = np.asarray(rows, dtype=float)
        raw = np.full(rows.shape[0], self.base_score, dtype=float)
        for tree in self.trees:
            raw += tree.evaluate(rows)
        return raw

    def to_document(self) -> dict:
        trees = []
        for tree in self.trees:
            nodes = []
            for i in range(tree.feature.size):
                if tree.feature[i] < 0:
                    nodes.append({"leaf": float(tree.leaf_value[i])})
                else:
                    nodes.append(
                        {
                            "feature": int(tree.feature[i]),
                            "threshold": float(tree.threshold[i]),
                            "left": int(tree.left[i]),
                            "right": int(tree.right[i]),
                        }
                    )
            trees.append({"nodes": nodes, "root": tree.root})
        return {
            "type": "gbdt",
            "base_score": float(self.base_score),
            "transform": self.transform,
            "n_features": self.n_features,
            "trees": trees,
        }


def _require_number(doc: dict, key: str, where: str) -> float:
    value = doc.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ModelValidationError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def _load_tree(doc: dict, index: int) -> tuple[_Tree, int]:
    where = f"trees[{index}]"
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise ModelValidationError(f"{where}.nodes: expected a non-empty list")
    n = len(nodes)
    root = doc.get("root", 0)
    if not isinstance(root, int) or not 0 <= root < n:
        raise ModelValidationError(f"{where}.root: index {root} out of range [0, {n})")

    feature = np.full(n, -1, dtype=np.int64)
    threshold = np.zeros(n)
    left = np.zeros(n, dtype=np.int64)
    right = np.zeros(n, dtype=np.int64)
    leaf_value = np.zeros(n)
    max_feature = -1
    for i, node in enumerate(nodes):
        nwhere = f"{where}.nodes[{i}]"
        if not isinstance(node, dict):
            raise ModelValidationError(f"{nwhere}: expected an object")
        if "leaf" in node:
            leaf_value[i] = _require_number(node, "leaf", nwhere)
            continue
        for key in ("feature", "threshold", "left", "right"):
            if key not in node:
                raise ModelValidationError(f"{nwhere}.{key}: missing")
        if not isinstance(node["feature"], int) or node["feature"] < 0:
            raise ModelValidationError(
                f"{nwhere}.feature: expected a nonnegative integer"
            )
        feature[i] = node["feature"]
        max_feature = max(max_feature, node["feature"])
        threshold[i] = _require_number(node, "threshold", nwhere)
        for key, arr in (("left", left), ("right", right)):
            child = node[key]
            if not isinstance(child, int) or not 0 <= child < n:
                raise ModelValidationError(
                    f"{nwhere}.{key}: child index {child} out of range [0, {n})"
                )
            arr[i] = child

    # Reject cycles / shared nodes: a DFS from the root must visit each node
    # at most once.
    seen = set()
    stack = [root]
    while stack:
        i = stack.pop()
        if i in seen:
            raise ModelValidationError(f"{where}: node {i} reachable twice (cycle)")
        seen.add(i)
        if feature[i] >= 0:
            stack.append(int(left[i]))
            stack.append(int(right[i]))

    tree = _Tree(
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        leaf_value=leaf_value,
        root=root,
    )
    return tree, max_feature


def load_model(source) -> LinearModel | TreeEnsembleModel:
    """Build an adapter from a JSON document, a dict, or a path to either.

    Schema:
        {"type": "linear", "weights": [...], "bias": r}
        {"type": "gbdt", "base_score": r, "transform": "identity"|"sigmoid",
         "trees": [{"nodes": [...], "root": i}, ...]}
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ModelValidationError("model document must be a JSON object")

    kind = doc.get("type")
    if kind == "linear":
        weights = doc.get("weights")
        if not isinstance(weights, list) or not weights:
            raise ModelValidationError("weights: expected a non-empty list of numbers")
        arr = np.asarray(weights, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ModelValidationError("weights: all entries must be finite")
        bias = _require_number(doc, "bias", "model")
        return LinearModel(weights=arr, bias=bias)

    if kind == "gbdt":
        base_score = _require_number(doc, "base_score", "model")
        transform = doc.get("transform", "identity")
        if transform not in ("identity", "sigmoid"):
            raise ModelValidationError(
                f"transform: expected 'identity' or 'sigmoid', got {transform!r}"
            )
        raw_trees = doc.get("trees")
        if not isinstance(raw_trees, list) or not raw_trees:
            raise ModelValidationError("trees: expected a non-empty list")
        trees = []
        max_feature = -1
        for i, tree_doc in enumerate(raw_trees):
            tree, tree_max = _load_tree(tree_doc, i)
            trees.append(tree)
            max_feature = max(max_feature, tree_max)
        n_features = doc.get("n_features", max_feature + 1)
        if not isinstance(n_features, int) or n_features <= max_feature:
            raise ModelValidationError(
                f"n_features: {n_features} inconsistent with max feature index {max_feature}"
            )
        return TreeEnsembleModel(
            trees=tuple(trees),
            base_score=base_score,
            transform=transform,
            n_features=n_features,
        )

    raise UnsupportedModelError(f"unsupported model type: {kind!r}")
