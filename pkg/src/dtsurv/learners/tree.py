"""Axis-aligned binary decision tree with Gini splits and leaf-fraction output."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..core import DatasetStats, FeatureSchema
from ..transform import ExpandedDataset
from .base import HazardModel, require_both_classes

__all__ = ["TreeParams", "TreeNode", "DecisionTreeHazard", "train_tree"]


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 15
    min_samples_split: int = 2

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")


@dataclass
class TreeNode:
    """Split node or leaf; leaves have ``feature`` = -1 and no children."""

    probability: float
    n_samples: int
    depth: int
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _gini(n_pos: float, n: float) -> float:
    p = n_pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split_for_feature(
    values: np.ndarray, targets: np.ndarray
) -> tuple[float, float] | None:
    """(impurity decrease, threshold) of the best boundary, or None if constant.

    Thresholds are midpoints between consecutive distinct sorted values; rows
    with value <= threshold go left. Equal-gain boundaries resolve to the
    lowest threshold.
    """
    order = np.argsort(values, kind="stable")
    xs = values[order]
    ys = targets[order].astype(np.float64)
    boundaries = np.nonzero(xs[1:] != xs[:-1])[0]
    if boundaries.size == 0:
        return None

    n = xs.size
    n_pos = ys.sum()
    cum_pos = np.cumsum(ys)
    n_left = (boundaries + 1).astype(np.float64)
    pos_left = cum_pos[boundaries]
    n_right = n - n_left
    pos_right = n_pos - pos_left

    p_left = pos_left / n_left
    p_right = pos_right / n_right
    gini_left = 1.0 - p_left**2 - (1.0 - p_left) ** 2
    gini_right = 1.0 - p_right**2 - (1.0 - p_right) ** 2
    weighted = (n_left * gini_left + n_right * gini_right) / n
    gains = _gini(n_pos, n) - weighted

    best = int(np.argmax(gains))  # first max = lowest threshold on ties
    b = boundaries[best]
    threshold = (xs[b] + xs[b + 1]) / 2.0
    return float(gains[best]), threshold


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    params: TreeParams,
    n_subsample_features: int | None,
    rng: np.random.Generator | None,
) -> TreeNode:
    n = idx.size
    n_pos = int(y[idx].sum())
    node = TreeNode(probability=n_pos / n, n_samples=n, depth=depth)
    if (
        depth >= params.max_depth
        or n < params.min_samples_split
        or n_pos == 0
        or n_pos == n
    ):
        return node

    n_features = X.shape[1]
    if n_subsample_features is not None and n_subsample_features < n_features:
        assert rng is not None
        features = np.sort(rng.choice(n_features, n_subsample_features, replace=False))
    else:
        features = np.arange(n_features)

    targets_here = y[idx]
    best_gain = 0.0
    best_feature = -1
    best_threshold = 0.0
    for f in features:  # ascending: ties keep the lowest feature index
        found = _best_split_for_feature(X[idx, f], targets_here)
        if found is None:
            continue
        gain, threshold = found
        if gain > best_gain:
            best_gain, best_feature, best_threshold = gain, int(f), threshold

    if best_feature < 0:
        return node

    goes_left = X[idx, best_feature] <= best_threshold
    node.feature = best_feature
    node.threshold = best_threshold
    node.left = _grow(X, y, idx[goes_left], depth + 1, params, n_subsample_features, rng)
    node.right = _grow(X, y, idx[~goes_left], depth + 1, params, n_subsample_features, rng)
    return node


def _predict_into(node: TreeNode, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if node.is_leaf or idx.size == 0:
        out[idx] = node.probability
        return
    goes_left = X[idx, node.feature] <= node.threshold
    _predict_into(node.left, X, idx[goes_left], out)
    _predict_into(node.right, X, idx[~goes_left], out)


class DecisionTreeHazard(HazardModel):
    kind = "tree"

    def __init__(
        self,
        schema: FeatureSchema,
        root: TreeNode,
        params: TreeParams,
        train_stats: DatasetStats | None = None,
    ):
        super().__init__(schema, train_stats)
        self.root = root
        self.params = params

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0], dtype=np.float64)
        _predict_into(self.root, X, np.arange(X.shape[0]), out)
        return out

    def params_dict(self) -> dict:
        return {
            "max_depth": self.params.max_depth,
            "min_samples_split": self.params.min_samples_split,
        }

    def payload(self) -> dict:
        nodes: list[dict] = []

        def emit(node: TreeNode) -> int:
            i = len(nodes)
            nodes.append(
                {
                    "probability": node.probability,
                    "n_samples": node.n_samples,
                    "depth": node.depth,
                    "feature": node.feature,
                    "threshold": node.threshold,
                    "left": -1,
                    "right": -1,
                }
            )
            if not node.is_leaf:
                nodes[i]["left"] = emit(node.left)
                nodes[i]["right"] = emit(node.right)
            return i

        emit(self.root)
        return {"nodes": nodes}

    @classmethod
    def from_payload(
        cls,
        schema: FeatureSchema,
        params: Mapping,
        payload: Mapping,
        train_stats: DatasetStats | None,
    ) -> "DecisionTreeHazard":
        raw = payload["nodes"]

        def build(i: int) -> TreeNode:
            r = raw[i]
            node = TreeNode(
                probability=float(r["probability"]),
                n_samples=int(r["n_samples"]),
                depth=int(r["depth"]),
                feature=int(r["feature"]),
                threshold=float(r["threshold"]),
            )
            if not node.is_leaf:
                node.left = build(int(r["left"]))
                node.right = build(int(r["right"]))
            return node

        tree_params = TreeParams(
            max_depth=int(params["max_depth"]),
            min_samples_split=int(params["min_samples_split"]),
        )
        return cls(schema, build(0), tree_params, train_stats)


def fit_tree_on_arrays(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams,
    n_subsample_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> TreeNode:
    """Grow a tree on raw arrays; pure nodes become leaves without error."""
    idx = np.arange(X.shape[0])
    return _grow(X, y, idx, 0, params, n_subsample_features, rng)


def train_tree(e: ExpandedDataset, params: TreeParams = TreeParams()) -> DecisionTreeHazard:
    """Fit a single Gini-split tree on the expanded rows."""
    if len(e) == 0:
        raise ValueError("cannot train on an empty expanded dataset")
    require_both_classes(e.targets)
    root = fit_tree_on_arrays(e.matrix, e.targets, params)
    return DecisionTreeHazard(e.schema, root, params, e.source_stats)
