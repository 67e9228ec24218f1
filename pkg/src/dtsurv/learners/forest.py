"""Bagged ensemble of Gini trees with per-split feature subsampling."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from ..core import DatasetStats, FeatureSchema
from ..transform import ExpandedDataset
from .base import HazardModel, require_both_classes
from .tree import DecisionTreeHazard, TreeNode, TreeParams, fit_tree_on_arrays

__all__ = ["ForestParams", "RandomForestHazard", "train_forest"]


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 20
    min_samples_split: int = 3
    max_depth: int = 15
    max_features_fraction: float = 0.8
    seed: int = 0
    n_jobs: int = 1
    bootstrap: bool = True  # off: every tree sees the full training set

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 0.0 < self.max_features_fraction <= 1.0:
            raise ValueError(
                f"max_features_fraction must be in (0, 1], got {self.max_features_fraction}"
            )
        if self.n_jobs < 1:
            raise ValueError(f"n_jobs must be >= 1, got {self.n_jobs}")

    def n_split_features(self, n_features: int) -> int:
        return max(1, math.ceil(self.max_features_fraction * n_features))


class RandomForestHazard(HazardModel):
    kind = "forest"

    def __init__(
        self,
        schema: FeatureSchema,
        trees: list[TreeNode],
        params: ForestParams,
        train_stats: DatasetStats | None = None,
    ):
        super().__init__(schema, train_stats)
        self.trees = trees
        self.params = params

    def tree_models(self) -> list[DecisionTreeHazard]:
        """The member trees as standalone models (for decomposition checks)."""
        tree_params = TreeParams(self.params.max_depth, self.params.min_samples_split)
        return [
            DecisionTreeHazard(self.schema, root, tree_params, self.train_stats)
            for root in self.trees
        ]

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros(X.shape[0], dtype=np.float64)
        for model in self.tree_models():
            total += model.predict_matrix(X)
        return total / len(self.trees)

    def params_dict(self) -> dict:
        return {
            "n_trees": self.params.n_trees,
            "min_samples_split": self.params.min_samples_split,
            "max_depth": self.params.max_depth,
            "max_features_fraction": self.params.max_features_fraction,
            "seed": self.params.seed,
            "n_jobs": self.params.n_jobs,
            "bootstrap": self.params.bootstrap,
        }

    def payload(self) -> dict:
        tree_params = TreeParams(self.params.max_depth, self.params.min_samples_split)
        return {
            "trees": [
                DecisionTreeHazard(self.schema, root, tree_params).payload()
                for root in self.trees
            ]
        }

    @classmethod
    def from_payload(
        cls,
        schema: FeatureSchema,
        params: Mapping,
        payload: Mapping,
        train_stats: DatasetStats | None,
    ) -> "RandomForestHazard":
        forest_params = ForestParams(
            n_trees=int(params["n_trees"]),
            min_samples_split=int(params["min_samples_split"]),
            max_depth=int(params["max_depth"]),
            max_features_fraction=float(params["max_features_fraction"]),
            seed=int(params["seed"]),
            n_jobs=int(params["n_jobs"]),
            bootstrap=bool(params["bootstrap"]),
        )
        tree_json = {"max_depth": forest_params.max_depth, "min_samples_split": forest_params.min_samples_split}
        trees = [
            DecisionTreeHazard.from_payload(schema, tree_json, p, None).root
            for p in payload["trees"]
        ]
        return cls(schema, trees, forest_params, train_stats)


def train_forest(
    e: ExpandedDataset,
    params: ForestParams,
    progress: Callable[[int], None] | None = None,
) -> RandomForestHazard:
    """Fit ``n_trees`` trees on bootstrap resamples; prediction is their mean.

    Tree i draws its resample and split features from the RNG stream derived
    from (seed, i), so the forest is identical whatever the parallelism.
    ``progress`` is called with each finished tree index.
    """
    if len(e) == 0:
        raise ValueError("cannot train on an empty expanded dataset")
    require_both_classes(e.targets)
    X, y = e.matrix, e.targets
    n = X.shape[0]
    tree_params = TreeParams(params.max_depth, params.min_samples_split)
    n_split_features = params.n_split_features(X.shape[1])

    def fit_one(i: int) -> TreeNode:
        rng = np.random.default_rng((params.seed, i))
        if params.bootstrap:
            sample = rng.integers(0, n, size=n)
            Xi, yi = X[sample], y[sample]
        else:
            Xi, yi = X, y
        root = fit_tree_on_arrays(Xi, yi, tree_params, n_split_features, rng)
        if progress is not None:
            progress(i)
        return root

    if params.n_jobs == 1 or params.n_trees == 1:
        trees = [fit_one(i) for i in range(params.n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            trees = list(pool.map(fit_one, range(params.n_trees)))
    return RandomForestHazard(e.schema, trees, params, e.source_stats)
