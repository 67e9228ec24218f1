"""Named training configurations shipped with the toolkit.

The six presets document the published breast/colon/lung forest and
perceptron setups; they assume cohort-scale expanded data and are starting
points, not desk-scale defaults.
"""

from __future__ import annotations

from .learners import ForestParams, MlpParams

__all__ = ["FOREST_PRESETS", "MLP_PRESETS", "preset_names"]

FOREST_PRESETS: dict[str, ForestParams] = {
    "breast-rf": ForestParams(
        n_trees=20, min_samples_split=3, max_depth=15, max_features_fraction=0.8, seed=33, n_jobs=5
    ),
    "colon-rf": ForestParams(
        n_trees=25, min_samples_split=3, max_depth=10, max_features_fraction=0.5, seed=3, n_jobs=5
    ),
    "lung-rf": ForestParams(
        n_trees=25, min_samples_split=3, max_depth=11, max_features_fraction=0.8, seed=3, n_jobs=5
    ),
}

MLP_PRESETS: dict[str, MlpParams] = {
    "breast-nn": MlpParams(
        hidden_widths=(114, 50, 36),
        dropout_rates=(0.05, 0.05, 0.05),
        learning_rate=0.001,
        batch_size=1500,
        epochs=200,
    ),
    "colon-nn": MlpParams(
        hidden_widths=(114, 50, 35),
        dropout_rates=(0.05, 0.05, 0.05),
        learning_rate=0.001,
        batch_size=1500,
        epochs=200,
    ),
    "lung-nn": MlpParams(
        hidden_widths=(114, 80, 40),
        dropout_rates=(0.1, 0.1, 0.1),
        learning_rate=0.001,
        batch_size=2000,
        epochs=50,
    ),
}


def preset_names() -> list[str]:
    return sorted(FOREST_PRESETS) + sorted(MLP_PRESETS)
