"""Hazard-learning classifiers: tree, forest, perceptron, life-table baseline."""

from .base import (
    CorruptFile,
    DivergedTraining,
    HazardModel,
    SchemaFingerprintMismatch,
    SingleClassData,
    VersionMismatch,
)
from .forest import ForestParams, RandomForestHazard, train_forest
from .lifetable import LifeTableHazard, train_life_table
from .mlp import MlpHazard, MlpParams, network_loss_and_gradients, train_mlp
from .serialize import FORMAT_NAME, FORMAT_VERSION, load_model, save_model
from .tree import DecisionTreeHazard, TreeNode, TreeParams, train_tree

__all__ = [
    "HazardModel",
    "SingleClassData",
    "DivergedTraining",
    "SchemaFingerprintMismatch",
    "VersionMismatch",
    "CorruptFile",
    "TreeParams",
    "TreeNode",
    "DecisionTreeHazard",
    "train_tree",
    "ForestParams",
    "RandomForestHazard",
    "train_forest",
    "MlpParams",
    "MlpHazard",
    "train_mlp",
    "network_loss_and_gradients",
    "LifeTableHazard",
    "train_life_table",
    "save_model",
    "load_model",
    "FORMAT_NAME",
    "FORMAT_VERSION",
]
