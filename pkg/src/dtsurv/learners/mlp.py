"""Fully-connected sigmoid-output network trained with RMSProp on log loss.

Hidden layers are rectified-linear with optional inverted dropout during
training. Inputs are affinely rescaled per feature to [0, 1] using training
min/max stored with the model; raw survival-data magnitudes (years, tumor
millimeters) would otherwise dominate the shared learning rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ..core import DatasetStats, FeatureSchema
from ..transform import ExpandedDataset
from .base import DivergedTraining, HazardModel, require_both_classes

__all__ = ["MlpParams", "MlpHazard", "train_mlp", "network_loss_and_gradients"]

INIT_STDDEV = 0.05  # zero-mean Gaussian weight init; biases start at zero
RMSPROP_DECAY = 0.9
RMSPROP_EPSILON = 1e-8
HELDOUT_FRACTION = 0.1  # monitoring fold carved off the training rows


@dataclass(frozen=True)
class MlpParams:
    hidden_widths: tuple[int, ...] = (64, 32)
    dropout_rates: tuple[float, ...] = (0.05, 0.05)
    learning_rate: float = 0.001
    batch_size: int = 1500
    epochs: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.hidden_widths) < 1:
            raise ValueError("need at least one hidden layer")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError(f"hidden widths must be >= 1, got {self.hidden_widths}")
        if len(self.dropout_rates) != len(self.hidden_widths):
            raise ValueError("need one dropout rate per hidden layer")
        if any(not 0.0 <= r < 1.0 for r in self.dropout_rates):
            raise ValueError(f"dropout rates must be in [0, 1), got {self.dropout_rates}")
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    expz = np.exp(z[~pos])
    out[~pos] = expz / (1.0 + expz)
    return out


def network_loss_and_gradients(
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    X: np.ndarray,
    y: np.ndarray,
    dropout_masks: Sequence[np.ndarray] | None = None,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean binary cross-entropy and its gradient for one batch.

    The loss is computed from logits (softplus form), so it is finite for
    any weights and its gradient is exactly sigmoid(z) - y at the output.
    ``dropout_masks`` are pre-scaled multipliers for each hidden layer; pass
    the same masks to reproduce a specific training step.
    """
    n_layers = len(weights)
    a = X
    hidden_inputs: list[np.ndarray] = []
    activations: list[np.ndarray] = [X]
    for layer in range(n_layers - 1):
        z = a @ weights[layer] + biases[layer]
        hidden_inputs.append(z)
        a = np.maximum(z, 0.0)
        if dropout_masks is not None:
            a = a * dropout_masks[layer]
        activations.append(a)
    logits = (a @ weights[-1] + biases[-1]).ravel()

    loss = float(
        np.mean(np.maximum(logits, 0.0) - y * logits + np.log1p(np.exp(-np.abs(logits))))
    )

    grad_w: list[np.ndarray] = [np.empty(0)] * n_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * n_layers
    delta = ((_sigmoid(logits) - y) / y.size)[:, None]
    grad_w[-1] = activations[-1].T @ delta
    grad_b[-1] = delta.sum(axis=0)
    back = delta @ weights[-1].T
    for layer in range(n_layers - 2, -1, -1):
        if dropout_masks is not None:
            back = back * dropout_masks[layer]
        back = back * (hidden_inputs[layer] > 0.0)
        grad_w[layer] = activations[layer].T @ back
        grad_b[layer] = back.sum(axis=0)
        if layer > 0:
            back = back @ weights[layer].T
    return loss, grad_w, grad_b


def _forward_probabilities(
    weights: Sequence[np.ndarray], biases: Sequence[np.ndarray], X: np.ndarray
) -> np.ndarray:
    a = X
    for layer in range(len(weights) - 1):
        a = np.maximum(a @ weights[layer] + biases[layer], 0.0)
    return _sigmoid((a @ weights[-1] + biases[-1]).ravel())


def init_parameters(
    n_inputs: int, hidden_widths: Sequence[int], rng: np.random.Generator
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    widths = [n_inputs, *hidden_widths, 1]
    weights = [
        rng.normal(0.0, INIT_STDDEV, size=(widths[i], widths[i + 1]))
        for i in range(len(widths) - 1)
    ]
    biases = [np.zeros(widths[i + 1]) for i in range(len(widths) - 1)]
    return weights, biases


class MlpHazard(HazardModel):
    kind = "mlp"

    def __init__(
        self,
        schema: FeatureSchema,
        weights: list[np.ndarray],
        biases: list[np.ndarray],
        feature_min: np.ndarray,
        feature_range: np.ndarray,
        params: MlpParams,
        train_stats: DatasetStats | None = None,
        history: list[dict] | None = None,
    ):
        super().__init__(schema, train_stats)
        self.weights = weights
        self.biases = biases
        self.feature_min = feature_min
        self.feature_range = feature_range
        self.params = params
        # per-epoch loss log; informational, not serialized
        self.history = history or []

    def scale(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.feature_min) / self.feature_range

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        return _forward_probabilities(self.weights, self.biases, self.scale(X))

    def params_dict(self) -> dict:
        return {
            "hidden_widths": list(self.params.hidden_widths),
            "dropout_rates": list(self.params.dropout_rates),
            "learning_rate": self.params.learning_rate,
            "batch_size": self.params.batch_size,
            "epochs": self.params.epochs,
            "seed": self.params.seed,
        }

    def payload(self) -> dict:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "feature_min": self.feature_min.tolist(),
            "feature_range": self.feature_range.tolist(),
        }

    @classmethod
    def from_payload(
        cls,
        schema: FeatureSchema,
        params: Mapping,
        payload: Mapping,
        train_stats: DatasetStats | None,
    ) -> "MlpHazard":
        mlp_params = MlpParams(
            hidden_widths=tuple(int(w) for w in params["hidden_widths"]),
            dropout_rates=tuple(float(r) for r in params["dropout_rates"]),
            learning_rate=float(params["learning_rate"]),
            batch_size=int(params["batch_size"]),
            epochs=int(params["epochs"]),
            seed=int(params["seed"]),
        )
        return cls(
            schema,
            [np.asarray(w, dtype=np.float64) for w in payload["weights"]],
            [np.asarray(b, dtype=np.float64) for b in payload["biases"]],
            np.asarray(payload["feature_min"], dtype=np.float64),
            np.asarray(payload["feature_range"], dtype=np.float64),
            mlp_params,
            train_stats,
        )


def train_mlp(
    e: ExpandedDataset,
    params: MlpParams,
    progress: Callable[[dict], None] | None = None,
) -> MlpHazard:
    """Minibatch RMSProp on rescaled expanded rows; deterministic per seed.

    A held-out tenth of the rows is kept aside to log generalization loss
    per epoch; ``progress`` receives each epoch's record as it completes.
    Raises DivergedTraining as soon as any loss is non-finite.
    """
    if len(e) == 0:
        raise ValueError("cannot train on an empty expanded dataset")
    require_both_classes(e.targets)

    raw = e.matrix
    feature_min = raw.min(axis=0)
    feature_range = raw.max(axis=0) - feature_min
    feature_range[feature_range == 0.0] = 1.0
    X = (raw - feature_min) / feature_range
    y = e.targets.astype(np.float64)

    rng = np.random.default_rng(params.seed)
    weights, biases = init_parameters(X.shape[1], params.hidden_widths, rng)

    n = X.shape[0]
    n_heldout = int(round(n * HELDOUT_FRACTION)) if n >= 10 else 0
    order = rng.permutation(n)
    heldout, training = order[:n_heldout], order[n_heldout:]

    cache_w = [np.zeros_like(w) for w in weights]
    cache_b = [np.zeros_like(b) for b in biases]
    rates = np.asarray(params.dropout_rates)
    use_dropout = bool(np.any(rates > 0.0))
    history: list[dict] = []

    for epoch in range(params.epochs):
        epoch_order = training[rng.permutation(training.size)]
        batch_losses = []
        for start in range(0, epoch_order.size, params.batch_size):
            batch = epoch_order[start : start + params.batch_size]
            masks = None
            if use_dropout:
                masks = [
                    rng.binomial(1, 1.0 - rate, size=(batch.size, width)) / (1.0 - rate)
                    for rate, width in zip(rates, params.hidden_widths)
                ]
            loss, grad_w, grad_b = network_loss_and_gradients(
                weights, biases, X[batch], y[batch], masks
            )
            if not np.isfinite(loss):
                raise DivergedTraining(f"non-finite loss at epoch {epoch}")
            batch_losses.append(loss)
            for i in range(len(weights)):
                cache_w[i] = RMSPROP_DECAY * cache_w[i] + (1 - RMSPROP_DECAY) * grad_w[i] ** 2
                cache_b[i] = RMSPROP_DECAY * cache_b[i] + (1 - RMSPROP_DECAY) * grad_b[i] ** 2
                weights[i] -= params.learning_rate * grad_w[i] / (np.sqrt(cache_w[i]) + RMSPROP_EPSILON)
                biases[i] -= params.learning_rate * grad_b[i] / (np.sqrt(cache_b[i]) + RMSPROP_EPSILON)

        record = {"epoch": epoch, "train_loss": float(np.mean(batch_losses))}
        if heldout.size:
            heldout_loss, _, _ = network_loss_and_gradients(
                weights, biases, X[heldout], y[heldout]
            )
            record["heldout_loss"] = heldout_loss
            if not np.isfinite(heldout_loss):
                raise DivergedTraining(f"non-finite held-out loss at epoch {epoch}")
        history.append(record)
        if progress is not None:
            progress(record)

    return MlpHazard(
        e.schema,
        weights,
        biases,
        feature_min,
        feature_range,
        params,
        e.source_stats,
        history,
    )
