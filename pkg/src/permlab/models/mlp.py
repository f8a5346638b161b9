"""Feed-forward ReLU regressor with per-task linear heads and masked MSE."""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError
from .base import RegressorSpec, TrainedModel, _array

MAX_EPOCHS = 200
PATIENCE = 20
BATCH_SIZE = 32


class MlpModel(TrainedModel):
    def __init__(self, spec, weights, biases, target_mean, target_std, n_features: int):
        target_mean = np.atleast_1d(np.asarray(target_mean, dtype=float))
        super().__init__(spec, n_features, target_mean.shape[0])
        self.weights = [np.asarray(W, dtype=float) for W in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.target_mean = target_mean
        self.target_std = np.atleast_1d(np.asarray(target_std, dtype=float))

    def _predict(self, X):
        a = X
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.maximum(a @ W + b, 0.0)
        out = a @ self.weights[-1] + self.biases[-1]
        return out * self.target_std + self.target_mean

    def effective_parameters(self) -> int:
        return sum(W.size for W in self.weights) + sum(b.size for b in self.biases)

    def params_to_jsonable(self):
        return {
            "weights": [_array(W) for W in self.weights],
            "biases": [_array(b) for b in self.biases],
            "target_mean": _array(self.target_mean),
            "target_std": _array(self.target_std),
            "n_features": self.n_features,
        }

    @classmethod
    def params_from_jsonable(cls, spec, payload):
        return cls(
            spec,
            [np.array(W) for W in payload["weights"]],
            [np.array(b) for b in payload["biases"]],
            np.array(payload["target_mean"]),
            np.array(payload["target_std"]),
            payload["n_features"],
        )


def _init_params(sizes: list[int], rng: np.random.Generator):
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def loss_and_grad(
    weights,
    biases,
    X,
    Y,
    mask,
    weight_decay: float = 0.0,
    drop_masks=None,
):
    """Masked MSE (+ L2 on weights) and its exact gradients.

    drop_masks, when given, holds one pre-scaled multiplier per hidden
    layer (inverted dropout). Exposed so gradients can be checked against
    finite differences with the randomness pinned.
    """
    n_obs = mask.sum()
    activations = [X]
    a = X
    n_hidden = len(weights) - 1
    for k in range(n_hidden):
        a = np.maximum(a @ weights[k] + biases[k], 0.0)
        if drop_masks is not None:
            a = a * drop_masks[k]
        activations.append(a)
    out = a @ weights[-1] + biases[-1]

    resid = np.where(mask, out - Y, 0.0)
    loss = float((resid**2).sum()) / n_obs
    if weight_decay:
        loss += 0.5 * weight_decay * sum(float((W**2).sum()) for W in weights)

    g_out = 2.0 * resid / n_obs
    g_weights = [None] * len(weights)
    g_biases = [None] * len(biases)
    g_weights[-1] = activations[-1].T @ g_out
    g_biases[-1] = g_out.sum(axis=0)
    g_a = g_out @ weights[-1].T
    for k in range(n_hidden - 1, -1, -1):
        if drop_masks is not None:
            g_a = g_a * drop_masks[k]
        g_z = g_a * (activations[k + 1] > 0.0)
        g_weights[k] = activations[k].T @ g_z
        g_biases[k] = g_z.sum(axis=0)
        if k > 0:
            g_a = g_z @ weights[k].T
    if weight_decay:
        for k in range(len(weights)):
            g_weights[k] = g_weights[k] + weight_decay * weights[k]
    return loss, g_weights, g_biases


def _masked_rmse(pred, Y, mask):
    resid = np.where(mask, pred - Y, 0.0)
    return float(np.sqrt((resid**2).sum() / mask.sum()))


def fit_mlp(
    X,
    Y,
    hidden_sizes,
    dropout: float = 0.0,
    weight_decay: float = 0.0,
    learning_rate: float = 0.1,
    seed: int = 0,
    X_val=None,
    Y_val=None,
    max_epochs: int = MAX_EPOCHS,
    patience: int = PATIENCE,
    batch_size: int = BATCH_SIZE,
) -> MlpModel:
    """Minibatch SGD on the masked loss, targets standardized per task.

    Dropout is the drop probability on hidden activations, applied
    inverted so inference needs no rescaling. Weight decay touches weight
    matrices only. A validation pair switches on early stopping: stop
    after `patience` epochs without RMSE improvement and restore the best
    weights; otherwise run to the epoch cap.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    hidden_sizes = [int(h) for h in hidden_sizes]
    if not hidden_sizes:
        raise ValueError("at least one hidden layer is required")
    if not (0.0 <= dropout < 1.0):
        raise ValueError("dropout must be in [0, 1)")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("mlp: non-finite values in X")
    n, d = X.shape
    T = Y.shape[1]
    spec = RegressorSpec(
        "MLP",
        {
            "hidden_sizes": list(hidden_sizes),
            "dropout": float(dropout),
            "weight_decay": float(weight_decay),
            "learning_rate": float(learning_rate),
        },
        seed,
    )
    mask = ~np.isnan(Y)
    counts = np.maximum(mask.sum(axis=0), 1)
    mu = np.where(mask, Y, 0.0).sum(axis=0) / counts
    var = np.where(mask, (Y - mu) ** 2, 0.0).sum(axis=0) / counts
    sigma = np.where(var > 0, np.sqrt(var), 1.0)
    Ystd = np.where(mask, (Y - mu) / sigma, 0.0)

    rng = np.random.default_rng(seed)
    weights, biases = _init_params([d] + hidden_sizes + [T], rng)

    use_val = X_val is not None and Y_val is not None
    if use_val:
        X_val = np.asarray(X_val, dtype=float)
        Y_val = np.asarray(Y_val, dtype=float)
        if Y_val.ndim == 1:
            Y_val = Y_val[:, None]
        val_mask = ~np.isnan(Y_val)
    best_rmse = np.inf
    best_params = None
    wait = 0

    keep = 1.0 - dropout
    for epoch in range(max_epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = perm[start : start + batch_size]
            mb = mask[rows]
            if not mb.any():
                continue
            if dropout > 0.0:
                drop_masks = [
                    (rng.random((rows.size, h)) >= dropout) / keep for h in hidden_sizes
                ]
            else:
                drop_masks = None
            loss, gW, gb = loss_and_grad(
                weights, biases, X[rows], Ystd[rows], mb, weight_decay, drop_masks
            )
            if not np.isfinite(loss):
                raise NonFiniteError(
                    f"mlp: loss became non-finite at epoch {epoch} (lr={learning_rate})"
                )
            for k in range(len(weights)):
                weights[k] -= learning_rate * gW[k]
                biases[k] -= learning_rate * gb[k]
        if use_val:
            model = MlpModel(spec, weights, biases, mu, sigma, d)
            rmse = _masked_rmse(model.predict(X_val), np.where(val_mask, Y_val, 0.0), val_mask)
            if rmse < best_rmse:
                best_rmse = rmse
                best_params = ([W.copy() for W in weights], [b.copy() for b in biases])
                wait = 0
            else:
                wait += 1
                if wait >= patience:
                    break
    if use_val and best_params is not None:
        weights, biases = best_params
    return MlpModel(spec, weights, biases, mu, sigma, d)
