"""Single-hidden-layer perceptron: ReLU hidden units, sigmoid output, log-loss
with an L2 penalty, trained full-batch with Adam."""

from __future__ import annotations

import numpy as np

from .base import Classifier

PARAM_NAMES = ("W1", "b1", "W2", "b2")


def init_params(d, hidden, rng):
    """Glorot-uniform weights and biases (bound sqrt(6/(fan_in+fan_out)),
    sqrt(2/(...)) for the sigmoid output layer)."""
    b1 = np.sqrt(6.0 / (d + hidden))
    b2 = np.sqrt(2.0 / (hidden + 1))
    return {
        "W1": rng.uniform(-b1, b1, size=(d, hidden)),
        "b1": rng.uniform(-b1, b1, size=hidden),
        "W2": rng.uniform(-b2, b2, size=(hidden, 1)),
        "b2": rng.uniform(-b2, b2, size=1),
    }


def forward(params, X):
    z1 = X @ params["W1"] + params["b1"]
    a1 = np.maximum(z1, 0.0)
    logits = (a1 @ params["W2"] + params["b2"]).ravel()
    return z1, a1, logits


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_grad(params, X, t, alpha):
    """Mean log-loss + alpha / (2n) * (|W1|^2 + |W2|^2) and its gradient.

    ``t`` holds 0/1 targets. Biases are not penalized.
    """
    n = X.shape[0]
    z1, a1, logits = forward(params, X)
    # log(1 + e^z) - t z, computed without overflow
    data_loss = np.mean(np.logaddexp(0.0, logits) - t * logits)
    W1, W2 = params["W1"], params["W2"]
    penalty = 0.5 * alpha / n * (np.sum(W1 * W1) + np.sum(W2 * W2))
    dz = ((sigmoid(logits) - t) / n)[:, None]
    dh = (dz @ W2.T) * (z1 > 0)
    grads = {
        "W1": X.T @ dh + alpha / n * W1,
        "b1": dh.sum(axis=0),
        "W2": a1.T @ dz + alpha / n * W2,
        "b2": dz.sum(axis=0),
    }
    return float(data_loss + penalty), grads


class MLPClassifier(Classifier):
    """Score is the sigmoid output, i.e. an estimate of P(y = +1)."""

    kind = "MLP"
    threshold = 0.5

    def __init__(self, hidden_units=100, alpha=1.0, max_epochs=1000, learning_rate=1e-3,
                 beta1=0.9, beta2=0.999, epsilon=1e-8, seed=0):
        super().__init__()
        if hidden_units < 1 or max_epochs < 1:
            raise ValueError("hidden_units and max_epochs must be >= 1")
        self.hidden_units = hidden_units
        self.alpha = alpha
        self.max_epochs = max_epochs
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.seed = seed

    def get_params(self):
        return {"hidden_units": self.hidden_units, "alpha": self.alpha,
                "max_epochs": self.max_epochs, "learning_rate": self.learning_rate,
                "beta1": self.beta1, "beta2": self.beta2, "epsilon": self.epsilon,
                "seed": self.seed}

    def init(self, d):
        rng = np.random.default_rng(self.seed)
        self.params_ = init_params(d, self.hidden_units, rng)
        self.m_ = {k: np.zeros_like(v) for k, v in self.params_.items()}
        self.v_ = {k: np.zeros_like(v) for k, v in self.params_.items()}
        self.t_ = 0
        self.loss_curve_ = []
        self.d_ = d
        return self

    def _fit(self, X, y):
        self.init(X.shape[1])
        t = (y == 1).astype(np.float64)
        for _ in range(self.max_epochs):
            mlp_backprop_step(self, X, t)

    def _score(self, X):
        return sigmoid(forward(self.params_, X)[2])


def mlp_backprop_step(model: MLPClassifier, X, t) -> MLPClassifier:
    """One full-batch Adam update of ``model`` in place; returns the model.

    ``t`` holds 0/1 targets. The loss before the update is appended to
    ``model.loss_curve_``.
    """
    loss, grads = loss_and_grad(model.params_, X, t, model.alpha)
    model.loss_curve_.append(loss)
    model.t_ += 1
    b1, b2 = model.beta1, model.beta2
    lr = model.learning_rate * np.sqrt(1.0 - b2 ** model.t_) / (1.0 - b1 ** model.t_)
    for k in PARAM_NAMES:
        g = grads[k]
        model.m_[k] = b1 * model.m_[k] + (1.0 - b1) * g
        model.v_[k] = b2 * model.v_[k] + (1.0 - b2) * g * g
        model.params_[k] = model.params_[k] - lr * model.m_[k] / (np.sqrt(model.v_[k]) + model.epsilon)
    return model
