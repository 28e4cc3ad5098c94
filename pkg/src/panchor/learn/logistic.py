"""Weighted logistic regression by plain gradient ascent.

Small, dependency-free and bit-deterministic: fixed iteration budget,
zero initialization, internal feature standardization. The fitted model is
P(true) = sigmoid(w . x + b); a negative weight makes the probability
decrease in that feature.
"""
from __future__ import annotations

import math

import numpy as np

PROB_CAP = (0.001, 0.999)


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def predict_prob(features, weights, bias) -> float:
    z = bias + float(np.dot(features, weights))
    p = 1.0 / (1.0 + math.exp(-max(-500.0, min(500.0, z))))
    return min(PROB_CAP[1], max(PROB_CAP[0], p))


def fit_logistic(points, l2: float = 1e-4, iterations: int = 2000,
                 learning_rate: float = 1.0) -> tuple[list[float], float]:
    """Fit (weights, bias) on (feature vector, label, weight) triples.

    Maximizes the weighted log-likelihood with an L2 penalty on the weights.
    With only one label present the model degenerates to a capped constant.
    """
    x = np.atleast_2d(np.array([p[0] for p in points], dtype=float))
    y = np.array([1.0 if p[1] else 0.0 for p in points], dtype=float)
    w = np.array([p[2] for p in points], dtype=float)
    if x.size == 0 or not np.isfinite(x).all():
        raise ValueError("features must be finite and nonempty")
    n_features = x.shape[1]
    pos = float(w[y == 1.0].sum())
    neg = float(w[y == 0.0].sum())
    if pos == 0.0 or neg == 0.0:
        cap = PROB_CAP[1] if neg == 0.0 else PROB_CAP[0]
        return [0.0] * n_features, math.log(cap / (1.0 - cap))

    mean = np.average(x, axis=0, weights=w)
    std = np.sqrt(np.average((x - mean) ** 2, axis=0, weights=w))
    std[std == 0.0] = 1.0
    xs = (x - mean) / std

    total = w.sum()
    beta = np.zeros(n_features)
    bias = 0.0
    for _ in range(iterations):
        p = sigmoid(xs @ beta + bias)
        residual = w * (y - p)
        grad_beta = xs.T @ residual / total - l2 * beta
        grad_bias = residual.sum() / total
        beta += learning_rate * grad_beta
        bias += learning_rate * grad_bias

    weights = beta / std
    intercept = bias - float(np.dot(beta, mean / std))
    return [float(v) for v in weights], float(intercept)


def log_likelihood(points, weights, bias) -> float:
    """Weighted log-likelihood of the points under a fitted model."""
    total = 0.0
    for features, label, weight in points:
        p = predict_prob(np.asarray(features, dtype=float), weights, bias)
        total += weight * math.log(p if label else 1.0 - p)
    return total
