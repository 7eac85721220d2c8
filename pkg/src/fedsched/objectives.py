"""Desk-scale client objectives with analytic gradients.

Three finite-sum workloads stand in for full CNN training: a strongly
convex quadratic, multinomial logistic regression, and a small two-layer
tanh network with hand-coded backprop for the non-convex case. All expose
the same interface: loss(x), full_gradient(x), batch_gradient(x, idx),
n_samples, dim.
"""

from __future__ import annotations

import numpy as np


class QuadraticObjective:
    """f(x) = (1/m) sum_i 0.5 * ||x - z_i||^2 over anchor points z_i."""

    def __init__(self, anchors: np.ndarray):
        self.anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
        self.n_samples, self.dim = self.anchors.shape

    def loss(self, x: np.ndarray) -> float:
        diffs = x[None, :] - self.anchors
        return float(0.5 * np.mean(np.sum(diffs**2, axis=1)))

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        return x - self.anchors.mean(axis=0)

    def batch_gradient(self, x: np.ndarray, idx: np.ndarray) -> np.ndarray:
        return x - self.anchors[idx].mean(axis=0)


class LogisticObjective:
    """Multinomial logistic regression with bias and optional L2 penalty.

    Parameters are a flat vector of shape (n_features + 1) * n_classes,
    laid out as the weight matrix rows followed by the bias row.
    """

    def __init__(self, features: np.ndarray, labels: np.ndarray, n_classes: int, l2: float = 0.0):
        self.features = np.atleast_2d(np.asarray(features, dtype=float))
        self.labels = np.asarray(labels, dtype=int)
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on sample count")
        self.n_classes = n_classes
        self.l2 = l2
        self.n_samples, self.n_features = self.features.shape
        self.dim = (self.n_features + 1) * n_classes

    def _unpack(self, x: np.ndarray):
        mat = x.reshape(self.n_features + 1, self.n_classes)
        return mat[:-1], mat[-1]

    def _probs(self, x: np.ndarray, feats: np.ndarray) -> np.ndarray:
        w, b = self._unpack(x)
        logits = feats @ w + b
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)

    def loss(self, x: np.ndarray) -> float:
        p = self._probs(x, self.features)
        nll = -np.mean(np.log(p[np.arange(self.n_samples), self.labels] + 1e-300))
        return float(nll + 0.5 * self.l2 * np.dot(x, x))

    def _grad(self, x: np.ndarray, feats: np.ndarray, labs: np.ndarray) -> np.ndarray:
        m = feats.shape[0]
        p = self._probs(x, feats)
        p[np.arange(m), labs] -= 1.0
        gw = feats.T @ p / m
        gb = p.mean(axis=0)
        return np.vstack([gw, gb]).ravel() + self.l2 * x

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        return self._grad(x, self.features, self.labels)

    def batch_gradient(self, x: np.ndarray, idx: np.ndarray) -> np.ndarray:
        return self._grad(x, self.features[idx], self.labels[idx])

    def predict(self, x: np.ndarray, feats: np.ndarray) -> np.ndarray:
        return self._probs(x, np.atleast_2d(feats)).argmax(axis=1)


class TwoLayerNet:
    """tanh hidden layer + softmax output, hand-coded backprop (non-convex).

    Flat parameter layout: W1 ((f+1) x h, bias folded in) then W2 ((h+1) x c).
    """

    def __init__(self, features: np.ndarray, labels: np.ndarray, n_classes: int, hidden: int = 8):
        self.features = np.atleast_2d(np.asarray(features, dtype=float))
        self.labels = np.asarray(labels, dtype=int)
        self.n_classes = n_classes
        self.hidden = hidden
        self.n_samples, self.n_features = self.features.shape
        self._n1 = (self.n_features + 1) * hidden
        self.dim = self._n1 + (hidden + 1) * n_classes

    def _unpack(self, x: np.ndarray):
        w1 = x[: self._n1].reshape(self.n_features + 1, self.hidden)
        w2 = x[self._n1 :].reshape(self.hidden + 1, self.n_classes)
        return w1, w2

    def _forward(self, x: np.ndarray, feats: np.ndarray):
        w1, w2 = self._unpack(x)
        a = np.tanh(feats @ w1[:-1] + w1[-1])
        logits = a @ w2[:-1] + w2[-1]
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return a, e / e.sum(axis=1, keepdims=True)

    def loss(self, x: np.ndarray) -> float:
        _, p = self._forward(x, self.features)
        return float(-np.mean(np.log(p[np.arange(self.n_samples), self.labels] + 1e-300)))

    def _grad(self, x: np.ndarray, feats: np.ndarray, labs: np.ndarray) -> np.ndarray:
        m = feats.shape[0]
        w1, w2 = self._unpack(x)
        a, p = self._forward(x, feats)
        d2 = p.copy()
        d2[np.arange(m), labs] -= 1.0
        d2 /= m
        gw2 = np.vstack([a.T @ d2, d2.sum(axis=0)])
        da = d2 @ w2[:-1].T
        d1 = da * (1.0 - a**2)
        gw1 = np.vstack([feats.T @ d1, d1.sum(axis=0)])
        return np.concatenate([gw1.ravel(), gw2.ravel()])

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        return self._grad(x, self.features, self.labels)

    def batch_gradient(self, x: np.ndarray, idx: np.ndarray) -> np.ndarray:
        return self._grad(x, self.features[idx], self.labels[idx])

    def predict(self, x: np.ndarray, feats: np.ndarray) -> np.ndarray:
        _, p = self._forward(x, np.atleast_2d(feats))
        return p.argmax(axis=1)

    def init_params(self, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
        return scale * rng.standard_normal(self.dim)
