"""One-vs-rest linear SVM trained by deterministic subgradient descent.

Full-batch hinge-loss minimization with the classic 1/(reg * t) step
schedule and norm-ball projection; no sampling, so training is bit-for-bit
reproducible. The bias enters as an augmented constant feature and is
regularized with the rest.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class LinearModel:
    """Per-class weight rows over augmented features [x, 1]."""

    classes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        classes = np.asarray(self.classes)
        weights = np.asarray(self.weights, dtype=np.float64)
        if classes.ndim != 1 or weights.ndim != 2:
            raise InputError("classes must be 1-D and weights 2-D")
        if weights.shape[0] != classes.shape[0]:
            raise InputError("one weight row per class required")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "weights", weights)

    def decision_function(self, G):
        return _augment(G, self.weights.shape[1] - 1) @ self.weights.T

    def predict(self, G):
        scores = self.decision_function(G)
        # argmax returns the first maximum; classes are sorted, so ties
        # break toward the lowest class id.
        return self.classes[np.argmax(scores, axis=1)]


def _augment(G, expected_cols=None):
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise InputError(f"feature matrix must be 2-D, got shape {G.shape}")
    if not np.all(np.isfinite(G)):
        raise InputError("feature matrix contains non-finite values")
    if expected_cols is not None and G.shape[1] != expected_cols:
        raise InputError(f"expected {expected_cols} features, got {G.shape[1]}")
    return np.hstack([G, np.ones((G.shape[0], 1))])


def train_linear(G, labels, c_reg=1.0, n_iters=1000):
    """Train one-vs-rest L2-regularized hinge-loss classifiers.

    Minimizes (reg/2)||w||^2 + mean hinge with reg = 1/(c_reg * n) per
    class, by full-batch subgradient steps of length 1/(reg * (t+1)) with
    projection onto the ball of radius 1/sqrt(reg). The iteration budget is
    fixed, so degenerate inputs (duplicate points with clashing labels)
    still terminate.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise InputError("labels must be 1-D")
    A = _augment(G)
    n, p = A.shape
    if labels.shape[0] != n:
        raise InputError("one label per feature row required")
    if not c_reg > 0:
        raise InputError(f"c_reg must be positive, got {c_reg}")
    if n_iters < 1:
        raise InputError(f"n_iters must be >= 1, got {n_iters}")
    classes = np.unique(labels)
    if classes.size < 2:
        raise InputError("training needs at least two classes")
    reg = 1.0 / (float(c_reg) * n)
    radius = 1.0 / np.sqrt(reg)
    weights = np.zeros((classes.size, p))
    for ci, cls in enumerate(classes):
        y = np.where(labels == cls, 1.0, -1.0)
        w = np.zeros(p)
        for t in range(int(n_iters)):
            margins = y * (A @ w)
            active = margins < 1.0
            grad = reg * w - (y[active] @ A[active]) / n
            w = w - grad / (reg * (t + 1))
            norm = float(np.linalg.norm(w))
            if norm > radius:
                w *= radius / norm
        weights[ci] = w
    return LinearModel(classes=classes, weights=weights)
