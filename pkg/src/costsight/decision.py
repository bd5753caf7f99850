"""Bayes and cost-based decision rules over probability vectors and maps.

The cost-based rule picks the class with the lowest expected confusion cost
``E[k] = sum_y c(k, y) * p(y)``; with the uniform ("robot") cost matrix it
degenerates to plain argmax. Ties break to the lowest class index, and all
accumulation happens in float64 so costs on the ``10**6`` scale cannot swamp
small probabilities stored in float32.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .costmatrix import CostMatrix, robot_matrix
from .errors import ShapeMismatch
from .validation import check_probabilities


def _expected_cost_array(probs, cost):
    """Expected costs along the trailing axis; probs validated float64."""
    return probs @ cost.entries.T


def expected_costs(p, c):
    """Expected confusion cost of predicting each class.

    Parameters
    ----------
    p : array-like, shape (n_classes,)
        Class probabilities (a point on the simplex).
    c : CostMatrix

    Returns
    -------
    ndarray, shape (n_classes,)
        ``costs[k] = sum_y c(k, y) * p(y)`` in float64.
    """
    probs = check_probabilities(p, c.n_classes)
    if probs.ndim != 1:
        raise ShapeMismatch("expected a single probability vector")
    return _expected_cost_array(probs, c)


def decide(p, c):
    """Class with the lowest expected cost (lowest index on ties)."""
    return int(np.argmin(expected_costs(p, c)))


def bayes_decide(p):
    """Class with the highest probability (lowest index on ties)."""
    probs = check_probabilities(p)
    if probs.ndim != 1:
        raise ShapeMismatch("expected a single probability vector")
    return int(np.argmax(probs))


def decide_map(pm, c, ignore_mask=None):
    """Pixel-wise cost-based decision over an (H, W, N) probability map.

    Returns an (H, W) uint8 label map; pixels flagged in ``ignore_mask``
    come out as 255.
    """
    probs = check_probabilities(pm, c.n_classes)
    if probs.ndim != 3:
        raise ShapeMismatch(
            f"expected an (H, W, {c.n_classes}) map, got shape {probs.shape}"
        )
    costs = _expected_cost_array(probs, c)
    labels = np.argmin(costs, axis=-1).astype(np.uint8)
    if ignore_mask is not None:
        mask = np.asarray(ignore_mask, dtype=bool)
        if mask.shape != labels.shape:
            raise ShapeMismatch(
                f"ignore mask shape {mask.shape} differs from map {labels.shape}"
            )
        labels[mask] = 255
    return labels


def bayes_decide_map(pm, ignore_mask=None):
    """Pixel-wise argmax over an (H, W, N) probability map."""
    n = np.asarray(pm).shape[-1]
    return decide_map(pm, robot_matrix(n), ignore_mask)


class CostSensitiveDecider(BaseEstimator):
    """Estimator form of the cost-based decision rule.

    Consumes class probabilities as features (one column per class) and
    predicts the class with minimal expected confusion cost, so a cost
    valuation can slot into scikit-learn pipelines and grid searches.

    Parameters
    ----------
    cost_matrix : CostMatrix, array-like or None
        Square cost matrix (zero diagonal). None selects uniform costs at
        fit time, reproducing plain argmax.
    """

    def __init__(self, cost_matrix=None):
        self.cost_matrix = cost_matrix

    def fit(self, X=None, y=None):
        """Resolve and validate the cost matrix; data is not used."""
        c = self.cost_matrix
        if c is None:
            if X is None:
                raise ValueError(
                    "cost_matrix=None needs X at fit time to infer the "
                    "class count"
                )
            c = robot_matrix(int(np.asarray(X).shape[-1]))
        elif not isinstance(c, CostMatrix):
            c = CostMatrix(np.asarray(c, dtype=np.float64))
        self.cost_matrix_ = c
        self.n_classes_ = c.n_classes
        return self

    def _checked(self, X):
        if not hasattr(self, "cost_matrix_"):
            self.fit(X)
        probs = check_probabilities(X, self.n_classes_)
        if probs.ndim == 1:
            probs = probs[np.newaxis, :]
        return probs

    def expected_costs(self, X):
        """Expected cost per candidate class, shape like X."""
        return _expected_cost_array(self._checked(X), self.cost_matrix_)

    def predict(self, X):
        """Cost-minimizing class per row (or per pixel for (H, W, N) input)."""
        X = np.asarray(X)
        if X.ndim == 3:
            return decide_map(X, self._resolve(X))
        return np.argmin(self.expected_costs(X), axis=-1)

    def _resolve(self, X):
        if not hasattr(self, "cost_matrix_"):
            self.fit(X)
        return self.cost_matrix_
