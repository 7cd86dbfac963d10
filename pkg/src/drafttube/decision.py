"""TOPSIS selection of the balanced optimum from a Pareto archive."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DecisionError", "DecisionMatrix", "TopsisResult", "topsis"]


class DecisionError(ValueError):
    """Raised for degenerate decision matrices."""


@dataclass(frozen=True)
class DecisionMatrix:
    """Alternatives x criteria values with weights and benefit/cost directions."""

    values: np.ndarray
    weights: np.ndarray
    benefit: np.ndarray  # True = benefit (maximize), False = cost (minimize)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.values, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.benefit, dtype=bool)
        object.__setattr__(self, "values", V)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "benefit", b)
        if len(V) < 1:
            raise DecisionError("need at least one alternative")
        if w.shape != (V.shape[1],) or b.shape != (V.shape[1],):
            raise DecisionError("weights/directions must match the criteria count")
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise DecisionError("weights must be non-negative and sum to 1")


@dataclass(frozen=True)
class TopsisResult:
    closeness: np.ndarray  # per alternative, in [0, 1]
    ranking: np.ndarray    # alternative indices, best first

    @property
    def best(self) -> int:
        return int(self.ranking[0])


def topsis(matrix: DecisionMatrix) -> TopsisResult:
    """Classical TOPSIS with vector (root-sum-square) normalization.

    Closeness C = d- / (d+ + d-) against the positive/negative ideals;
    ties are broken by alternative index (lower index ranks first).
    """
    V = matrix.values
    norms = np.sqrt(np.sum(V ** 2, axis=0))
    if np.any(norms == 0):
        raise DecisionError("all-zero criterion column cannot be normalized")
    R = V / norms * matrix.weights
    pos = np.where(matrix.benefit, R.max(axis=0), R.min(axis=0))
    neg = np.where(matrix.benefit, R.min(axis=0), R.max(axis=0))
    d_pos = np.sqrt(np.sum((R - pos) ** 2, axis=1))
    d_neg = np.sqrt(np.sum((R - neg) ** 2, axis=1))
    denom = d_pos + d_neg
    # A single alternative (or identical rows) coincides with both ideals.
    closeness = np.where(denom > 0, d_neg / np.where(denom > 0, denom, 1.0), 1.0)
    order = np.lexsort((np.arange(len(V)), -closeness))
    return TopsisResult(closeness, order)
