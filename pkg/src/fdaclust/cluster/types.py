"""Result containers shared by the clustering algorithms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DegenerateError, DomainError

METRICS = ("euclidean-grid", "euclidean", "l2-functional", "dtw")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    values: np.ndarray
    metric: str = "euclidean"
    ids: tuple = ()

    def __post_init__(self):
        d = np.array(self.values, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DomainError("distance matrix must be square")
        if self.metric not in METRICS:
            raise DomainError(f"unknown metric {self.metric!r}")
        if np.any(np.abs(d - d.T) > 1e-12) or np.any(d < 0) or np.any(np.diag(d) != 0):
            raise DomainError("distance matrix must be symmetric, nonnegative, zero-diagonal")
        d.setflags(write=False)
        object.__setattr__(self, "values", d)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def canonical_order(labels: np.ndarray, k: int) -> np.ndarray:
    """Permutation mapping raw cluster ids to order of first appearance."""
    seen = []
    for lab in labels:
        if lab not in seen:
            seen.append(int(lab))
    seen += [c for c in range(k) if c not in seen]
    perm = np.empty(k, dtype=int)
    perm[seen] = np.arange(k)
    return perm


@dataclass(frozen=True, eq=False)
class Clustering:
    """Hard partition with 1-based ``labels``.

    ``centers`` holds one row per cluster when the method has centres;
    ``medoids`` holds 0-based item indices for medoid methods.
    """

    labels: np.ndarray
    k: int
    objective: float = 0.0
    centers: Optional[np.ndarray] = None
    medoids: Optional[tuple] = None
    seed: Optional[int] = None
    iterations: int = 0
    objective_trace: tuple = ()
    method: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1 or labels.size == 0:
            raise DomainError("labels must be a non-empty vector")
        if labels.min() < 1 or labels.max() > self.k:
            raise DomainError(f"labels must lie in 1..{self.k}")
        sizes = np.bincount(labels - 1, minlength=self.k)
        if np.any(sizes == 0):
            raise DegenerateError(f"empty cluster(s) {list(np.nonzero(sizes == 0)[0] + 1)}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "objective_trace", tuple(float(v) for v in self.objective_trace))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels - 1, minlength=self.k)

    def members(self, c: int) -> np.ndarray:
        return np.nonzero(self.labels == c)[0]


def make_clustering(raw_labels, k, *, centers=None, **kw) -> Clustering:
    """Build a :class:`Clustering` from 0-based labels, renumbering clusters
    by first appearance so equal partitions get equal labels."""
    raw_labels = np.asarray(raw_labels, dtype=int)
    perm = canonical_order(raw_labels, k)
    if centers is not None:
        centers = np.asarray(centers)[np.argsort(perm)]
    return Clustering(perm[raw_labels] + 1, k, centers=centers, **kw)


@dataclass(frozen=True, eq=False)
class FuzzyClustering:
    membership: np.ndarray  # (n, k)
    centers: np.ndarray
    m: float
    objective: float = 0.0
    objective_trace: tuple = ()
    iterations: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        u = np.asarray(self.membership, dtype=float)
        if np.any(u < 0) or np.any(u > 1) or np.any(np.abs(u.sum(axis=1) - 1) > 1e-9):
            raise DomainError("membership rows must lie in [0, 1] and sum to 1")
        object.__setattr__(self, "membership", u)

    @property
    def k(self) -> int:
        return self.membership.shape[1]

    @property
    def hard_labels(self) -> np.ndarray:
        return np.argmax(self.membership, axis=1) + 1


@dataclass(frozen=True, eq=False)
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray  # (k, d, d) full or (k, d) diagonal
    covariance: str
    loglik_trace: tuple
    bic: float
    regularized: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
            raise DomainError("mixture weights must be positive and sum to 1")

    @property
    def loglik(self) -> float:
        return self.loglik_trace[-1]

    @property
    def k(self) -> int:
        return self.weights.size
