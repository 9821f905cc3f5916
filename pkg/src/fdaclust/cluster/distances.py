"""Pairwise distance matrices for grid curves, score vectors and functional data."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..basis import FunctionalDatum, coefficient_matrix
from ..errors import DomainError
from .dtw import dtw_cost_batch
from .types import DistanceMatrix

THREADS_ENV = "FDACLUST_THREADS"
_PAIR_CHUNK = 2048


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    cap = os.cpu_count() or 1
    if raw:
        try:
            return max(1, min(int(raw), cap))
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return cap


def _euclidean(x: np.ndarray) -> np.ndarray:
    return squareform(pdist(x, "euclidean"))


def dtw_matrix(curves: np.ndarray, window: int | None = None) -> np.ndarray:
    """Pairwise DTW distances between rows of ``curves``.

    Pairs are processed in chunks; chunks may run on a thread pool whose
    size is capped by ``FDACLUST_THREADS``.  Each chunk writes its own
    slots, so the result does not depend on scheduling.
    """
    curves = np.asarray(curves, dtype=float)
    n = curves.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    out = np.zeros((n, n))
    if iu.size == 0:
        return out
    chunks = [slice(s, s + _PAIR_CHUNK) for s in range(0, iu.size, _PAIR_CHUNK)]
    flat = np.empty(iu.size)

    def run(sl):
        flat[sl] = np.sqrt(dtw_cost_batch(curves[iu[sl]], curves[ju[sl]], window))

    workers = min(worker_count(), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))
    else:
        for sl in chunks:
            run(sl)
    out[iu, ju] = flat
    out[ju, iu] = flat
    return out


def distance_matrix(items, metric: str = "euclidean", window: int | None = None, ids=()) -> DistanceMatrix:
    """Pairwise distances.

    ``items`` is an ``n x d`` array (grid curves or score rows) or, for the
    ``l2-functional`` metric, a sequence of :class:`FunctionalDatum` sharing
    one basis.
    """
    if window is not None and metric != "dtw":
        raise DomainError("a DTW window only applies to the dtw metric")
    if metric == "l2-functional":
        items = list(items)
        if not all(isinstance(d, FunctionalDatum) for d in items):
            raise DomainError("l2-functional distances need FunctionalDatum items")
        coeffs, basis = coefficient_matrix(items)
        w, u = np.linalg.eigh(basis.gram)
        root = (u * np.sqrt(w)) @ u.T
        values = _euclidean(coeffs @ root)
        ids = ids or tuple(d.id for d in items)
    else:
        if any(isinstance(d, FunctionalDatum) for d in items):
            raise DomainError(f"metric {metric!r} needs array items, not functional data")
        x = np.asarray(items, dtype=float)
        if x.ndim != 2:
            raise DomainError("items must form an n x d array")
        if metric == "dtw":
            values = dtw_matrix(x, window)
        elif metric in ("euclidean", "euclidean-grid"):
            values = _euclidean(x)
        else:
            raise DomainError(f"unknown metric {metric!r}")
    return DistanceMatrix(values, metric, tuple(ids))
