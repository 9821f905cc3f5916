"""Centroid-based partitioning: Lloyd k-means and fuzzy c-means."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..rng import make_rng
from .types import FuzzyClustering, make_clustering


def _as_items(items) -> np.ndarray:
    x = np.asarray(items, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise DomainError("items must form a non-empty n x d array")
    return x


def _check_k(k: int, n: int):
    if not 1 <= k <= n:
        raise DomainError(f"k = {k} must lie in 1..{n}")


def sq_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``k`` seeds chosen by squared-distance weighted sampling."""
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # only duplicates of chosen seeds remain
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(free[rng.integers(free.size)])
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1))
    return np.array(chosen)


def _lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int):
    n, k = x.shape[0], centers.shape[0]
    labels = None
    trace = []
    for it in range(1, max_iter + 1):
        d2 = sq_distances(x, centers)
        new = np.argmin(d2, axis=1)
        counts = np.bincount(new, minlength=k)
        for c in np.nonzero(counts == 0)[0]:
            # move the worst-fitted point out of a cluster that can spare it
            cost = d2[np.arange(n), new].copy()
            cost[counts[new] <= 1] = -1.0
            far = int(np.argmax(cost))
            counts[new[far]] -= 1
            new[far] = c
            counts[c] = 1
        centers = np.vstack([x[new == c].mean(axis=0) for c in range(k)])
        trace.append(float(np.mean(np.sum((x - centers[new]) ** 2, axis=1))))
        if labels is not None and np.array_equal(new, labels):
            labels = new
            break
        labels = new
    return labels, centers, trace, it


def kmeans(items, k: int, seed: int = 0, max_iter: int = 300, restarts: int = 10):
    """Lloyd's algorithm with k-means++ seeding, best of ``restarts`` runs.

    The objective is the mean squared distance of items to their cluster
    centre.  Its per-iteration values are kept in ``objective_trace``.
    """
    x = _as_items(items)
    _check_k(k, x.shape[0])
    if max_iter < 1 or restarts < 1:
        raise DomainError("max_iter and restarts must be positive")
    rng = make_rng(seed)
    best = None
    for _ in range(restarts):
        init = x[kmeanspp_init(x, k, rng)]
        labels, centers, trace, it = _lloyd(x, init, max_iter)
        if best is None or trace[-1] < best[2][-1]:
            best = (labels, centers, trace, it)
    labels, centers, trace, it = best
    return make_clustering(
        labels,
        k,
        centers=centers,
        objective=trace[-1],
        seed=seed,
        iterations=it,
        objective_trace=trace,
        method="kmeans",
        params={"max_iter": max_iter, "restarts": restarts},
    )


def _memberships(d2: np.ndarray, m: float) -> np.ndarray:
    n, k = d2.shape
    u = np.zeros((n, k))
    zero = d2 <= 0.0
    hit = zero.any(axis=1)
    if np.any(hit):
        # full membership to the coinciding centre, shared if centres coincide too
        u[hit] = zero[hit] / zero[hit].sum(axis=1, keepdims=True)
    rest = ~hit
    if np.any(rest):
        d = d2[rest]
        # (d_min / d_c)^(1/(m-1)) in squared distances, scaled to avoid overflow
        ratio = (d.min(axis=1, keepdims=True) / d) ** (1.0 / (m - 1.0))
        u[rest] = ratio / ratio.sum(axis=1, keepdims=True)
    return u


def _fcm_objective(x, u, centers, m):
    return float(np.sum(u**m * sq_distances(x, centers)))


def _fcm_centers(x, u, m, previous):
    w = u**m
    mass = w.sum(axis=0)
    out = previous.copy()
    live = mass > 0
    # a centre nobody belongs to (underflow) stays where it was
    out[live] = (w[:, live].T @ x) / mass[live, None]
    return out


def fuzzy_cmeans(
    items,
    k: int,
    m: float = 2.0,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
    n_init: int = 1,
) -> FuzzyClustering:
    """Fuzzy c-means (Bezdek) with k-means++ starting centres.

    Alternates centre and membership updates until the largest membership
    change drops below ``tol``.  ``objective_trace`` records
    ``sum_i sum_c u_ic^m d_ic^2`` after every membership update.  With
    ``n_init > 1`` the run with the smallest final objective is returned.
    """
    x = _as_items(items)
    _check_k(k, x.shape[0])
    if not m > 1:
        raise DomainError(f"fuzzifier m must exceed 1, got {m!r}")
    if max_iter < 1 or n_init < 1:
        raise DomainError("max_iter and n_init must be positive")
    rng = make_rng(seed)
    best = None
    for _ in range(n_init):
        centers = x[kmeanspp_init(x, k, rng)]
        u = _memberships(sq_distances(x, centers), m)
        trace = [_fcm_objective(x, u, centers, m)]
        it = 0
        for it in range(1, max_iter + 1):
            centers = _fcm_centers(x, u, m, centers)
            new = _memberships(sq_distances(x, centers), m)
            trace.append(_fcm_objective(x, new, centers, m))
            delta = np.max(np.abs(new - u))
            u = new
            if delta < tol:
                break
        if best is None or trace[-1] < best[3][-1]:
            best = (u, centers, it, trace)
    u, centers, it, trace = best
    return FuzzyClustering(u, centers, m, trace[-1], tuple(trace), it, seed)
