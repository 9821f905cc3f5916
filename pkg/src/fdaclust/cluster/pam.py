"""Partitioning Around Medoids (BUILD + SWAP) on a precomputed distance matrix."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..errors import DomainError
from .types import DistanceMatrix, make_clustering

_EPS = 1e-12


def _cost(d: np.ndarray, medoids) -> float:
    return float(d[:, medoids].min(axis=1).sum())


def _build(d: np.ndarray, k: int) -> list[int]:
    n = d.shape[0]
    medoids = [int(np.argmin(d.sum(axis=1)))]
    nearest = d[:, medoids[0]].copy()
    for _ in range(1, k):
        gain = np.clip(nearest[:, None] - d, 0.0, None).sum(axis=0)
        gain[medoids] = -np.inf
        best = int(np.argmax(gain))
        medoids.append(best)
        nearest = np.minimum(nearest, d[:, best])
    return medoids


def pam(dist: DistanceMatrix, k: int, seed: int | None = None, max_iter: int = 100):
    """k-medoids by greedy BUILD then best-improvement SWAP.

    Both phases are deterministic (ties to the lowest index); ``seed`` is
    only recorded in the result.  ``objective_trace`` holds the total
    distance to the nearest medoid after BUILD and after every accepted
    swap.
    """
    d = dist.values
    n = d.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"k = {k} must lie in 1..{n}")
    medoids = _build(d, k)
    cost = _cost(d, medoids)
    trace = [cost]
    it = 0
    for it in range(1, max_iter + 1):
        best = (0.0, None, None)
        non = np.setdiff1d(np.arange(n), medoids)
        if non.size == 0:
            break
        for pos in range(k):
            rest = medoids[:pos] + medoids[pos + 1 :]
            base = d[:, rest].min(axis=1) if rest else np.full(n, np.inf)
            # total cost for every candidate replacing medoid ``pos``
            totals = np.minimum(base[:, None], d[:, non]).sum(axis=0)
            c = int(np.argmin(totals))
            delta = totals[c] - cost
            if delta < best[0] - _EPS * max(cost, 1.0):
                best = (delta, pos, int(non[c]))
        if best[1] is None:
            break
        medoids[best[1]] = best[2]
        cost = _cost(d, medoids)
        trace.append(cost)
    medoids = sorted(medoids)
    sub = d[:, medoids]
    raw = np.argmin(sub, axis=1)
    # every medoid belongs to its own cluster even when distances tie
    raw[medoids] = np.arange(k)
    clustering = make_clustering(
        raw,
        k,
        objective=_cost(d, medoids),
        seed=seed,
        iterations=it,
        objective_trace=trace,
        method="pam",
        params={"max_iter": max_iter},
    )
    # reorder medoids to match the canonical cluster numbering
    ordered = [None] * k
    for m in medoids:
        ordered[clustering.labels[m] - 1] = m
    return replace(clustering, medoids=tuple(ordered))
