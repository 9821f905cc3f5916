"""Agglomerative clustering through Lance-Williams distance updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .types import DistanceMatrix, make_clustering

LINKAGES = ("single", "complete", "average", "ward")


@dataclass(frozen=True)
class Merge:
    left: int  # surviving slot (lower index)
    right: int
    height: float
    size: int


def _update(linkage, d_il, d_jl, d_ij, n_i, n_j, n_l):
    if linkage == "single":
        return np.minimum(d_il, d_jl)
    if linkage == "complete":
        return np.maximum(d_il, d_jl)
    if linkage == "average":
        return (n_i * d_il + n_j * d_jl) / (n_i + n_j)
    total = n_i + n_j + n_l
    val = ((n_i + n_l) * d_il**2 + (n_j + n_l) * d_jl**2 - n_l * d_ij**2) / total
    return np.sqrt(np.clip(val, 0.0, None))


def agglomerate(dist: DistanceMatrix, linkage: str = "ward", stop_at: int = 1):
    """Merge clusters until ``stop_at`` remain.

    Returns the merge trace and the final membership (slot per item).  The
    closest pair is found in row-major order, so ties go to the lowest
    indices; the merged cluster keeps the lower slot.
    """
    if linkage not in LINKAGES:
        raise DomainError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    d = np.array(dist.values, dtype=float)
    n = d.shape[0]
    if not 1 <= stop_at <= n:
        raise DomainError(f"k = {stop_at} must lie in 1..{n}")
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n)
    slot = np.arange(n)
    masked = d.copy()
    masked[np.tril_indices(n)] = np.inf
    merges = []
    for _ in range(n - stop_at):
        flat = int(np.argmin(masked))
        i, j = divmod(flat, n)
        h = d[i, j]
        others = np.nonzero(active)[0]
        others = others[(others != i) & (others != j)]
        new = _update(linkage, d[i, others], d[j, others], h, sizes[i], sizes[j], sizes[others])
        d[i, others] = d[others, i] = new
        active[j] = False
        sizes[i] += sizes[j]
        slot[slot == j] = i
        # refresh the masked copy for rows/cols touched
        masked[j, :] = np.inf
        masked[:, j] = np.inf
        lo = others[others < i]
        hi = others[others > i]
        masked[lo, i] = d[lo, i]
        masked[i, hi] = d[i, hi]
        merges.append(Merge(i, j, float(h), int(sizes[i])))
    return merges, slot


def hierarchical(dist: DistanceMatrix, linkage: str = "ward", k: int = 4):
    """Cut the agglomeration tree at ``k`` clusters.

    The objective reported is the height of the last merge performed.
    """
    merges, slot = agglomerate(dist, linkage, k)
    _, raw = np.unique(slot, return_inverse=True)
    heights = [m.height for m in merges]
    return make_clustering(
        raw,
        k,
        objective=heights[-1] if heights else 0.0,
        iterations=len(merges),
        objective_trace=heights,
        method=f"hierarchical-{linkage}",
        params={"linkage": linkage},
    )
