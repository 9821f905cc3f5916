"""Dynamic time warping with the symmetric1 step pattern.

The local cost is the squared pointwise difference and the reported
distance is the square root of the minimal cumulative cost.  Steps are
diagonal, vertical and horizontal with unit weight; an optional
Sakoe-Chiba band restricts alignments to ``|i - j| <= window``.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError


def _validate(n: int, m: int, window):
    if n == 0 or m == 0:
        raise DomainError("DTW needs non-empty sequences")
    if window is not None:
        if window < 0:
            raise DomainError("window must be nonnegative")
        if window < abs(n - m):
            raise DomainError(f"window {window} cannot connect lengths {n} and {m}")


def dtw_cost_batch(a: np.ndarray, b: np.ndarray, window: int | None = None) -> np.ndarray:
    """Cumulative DTW cost for ``P`` pairs at once.

    ``a`` has shape ``(P, n)`` and ``b`` shape ``(P, m)``; the dynamic
    programme runs row by row with every pair vectorized along axis 0.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    p, n = a.shape
    m = b.shape[1]
    _validate(n, m, window)
    inf = np.inf
    prev = np.full((p, m + 1), inf)
    prev[:, 0] = 0.0
    cur = np.empty_like(prev)
    cols = np.arange(1, m + 1)
    for i in range(1, n + 1):
        cost = (a[:, i - 1, None] - b) ** 2
        if window is not None:
            cost[:, np.abs(cols - i) > window] = inf
        # diagonal and vertical predecessors are known for the whole row
        best_prev = np.minimum(prev[:, :-1], prev[:, 1:]) + cost
        cur[:, 0] = inf
        left = cur[:, 0]
        for j in range(m):
            left = np.minimum(best_prev[:, j], left + cost[:, j])
            cur[:, j + 1] = left
        prev, cur = cur, prev
    return prev[:, m]


def dtw_distance(a, b, window: int | None = None) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    _validate(a.size, b.size, window)
    return float(np.sqrt(dtw_cost_batch(a[None, :], b[None, :], window)[0]))
