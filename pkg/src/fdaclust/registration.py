"""Landmark registration of indicator curves.

Each curve gets a monotone time warp ``w`` so that its landmarks land on
common target times; the registered curve is ``x(w(t))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .curve_model import Cohort, SampledCurve, resample
from .errors import DegenerateError, DomainError

log = logging.getLogger(__name__)

WARP_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Landmarks:
    times: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError(f"landmarks must be strictly increasing: {times}")
        object.__setattr__(self, "times", times)

    def __len__(self):
        return len(self.times)


def detect_landmarks(curve: SampledCurve, count: int = 1) -> Landmarks:
    """Times of extremal deviation from the curve's initial value.

    With ``count == 1`` this is the single interior sample farthest from
    ``values[0]``.  Larger counts take the ``count`` largest interior local
    maxima of the deviation, returned in time order.
    """
    if count < 1:
        raise DomainError("landmark count must be positive")
    dev = np.abs(curve.values - curve.values[0])
    interior = dev[1:-1]
    if interior.size == 0 or np.max(interior) == 0.0:
        raise DegenerateError(f"curve {curve.id!r} is constant; no landmark")
    if count == 1:
        idx = [1 + int(np.argmax(interior))]
    else:
        peaks = [
            i
            for i in range(1, dev.size - 1)
            if dev[i] > 0 and dev[i] >= dev[i - 1] and dev[i] > dev[i + 1]
        ]
        if len(peaks) < count:
            raise DegenerateError(
                f"curve {curve.id!r} has {len(peaks)} deviation peaks, {count} requested"
            )
        # stable sort keeps the lower index on equal heights
        ranked = sorted(peaks, key=lambda i: -dev[i])[:count]
        idx = sorted(ranked)
    return Landmarks(tuple(curve.times[i] for i in idx))


@dataclass(frozen=True, eq=False)
class WarpFunction:
    """Monotone cubic map from registered time to original time.

    ``target`` holds the knot abscissae (registered clock) and ``source`` the
    matching original times, both including the domain endpoints.
    """

    target: np.ndarray
    source: np.ndarray

    def __post_init__(self):
        target = np.asarray(self.target, dtype=float)
        source = np.asarray(self.source, dtype=float)
        if np.any(np.diff(target) <= 0) or np.any(np.diff(source) <= 0):
            raise DomainError("warp knots must be strictly increasing")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "_interp", PchipInterpolator(target, source, extrapolate=False))

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.target[0]), float(self.target[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.domain
        if np.any((t < lo - WARP_TOLERANCE) | (t > hi + WARP_TOLERANCE)):
            raise DomainError(f"warp evaluated outside its domain [{lo}, {hi}]")
        return self._interp(np.clip(t, lo, hi))


def identity_warp(domain=(0.0, 1.0)) -> WarpFunction:
    return WarpFunction(np.array(domain), np.array(domain))


def build_warp(source: Landmarks, target: Landmarks, domain=(0.0, 1.0)) -> WarpFunction:
    """Warp with ``w(target[k]) = source[k]`` and fixed domain endpoints."""
    if len(source) != len(target):
        raise DomainError(f"{len(source)} source landmarks but {len(target)} target landmarks")
    lo, hi = float(domain[0]), float(domain[1])
    for name, marks in (("source", source), ("target", target)):
        if any(not lo < t < hi for t in marks.times):
            raise DomainError(f"{name} landmarks {marks.times} not strictly inside ({lo}, {hi})")
    return WarpFunction(
        np.array([lo, *target.times, hi]),
        np.array([lo, *source.times, hi]),
    )


def register(curve: SampledCurve, warp: WarpFunction, grid) -> SampledCurve:
    """Registered curve ``x(w(t))`` sampled on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    warped = warp(grid)
    lo, hi = curve.domain
    if np.any(warped < lo - WARP_TOLERANCE) or np.any(warped > hi + WARP_TOLERANCE):
        raise DomainError(f"warp leaves the domain of curve {curve.id!r}")
    values = np.interp(np.clip(warped, lo, hi), curve.times, curve.values)
    return SampledCurve(grid, values, curve.id)


def register_cohort(cohort: Cohort, count: int = 1) -> Cohort:
    """Align every curve's landmarks to the cohort-average landmark times.

    Curves without detectable landmarks (constant curves) keep the identity
    warp.
    """
    domain = (float(cohort.grid[0]), float(cohort.grid[-1]))
    found = {}
    for i, curve in enumerate(cohort.curves):
        try:
            found[i] = detect_landmarks(curve, count)
        except DegenerateError:
            log.debug("curve %r: no landmark, identity warp", curve.id)
    if not found:
        return cohort.gridded()
    target = Landmarks(tuple(np.mean([lm.times for lm in found.values()], axis=0)))
    registered = []
    for i, curve in enumerate(cohort.curves):
        if i in found:
            warp = build_warp(found[i], target, domain)
            registered.append(register(curve, warp, cohort.grid))
        else:
            registered.append(resample(curve, cohort.grid))
    return Cohort(tuple(registered), cohort.labels, cohort.grid)
