"""Core value types: sampled curves, HB grades and cohorts on a common grid."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError

DEFAULT_GRID_SIZE = 101

# Clinician grades 4 and 5 are rare; they are merged into their neighbours.
HB_MERGE = {1: 1, 2: 2, 3: 3, 4: 3, 5: 6, 6: 6}
GRADE_LADDER = (1, 2, 3, 6)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Discrete observations ``values[j]`` of one indicator at ``times[j]``."""

    times: np.ndarray
    values: np.ndarray
    id: str = ""

    def __post_init__(self):
        times = _frozen(self.times)
        values = _frozen(self.values)
        if times.ndim != 1 or values.ndim != 1:
            raise DomainError("times and values must be one-dimensional")
        if times.shape != values.shape:
            raise DomainError(
                f"curve {self.id!r}: {times.size} times but {values.size} values"
            )
        if times.size < 2:
            raise InsufficientDataError(f"curve {self.id!r} needs at least 2 samples")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DomainError(f"curve {self.id!r} has non-finite entries")
        if np.any(np.diff(times) <= 0):
            raise DomainError(f"curve {self.id!r}: times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def __len__(self):
        return self.times.size

    def rescaled(self, lo: float = 0.0, hi: float = 1.0) -> "SampledCurve":
        """Affinely map the time axis onto ``[lo, hi]``."""
        t0, t1 = self.domain
        times = lo + (self.times - t0) * ((hi - lo) / (t1 - t0))
        # pin endpoints exactly so grids on [lo, hi] stay inside the domain
        times[0], times[-1] = lo, hi
        return SampledCurve(times, self.values, self.id)


@dataclass(frozen=True)
class HBGrade:
    raw: int

    def __post_init__(self):
        if self.raw not in HB_MERGE:
            raise DomainError(f"HB grade must be in 1..6, got {self.raw!r}")

    @property
    def adjusted(self) -> int:
        return HB_MERGE[self.raw]


def uniform_grid(size: int = DEFAULT_GRID_SIZE, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    if size < 2:
        raise DomainError(f"grid needs at least 2 points, got {size}")
    return np.linspace(lo, hi, size)


def resample(curve: SampledCurve, grid) -> SampledCurve:
    """Piecewise-linear interpolation of ``curve`` at the points of ``grid``."""
    grid = np.asarray(grid, dtype=float)
    lo, hi = curve.domain
    outside = (grid < lo) | (grid > hi)
    if np.any(outside):
        bad = grid[np.argmax(outside)]
        raise DomainError(
            f"grid point {bad!r} lies outside the domain [{lo!r}, {hi!r}] of curve {curve.id!r}"
        )
    return SampledCurve(grid, np.interp(grid, curve.times, curve.values), curve.id)


@dataclass(frozen=True, eq=False)
class Cohort:
    """A batch of curves with optional clinician labels and a shared grid.

    Use :meth:`build` to construct one from raw curves; it rescales every
    time axis to ``[0, 1]`` so curves of different durations become
    comparable.
    """

    curves: tuple
    labels: Optional[tuple] = None
    grid: np.ndarray = field(default_factory=uniform_grid)

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        grid = _frozen(self.grid)
        if grid.size < 2:
            raise DomainError("cohort grid needs at least 2 points")
        object.__setattr__(self, "grid", grid)
        if self.labels is not None:
            labels = tuple(l if isinstance(l, HBGrade) else HBGrade(int(l)) for l in self.labels)
            if len(labels) != len(self.curves):
                raise DomainError(
                    f"{len(labels)} labels for {len(self.curves)} curves"
                )
            object.__setattr__(self, "labels", labels)
        for c in self.curves:
            lo, hi = c.domain
            if grid[0] < lo or grid[-1] > hi:
                raise DomainError(f"grid does not cover the domain of curve {c.id!r}")

    @classmethod
    def build(
        cls,
        curves: Sequence[SampledCurve],
        labels: Optional[Sequence] = None,
        grid_size: int = DEFAULT_GRID_SIZE,
    ) -> "Cohort":
        if len(curves) < 1:
            raise InsufficientDataError("a cohort needs at least one curve")
        return cls(
            tuple(c.rescaled() for c in curves),
            None if labels is None else tuple(labels),
            uniform_grid(grid_size),
        )

    def __len__(self):
        return len(self.curves)

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.curves]

    def adjusted_labels(self) -> np.ndarray:
        if self.labels is None:
            raise DomainError("cohort has no labels")
        return np.array([l.adjusted for l in self.labels])

    def on_grid(self) -> np.ndarray:
        """``n x G`` matrix of every curve resampled on the cohort grid."""
        return np.vstack([resample(c, self.grid).values for c in self.curves])

    def gridded(self) -> "Cohort":
        return Cohort(tuple(resample(c, self.grid) for c in self.curves), self.labels, self.grid)
