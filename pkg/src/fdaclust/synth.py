"""Deterministic synthetic cohorts with known ground truth.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import BSplineBasis, FunctionalDatum, equispaced_basis
from .curve_model import GRADE_LADDER, Cohort, HBGrade, SampledCurve, uniform_grid
from .errors import DomainError
from .rng import make_rng
from .ingest import (
    EXERCISES,
    GEOMETRY,
    N_POI,
    ExerciseRecording,
    RawMeasurement,
    serialize_measurement,
)


@dataclass(frozen=True)
class CohortSpec:
    """Gaussian-dip archetypes, one per grade.

    A grade-``g`` curve is ``1 - depth_g * exp(-(t - center)^2 / (2 width^2))``
    plus i.i.d. N(0, sigma^2) noise at each grid point.  ``depth_jitter`` adds
    a per-curve N(0, depth_jitter^2) perturbation of the depth (clipped to
    [0, 0.99]) so neighbouring grades can overlap.
    """

    depths: tuple = (0.05, 0.2, 0.4, 0.7)
    counts: tuple = (30, 30, 30, 30)
    grades: tuple = GRADE_LADDER
    center: float = 0.5
    width: float = 0.1
    sigma: float = 0.02
    depth_jitter: float = 0.0
    grid_size: int = 101
    seed: int = 0

    def __post_init__(self):
        for name in ("depths", "counts", "grades"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not len(self.depths) == len(self.counts) == len(self.grades):
            raise DomainError("depths, counts and grades must have equal length")
        if any(not 0 <= d < 1 for d in self.depths):
            raise DomainError("dip depths must lie in [0, 1)")
        if any(b <= a for a, b in zip(self.depths, self.depths[1:])):
            raise DomainError("dip depths must increase strictly with grade")
        if any(c < 1 for c in self.counts):
            raise DomainError("every grade needs at least one curve")
        if self.sigma < 0 or self.depth_jitter < 0:
            raise DomainError("sigma and depth_jitter must be >= 0")
        if self.width <= 0:
            raise DomainError("dip width must be positive")
        for g in self.grades:
            HBGrade(int(g))

    @classmethod
    def from_dict(cls, d: dict) -> "CohortSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown cohort spec keys: {sorted(unknown)}")
        return cls(**d)


def dip(t, depth: float, center: float, width: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return 1.0 - depth * np.exp(-((t - center) ** 2) / (2.0 * width**2))


def generate_cohort(spec: CohortSpec) -> Cohort:
    rng = make_rng(spec.seed)
    grid = uniform_grid(spec.grid_size)
    curves, labels = [], []
    for grade, depth, count in zip(spec.grades, spec.depths, spec.counts):
        for i in range(count):
            d = depth
            if spec.depth_jitter > 0:
                d = float(np.clip(depth + rng.normal(0.0, spec.depth_jitter), 0.0, 0.99))
            values = dip(grid, d, spec.center, spec.width)
            if spec.sigma > 0:
                values = values + rng.normal(0.0, spec.sigma, size=grid.size)
            curves.append(SampledCurve(grid, values, f"g{grade}-{i:03d}"))
            labels.append(HBGrade(int(grade)))
    return Cohort(tuple(curves), tuple(labels), grid)


# Neutral face, millimetres, mirror-symmetric about x = 0 (left side x > 0).
NEUTRAL_FACE = np.array(
    [
        (32.0, 35.0, 10.0),
        (32.0, 47.0, 10.0),
        (18.0, 41.0, 8.0),
        (46.0, 41.0, 5.0),
        (18.0, 60.0, 12.0),
        (34.0, 64.0, 10.0),
        (-32.0, 35.0, 10.0),
        (-32.0, 47.0, 10.0),
        (-18.0, 41.0, 8.0),
        (-46.0, 41.0, 5.0),
        (-18.0, 60.0, 12.0),
        (-34.0, 64.0, 10.0),
        (0.0, 0.0, 30.0),
        (0.0, -45.0, 18.0),
        (25.0, -35.0, 15.0),
        (-25.0, -35.0, 15.0),
        (0.0, -28.0, 20.0),
        (0.0, -80.0, 12.0),
        (0.0, 85.0, 10.0),
        (50.0, -5.0, 5.0),
        (-50.0, -5.0, 5.0),
    ]
)
MIRROR = np.array([-1.0, 1.0, 1.0])
# closing pulls the moving point towards its partner, everything else pushes away
_INWARD = {"closing"}


@dataclass(frozen=True)
class RawArchetype:
    """Motion parameters for a synthetic recording.

    The right moving POI travels ``amplitude`` times its rest distance along a
    Gaussian time profile.  The left moving POI is the mirror image of the
    right one with its offset scaled by ``1 - asym * profile(t)``, so the
    symmetry indicator bottoms out at ``1 - asym`` at the motion peak.
    """

    asym: float = 0.0
    center: float = 0.5
    width: float = 0.12
    amplitude: float = 0.3
    duration: float = 3.0
    n_frames: int = 61
    jitter: float = 0.05
    exercises: tuple = EXERCISES

    def __post_init__(self):
        if not 0 <= self.asym < 1:
            raise DomainError("asym must lie in [0, 1)")
        if self.n_frames < 3:
            raise DomainError("need at least 3 frames")


def _exercise_frames(arch: RawArchetype, exercise: str, rng: np.random.Generator):
    geo = GEOMETRY[exercise]
    times = np.linspace(0.0, arch.duration, arch.n_frames)
    rel = times / arch.duration
    profile = np.exp(-((rel - arch.center) ** 2) / (2.0 * arch.width**2))
    coords = np.repeat(NEUTRAL_FACE[None, :, :], arch.n_frames, axis=0)
    if arch.jitter > 0:
        coords = coords + rng.normal(0.0, arch.jitter, size=coords.shape)
    ra, rb = geo.right
    la, lb = geo.left
    rest = NEUTRAL_FACE[ra] - NEUTRAL_FACE[rb]
    step = (-1.0 if exercise in _INWARD else 1.0) * arch.amplitude * rest
    coords[:, ra, :] = coords[:, rb, :] + rest + profile[:, None] * step
    offset = (coords[:, ra, :] - coords[:, rb, :]) * MIRROR
    coords[:, la, :] = coords[:, lb, :] + (1.0 - arch.asym * profile)[:, None] * offset
    return ExerciseRecording(times, coords)


def generate_measurement(arch: RawArchetype, seed: int, id: str = "synthetic") -> RawMeasurement:
    rng = make_rng(seed)
    return RawMeasurement(id, {ex: _exercise_frames(arch, ex, rng) for ex in arch.exercises})


def generate_raw_measurement(arch: RawArchetype, seed: int, id: str = "synthetic") -> str:
    """CSV text of a synthetic measurement covering ``arch.exercises``."""
    return serialize_measurement(generate_measurement(arch, seed, id))


def planted_spectrum_cohort(
    variances,
    n: int,
    seed: int,
    basis: BSplineBasis | None = None,
    whiten: bool = True,
) -> list[FunctionalDatum]:
    """Curves ``mu + sum_j sqrt(v_j) z_ij phi_j`` with L2-orthonormal ``phi_j``.

    With ``whiten`` the score matrix ``z`` is centred and orthogonalized so
    its sample covariance is exactly the identity; the cohort's sample
    spectrum then equals ``variances`` up to rounding.
    """
    variances = np.asarray(variances, dtype=float)
    if variances.ndim != 1 or variances.size < 1 or np.any(variances <= 0):
        raise DomainError("variances must be a non-empty positive sequence")
    if np.any(np.diff(variances) > 0):
        raise DomainError("variances must be non-increasing")
    if n <= variances.size:
        raise DomainError("need more curves than planted modes")
    basis = basis or equispaced_basis()
    if variances.size > basis.n_basis:
        raise DomainError("more modes than basis functions")
    rng = make_rng(seed)
    gram = basis.gram
    raw = rng.normal(size=(variances.size, basis.n_basis))
    modes = []
    for v in raw:
        for m in modes:
            v = v - (v @ gram @ m) * m
        modes.append(v / np.sqrt(v @ gram @ v))
    modes = np.array(modes)
    z = rng.normal(size=(n, variances.size))
    if whiten:
        z = z - z.mean(axis=0)
        q, r = np.linalg.qr(z)
        z = q * np.sign(np.diag(r)) * np.sqrt(n - 1)
    mean = np.ones(basis.n_basis)
    coeffs = mean + (z * np.sqrt(variances)) @ modes
    return [FunctionalDatum(c, basis, f"p{i:04d}") for i, c in enumerate(coeffs)]
