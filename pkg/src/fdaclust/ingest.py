"""Raw landmark recordings and the indicator curves extracted from them.

A measurement file is a CSV with header ``exercise,frame_time,poi,x,y,z``
holding one row per point of interest (POI) per frame.  Each frame carries
all 21 POIs; coordinates are millimetres, frame times seconds.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .curve_model import SampledCurve
from .errors import (
    DegenerateError,
    DomainError,
    InsufficientDataError,
    OrderingError,
    ParseError,
    StructuralError,
)

N_POI = 21
NOSE_TIP = 12
HEADER = ("exercise", "frame_time", "poi", "x", "y", "z")

EXERCISES = (
    "raising",
    "frowning",
    "closing",
    "smiling",
    "baring",
    "pursing",
    "blowing",
    "closing_baring",
    "raising_pursing",
)

POI_NAMES = (
    "left eye, bottom",
    "left eye, top",
    "left eye, inner corner",
    "left eye, outer corner",
    "left eyebrow, inner",
    "left eyebrow, centre",
    "right eye, bottom",
    "right eye, top",
    "right eye, inner",
    "right eye, outer",
    "right eyebrow, inner",
    "right eyebrow, centre",
    "nose tip",
    "mouth lower lip, central-bottom",
    "mouth, left corner",
    "mouth, right corner",
    "mouth upper lip, centre-top",
    "chin, centre",
    "forehead, centre",
    "left cheek, centre",
    "right cheek, centre",
)


@dataclass(frozen=True)
class ExerciseGeometry:
    """POI pairs used for one exercise.

    ``primary`` is the distance that changes most during the exercise and
    drives intensity and speed.  Symmetry compares ``|left[0] - left[1]|``
    with ``|right[0] - right[1]|``; for most exercises the second point of
    both pairs is the nose tip.
    """

    primary: tuple[int, int]
    left: tuple[int, int]
    right: tuple[int, int]


GEOMETRY: dict[str, ExerciseGeometry] = {
    "smiling": ExerciseGeometry((14, 15), (14, NOSE_TIP), (15, NOSE_TIP)),
    "baring": ExerciseGeometry((14, 15), (14, NOSE_TIP), (15, NOSE_TIP)),
    "pursing": ExerciseGeometry((14, 15), (14, NOSE_TIP), (15, NOSE_TIP)),
    "closing_baring": ExerciseGeometry((14, 15), (14, NOSE_TIP), (15, NOSE_TIP)),
    "raising": ExerciseGeometry((4, 2), (4, NOSE_TIP), (10, NOSE_TIP)),
    "frowning": ExerciseGeometry((4, 10), (4, NOSE_TIP), (10, NOSE_TIP)),
    "raising_pursing": ExerciseGeometry((4, 2), (4, NOSE_TIP), (10, NOSE_TIP)),
    "closing": ExerciseGeometry((1, 0), (1, 0), (7, 6)),
    "blowing": ExerciseGeometry((19, 20), (19, NOSE_TIP), (20, NOSE_TIP)),
}

INDICATORS = ("symmetry", "intensity", "speed")


@dataclass(frozen=True, eq=False)
class ExerciseRecording:
    times: np.ndarray  # (F,)
    coords: np.ndarray  # (F, 21, 3)

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        coords = np.array(self.coords, dtype=float)
        if coords.ndim != 3 or coords.shape[1:] != (N_POI, 3):
            raise StructuralError(f"frames must hold {N_POI} POI triples, got shape {coords.shape}")
        if times.shape != coords.shape[:1]:
            raise StructuralError("one timestamp per frame required")
        if times.size < 2:
            raise StructuralError("an exercise needs at least 2 frames")
        if not np.all(np.isfinite(coords)) or not np.all(np.isfinite(times)):
            raise StructuralError("non-finite coordinate or timestamp")
        if np.any(np.diff(times) <= 0):
            raise OrderingError("frame timestamps must be strictly increasing")
        times.setflags(write=False)
        coords.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "coords", coords)


@dataclass(frozen=True, eq=False)
class RawMeasurement:
    id: str
    exercises: Mapping[str, ExerciseRecording]

    def __eq__(self, other):
        if not isinstance(other, RawMeasurement):
            return NotImplemented
        if self.id != other.id or list(self.exercises) != list(other.exercises):
            return False
        return all(
            np.array_equal(a.times, b.times) and np.array_equal(a.coords, b.coords)
            for a, b in zip(self.exercises.values(), other.exercises.values())
        )

    def exercise(self, name: str) -> ExerciseRecording:
        try:
            return self.exercises[name]
        except KeyError:
            raise DomainError(f"measurement {self.id!r} has no exercise {name!r}") from None


def _normalize_exercise(name: str) -> str:
    key = name.strip().lower().replace(" and ", "_").replace(" ", "_").replace("-", "_")
    return key


def parse_measurement(text, id: str = "") -> RawMeasurement:
    """Parse one measurement file.

    ``text`` is either a string or a text stream.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty measurement file", line=1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise ParseError(f"expected header {','.join(HEADER)!r}", line=1)

    # exercise -> list of (time, {poi: xyz})
    frames: dict[str, list] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(HEADER):
            raise ParseError(f"expected {len(HEADER)} fields, got {len(row)}", line=lineno)
        name = _normalize_exercise(row[0])
        if name not in EXERCISES:
            raise ParseError(f"unknown exercise {row[0]!r}", line=lineno)
        try:
            t = float(row[1])
            poi = int(row[2])
            xyz = tuple(float(v) for v in row[3:])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if not (np.isfinite(t) and all(np.isfinite(xyz))):
            raise ParseError("non-finite value", line=lineno)
        if not 0 <= poi < N_POI:
            raise StructuralError(f"POI index {poi} out of range 0..{N_POI - 1}", line=lineno)
        seq = frames.setdefault(name, [])
        if not seq or seq[-1][0] != t:
            if seq and t < seq[-1][0]:
                raise OrderingError(
                    f"{name}: frame time {t!r} after {seq[-1][0]!r}", line=lineno
                )
            if seq and len(seq[-1][1]) != N_POI:
                _missing(name, seq[-1], lineno)
            seq.append((t, {}))
        points = seq[-1][1]
        if poi in points:
            raise StructuralError(f"{name}: duplicate POI {poi} at time {t!r}", line=lineno)
        points[poi] = xyz

    if not frames:
        raise StructuralError("no frames in measurement")
    exercises = {}
    for name, seq in frames.items():
        if len(seq[-1][1]) != N_POI:
            _missing(name, seq[-1], None)
        if len(seq) < 2:
            raise StructuralError(f"{name}: an exercise needs at least 2 frames")
        times = [t for t, _ in seq]
        coords = [[points[p] for p in range(N_POI)] for _, points in seq]
        exercises[name] = ExerciseRecording(np.array(times), np.array(coords))
    return RawMeasurement(id, exercises)


def _missing(name, frame, lineno):
    t, points = frame
    absent = sorted(set(range(N_POI)) - set(points))
    raise StructuralError(f"{name}: frame at time {t!r} is missing POIs {absent}", line=lineno)


def serialize_measurement(m: RawMeasurement) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for name, rec in m.exercises.items():
        for t, frame in zip(rec.times, rec.coords):
            for poi, (x, y, z) in enumerate(frame):
                writer.writerow((name, repr(float(t)), poi, repr(float(x)), repr(float(y)), repr(float(z))))
    return out.getvalue()


def _check_poi(index: int):
    if not 0 <= index < N_POI:
        raise DomainError(f"POI index {index} out of range 0..{N_POI - 1}")


def _distances(rec: ExerciseRecording, a: int, b: int) -> np.ndarray:
    diff = rec.coords[:, a, :] - rec.coords[:, b, :]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def distance_curve(m: RawMeasurement, exercise: str, a: int, b: int) -> SampledCurve:
    """Per-frame Euclidean distance between POIs ``a`` and ``b``."""
    _check_poi(a)
    _check_poi(b)
    rec = m.exercise(exercise)
    return SampledCurve(rec.times, _distances(rec, a, b), m.id)


def _geometry(exercise: str, geometry) -> ExerciseGeometry:
    if geometry is not None:
        return geometry
    try:
        return GEOMETRY[exercise]
    except KeyError:
        raise DomainError(f"no POI geometry configured for exercise {exercise!r}") from None


def symmetry_indicator(m: RawMeasurement, exercise: str, geometry: ExerciseGeometry | None = None) -> SampledCurve:
    """Left/right ratio ``min(dL, dR) / max(dL, dR)``, 1 meaning perfect symmetry."""
    geo = _geometry(exercise, geometry)
    rec = m.exercise(exercise)
    dl = _distances(rec, *geo.left)
    dr = _distances(rec, *geo.right)
    hi = np.maximum(dl, dr)
    if np.any(hi == 0):
        frame = int(np.argmax(hi == 0))
        raise DegenerateError(
            f"{m.id!r}/{exercise}: both symmetry distances vanish at frame {frame}"
        )
    return SampledCurve(rec.times, np.minimum(dl, dr) / hi, m.id)


def intensity_indicator(m: RawMeasurement, exercise: str, geometry: ExerciseGeometry | None = None) -> SampledCurve:
    """Change of the primary distance relative to the first frame."""
    geo = _geometry(exercise, geometry)
    d = distance_curve(m, exercise, *geo.primary)
    return SampledCurve(d.times, d.values - d.values[0], m.id)


def central_difference(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    if times.size < 3:
        raise InsufficientDataError("finite differences need at least 3 samples")
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (times[2:] - times[:-2])
    out[0] = (values[1] - values[0]) / (times[1] - times[0])
    out[-1] = (values[-1] - values[-2]) / (times[-1] - times[-2])
    return out


def speed_indicator(m: RawMeasurement, exercise: str, geometry: ExerciseGeometry | None = None) -> SampledCurve:
    """Rate of change of the primary distance (mm/s)."""
    geo = _geometry(exercise, geometry)
    d = distance_curve(m, exercise, *geo.primary)
    return SampledCurve(d.times, central_difference(d.times, d.values), m.id)


_INDICATOR_FUNCS = {
    "symmetry": symmetry_indicator,
    "intensity": intensity_indicator,
    "speed": speed_indicator,
}


def indicator_curve(m: RawMeasurement, name: str) -> SampledCurve:
    """Indicator by dotted name, e.g. ``"smiling.symmetry"``."""
    exercise, _, kind = name.partition(".")
    if kind not in _INDICATOR_FUNCS:
        raise DomainError(f"unknown indicator {name!r}; expected <exercise>.<{'|'.join(INDICATORS)}>")
    return _INDICATOR_FUNCS[kind](m, exercise)
