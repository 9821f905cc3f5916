import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdaclust.errors import (
    DegenerateError,
    DomainError,
    InsufficientDataError,
    OrderingError,
    ParseError,
    StructuralError,
)
from fdaclust.ingest import (
    EXERCISES,
    GEOMETRY,
    HEADER,
    N_POI,
    NOSE_TIP,
    ExerciseRecording,
    RawMeasurement,
    distance_curve,
    indicator_curve,
    intensity_indicator,
    parse_measurement,
    serialize_measurement,
    speed_indicator,
    symmetry_indicator,
)
from fdaclust.synth import MIRROR, NEUTRAL_FACE, RawArchetype, generate_measurement


def _file(frames, exercise="smiling", skip=None):
    lines = [",".join(HEADER)]
    for t, coords in frames:
        for p in range(N_POI):
            if skip == (t, p):
                continue
            x, y, z = coords[p]
            lines.append(f"{exercise},{t},{p},{x},{y},{z}")
    return "\n".join(lines) + "\n"


def _measurement(coords_per_frame, times, exercise="smiling"):
    return RawMeasurement("m", {exercise: ExerciseRecording(np.asarray(times, float), np.asarray(coords_per_frame, float))})


def test_minimal_file():
    frames = [(0.0, NEUTRAL_FACE), (0.1, NEUTRAL_FACE)]
    m = parse_measurement(_file(frames), "p1")
    rec = m.exercise("smiling")
    assert rec.coords.shape == (2, N_POI, 3)
    assert rec.times.tolist() == [0.0, 0.1]
    assert m.id == "p1"


def test_missing_poi_is_structural():
    frames = [(0.0, NEUTRAL_FACE), (0.1, NEUTRAL_FACE), (0.2, NEUTRAL_FACE)]
    with pytest.raises(StructuralError) as err:
        parse_measurement(_file(frames, skip=(0.1, 7)))
    assert "[7]" in str(err.value)


def test_missing_poi_in_last_frame():
    with pytest.raises(StructuralError):
        parse_measurement(_file([(0.0, NEUTRAL_FACE), (0.1, NEUTRAL_FACE)], skip=(0.1, 20)))


def test_decreasing_time_is_ordering_error():
    frames = [(0.0, NEUTRAL_FACE), (0.2, NEUTRAL_FACE), (0.1, NEUTRAL_FACE)]
    with pytest.raises(OrderingError):
        parse_measurement(_file(frames))


def test_malformed_line_reports_line_number():
    text = _file([(0.0, NEUTRAL_FACE), (0.1, NEUTRAL_FACE)]).replace("smiling,0.1,3,", "smiling,0.1,3,abc,", 1)
    with pytest.raises(ParseError) as err:
        parse_measurement(text)
    assert err.value.line == 2 + N_POI + 3


@pytest.mark.parametrize(
    "mutate",
    [
        lambda t: t.replace("exercise", "exercize", 1),
        lambda t: t.replace("smiling", "dancing", 1),
        lambda t: "",
        lambda t: t.splitlines()[0] + "\n",
    ],
)
def test_bad_files(mutate):
    with pytest.raises(ParseError):
        parse_measurement(mutate(_file([(0.0, NEUTRAL_FACE), (0.1, NEUTRAL_FACE)])))


def test_single_frame_rejected():
    with pytest.raises(StructuralError):
        parse_measurement(_file([(0.0, NEUTRAL_FACE)]))


def test_nine_exercise_round_trip():
    m = generate_measurement(RawArchetype(asym=0.3), seed=4, id="x")
    assert set(m.exercises) == set(EXERCISES)
    text = serialize_measurement(m)
    back = parse_measurement(text, "x")
    assert back == m
    assert serialize_measurement(back) == text


def test_distance_345():
    coords = np.zeros((2, N_POI, 3))
    coords[:, 3] = [3, 4, 0]
    m = _measurement(coords, [0, 1])
    np.testing.assert_allclose(distance_curve(m, "smiling", 0, 3).values, [5, 5])


def test_distance_same_point_is_zero():
    m = generate_measurement(RawArchetype(), 0)
    assert np.all(distance_curve(m, "smiling", 5, 5).values == 0)


def test_distance_errors():
    m = generate_measurement(RawArchetype(exercises=("smiling",)), 0)
    with pytest.raises(DomainError):
        distance_curve(m, "smiling", 0, 21)
    with pytest.raises(DomainError):
        distance_curve(m, "raising", 0, 1)


def test_smile_distance_matches_closed_form():
    arch = RawArchetype(asym=0.0, jitter=0.0, exercises=("smiling",))
    m = generate_measurement(arch, 0)
    d = distance_curve(m, "smiling", 14, 15)
    # independent reconstruction of the mouth-corner trajectories
    t = np.linspace(0, arch.duration, arch.n_frames) / arch.duration
    prof = np.exp(-((t - arch.center) ** 2) / (2 * arch.width**2))
    nose = NEUTRAL_FACE[NOSE_TIP]
    rest = NEUTRAL_FACE[15] - nose
    right = nose + rest * (1 + arch.amplitude * prof)[:, None]
    left = nose + (right - nose) * MIRROR
    np.testing.assert_allclose(d.values, np.linalg.norm(right - left, axis=1), atol=1e-9)
    assert d.times[np.argmax(d.values)] == pytest.approx(arch.duration * arch.center)


def test_symmetry_of_mirror_face():
    m = generate_measurement(RawArchetype(asym=0.0, jitter=0.0), 0)
    for ex in EXERCISES:
        np.testing.assert_allclose(symmetry_indicator(m, ex).values, 1.0, atol=1e-12)


def test_symmetry_direct_ratio():
    coords = np.zeros((2, N_POI, 3))
    coords[:, 14] = [-40, 0, 0]
    coords[:, 15] = [50, 0, 0]
    m = _measurement(coords, [0, 1])
    np.testing.assert_allclose(symmetry_indicator(m, "smiling").values, 0.8)


def test_symmetry_hemiparesis_dips_at_motion():
    arch = RawArchetype(asym=0.5, jitter=0.0, exercises=("smiling",))
    s = symmetry_indicator(generate_measurement(arch, 0), "smiling")
    t = s.times / arch.duration
    moving = np.exp(-((t - arch.center) ** 2) / (2 * arch.width**2)) > 1e-3
    assert np.all(s.values[moving] < 1.0)
    assert s.values.min() == pytest.approx(0.5, abs=1e-9)
    assert s.times[np.argmin(s.values)] == pytest.approx(arch.center * arch.duration)


def test_symmetry_degenerate():
    m = _measurement(np.zeros((2, N_POI, 3)), [0, 1])
    with pytest.raises(DegenerateError):
        symmetry_indicator(m, "smiling")


def test_no_motion_gives_zero_intensity_and_speed():
    coords = np.repeat(NEUTRAL_FACE[None], 5, axis=0)
    m = _measurement(coords, np.arange(5.0))
    assert np.all(intensity_indicator(m, "smiling").values == 0)
    assert np.all(speed_indicator(m, "smiling").values == 0)


def test_linear_ramp_speed_is_one():
    times = np.linspace(0, 1, 11)
    coords = np.zeros((11, N_POI, 3))
    coords[:, 15, 0] = times  # mouth corners 14 (at origin) and 15 drift apart at unit speed
    m = _measurement(coords, times)
    np.testing.assert_allclose(speed_indicator(m, "smiling").values, 1.0, atol=1e-12)
    np.testing.assert_allclose(intensity_indicator(m, "smiling").values, times, atol=1e-12)


def test_speed_needs_three_frames():
    m = _measurement(np.repeat(NEUTRAL_FACE[None], 2, axis=0), [0, 1])
    with pytest.raises(InsufficientDataError):
        speed_indicator(m, "smiling")


def test_speed_zero_crossing_at_bump_peak():
    arch = RawArchetype(jitter=0.0, n_frames=101, exercises=("smiling",))
    sp = speed_indicator(generate_measurement(arch, 0), "smiling")
    peak = int(np.argmin(np.abs(sp.times - arch.center * arch.duration)))
    assert abs(sp.values[peak]) < 1e-9
    assert np.all(sp.values[peak - 10 : peak] > 0) and np.all(sp.values[peak + 1 : peak + 11] < 0)


def test_indicator_curve_dispatch():
    m = generate_measurement(RawArchetype(asym=0.2, exercises=("smiling", "raising")), 1)
    np.testing.assert_array_equal(indicator_curve(m, "smiling.symmetry").values, symmetry_indicator(m, "smiling").values)
    np.testing.assert_array_equal(indicator_curve(m, "raising.speed").values, speed_indicator(m, "raising").values)
    with pytest.raises(DomainError):
        indicator_curve(m, "smiling.colour")


def test_every_exercise_has_geometry():
    assert set(GEOMETRY) == set(EXERCISES)


coords_strategy = st.integers(3, 8).flatmap(
    lambda f: st.lists(st.floats(-100, 100), min_size=f * N_POI * 3, max_size=f * N_POI * 3).map(
        lambda v: np.array(v).reshape(f, N_POI, 3)
    )
)


@given(coords_strategy, st.integers(0, 20), st.integers(0, 20))
def test_distance_symmetric_in_poi(coords, a, b):
    m = _measurement(coords, np.arange(coords.shape[0], dtype=float))
    np.testing.assert_array_equal(distance_curve(m, "smiling", a, b).values, distance_curve(m, "smiling", b, a).values)


@given(coords_strategy)
def test_symmetry_in_unit_interval(coords):
    m = _measurement(coords, np.arange(coords.shape[0], dtype=float))
    try:
        s = symmetry_indicator(m, "smiling").values
    except DegenerateError:
        return
    assert np.all((s >= 0) & (s <= 1))
