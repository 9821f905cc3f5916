import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdaclust.curve_model import Cohort, SampledCurve, resample, uniform_grid
from fdaclust.errors import DegenerateError, DomainError
from fdaclust.registration import (
    Landmarks,
    build_warp,
    detect_landmarks,
    identity_warp,
    register,
    register_cohort,
)

GRID = uniform_grid(101)


def bump(peak, width=0.08, depth=0.4, grid=GRID):
    return 1 - depth * np.exp(-((grid - peak) ** 2) / (2 * width**2))


def test_triangle_peak():
    c = SampledCurve([0, 0.3, 1], [0, 1, 0])
    assert detect_landmarks(c).times == (0.3,)


def test_constant_curve_has_no_landmark():
    with pytest.raises(DegenerateError):
        detect_landmarks(SampledCurve([0, 0.5, 1], [2, 2, 2]))


def test_noisy_bump_landmark_within_one_step():
    rng = np.random.default_rng(3)
    c = SampledCurve(GRID, bump(0.4) + rng.normal(0, 0.01, GRID.size))
    assert abs(detect_landmarks(c).times[0] - 0.4) <= GRID[1] + 1e-12


def test_two_landmarks_in_time_order():
    v = 1 - 0.3 * np.exp(-((GRID - 0.7) ** 2) / 0.002) - 0.5 * np.exp(-((GRID - 0.3) ** 2) / 0.002)
    assert detect_landmarks(SampledCurve(GRID, v), 2).times == pytest.approx((0.3, 0.7))
    with pytest.raises(DegenerateError):
        detect_landmarks(SampledCurve(GRID, v), 3)


def test_identity_when_source_equals_target():
    lm = Landmarks((0.2, 0.6))
    w = build_warp(lm, lm)
    t = np.linspace(0, 1, 57)
    np.testing.assert_allclose(w(t), t, atol=1e-15)


def test_single_landmark_constraint():
    w = build_warp(Landmarks((0.25,)), Landmarks((0.5,)))
    assert w(0.5) == pytest.approx(0.25)
    assert np.all(np.diff(w(np.linspace(0, 1, 1000))) > 0)
    assert w(0.0) == 0.0 and w(1.0) == 1.0


def test_warp_rejects_bad_landmarks():
    with pytest.raises(DomainError):
        build_warp(Landmarks((0.0,)), Landmarks((0.5,)))
    with pytest.raises(DomainError):
        build_warp(Landmarks((0.2, 0.4)), Landmarks((0.5,)))
    with pytest.raises(DomainError):
        Landmarks((0.5, 0.4))


def test_warp_outside_domain():
    w = identity_warp()
    w(1.0 + 5e-10)
    with pytest.raises(DomainError):
        w(1.01)


def test_register_moves_peak():
    c = SampledCurve(GRID, bump(0.3))
    w = build_warp(detect_landmarks(c), Landmarks((0.5,)))
    r = register(c, w, GRID)
    assert abs(r.times[np.argmin(r.values)] - 0.5) <= GRID[1]


def test_register_cohort_aligns_peaks():
    curves = [SampledCurve(GRID, bump(p), f"c{i}") for i, p in enumerate((0.35, 0.45, 0.6))]
    reg = register_cohort(Cohort(curves, grid=GRID))
    peaks = [c.times[np.argmin(c.values)] for c in reg.curves]
    assert max(peaks) - min(peaks) <= GRID[1] + 1e-12
    assert np.mean(peaks) == pytest.approx(np.mean([0.35, 0.45, 0.6]), abs=GRID[1])


def test_register_cohort_keeps_constant_curves():
    curves = [SampledCurve(GRID, np.ones(101), "flat"), SampledCurve(GRID, bump(0.4), "b")]
    reg = register_cohort(Cohort(curves, grid=GRID))
    np.testing.assert_array_equal(reg.curves[0].values, 1.0)


landmark_sets = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.01, 0.99), min_size=n, max_size=n, unique=True),
        st.lists(st.floats(0.01, 0.99), min_size=n, max_size=n, unique=True),
    )
)


@given(landmark_sets)
def test_warp_strictly_increasing(pair):
    src, tgt = (sorted(p) for p in pair)
    if min(np.diff(src, prepend=0, append=1)) < 1e-6 or min(np.diff(tgt, prepend=0, append=1)) < 1e-6:
        return
    w = build_warp(Landmarks(src), Landmarks(tgt))
    v = w(np.linspace(0, 1, 1000))
    assert np.all(np.diff(v) > 0)
    np.testing.assert_allclose(w(np.array(tgt)), src, atol=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=5, max_size=40), st.integers(2, 80))
def test_identity_registration_is_resampling(values, g):
    t = np.linspace(0, 1, len(values))
    c = SampledCurve(t, values)
    grid = uniform_grid(g)
    diff = register(c, identity_warp(), grid).values - resample(c, grid).values
    assert np.max(np.abs(diff)) <= 1e-12
