import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdaclust.curve_model import GRADE_LADDER
from fdaclust.errors import DomainError
from fdaclust.fpca import choose_q, fit_fpca
from fdaclust.ingest import parse_measurement, symmetry_indicator
from fdaclust.synth import (
    CohortSpec,
    RawArchetype,
    dip,
    generate_cohort,
    generate_measurement,
    generate_raw_measurement,
    planted_spectrum_cohort,
)


def test_default_spec_shape(default_cohort):
    assert len(default_cohort) == 120
    assert sorted(set(default_cohort.adjusted_labels())) == list(GRADE_LADDER)
    assert np.bincount(default_cohort.adjusted_labels())[list(GRADE_LADDER)].tolist() == [30] * 4


def test_noiseless_flat_curves():
    spec = CohortSpec(depths=(0.0,), counts=(5,), grades=(1,), sigma=0.0)
    assert np.all(generate_cohort(spec).on_grid() == 1.0)


def test_noiseless_dip_minimum():
    spec = CohortSpec(depths=(0.3,), counts=(2,), grades=(2,), sigma=0.0)
    values = generate_cohort(spec).on_grid()
    assert values.min() == pytest.approx(0.7)
    assert np.argmin(values[0]) == 50


def test_dip_formula():
    assert dip(0.5, 0.4, 0.5, 0.1) == pytest.approx(0.6)
    assert dip(0.6, 0.4, 0.5, 0.1) == pytest.approx(1 - 0.4 * np.exp(-0.5))


def test_cohort_deterministic():
    a = generate_cohort(CohortSpec(seed=3)).on_grid()
    b = generate_cohort(CohortSpec(seed=3)).on_grid()
    c = generate_cohort(CohortSpec(seed=4)).on_grid()
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"depths": (0.1, 0.05), "counts": (1, 1), "grades": (1, 2)},
        {"depths": (0.1,), "counts": (1, 1), "grades": (1, 2)},
        {"depths": (1.2,), "counts": (1,), "grades": (1,)},
        {"sigma": -1.0},
        {"width": 0.0},
        {"depths": (0.1,), "counts": (1,), "grades": (7,)},
    ],
)
def test_spec_rejects(kwargs):
    with pytest.raises((DomainError, ValueError)):
        CohortSpec(**kwargs)


def test_spec_from_dict():
    assert CohortSpec.from_dict({"sigma": 0.1}).sigma == 0.1
    with pytest.raises(DomainError):
        CohortSpec.from_dict({"noise": 0.1})


def test_grades_ordered_by_depth_over_seeds():
    for seed in range(10):
        cohort = generate_cohort(CohortSpec(seed=seed))
        lows = [cohort.on_grid()[cohort.adjusted_labels() == g].min(axis=1).mean() for g in GRADE_LADDER]
        assert all(a > b for a, b in zip(lows, lows[1:]))


def test_raw_symmetric_archetype():
    m = generate_measurement(RawArchetype(asym=0.0), seed=1, id="s")
    for ex in ("smiling", "raising", "closing", "blowing"):
        np.testing.assert_allclose(symmetry_indicator(m, ex).values, 1.0, atol=1e-9)


def test_raw_asymmetric_minimum():
    m = generate_measurement(RawArchetype(asym=0.5, jitter=0.0), seed=1, id="s")
    sym = symmetry_indicator(m, "smiling").values
    assert sym.min() == pytest.approx(0.5, abs=1e-9)
    assert sym[0] > 0.99


def test_raw_round_trip():
    arch = RawArchetype(asym=0.3, exercises=("smiling", "closing"))
    text = generate_raw_measurement(arch, seed=7, id="x")
    assert parse_measurement(text, "x") == generate_measurement(arch, 7, "x")
    assert generate_raw_measurement(arch, seed=7, id="x") == text


def test_raw_rejects():
    with pytest.raises(DomainError):
        RawArchetype(asym=1.0)
    with pytest.raises(DomainError):
        RawArchetype(n_frames=2)


def test_planted_single_mode():
    model = fit_fpca(planted_spectrum_cohort([2.0], 50, seed=0))
    assert model.eigenvalues[0] / model.eigenvalues.sum() >= 0.99
    assert model.eigenvalues[0] == pytest.approx(2.0, rel=1e-9)


def test_planted_six_modes():
    variances = [6.0, 5.0, 4.0, 3.0, 2.0, 1.5]
    model = fit_fpca(planted_spectrum_cohort(variances, 200, seed=1))
    np.testing.assert_allclose(model.eigenvalues[:6], variances, rtol=1e-9)
    assert np.all(np.abs(model.eigenvalues[6:]) < 1e-10)
    assert choose_q(model, 0.95) == 6


def test_planted_rejects():
    with pytest.raises(DomainError):
        planted_spectrum_cohort([1.0, 2.0], 10, 0)
    with pytest.raises(DomainError):
        planted_spectrum_cohort([1.0, 0.5], 2, 0)
    with pytest.raises(DomainError):
        planted_spectrum_cohort([1.0] * 20, 50, 0)


@settings(max_examples=25)
@given(st.integers(0, 2**32), st.floats(0.0, 0.9))
def test_raw_symmetry_bounds(seed, asym):
    m = generate_measurement(RawArchetype(asym=asym, exercises=("smiling",)), seed=seed)
    sym = symmetry_indicator(m, "smiling").values
    assert np.all((sym >= 0) & (sym <= 1))
