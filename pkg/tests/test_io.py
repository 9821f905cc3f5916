import json

import numpy as np
import pytest

from fdaclust.basis import equispaced_basis, fit
from fdaclust.cluster import Clustering, FuzzyClustering
from fdaclust.curve_model import HBGrade
from fdaclust.errors import MissingFileError, ParseError, SchemaError
from fdaclust.evaluation import ContingencyTable
from fdaclust.fpca import fit_fpca, scores
from fdaclust.io import (
    align_labels,
    clustering_from_record,
    clustering_record,
    cohort_to_csv,
    contingency_from_csv,
    contingency_to_csv,
    curves_from_csv,
    fpca_from_json,
    functional_data_from_json,
    functional_data_to_json,
    labels_from_csv,
    labels_to_csv,
    load_cohort,
    load_json,
    membership_from_csv,
    membership_to_csv,
    read_text,
    save_cohort,
    scores_from_csv,
    scores_to_csv,
)
from fdaclust.synth import CohortSpec, generate_cohort, planted_spectrum_cohort


@pytest.fixture(scope="module")
def small_cohort():
    return generate_cohort(CohortSpec(counts=(3, 3, 3, 3), seed=5))


def test_cohort_round_trip(tmp_path, small_cohort):
    save_cohort(tmp_path / "cohort.csv", small_cohort)
    back = load_cohort(tmp_path / "cohort.csv")
    assert back.ids == small_cohort.ids
    assert np.array_equal(back.on_grid(), small_cohort.on_grid())
    assert [l.raw for l in back.labels] == [l.raw for l in small_cohort.labels]
    assert cohort_to_csv(back.curves) == cohort_to_csv(small_cohort.curves)


def test_cohort_errors(tmp_path):
    with pytest.raises(MissingFileError):
        read_text(tmp_path / "nope.csv")
    with pytest.raises(SchemaError):
        curves_from_csv("a,b,c\n")
    with pytest.raises(SchemaError):
        curves_from_csv("id,time,value\n")
    with pytest.raises(ParseError) as info:
        curves_from_csv("id,time,value\nx,0,1\nx,oops,2\n")
    assert info.value.line == 3
    with pytest.raises(ParseError):
        curves_from_csv("id,time,value\nx,0\n")


def test_labels_round_trip():
    text = labels_to_csv(["a", "b"], [HBGrade(4), HBGrade(1)])
    labels = labels_from_csv(text)
    assert labels["a"].adjusted == 3 and labels["b"].raw == 1
    with pytest.raises(SchemaError):
        align_labels(["a", "c"], labels)
    with pytest.raises(ParseError):
        labels_from_csv("id,hb_raw\na,9\n")


def test_functional_data_and_fpca_round_trip():
    data = planted_spectrum_cohort([1.0, 0.5], 20, seed=2)
    back = functional_data_from_json(json.loads(functional_data_to_json(data)))
    assert all(np.array_equal(a.coeffs, b.coeffs) for a, b in zip(data, back))
    model = fit_fpca(data)
    again = fpca_from_json(json.loads(json.dumps(model.to_record())))
    assert np.array_equal(again.eigenvalues, model.eigenvalues)
    with pytest.raises(SchemaError):
        functional_data_from_json({"coeffs": []})
    with pytest.raises(SchemaError):
        fpca_from_json({})


def test_scores_round_trip():
    data = planted_spectrum_cohort([1.0, 0.5], 20, seed=2)
    sm = scores(data, fit_fpca(data), 2)
    back = scores_from_csv(scores_to_csv(sm))
    assert np.array_equal(back.values, sm.values)
    assert back.ids == sm.ids
    with pytest.raises(SchemaError):
        scores_from_csv("id,x\n")


def test_clustering_round_trip():
    c = Clustering(np.array([1, 2, 1]), 2, objective=1.5, seed=3, medoids=(0, 1), method="pam")
    rec = json.loads(json.dumps(clustering_record(c, "fpc-pam", ["a", "b", "c"], {"q": 2})))
    back = clustering_from_record(rec)
    assert back.labels.tolist() == [1, 2, 1] and back.medoids == (0, 1) and rec["q"] == 2
    with pytest.raises(SchemaError):
        clustering_from_record({"k": 2})


def test_membership_round_trip():
    u = np.array([[0.25, 0.75], [1.0, 0.0]])
    fz = FuzzyClustering(u, np.zeros((2, 1)), 2.0)
    ids, back = membership_from_csv(membership_to_csv(["a", "b"], fz))
    assert ids == ["a", "b"] and np.array_equal(back, u)


def test_contingency_round_trip(data_dir):
    text = (data_dir / "table6.csv").read_text()
    t = contingency_from_csv(text)
    assert contingency_to_csv(t) == text
    assert contingency_from_csv(contingency_to_csv(ContingencyTable(np.eye(4, dtype=int)))).n == 4
    with pytest.raises(SchemaError):
        contingency_from_csv(",HB1,HB2\nHB2,1,0\nHB1,0,1\n")


def test_load_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{\n oops")
    with pytest.raises(ParseError):
        load_json(p)
    with pytest.raises(MissingFileError):
        load_json(tmp_path / "none.json")
