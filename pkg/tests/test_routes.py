import numpy as np
import pytest

from fdaclust.cluster import ROUTES, ClusterParams, cluster_pipeline, cluster_scores, run_route
from fdaclust.cluster.pipeline import fpc_scores, smooth_cohort
from fdaclust.errors import ConfigError
from fdaclust.evaluation import assign_grades, ccr, contingency
from fdaclust.registration import register_cohort


@pytest.fixture(scope="module")
def registered(default_cohort):
    return register_cohort(default_cohort)


@pytest.mark.parametrize("route", ROUTES)
def test_every_route_recovers_planted_grades(registered, route):
    res = run_route(registered, route, ClusterParams())
    clus = res.clustering
    assert clus.k == 4 and clus.sizes.tolist() == [30] * 4
    gmap = assign_grades(clus, registered.on_grid())
    table = contingency(gmap, clus, registered.labels)
    assert ccr(table) == 1.0
    assert res.distances.n == 120


@pytest.mark.parametrize("route", ROUTES)
def test_single_cluster(registered, route):
    c = cluster_pipeline(registered, route, k=1)
    assert np.all(c.labels == 1)


def test_forced_six_components(registered):
    res = run_route(registered, "fpc-kmeans", ClusterParams(q=6))
    assert res.q == 6 and res.scores.values.shape == (120, 6)


def test_fuzzy_membership_columns_follow_labels(registered):
    res = run_route(registered, "ts-fuzzy", ClusterParams())
    assert np.array_equal(res.fuzzy.hard_labels, res.clustering.labels)


def test_window_rejected_for_non_dtw(registered):
    with pytest.raises(ConfigError):
        run_route(registered, "fpc-pam", ClusterParams(window=3))
    res = run_route(registered, "ts-dtw", ClusterParams(window=10))
    assert res.distances.metric == "dtw"


def test_unknown_route(registered):
    with pytest.raises(ConfigError):
        run_route(registered, "fpc-dbscan")


def test_scores_route_equivalence(registered):
    params = ClusterParams()
    _, sm, _ = fpc_scores(smooth_cohort(registered, params), params)
    for route in ("fpc-kmeans", "fpc-hier", "fpc-pam", "fpc-gmm"):
        direct = run_route(registered, route, params).clustering.labels
        assert np.array_equal(cluster_scores(sm, route, params).clustering.labels, direct)
    with pytest.raises(ConfigError):
        cluster_scores(sm, "ts-dtw", params)


@pytest.mark.parametrize("route", ROUTES)
def test_route_deterministic(registered, route):
    a = run_route(registered, route).clustering
    b = run_route(registered, route).clustering
    assert np.array_equal(a.labels, b.labels) and a.objective_trace == b.objective_trace


@pytest.mark.parametrize("kw", [{"k": 0}, {"linkage": "median"}, {"covariance": "tied"}, {"fuzzifier": 1.0}, {"q_threshold": 0}])
def test_invalid_params(kw):
    with pytest.raises(ConfigError):
        ClusterParams(**kw)
