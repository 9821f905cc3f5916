"""Clustering routes: DTW/fuzzy time-series clustering, basis-coefficient
mixtures and partitioning of functional principal component scores."""

from .distances import distance_matrix, dtw_matrix
from .dtw import dtw_distance
from .gmm import gmm_em, gmm_select
from .hierarchical import agglomerate, hierarchical
from .pam import pam
from .partition import fuzzy_cmeans, kmeans
from .pipeline import (
    ROUTES,
    ClusterParams,
    RouteResult,
    cluster_coefficients,
    cluster_pipeline,
    cluster_scores,
    run_route,
)
from .types import Clustering, DistanceMatrix, FuzzyClustering, GmmModel

__all__ = [
    "ROUTES",
    "ClusterParams",
    "Clustering",
    "DistanceMatrix",
    "FuzzyClustering",
    "GmmModel",
    "RouteResult",
    "agglomerate",
    "cluster_coefficients",
    "cluster_pipeline",
    "cluster_scores",
    "distance_matrix",
    "dtw_distance",
    "dtw_matrix",
    "fuzzy_cmeans",
    "gmm_em",
    "gmm_select",
    "hierarchical",
    "kmeans",
    "pam",
    "run_route",
]
