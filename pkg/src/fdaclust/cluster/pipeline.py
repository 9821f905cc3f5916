"""Dispatch from a registered cohort to one of the clustering routes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..basis import FunctionalDatum, equispaced_basis, fit_many
from ..curve_model import Cohort
from ..errors import ConfigError
from ..fpca import FpcaModel, ScoreMatrix, choose_q, fit_fpca, scores
from ..rng import derive_seed
from .distances import distance_matrix
from .gmm import COVARIANCES, gmm_em, gmm_select
from .hierarchical import LINKAGES, hierarchical
from .pam import pam
from .partition import fuzzy_cmeans, kmeans
from .types import Clustering, DistanceMatrix, FuzzyClustering, GmmModel, canonical_order, make_clustering

ROUTES = ("ts-dtw", "ts-fuzzy", "basis-coeff", "fpc-kmeans", "fpc-hier", "fpc-pam", "fpc-gmm")


@dataclass(frozen=True)
class ClusterParams:
    k: int = 4
    seed: int = 0
    basis_order: int = 4
    n_knots: int = 9
    smoothing_lambda: float = 0.0
    q_threshold: float = 0.95
    q: Optional[int] = None
    fuzzifier: float = 2.0
    window: Optional[int] = None
    linkage: str = "ward"
    covariance: str = "auto"
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-6

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be positive")
        if self.linkage not in LINKAGES:
            raise ConfigError(f"linkage must be one of {LINKAGES}")
        if self.covariance not in ("auto",) + COVARIANCES:
            raise ConfigError(f"covariance must be auto or one of {COVARIANCES}")
        if not self.fuzzifier > 1:
            raise ConfigError("fuzzifier must exceed 1")
        if not 0 < self.q_threshold <= 1:
            raise ConfigError("q_threshold must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class RouteResult:
    route: str
    clustering: Clustering
    distances: DistanceMatrix
    fuzzy: Optional[FuzzyClustering] = None
    gmm: Optional[GmmModel] = None
    fpca: Optional[FpcaModel] = None
    scores: Optional[ScoreMatrix] = None
    data: Optional[list] = None
    q: Optional[int] = None
    extras: dict = field(default_factory=dict)


def smooth_cohort(cohort: Cohort, params: ClusterParams) -> list[FunctionalDatum]:
    basis = equispaced_basis(params.basis_order, params.n_knots)
    return fit_many(basis, cohort.gridded().curves, params.smoothing_lambda)


def fpc_scores(data, params: ClusterParams):
    model = fit_fpca(data)
    q = params.q if params.q is not None else choose_q(model, params.q_threshold)
    return model, scores(data, model, q), q


def _gmm(x, params, seed):
    kw = dict(seed=seed, n_init=params.restarts)
    if params.covariance == "auto":
        return gmm_select(x, params.k, **kw)
    return gmm_em(x, params.k, params.covariance, **kw)


def run_route(cohort: Cohort, route: str, params: ClusterParams = ClusterParams()) -> RouteResult:
    """Cluster ``cohort`` (already registered) along ``route``.

    ``ts-*`` routes work on the curves sampled on the cohort grid;
    ``basis-coeff`` on B-spline coefficients; ``fpc-*`` on principal
    component scores truncated at ``params.q`` or, by default, at the
    smallest q reaching ``params.q_threshold`` explained variance.
    """
    if route not in ROUTES:
        raise ConfigError(f"unknown route {route!r}; expected one of {ROUTES}")
    if params.window is not None and route != "ts-dtw":
        raise ConfigError("a DTW window only applies to the ts-dtw route")
    seed = derive_seed(params.seed, f"cluster:{route}")
    ids = tuple(cohort.ids)
    k = params.k

    if route.startswith("ts-"):
        grid_values = cohort.on_grid()
        if route == "ts-dtw":
            dist = distance_matrix(grid_values, "dtw", params.window, ids)
            clus = pam(dist, k, seed, params.max_iter)
            return RouteResult(route, clus, dist)
        fz = fuzzy_cmeans(grid_values, k, params.fuzzifier, seed, params.max_iter, params.tol, params.restarts)
        clus = make_clustering(
            fz.hard_labels - 1,
            k,
            centers=fz.centers,
            objective=fz.objective,
            seed=seed,
            iterations=fz.iterations,
            objective_trace=fz.objective_trace,
            method="fuzzy-cmeans",
            params={"m": params.fuzzifier},
        )
        # keep membership columns aligned with the renumbered clusters
        inv = np.argsort(canonical_order(fz.hard_labels - 1, k))
        fz = replace(fz, membership=fz.membership[:, inv], centers=fz.centers[inv])
        return RouteResult(route, clus, distance_matrix(grid_values, "euclidean-grid", ids=ids), fuzzy=fz)

    data = smooth_cohort(cohort, params)
    if route == "basis-coeff":
        return cluster_coefficients(data, params, ids)
    fmodel, sm, q = fpc_scores(data, params)
    return replace(cluster_scores(sm, route, params), fpca=fmodel, data=data, q=q)


def cluster_coefficients(data, params: ClusterParams = ClusterParams(), ids=None) -> RouteResult:
    """``basis-coeff`` route on already smoothed functional data."""
    coeffs = np.vstack([d.coeffs for d in data])
    ids = tuple(ids if ids is not None else (d.id for d in data))
    clus, model = _gmm(coeffs, params, derive_seed(params.seed, "cluster:basis-coeff"))
    return RouteResult("basis-coeff", clus, distance_matrix(coeffs, "euclidean", ids=ids), gmm=model, data=list(data))


def cluster_scores(sm: ScoreMatrix, route: str, params: ClusterParams = ClusterParams()) -> RouteResult:
    """One of the ``fpc-*`` routes on a precomputed score matrix."""
    if not route.startswith("fpc-") or route not in ROUTES:
        raise ConfigError(f"route {route!r} does not cluster principal component scores")
    seed = derive_seed(params.seed, f"cluster:{route}")
    x = sm.values
    k = params.k
    dist = distance_matrix(x, "euclidean", ids=tuple(sm.ids))
    gmodel = None
    if route == "fpc-kmeans":
        clus = kmeans(x, k, seed, params.max_iter, params.restarts)
    elif route == "fpc-hier":
        clus = hierarchical(dist, params.linkage, k)
    elif route == "fpc-pam":
        clus = pam(dist, k, seed, params.max_iter)
    else:
        clus, gmodel = _gmm(x, params, seed)
    return RouteResult(route, clus, dist, gmm=gmodel, scores=sm, q=x.shape[1])


def cluster_pipeline(cohort: Cohort, route: str, k: int = 4, params: ClusterParams | None = None) -> Clustering:
    params = params or ClusterParams()
    if params.k != k:
        params = replace(params, k=k)
    return run_route(cohort, route, params).clustering
