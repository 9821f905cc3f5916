"""End-to-end workflow shared by the command line and the acceptance suite:
register a cohort, run clustering routes, map clusters to grades and score
them against clinician labels."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .cluster.pipeline import ClusterParams, RouteResult, run_route
from .config import PipelineConfig
from .curve_model import Cohort
from .errors import InsufficientDataError, MissingFileError
from .evaluation import (
    AnalysisReport,
    GradeMap,
    assign_grades,
    cluster_levels,
    contingency,
    report,
    silhouette,
)
from .ingest import indicator_curve, parse_measurement
from .io import LABELS_FILE, align_labels, labels_from_csv, read_text
from .registration import register_cohort


def prepare(cohort: Cohort, cfg: PipelineConfig) -> Cohort:
    """Register (when enabled) and resample onto the cohort grid."""
    if cfg.registration:
        return register_cohort(cohort, cfg.landmarks)
    return cohort.gridded()


def ingest_directory(raw_dir, indicator: str, grid_size: int = 101) -> Cohort:
    """One indicator curve per ``*.csv`` recording (id = file stem).

    ``labels.csv`` in the same directory, when present, supplies HB grades.
    """
    raw_dir = Path(raw_dir)
    if not raw_dir.is_dir():
        raise MissingFileError(f"no such directory: {raw_dir}")
    files = sorted(p for p in raw_dir.glob("*.csv") if p.name != LABELS_FILE)
    if not files:
        raise InsufficientDataError(f"no recordings in {raw_dir}")
    curves = [indicator_curve(parse_measurement(read_text(p), p.stem), indicator) for p in files]
    labels = None
    if (raw_dir / LABELS_FILE).is_file():
        labels = align_labels([c.id for c in curves], labels_from_csv(read_text(raw_dir / LABELS_FILE)))
    return Cohort.build(curves, labels, grid_size)


@dataclass(frozen=True, eq=False)
class RouteOutcome:
    result: RouteResult
    levels: tuple
    silhouette: float
    grade_map: Optional[GradeMap] = None
    report: Optional[AnalysisReport] = None


def evaluate_route(result: RouteResult, prepared: Cohort, ladder_size: int = 4) -> RouteOutcome:
    """Grade mapping, silhouette and (with labels) the agreement report."""
    clus = result.clustering
    levels = cluster_levels(clus, prepared.on_grid())
    _, sil = silhouette(clus, result.distances) if clus.k > 1 else (None, 0.0)
    grade_map = assign_grades(clus, prepared.on_grid()) if clus.k == ladder_size else None
    rep = None
    if grade_map is not None and prepared.labels is not None:
        extra = {"q": result.q} if result.q is not None else {}
        table = contingency(grade_map, clus, prepared.labels)
        rep = report(clus, grade_map, table, {"silhouette": sil, **extra}, route=result.route)
    return RouteOutcome(result, tuple(float(v) for v in levels), float(sil), grade_map, rep)


def run_analysis(cohort: Cohort, cfg: PipelineConfig, prepared: Optional[Cohort] = None) -> list[RouteOutcome]:
    """Every route named by ``cfg`` on one cohort, in route order."""
    prepared = prepared if prepared is not None else prepare(cohort, cfg)
    out = []
    for route in cfg.routes:
        params: ClusterParams = cfg.cluster_params(route)
        out.append(evaluate_route(run_route(prepared, route, params), prepared))
    return out
