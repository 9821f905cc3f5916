"""Grade assignment and agreement metrics against clinician HB labels."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from .cluster.types import Clustering, DistanceMatrix
from .curve_model import GRADE_LADDER, HB_MERGE, HBGrade
from .errors import DegenerateError, DomainError


def adjust_hb(raw) -> int:
    """Merge rare grades: 4 becomes 3 and 5 becomes 6."""
    if isinstance(raw, HBGrade):
        return raw.adjusted
    try:
        return HB_MERGE[int(raw)]
    except (KeyError, ValueError, TypeError):
        raise DomainError(f"HB grade must be in 1..6, got {raw!r}") from None


def adjust_counts(raw_counts) -> tuple:
    """Frequencies over grades 1..6 folded onto the ladder (1, 2, 3, 6)."""
    raw_counts = list(raw_counts)
    if len(raw_counts) != 6:
        raise DomainError("expected six raw grade counts")
    out = dict.fromkeys(GRADE_LADDER, 0)
    for grade, count in zip(range(1, 7), raw_counts):
        out[adjust_hb(grade)] += count
    return tuple(out[g] for g in GRADE_LADDER)


@dataclass(frozen=True)
class GradeMap:
    """``grades[c - 1]`` is the grade assigned to cluster ``c``."""

    grades: tuple
    levels: tuple = ()
    ladder: tuple = GRADE_LADDER

    def __post_init__(self):
        if sorted(self.grades) != sorted(self.ladder):
            raise DomainError(f"grade map {self.grades} is not a bijection onto {self.ladder}")

    def grade_of(self, cluster: int) -> int:
        return self.grades[cluster - 1]


def cluster_levels(clustering: Clustering, grid_values) -> np.ndarray:
    """Mean indicator value per cluster over members and grid points."""
    grid_values = np.asarray(grid_values, dtype=float)
    if grid_values.shape[0] != clustering.n:
        raise DomainError(f"{grid_values.shape[0]} curves for {clustering.n} clustered items")
    return np.array([grid_values[clustering.members(c)].mean() for c in range(1, clustering.k + 1)])


def grade_map_from_levels(levels, ladder=GRADE_LADDER) -> GradeMap:
    """Highest mean symmetry gets the mildest grade; ties keep cluster order."""
    levels = np.asarray(levels, dtype=float)
    if levels.size != len(ladder):
        raise DomainError(
            f"{levels.size} clusters cannot be mapped onto the {len(ladder)}-grade ladder {ladder}"
        )
    order = np.argsort(-levels, kind="stable")
    grades = [0] * levels.size
    for rank, c in enumerate(order):
        grades[c] = ladder[rank]
    return GradeMap(tuple(grades), tuple(float(v) for v in levels), tuple(ladder))


def assign_grades(clustering: Clustering, grid_values, ladder=GRADE_LADDER) -> GradeMap:
    """Rank clusters by mean symmetry (descending) onto ``ladder``.

    ``grid_values`` is the ``n x G`` matrix of indicator curves on the
    common grid, in clustering order (``Cohort.on_grid()``).
    """
    if clustering.k != len(ladder):
        raise DomainError(f"k = {clustering.k} does not match the {len(ladder)}-grade ladder")
    return grade_map_from_levels(cluster_levels(clustering, grid_values), ladder)


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Rows: assigned grade; columns: clinician grade; both in ladder order."""

    counts: np.ndarray
    ladder: tuple = GRADE_LADDER

    def __post_init__(self):
        counts = np.asarray(self.counts)
        m = len(self.ladder)
        if counts.shape != (m, m):
            raise DomainError(f"contingency table must be {m}x{m}")
        if np.any(counts < 0) or np.any(counts != np.round(counts)):
            raise DomainError("counts must be nonnegative integers")
        counts = counts.astype(int)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def contingency(grade_map: GradeMap, clustering: Clustering, labels) -> ContingencyTable:
    """Cross-tabulate assigned grades against adjusted clinician grades."""
    if labels is None:
        raise DomainError("labels are required for a contingency table")
    labels = [adjust_hb(l) for l in labels]
    if len(labels) != clustering.n:
        raise DomainError(f"{len(labels)} labels for {clustering.n} items")
    index = {g: i for i, g in enumerate(grade_map.ladder)}
    counts = np.zeros((len(index), len(index)), dtype=int)
    for c, lab in zip(clustering.labels, labels):
        counts[index[grade_map.grade_of(int(c))], index[lab]] += 1
    return ContingencyTable(counts, grade_map.ladder)


def _require_items(table: ContingencyTable):
    if table.n < 1:
        raise DomainError("empty contingency table")


def ccr(table: ContingencyTable) -> float:
    """Correct classification rate: fraction on the diagonal."""
    _require_items(table)
    return float(np.trace(table.counts)) / table.n


def approx_ccr(table: ContingencyTable) -> float:
    """Fraction of items whose assigned and clinician grades are at most one
    ladder step apart."""
    _require_items(table)
    m = table.counts.shape[0]
    i, j = np.indices((m, m))
    return float(table.counts[np.abs(i - j) <= 1].sum()) / table.n


def silhouette(clustering: Clustering, dist: DistanceMatrix):
    """Per-item silhouette widths and their mean.

    Items alone in their cluster get width 0.
    """
    if clustering.k < 2:
        raise DomainError("silhouette needs at least 2 clusters")
    d = dist.values
    if d.shape[0] != clustering.n:
        raise DomainError("distance matrix and clustering sizes differ")
    labels = clustering.labels
    sizes = clustering.sizes
    # sums[i, c] = total distance from item i to members of cluster c
    onehot = labels[:, None] == np.arange(1, clustering.k + 1)[None, :]
    sums = d @ onehot
    own = labels - 1
    idx = np.arange(clustering.n)
    own_size = sizes[own]
    a = np.where(own_size > 1, sums[idx, own] / np.maximum(own_size - 1, 1), 0.0)
    means = sums / sizes[None, :]
    means[idx, own] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    s[own_size == 1] = 0.0
    return s, float(s.mean())


def spearman(x, y) -> float:
    """Rank correlation with average ranks for ties."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise DomainError("spearman needs two equal-length sequences of length >= 2")
    rx, ry = rankdata(x), rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    if denom == 0:
        raise DegenerateError("correlation undefined for constant input")
    return float(np.clip((rx @ ry) / denom, -1.0, 1.0))


@dataclass
class AnalysisReport:
    route: str
    k: int
    n: int
    ccr: float
    approx_ccr: float
    silhouette: Optional[float]
    contingency: list
    sizes: list
    grades: list = field(default_factory=list)
    ladder: list = field(default_factory=lambda: list(GRADE_LADDER))
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def report(
    clustering: Optional[Clustering],
    grade_map: Optional[GradeMap],
    table: ContingencyTable,
    metrics: Optional[dict] = None,
    route: str = "",
) -> AnalysisReport:
    """Collect metrics for one route into a single record.

    ``metrics`` may carry a precomputed ``silhouette`` and any extra
    scalar fields.  ``clustering`` may be omitted when only a contingency
    table is available.
    """
    metrics = dict(metrics or {})
    if clustering is not None and clustering.n != table.n:
        raise DomainError(f"clustering has {clustering.n} items, table {table.n}")
    sizes = clustering.sizes.tolist() if clustering is not None else table.counts.sum(axis=1).tolist()
    grades = list(grade_map.grades) if grade_map is not None else list(table.ladder)
    sil = metrics.pop("silhouette", None)
    return AnalysisReport(
        route=route,
        k=len(sizes),
        n=table.n,
        ccr=ccr(table),
        approx_ccr=approx_ccr(table),
        silhouette=None if sil is None else float(sil),
        contingency=table.counts.tolist(),
        sizes=[int(s) for s in sizes],
        grades=[int(g) for g in grades],
        ladder=[int(g) for g in table.ladder],
        extra=metrics,
    )


def format_reports(reports) -> str:
    """Plain-text summary table: method, CCR, approximate CCR, silhouette."""
    rows = [("Method", "CCR", "Approx. CCR", "Silhouette")]
    for r in reports:
        sil = "-" if r.silhouette is None else f"{r.silhouette:.2f}"
        rows.append((r.route or "-", f"{r.ccr:.4f}", f"{r.approx_ccr:.4f}", sil))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
