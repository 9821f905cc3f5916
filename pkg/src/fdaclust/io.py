"""File formats for every pipeline artifact.

Floats are written with ``repr`` so values survive a round trip exactly
and repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .basis import FunctionalDatum
from .cluster.types import Clustering, FuzzyClustering
from .curve_model import DEFAULT_GRID_SIZE, Cohort, HBGrade, SampledCurve
from .errors import MissingFileError, ParseError, SchemaError
from .evaluation import ContingencyTable
from .fpca import FpcaModel, ScoreMatrix

LABELS_FILE = "labels.csv"


def _num(x) -> str:
    return repr(float(x))


def read_text(path) -> str:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"no such file: {path}")
    return path.read_text(encoding="utf-8")


def write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _rows(text: str, header: tuple, what: str):
    reader = csv.reader(io.StringIO(text))
    try:
        head = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise SchemaError(f"empty {what} file") from None
    if head != header:
        raise SchemaError(f"{what}: expected header {','.join(header)!r}, got {','.join(head)!r}")
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"{what}: expected {len(header)} fields", line=lineno)
        yield lineno, row


# --- cohorts -------------------------------------------------------------

def cohort_to_csv(curves) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("id", "time", "value"))
    for c in curves:
        for t, v in zip(c.times, c.values):
            w.writerow((c.id, _num(t), _num(v)))
    return out.getvalue()


def curves_from_csv(text: str) -> list[SampledCurve]:
    series: dict[str, tuple[list, list]] = {}
    for lineno, (cid, t, v) in _rows(text, ("id", "time", "value"), "cohort"):
        try:
            tv = (float(t), float(v))
        except ValueError as exc:
            raise ParseError(f"cohort: {exc}", line=lineno) from None
        times, values = series.setdefault(cid, ([], []))
        times.append(tv[0])
        values.append(tv[1])
    if not series:
        raise SchemaError("cohort file has no rows")
    curves = []
    for cid, (times, values) in series.items():
        try:
            curves.append(SampledCurve(times, values, cid))
        except ValueError as exc:
            raise SchemaError(f"cohort curve {cid!r}: {exc}") from None
    return curves


def labels_to_csv(ids, labels) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("id", "hb_raw"))
    for cid, lab in zip(ids, labels):
        w.writerow((cid, lab.raw if isinstance(lab, HBGrade) else int(lab)))
    return out.getvalue()


def labels_from_csv(text: str) -> dict[str, HBGrade]:
    out = {}
    for lineno, (cid, raw) in _rows(text, ("id", "hb_raw"), "labels"):
        try:
            out[cid] = HBGrade(int(raw))
        except ValueError as exc:
            raise ParseError(f"labels: {exc}", line=lineno) from None
    return out


def align_labels(ids, labels: dict) -> tuple:
    missing = [i for i in ids if i not in labels]
    if missing:
        raise SchemaError(f"no label for ids {missing[:5]}{'...' if len(missing) > 5 else ''}")
    return tuple(labels[i] for i in ids)


def load_cohort(path, labels_path=None, grid_size: int = DEFAULT_GRID_SIZE) -> Cohort:
    """Read a long-format cohort; labels default to ``labels.csv`` beside it."""
    path = Path(path)
    curves = curves_from_csv(read_text(path))
    if labels_path is None and (path.parent / LABELS_FILE).is_file():
        labels_path = path.parent / LABELS_FILE
    labels = None
    if labels_path is not None:
        labels = align_labels([c.id for c in curves], labels_from_csv(read_text(labels_path)))
    return Cohort.build(curves, labels, grid_size)


def save_cohort(path, cohort: Cohort, with_labels: bool = True):
    path = Path(path)
    write_text(path, cohort_to_csv(cohort.curves))
    if with_labels and cohort.labels is not None:
        write_text(path.parent / LABELS_FILE, labels_to_csv(cohort.ids, cohort.labels))


# --- JSON records --------------------------------------------------------

def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_json(path):
    text = read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})", line=exc.lineno) from None


def functional_data_to_json(data) -> str:
    return dump_json([d.to_record() for d in data])


def functional_data_from_json(obj) -> list[FunctionalDatum]:
    if not isinstance(obj, list):
        raise SchemaError("functional data file must hold a JSON array of records")
    try:
        return [FunctionalDatum.from_record(r) for r in obj]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad functional datum record: {exc}") from None


def fpca_from_json(obj) -> FpcaModel:
    try:
        return FpcaModel.from_record(obj)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad FPCA model record: {exc}") from None


def scores_to_csv(sm: ScoreMatrix) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    q = sm.values.shape[1]
    w.writerow(("id", *[f"pc{j + 1}" for j in range(q)]))
    for cid, row in zip(sm.ids, sm.values):
        w.writerow((cid, *[_num(v) for v in row]))
    return out.getvalue()


def scores_from_csv(text: str) -> ScoreMatrix:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "id" or any(h != f"pc{j + 1}" for j, h in enumerate(header[1:])):
        raise SchemaError("scores: expected header id,pc1..pcq")
    ids, rows = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError("scores: wrong field count", line=lineno)
        ids.append(row[0])
        rows.append([float(v) for v in row[1:]])
    return ScoreMatrix(np.array(rows).reshape(len(rows), len(header) - 1), tuple(ids))


def clustering_record(clustering: Clustering, route: str, ids, extra: dict | None = None) -> dict:
    rec = {
        "route": route,
        "k": clustering.k,
        "seed": clustering.seed,
        "labels": clustering.labels.tolist(),
        "sizes": clustering.sizes.tolist(),
        "objective": clustering.objective,
        "objective_trace": list(clustering.objective_trace),
        "iterations": clustering.iterations,
        "method": clustering.method,
        "params": clustering.params,
        "ids": list(ids),
    }
    if clustering.medoids is not None:
        rec["medoids"] = list(clustering.medoids)
    rec.update(extra or {})
    return rec


def clustering_from_record(rec: dict) -> Clustering:
    try:
        return Clustering(
            np.array(rec["labels"], dtype=int),
            int(rec["k"]),
            objective=float(rec.get("objective", 0.0)),
            seed=rec.get("seed"),
            iterations=int(rec.get("iterations", 0)),
            objective_trace=tuple(rec.get("objective_trace", ())),
            medoids=tuple(rec["medoids"]) if "medoids" in rec else None,
            method=rec.get("method", ""),
            params=rec.get("params", {}),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad clustering record: {exc}") from None


def membership_to_csv(ids, fz: FuzzyClustering) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("id", *[f"u{c + 1}" for c in range(fz.k)]))
    for cid, row in zip(ids, fz.membership):
        w.writerow((cid, *[_num(v) for v in row]))
    return out.getvalue()


def membership_from_csv(text: str) -> tuple[list, np.ndarray]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "id" or any(h != f"u{c + 1}" for c, h in enumerate(header[1:])):
        raise SchemaError("membership: expected header id,u1..uk")
    ids, rows = [], []
    for row in reader:
        if row:
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    return ids, np.array(rows)


def contingency_to_csv(table: ContingencyTable) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    names = [f"HB{g}" for g in table.ladder]
    w.writerow(("", *names))
    for name, row in zip(names, table.counts):
        w.writerow((name, *[int(v) for v in row]))
    return out.getvalue()


def contingency_from_csv(text: str) -> ContingencyTable:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise SchemaError("empty contingency file")
    header = [h.strip() for h in rows[0][1:]]
    try:
        ladder = tuple(int(h.upper().removeprefix("HB")) for h in header)
        counts = [[int(v) for v in r[1:]] for r in rows[1:]]
    except ValueError as exc:
        raise SchemaError(f"contingency: {exc}") from None
    if [r[0].strip() for r in rows[1:]] != header:
        raise SchemaError("contingency: row names must match column names")
    return ContingencyTable(np.array(counts), ladder)
