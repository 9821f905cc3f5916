"""Command-line frontend.

Every subcommand reads files and writes files into ``--out-dir``.  Failures
print ``error: <category>: <message>`` on stderr and exit with the code of
the error class (3 missing file, 4 parse or schema, 5 config, 6 domain).
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .analysis import RouteOutcome, evaluate_route, ingest_directory, prepare, run_analysis
from .basis import equispaced_basis, fit_many
from .cluster.pipeline import ROUTES, cluster_coefficients, cluster_scores, run_route
from .config import DEFAULT_TOML, PipelineConfig, parse_config, tomllib, with_overrides
from .curve_model import GRADE_LADDER, Cohort
from .errors import ConfigError, FdaclustError, MissingFileError, SchemaError
from .evaluation import (
    assign_grades,
    cluster_levels,
    contingency,
    format_reports,
    grade_map_from_levels,
    report,
    silhouette,
)
from .fpca import choose_q, fit_fpca, scores
from .plotting import curves_svg, membership_svg, scatter_matrix_svg, scree_svg
from .rng import derive_seed, make_rng
from .synth import CohortSpec, RawArchetype, generate_cohort, generate_raw_measurement

log = logging.getLogger("fdaclust")

CONFIG_FILE = "fdaclust.toml"
FD_FILE = "functional_data.json"
FPCA_FILE = "fpca.json"
SCORES_FILE = "scores.csv"
REPORT_JSON = "report.json"
REPORT_TXT = "report.txt"


class _Ctx:
    def __init__(self, args):
        self.args = args
        self.out = Path(args.out_dir)
        self.quiet = args.quiet
        text = io.read_text(args.config) if args.config else DEFAULT_TOML
        cfg = parse_config(text)
        overrides = {"seed": args.seed}
        for name in ("route", "indicator", "k"):
            overrides[name] = getattr(args, name, None)
        try:
            self.cfg = with_overrides(cfg, **overrides)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def say(self, text: str):
        if not self.quiet:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        io.write_text(path, text)
        log.info("wrote %s", path)
        return path


# --- helpers -------------------------------------------------------------

def _load_cohort(ctx: _Ctx, path, labels=None) -> Cohort:
    return io.load_cohort(path, labels, ctx.cfg.grid_size)


def _sniff(path: Path) -> str:
    """Artifact kind from its header or top-level JSON shape."""
    if path.suffix == ".json":
        obj = io.load_json(path)
        if isinstance(obj, list):
            return "functional-data"
        if isinstance(obj, dict) and "eigenvalues" in obj:
            return "fpca"
        if isinstance(obj, dict) and "labels" in obj and "route" in obj:
            return "clustering"
        if isinstance(obj, dict) and "ccr" in obj:
            return "report"
        raise SchemaError(f"{path}: unrecognized JSON artifact")
    head = next(csv.reader(_io.StringIO(io.read_text(path))), [])
    head = [h.strip() for h in head]
    if head == ["id", "time", "value"]:
        return "cohort"
    if head[:2] == ["id", "pc1"]:
        return "scores"
    if head[:2] == ["id", "u1"]:
        return "membership"
    if head and head[0] == "" and all(h.upper().startswith("HB") for h in head[1:]):
        return "contingency"
    if head == ["exercise", "frame_time", "poi", "x", "y", "z"]:
        return "measurement"
    raise SchemaError(f"{path}: unrecognized CSV header {','.join(head)!r}")


def _clustering_extra(outcome, ids) -> dict:
    res = outcome.result
    extra = {
        "cluster_levels": list(outcome.levels),
        "silhouette": outcome.silhouette,
        "distance_metric": res.distances.metric,
    }
    if outcome.grade_map is not None:
        extra["grades"] = list(outcome.grade_map.grades)
    if res.q is not None:
        extra["q"] = int(res.q)
    if res.gmm is not None:
        extra["covariance"] = res.gmm.covariance
        extra["bic"] = float(res.gmm.bic)
    return extra


def _write_route(ctx: _Ctx, outcome, ids) -> None:
    res = outcome.result
    rec = io.clustering_record(res.clustering, res.route, ids, _clustering_extra(outcome, ids))
    ctx.write(f"clustering.{res.route}.json", io.dump_json(rec))
    if res.fuzzy is not None:
        ctx.write(f"membership.{res.route}.csv", io.membership_to_csv(ids, res.fuzzy))


def _features_outcome(res, grid_values) -> RouteOutcome:
    """Outcome for a route run on precomputed features.

    Without curves (``grid_values`` is None) no grade map can be derived.
    """
    clus = res.clustering
    sil = silhouette(clus, res.distances)[1] if clus.k > 1 else 0.0
    if grid_values is None:
        return RouteOutcome(res, (), float(sil))
    levels = cluster_levels(clus, grid_values)
    gmap = grade_map_from_levels(levels) if clus.k == len(GRADE_LADDER) else None
    return RouteOutcome(res, tuple(float(v) for v in levels), float(sil), gmap)


# --- subcommands ---------------------------------------------------------

def cmd_init(ctx: _Ctx) -> int:
    path = Path(ctx.args.output) if ctx.args.output else ctx.out / CONFIG_FILE
    if path.exists() and not ctx.args.force:
        raise ConfigError(f"{path} exists; pass --force to overwrite")
    io.write_text(path, DEFAULT_TOML)
    ctx.say(f"wrote {path}")
    return 0


def cmd_synth(ctx: _Ctx) -> int:
    a = ctx.args
    spec_dict = {}
    if a.spec:
        text = io.read_text(a.spec)
        spec_dict = json.loads(text) if a.spec.endswith(".json") else _toml(text)
    if a.seed is not None:
        spec_dict["seed"] = a.seed
    spec = CohortSpec.from_dict(spec_dict)
    cohort = generate_cohort(spec)
    path = ctx.out / a.name
    io.save_cohort(path, cohort)
    ctx.say(f"wrote {path} ({len(cohort)} curves)")
    if a.raw:
        exercises = tuple(a.raw_exercises.split(",")) if a.raw_exercises else (ctx.cfg.indicator.split(".")[0],)
        raw_dir = ctx.out / "raw"
        depth = dict(zip(spec.grades, spec.depths))
        rng = make_rng(derive_seed(spec.seed, "synth:raw"))
        for cid, lab in zip(cohort.ids, cohort.labels):
            asym = depth[lab.raw]
            if spec.depth_jitter > 0:
                asym = float(np.clip(asym + rng.normal(0.0, spec.depth_jitter), 0.0, 0.99))
            arch = RawArchetype(asym=asym, center=spec.center, exercises=exercises)
            io.write_text(raw_dir / f"{cid}.csv", generate_raw_measurement(arch, derive_seed(spec.seed, f"raw:{cid}"), cid))
        io.write_text(raw_dir / io.LABELS_FILE, io.labels_to_csv(cohort.ids, cohort.labels))
        ctx.say(f"wrote {len(cohort)} raw recordings to {raw_dir}")
    return 0


def _toml(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None


def cmd_ingest(ctx: _Ctx) -> int:
    cohort = ingest_directory(ctx.args.raw_dir, ctx.cfg.indicator, ctx.cfg.grid_size)
    path = ctx.out / f"{ctx.cfg.indicator}.csv"
    io.save_cohort(path, cohort)
    ctx.say(f"wrote {path} ({len(cohort)} curves)")
    return 0


def cmd_smooth(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    prepared = prepare(_load_cohort(ctx, ctx.args.cohort), cfg)
    data = fit_many(equispaced_basis(cfg.order, cfg.interior_knots), prepared.curves, cfg.smoothing_lambda)
    ctx.write(FD_FILE, io.functional_data_to_json(data))
    ctx.say(f"smoothed {len(data)} curves onto {data[0].basis.n_basis} basis functions")
    return 0


def cmd_fpca(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    data = io.functional_data_from_json(io.load_json(ctx.args.functional_data))
    model = fit_fpca(data)
    q = cfg.q or choose_q(model, cfg.variance_threshold)
    ctx.write(FPCA_FILE, io.dump_json(model.to_record()))
    ctx.write(SCORES_FILE, io.scores_to_csv(scores(data, model, q)))
    ctx.say(f"kept {q} components")
    return 0


def cmd_cluster(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    path = Path(ctx.args.input)
    kind = _sniff(path)
    routes = cfg.routes
    if kind == "cohort":
        prepared = prepare(_load_cohort(ctx, path), cfg)
        ids = prepared.ids
        outcomes = [evaluate_route(run_route(prepared, r, cfg.cluster_params(r)), prepared) for r in routes]
    elif kind in ("functional-data", "scores"):
        grid = np.linspace(0.0, 1.0, cfg.grid_size)
        levels_source = None
        if kind == "functional-data":
            data = io.functional_data_from_json(io.load_json(path))
            ids = [d.id for d in data]
            levels_source = np.vstack([d(grid) for d in data])
            results = []
            for r in routes:
                params = cfg.cluster_params(r)
                if r == "basis-coeff":
                    results.append(cluster_coefficients(data, params, ids))
                elif r.startswith("fpc-"):
                    model = fit_fpca(data)
                    q = params.q or choose_q(model, params.q_threshold)
                    results.append(cluster_scores(scores(data, model, q), r, params))
                else:
                    raise ConfigError(f"route {r!r} needs a cohort file, not functional data")
        else:
            sm = io.scores_from_csv(io.read_text(path))
            ids = list(sm.ids)
            if any(not r.startswith("fpc-") for r in routes):
                raise ConfigError("a score file can only feed the fpc-* routes; pick one with --route")
            results = [cluster_scores(sm, r, cfg.cluster_params(r)) for r in routes]
        outcomes = [_features_outcome(res, levels_source) for res in results]
    else:
        raise SchemaError(f"{path}: cannot cluster a {kind} file")
    for o in outcomes:
        _write_route(ctx, o, ids)
        ctx.say(f"{o.result.route}: sizes {o.result.clustering.sizes.tolist()}, silhouette {o.silhouette:.3f}")
    return 0


def cmd_evaluate(ctx: _Ctx) -> int:
    a = ctx.args
    if a.table:
        table = io.contingency_from_csv(io.read_text(a.table))
        reports = [report(None, None, table, route=Path(a.table).stem)]
    else:
        if not a.clustering:
            raise ConfigError("evaluate needs clustering files or --table")
        reports = []
        for cpath in a.clustering:
            rec = io.load_json(cpath)
            clus = io.clustering_from_record(rec)
            ids = rec.get("ids", [])
            if a.cohort:
                cohort = prepare(_load_cohort(ctx, a.cohort, a.labels), ctx.cfg)
                if cohort.ids != ids:
                    raise SchemaError("cohort ids do not match the clustering")
                grade_map = assign_grades(clus, cohort.on_grid())
                labels = cohort.labels
            else:
                if not rec.get("cluster_levels"):
                    raise ConfigError("clustering has no cluster levels; pass --cohort")
                grade_map = grade_map_from_levels(rec["cluster_levels"])
                labels = None
            if a.labels and not a.cohort:
                labels = io.align_labels(ids, io.labels_from_csv(io.read_text(a.labels)))
            if labels is None:
                raise ConfigError("evaluation needs clinician labels (--labels or labels.csv beside the cohort)")
            table = contingency(grade_map, clus, labels)
            metrics = {"silhouette": rec["silhouette"]} if "silhouette" in rec else {}
            reports.append(report(clus, grade_map, table, metrics, route=rec.get("route", "")))
    for r in reports:
        ctx.write(f"report.{r.route or 'table'}.json", r.to_json())
    ctx.say(format_reports(reports).rstrip("\n"))
    return 0


def cmd_plot(ctx: _Ctx) -> int:
    a = ctx.args
    path = Path(a.artifact)
    kind = _sniff(path)
    if kind == "cohort":
        cohort = _load_cohort(ctx, path)
        svg = curves_svg(cohort.grid, cohort.on_grid(), title=f"{path.stem} curves", ylabel=ctx.cfg.indicator)
    elif kind == "clustering":
        if not a.cohort:
            raise ConfigError("plotting a clustering needs --cohort")
        rec = io.load_json(path)
        cohort = prepare(_load_cohort(ctx, a.cohort), ctx.cfg)
        svg = _cluster_plot(cohort, rec["labels"], rec.get("grades"), rec["route"], ctx.cfg.indicator)
    elif kind == "membership":
        _, u = io.membership_from_csv(io.read_text(path))
        svg = membership_svg(u)
    elif kind == "fpca":
        svg = scree_svg(io.fpca_from_json(io.load_json(path)).eigenvalues)
    elif kind == "scores":
        groups = io.load_json(a.clustering)["labels"] if a.clustering else None
        svg = scatter_matrix_svg(io.scores_from_csv(io.read_text(path)).values, groups)
    else:
        raise SchemaError(f"{path}: no plot for a {kind} file")
    out = ctx.write(a.output or f"{path.stem}.svg", svg)
    ctx.say(f"wrote {out}")
    return 0


def _cluster_plot(cohort: Cohort, labels, grades, route: str, ylabel: str) -> str:
    names = None
    if grades:
        names = [f"cluster {c + 1} (HB{g})" for c, g in enumerate(grades)]
    return curves_svg(cohort.grid, cohort.on_grid(), labels, title=f"{route} clusters", ylabel=ylabel, group_names=names)


def cmd_pipeline(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    src = Path(ctx.args.input)
    if src.is_dir():
        cohort = ingest_directory(src, cfg.indicator, cfg.grid_size)
    else:
        cohort = _load_cohort(ctx, src, ctx.args.labels)
    if cohort.labels is None:
        raise ConfigError("the pipeline needs clinician labels to evaluate clusters")
    ctx.write("config.toml", _config_toml(cfg))
    ctx.write("cohort.csv", io.cohort_to_csv(cohort.curves))
    ctx.write(io.LABELS_FILE, io.labels_to_csv(cohort.ids, cohort.labels))
    prepared = prepare(cohort, cfg)
    outcomes = run_analysis(cohort, cfg, prepared)
    ids = prepared.ids

    data = fit_many(equispaced_basis(cfg.order, cfg.interior_knots), prepared.curves, cfg.smoothing_lambda)
    model = fit_fpca(data)
    q = cfg.q or choose_q(model, cfg.variance_threshold)
    sm = scores(data, model, q)
    ctx.write(FD_FILE, io.functional_data_to_json(data))
    ctx.write(FPCA_FILE, io.dump_json(model.to_record()))
    ctx.write(SCORES_FILE, io.scores_to_csv(sm))

    reports = []
    for o in outcomes:
        _write_route(ctx, o, ids)
        reports.append(o.report)
        res = o.result
        ctx.write(f"clusters.{res.route}.svg", _cluster_plot(prepared, res.clustering.labels, o.grade_map.grades, res.route, cfg.indicator))
        if res.fuzzy is not None:
            ctx.write(f"membership.{res.route}.svg", membership_svg(res.fuzzy.membership))
    ctx.write("cohort.svg", curves_svg(prepared.grid, prepared.on_grid(), title="registered curves", ylabel=cfg.indicator))
    ctx.write("scree.svg", scree_svg(model.eigenvalues))
    first_fpc = next((o for o in outcomes if o.result.route.startswith("fpc-")), None)
    ctx.write("scores.svg", scatter_matrix_svg(sm.values, first_fpc.result.clustering.labels if first_fpc else None))

    ctx.write(REPORT_JSON, io.dump_json({"n": len(cohort), "q": int(q), "reports": [r.to_dict() for r in reports]}))
    table = format_reports(reports)
    ctx.write(REPORT_TXT, table)
    ctx.say(table.rstrip("\n"))
    return 0


def _config_toml(cfg: PipelineConfig) -> str:
    """Effective configuration as TOML, written alongside pipeline outputs."""
    sections = {
        "pipeline": ("indicator", "route", "k", "seed", "grid_size"),
        "registration": ("registration", "landmarks"),
        "basis": ("order", "interior_knots", "smoothing_lambda"),
        "fpca": ("variance_threshold", "q"),
        "algorithms": ("fuzzifier", "dtw_window", "linkage", "covariance", "restarts", "max_iter", "tol"),
    }
    values = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    lines = []
    for section, names in sections.items():
        lines.append(f"[{section}]")
        for name in names:
            key = "enabled" if name == "registration" else name
            lines.append(f"{key} = {_toml_value(values[name])}")
        lines.append("")
    return "\n".join(lines)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    return repr(v)


# --- argument parsing ----------------------------------------------------

def _globals(defaults: bool) -> argparse.ArgumentParser:
    # defaults only on the top-level parser, so flags work before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--config", default=d(None), help="TOML configuration file")
    p.add_argument("--seed", type=int, default=d(None), help="override the master seed")
    p.add_argument("--out-dir", default=d("."), help="directory for output artifacts")
    p.add_argument("--quiet", action="store_true", default=d(False), help="suppress summaries")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdaclust",
        description="Functional-data clustering of facial indicator curves.",
        parents=[_globals(True)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    g = [_globals(False)]

    p = sub.add_parser("init", parents=g, help="write an annotated default config")
    p.add_argument("-o", "--output", help=f"config path (default <out-dir>/{CONFIG_FILE})")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("synth", parents=g, help="generate a synthetic labelled cohort")
    p.add_argument("--spec", help="cohort spec (TOML or JSON table of CohortSpec fields)")
    p.add_argument("--name", default="cohort.csv", help="cohort file name")
    p.add_argument("--raw", action="store_true", help="also write raw landmark recordings under raw/")
    p.add_argument("--raw-exercises", help="comma-separated exercises (default: the indicator's)")
    p.add_argument("--indicator", help="indicator name, <exercise>.<kind>")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", parents=g, help="extract indicator curves from raw recordings")
    p.add_argument("raw_dir")
    p.add_argument("--indicator", help="indicator name, <exercise>.<kind>")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("smooth", parents=g, help="register and fit B-spline functional data")
    p.add_argument("cohort")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("fpca", parents=g, help="functional PCA model and scores")
    p.add_argument("functional_data")
    p.set_defaults(func=cmd_fpca)

    p = sub.add_parser("cluster", parents=g, help="cluster a cohort, functional data or scores")
    p.add_argument("input")
    p.add_argument("--route", choices=ROUTES + ("all",))
    p.add_argument("-k", type=int, help="number of clusters")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("evaluate", parents=g, help="agreement with clinician grades")
    p.add_argument("clustering", nargs="*", help="clustering JSON files")
    p.add_argument("--cohort", help="cohort the clustering was computed on")
    p.add_argument("--labels", help="labels CSV (id,hb_raw)")
    p.add_argument("--table", help="contingency table CSV instead of a clustering")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", parents=g, help="render an artifact as SVG")
    p.add_argument("artifact")
    p.add_argument("--cohort", help="cohort for clustering plots")
    p.add_argument("--clustering", help="clustering JSON colouring a score scatter")
    p.add_argument("-o", "--output", help="SVG file name inside --out-dir")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("pipeline", parents=g, help="run every stage and write the report")
    p.add_argument("input", help="cohort CSV or directory of raw recordings")
    p.add_argument("--labels", help="labels CSV (default: labels.csv beside the input)")
    p.add_argument("--route", choices=ROUTES + ("all",))
    p.add_argument("--indicator", help="indicator name, <exercise>.<kind>")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(_Ctx(args))
    except FdaclustError as exc:
        return _fail(exc.category, exc, exc.exit_code)
    except FileNotFoundError as exc:
        return _fail(MissingFileError.category, exc, MissingFileError.exit_code)
    except json.JSONDecodeError as exc:
        return _fail(SchemaError.category, exc, SchemaError.exit_code)
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        return _fail("internal", f"{type(exc).__name__}: {exc}", 1)


def _fail(category: str, exc, code: int) -> int:
    msg = " ".join(str(exc).split())
    sys.stderr.write(f"error: {category}: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
