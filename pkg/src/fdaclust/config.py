"""Pipeline configuration stored as TOML."""

from __future__ import annotations

import sys
from dataclasses import dataclass, fields, replace
from typing import Optional

from .cluster.pipeline import ROUTES, ClusterParams
from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_TOML = """\
# fdaclust pipeline configuration.

[pipeline]
# Indicator curve to cluster: <exercise>.<symmetry|intensity|speed>
indicator = "smiling.symmetry"
# One of ts-dtw, ts-fuzzy, basis-coeff, fpc-kmeans, fpc-hier, fpc-pam,
# fpc-gmm, or "all" to run every route.
route = "all"
# Number of clusters; grade assignment needs 4 (ladder HB1, HB2, HB3, HB6).
k = 4
# Master seed; each stage derives its own stream from it.
seed = 0
# Points of the common evaluation grid on [0, 1].
grid_size = 101

[registration]
enabled = true
# Landmarks per curve (extremal deviation points).
landmarks = 1

[basis]
# Spline order (4 = cubic) and number of equally spaced interior knots.
order = 4
interior_knots = 9
# Roughness penalty weight; 0 is plain least squares.
smoothing_lambda = 0.0

[fpca]
# Keep the smallest number of components reaching this explained variance.
variance_threshold = 0.95
# Fixed number of components; 0 selects by variance_threshold.
q = 0

[algorithms]
# Fuzzy c-means fuzzifier (> 1).
fuzzifier = 2.0
# Sakoe-Chiba band half-width for DTW; -1 disables the band.
dtw_window = -1
# single, complete, average or ward.
linkage = "ward"
# Mixture covariance: auto (lowest BIC), diagonal or full.
covariance = "auto"
restarts = 10
max_iter = 300
tol = 1e-6
"""


@dataclass(frozen=True)
class PipelineConfig:
    indicator: str = "smiling.symmetry"
    route: str = "all"
    k: int = 4
    seed: int = 0
    grid_size: int = 101
    registration: bool = True
    landmarks: int = 1
    order: int = 4
    interior_knots: int = 9
    smoothing_lambda: float = 0.0
    variance_threshold: float = 0.95
    q: int = 0
    fuzzifier: float = 2.0
    dtw_window: int = -1
    linkage: str = "ward"
    covariance: str = "auto"
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-6

    def __post_init__(self):
        if self.route != "all" and self.route not in ROUTES:
            raise ConfigError(f"route must be 'all' or one of {ROUTES}, got {self.route!r}")
        if self.dtw_window >= 0 and self.route not in ("all", "ts-dtw"):
            raise ConfigError(f"dtw_window is set but route {self.route!r} does not use DTW")
        if self.grid_size < 2:
            raise ConfigError("grid_size must be at least 2")
        if self.landmarks < 1:
            raise ConfigError("landmarks must be at least 1")
        if self.q < 0:
            raise ConfigError("q must be >= 0")
        if "." not in self.indicator:
            raise ConfigError(f"indicator must look like <exercise>.<kind>, got {self.indicator!r}")
        self.cluster_params()

    @property
    def routes(self) -> tuple:
        return ROUTES if self.route == "all" else (self.route,)

    def cluster_params(self, route: Optional[str] = None) -> ClusterParams:
        try:
            return ClusterParams(
                k=self.k,
                seed=self.seed,
                basis_order=self.order,
                n_knots=self.interior_knots,
                smoothing_lambda=self.smoothing_lambda,
                q_threshold=self.variance_threshold,
                q=self.q or None,
                fuzzifier=self.fuzzifier,
                window=self.dtw_window if self.dtw_window >= 0 and route == "ts-dtw" else None,
                linkage=self.linkage,
                covariance=self.covariance,
                restarts=self.restarts,
                max_iter=self.max_iter,
                tol=self.tol,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


_SECTIONS = {
    "pipeline": {"indicator", "route", "k", "seed", "grid_size"},
    "registration": {"enabled": "registration", "landmarks": "landmarks"},
    "basis": {"order", "interior_knots", "smoothing_lambda"},
    "fpca": {"variance_threshold", "q"},
    "algorithms": {"fuzzifier", "dtw_window", "linkage", "covariance", "restarts", "max_iter", "tol"},
}


def config_from_dict(doc: dict) -> PipelineConfig:
    values = {}
    types = {f.name: f.type for f in fields(PipelineConfig)}
    for section, body in doc.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        keys = _SECTIONS[section]
        for key, value in body.items():
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            name = keys[key] if isinstance(keys, dict) else key
            want = types[name]
            if want == "float" and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            expected = {"int": int, "float": float, "str": str, "bool": bool}[want]
            if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
                raise ConfigError(f"[{section}] {key} must be {want}, got {value!r}")
            values[name] = value
    return PipelineConfig(**values)


def parse_config(text: str) -> PipelineConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    return config_from_dict(doc)


def with_overrides(cfg: PipelineConfig, **overrides) -> PipelineConfig:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg
