import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdaclust.cluster.pipeline import ROUTES
from fdaclust.config import DEFAULT_TOML, PipelineConfig, parse_config, with_overrides
from fdaclust.errors import ConfigError


def test_default_toml_matches_dataclass():
    assert parse_config(DEFAULT_TOML) == PipelineConfig()


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.k == 4 and cfg.routes == ROUTES
    assert cfg.order == 4 and cfg.interior_knots == 9
    assert cfg.variance_threshold == 0.95 and cfg.linkage == "ward"
    assert cfg.cluster_params("ts-dtw").window is None


def test_int_promoted_to_float():
    assert parse_config("[basis]\nsmoothing_lambda = 1\n").smoothing_lambda == 1.0


def test_window_only_for_dtw():
    cfg = parse_config('[pipeline]\nroute = "ts-dtw"\n[algorithms]\ndtw_window = 5\n')
    assert cfg.cluster_params("ts-dtw").window == 5
    with pytest.raises(ConfigError):
        parse_config('[pipeline]\nroute = "fpc-pam"\n[algorithms]\ndtw_window = 5\n')


@pytest.mark.parametrize(
    "text",
    [
        "[pipeline\n",
        "[nope]\nx = 1\n",
        "[pipeline]\ncolour = 1\n",
        "[pipeline]\nk = 'four'\n",
        "[pipeline]\nk = true\n",
        "[pipeline]\nroute = 'magic'\n",
        "[pipeline]\nindicator = 'smiling'\n",
        "[pipeline]\nk = 0\n",
        "[algorithms]\nfuzzifier = 1.0\n",
        "[algorithms]\nlinkage = 'centroid'\n",
        "[fpca]\nq = -1\n",
        "pipeline = 3\n",
    ],
)
def test_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_overrides():
    cfg = with_overrides(PipelineConfig(), seed=9, route=None)
    assert cfg.seed == 9 and cfg.route == "all"
    assert with_overrides(cfg) is cfg


@given(st.integers(0, 2**31), st.sampled_from(ROUTES + ("all",)), st.integers(2, 8))
def test_toml_round_trip(seed, route, k):
    text = f'[pipeline]\nseed = {seed}\nroute = "{route}"\nk = {k}\n'
    cfg = parse_config(text)
    assert (cfg.seed, cfg.route, cfg.k) == (seed, route, k)
