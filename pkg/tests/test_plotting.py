import xml.etree.ElementTree as ET

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from fdaclust.plotting import _f, curves_svg, membership_svg, scatter_matrix_svg, scree_svg

SVG = "{http://www.w3.org/2000/svg}"


def parse(svg):
    root = ET.fromstring(svg.encode())
    assert root.tag == SVG + "svg"
    return root


def count(root, tag):
    return len(root.findall(f".//{SVG}{tag}"))


def test_single_curve():
    grid = np.linspace(0, 1, 11)
    root = parse(curves_svg(grid, np.ones((1, 11))))
    assert count(root, "path") >= 2


def test_grouped_curves_legend():
    grid = np.linspace(0, 1, 5)
    root = parse(curves_svg(grid, np.random.default_rng(0).normal(size=(6, 5)), groups=[1, 1, 2, 2, 3, 3]))
    assert count(root, "rect") == 1 + 3
    assert sum("cluster" in (t.text or "") for t in root.iter(SVG + "text")) == 3


def test_membership_bars():
    u = np.array([[0.5, 0.5], [1.0, 0.0], [0.2, 0.8]])
    assert count(parse(membership_svg(u)), "rect") == 1 + 6 + 2


def test_scree_and_scatter():
    assert count(parse(scree_svg([3.0, 1.0, 0.5, 0.0])), "circle") == 6
    assert count(parse(scatter_matrix_svg(np.arange(12.0).reshape(4, 3), groups=[1, 2, 1, 2])), "circle") == 4 * 6
    assert count(parse(scatter_matrix_svg(np.zeros((3, 1)))), "circle") == 0


def test_number_format():
    assert _f(-0.001) == "0.00"
    assert _f(1.005) in ("1.00", "1.01")
    assert "nan" not in curves_svg([0.0, 1.0], [[2.0, 2.0]])


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(2, 20), st.integers(0, 1000))
def test_deterministic_and_well_formed(n, m, seed):
    values = np.random.default_rng(seed).normal(size=(n, m))
    grid = np.linspace(0, 1, m)
    a = curves_svg(grid, values, groups=[i % 3 + 1 for i in range(n)])
    assert a == curves_svg(grid, values, groups=[i % 3 + 1 for i in range(n)])
    assert count(parse(a), "path") > 0
