import math

import numpy as np
import pytest
from scipy import integrate, optimize

from dudesim.geometry import (
    Association,
    NetworkLayout,
    OutOfCoverageError,
    Point,
    apollonius_circle,
    circular_segment_area,
    classify,
    classify_xy,
    dl_constant_k,
    dl_prefers_macro,
    region_area_mc,
    region_area_semi_analytic,
    ul_prefers_small,
)
from dudesim.linkbudget import CellRadioConfig, path_loss_db

K_TABLE = 10 ** (2 / 3)


def test_k_matches_numeric_root():
    root = optimize.brentq(lambda x: (40 - path_loss_db(x * 50.0)) - (20 - path_loss_db(50.0)), 1.0, 100.0, xtol=1e-14)
    assert dl_constant_k(40, 20) == pytest.approx(root, rel=1e-9)
    assert dl_constant_k(40, 20) == pytest.approx(4.641588833613, rel=1e-12)


def test_k_other_values():
    assert dl_constant_k(30, 0) == pytest.approx(10.0)
    assert 1.0 < dl_constant_k(20.0, 20.0 - 1e-9) < 1.0 + 1e-9


@pytest.mark.parametrize("m, s", [(20, 20), (20, 40)])
def test_k_requires_dominant_macro(m, s):
    with pytest.raises(ValueError):
        dl_constant_k(m, s)


def test_ul_predicate(line_layout):
    assert not ul_prefers_small(Point(500, 0), line_layout)
    assert ul_prefers_small(Point(1000, 0), line_layout)
    assert ul_prefers_small(Point(600, 0), line_layout)


def test_dl_predicate(line_layout):
    assert not dl_prefers_macro(Point(1000, 0), line_layout, K_TABLE)
    assert dl_prefers_macro(Point(0, 0), line_layout, K_TABLE)
    assert dl_prefers_macro(Point(600, 0), line_layout, 4.6416)


def test_classify_examples(line_layout):
    assert classify(Point(0, 0), line_layout, K_TABLE) is Association.COUPLED_MACRO
    assert classify(Point(1000, 0), line_layout, K_TABLE) is Association.COUPLED_SMALL
    assert classify(Point(600, 0), line_layout, 4.6416) is Association.DECOUPLED


def test_classify_out_of_coverage(line_layout):
    with pytest.raises(OutOfCoverageError):
        classify(Point(2500, 0), line_layout, K_TABLE)


def test_apollonius_example(line_layout):
    c = apollonius_circle(line_layout, 4.6416)
    # closed form k^2 S / (k^2 - 1), k |MS| / (k^2 - 1)
    assert c.center.x == pytest.approx(1048.675, abs=0.01)
    assert c.center.y == 0.0
    assert c.radius_m == pytest.approx(225.93, abs=0.01)


def test_apollonius_boundary_ratio(line_layout):
    c = apollonius_circle(line_layout, K_TABLE)
    for t in np.linspace(0, 2 * math.pi, 360, endpoint=False):
        q = Point(c.center.x + c.radius_m * math.cos(t), c.center.y + c.radius_m * math.sin(t))
        ratio = q.distance_to(line_layout.macro_pos) / q.distance_to(line_layout.small_pos)
        assert ratio == pytest.approx(K_TABLE, rel=1e-9)


def test_apollonius_boundary_flips_dl_preference(line_layout):
    c = apollonius_circle(line_layout, K_TABLE)
    for t in np.linspace(0, 2 * math.pi, 72, endpoint=False):
        u = (math.cos(t), math.sin(t))
        inner = Point(c.center.x + (c.radius_m - 1e-3) * u[0], c.center.y + (c.radius_m - 1e-3) * u[1])
        outer = Point(c.center.x + (c.radius_m + 1e-3) * u[0], c.center.y + (c.radius_m + 1e-3) * u[1])
        assert not dl_prefers_macro(inner, line_layout, K_TABLE)
        assert dl_prefers_macro(outer, line_layout, K_TABLE)


def test_apollonius_limits_and_symmetry(line_layout):
    big = apollonius_circle(line_layout, 1e6)
    assert big.center.distance_to(line_layout.small_pos) < 1e-2
    assert big.radius_m < 1e-2
    mirrored = NetworkLayout(
        Point(0, 0), line_layout.macro_radio, Point(-1000, 0), line_layout.small_radio
    )
    c, cm = apollonius_circle(line_layout, K_TABLE), apollonius_circle(mirrored, K_TABLE)
    assert cm.center.x == pytest.approx(-c.center.x)
    assert cm.radius_m == pytest.approx(c.radius_m)


def _expanded_ul_test(x, y, m, s):
    # (x-XM)^2+(y-YM)^2 > (x-XS)^2+(y-YS)^2 expanded, orientation d_M > d_S
    return x * (s.x - m.x) + y * (s.y - m.y) - (s.x**2 - m.x**2 + s.y**2 - m.y**2) / 2 > 0


def test_expanded_half_plane_agrees_with_distances():
    rng = np.random.default_rng(5)
    m, s = Point(120.0, -40.0), Point(610.0, 230.0)
    lay = NetworkLayout(m, CellRadioConfig(40, 5000), s, CellRadioConfig(20, 35))
    pts = rng.uniform(-2000, 2000, size=(100_000, 2))
    direct = np.hypot(pts[:, 0] - m.x, pts[:, 1] - m.y) > np.hypot(pts[:, 0] - s.x, pts[:, 1] - s.y)
    expanded = _expanded_ul_test(pts[:, 0], pts[:, 1], m, s)
    assert np.array_equal(direct, expanded)
    for p in pts[:200]:
        assert ul_prefers_small(Point(*p), lay) == _expanded_ul_test(p[0], p[1], m, s)


def test_classification_exclusive_and_consistent(line_layout):
    rng = np.random.default_rng(11)
    pts = rng.uniform(-1400, 1400, size=(5000, 2))
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= 2000]
    codes = classify_xy(pts[:, 0], pts[:, 1], line_layout, K_TABLE)
    for (x, y), code in zip(pts, codes):
        p = Point(x, y)
        a = classify(p, line_layout, K_TABLE)
        assert a == code
        if a is Association.DECOUPLED:
            d_m, d_s = p.distance_to(line_layout.macro_pos), p.distance_to(line_layout.small_pos)
            assert d_s < d_m < K_TABLE * d_s


def test_circular_segment_against_quadrature():
    r, h = 1000.0, 250.0
    quad, _ = integrate.quad(lambda x: 2 * math.sqrt(r * r - x * x), h, r)
    assert circular_segment_area(r, h) == pytest.approx(quad, rel=1e-9)
    assert circular_segment_area(r, 0.0) == pytest.approx(math.pi * r * r / 2)


def test_region_area_semi_analytic_default():
    from dudesim.scenario import default_layout

    assert region_area_semi_analytic(default_layout(), K_TABLE) == pytest.approx(1035964.3837, rel=1e-9)


def test_region_area_mc_matches_semi_analytic():
    from dudesim.scenario import default_layout

    lay = default_layout()
    area, se = region_area_mc(lay, K_TABLE, 200_000, seed=3)
    assert abs(area - region_area_semi_analytic(lay, K_TABLE)) < 3 * se


def test_region_area_mc_deterministic_and_worker_independent(line_layout):
    a = region_area_mc(line_layout, K_TABLE, 50_000, seed=9, batch_size=4096)
    b = region_area_mc(line_layout, K_TABLE, 50_000, seed=9, batch_size=4096, workers=4)
    assert a == b
    assert a == region_area_mc(line_layout, K_TABLE, 50_000, seed=9, batch_size=4096)


def test_region_area_mc_error_scaling(line_layout):
    _, se1 = region_area_mc(line_layout, K_TABLE, 100_000, seed=1)
    _, se4 = region_area_mc(line_layout, K_TABLE, 400_000, seed=2)
    assert se4 / se1 == pytest.approx(0.5, rel=0.05)
    _, se2 = region_area_mc(line_layout, K_TABLE, 200_000, seed=2)
    assert se2 / se1 == pytest.approx(1 / math.sqrt(2), rel=0.05)


def test_region_area_mc_rejects_bad_layout():
    lay = NetworkLayout(Point(0, 0), CellRadioConfig(20, 1000), Point(300, 0), CellRadioConfig(30, 35))
    with pytest.raises(ValueError):
        region_area_mc(lay, None, 10_000, seed=0)
    with pytest.raises(ValueError):
        region_area_mc(lay, 2.0, 10, seed=0)


def test_layout_invariants():
    radio = CellRadioConfig(40, 1000)
    with pytest.raises(ValueError):
        NetworkLayout(Point(0, 0), radio, Point(0, 0), CellRadioConfig(20, 35))
    with pytest.raises(ValueError):
        NetworkLayout(Point(0, 0), radio, Point(1500, 0), CellRadioConfig(20, 35))
    with pytest.raises(ValueError):
        Point(math.nan, 0)
