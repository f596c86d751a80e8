import dataclasses
import itertools

import numpy as np
import pytest

from dudesim.geometry import Association
from dudesim.mobility import MobilityParams
from dudesim.scenario import (
    CampaignAssertionError,
    CompareKnobs,
    ScenarioConfig,
    ScenarioResult,
    TransitKnobs,
    ZoneKnobs,
    check_transit,
    run_decoupling_time_campaign,
    run_formula_comparison,
    run_region_campaign,
    run_transit_campaign,
    run_zone_campaign,
    transit_landmarks,
)


@pytest.fixture(scope="module")
def transit():
    return run_transit_campaign(ScenarioConfig())


def test_result_columns_equal_length():
    with pytest.raises(ValueError):
        ScenarioResult("bad", {"a": [1.0], "b": [1.0, 2.0]})


def test_landmarks_from_geometry():
    marks = transit_landmarks(ScenarioConfig())
    k = 10 ** (2 / 3)
    assert marks["B"] == pytest.approx(250.0, abs=1e-3)
    assert marks["C"] == pytest.approx(k * 500 / (1 + k), abs=1e-3)


def test_transit_policies(transit):
    c = transit.columns
    marks = transit.metadata["landmarks_m"]
    for i, x in enumerate(c["position_m"]):
        if x < marks["B"] or x > marks["C"]:
            assert c["se_coupled"][i] == c["se_decoupled"][i]
        elif marks["B"] < x < marks["C"]:
            assert c["association"][i] == Association.DECOUPLED
            assert c["se_decoupled"][i] > c["se_coupled"][i]
            assert c["tx_target_decoupled_dbm"][i] < c["tx_target_coupled_dbm"][i]


def test_transit_speed_columns(transit):
    pos = np.array(transit.columns["position_m"])
    for v in (30, 35, 40, 45, 50, 55, 60):
        t = np.array(transit.columns[f"time_s_{v}kmph"])
        np.testing.assert_allclose(t, (pos - pos[0]) * 3.6 / v)


def test_transit_check_rejects_tampered(transit):
    bad = ScenarioResult(transit.name, {k: list(v) for k, v in transit.columns.items()})
    i = bad.columns["association"].index(float(Association.DECOUPLED))
    bad.columns["se_decoupled"][i] = 0.0
    with pytest.raises(CampaignAssertionError):
        check_transit(bad, transit.metadata["landmarks_m"])


def test_transit_with_interferers():
    cfg = ScenarioConfig(transit=TransitKnobs(interferers=True))
    res = run_transit_campaign(cfg)
    base = run_transit_campaign(ScenarioConfig())
    assert max(res.columns["sinr_coupled_db"]) < max(base.columns["sinr_coupled_db"])


def test_transit_requires_endpoints():
    with pytest.raises(ValueError):
        run_transit_campaign(ScenarioConfig(transit=TransitKnobs(start_m=300.0)))


def test_zone_campaign():
    res = run_zone_campaign(ScenarioConfig())
    c = res.columns
    assert res.n_rows == 4
    assert all(b < a for a, b in zip(c["radius_coupled_m"], c["radius_decoupled_m"]))
    rows = {(d, lam): i for i, (d, lam) in enumerate(zip(c["device_distance_m"], c["lambda_dbm"]))}
    for lam in (-90.0, -95.0):
        assert c["radius_decoupled_m"][rows[(730.0, lam)]] < c["radius_decoupled_m"][rows[(600.0, lam)]]
    for d in (600.0, 730.0):
        assert c["radius_coupled_m"][rows[(d, -95.0)]] > c["radius_coupled_m"][rows[(d, -90.0)]]
        assert c["radius_decoupled_m"][rows[(d, -95.0)]] > c["radius_decoupled_m"][rows[(d, -90.0)]]


def test_zone_campaign_on_axis_is_rejected():
    # on the Macro-small line the 0.73 km device sits in the small cell's DL disc
    with pytest.raises(ValueError):
        run_zone_campaign(ScenarioConfig(zones=ZoneKnobs(bearing_deg=0.0)))


def test_region_campaign():
    cfg = dataclasses.replace(ScenarioConfig(), region=dataclasses.replace(ScenarioConfig().region, n_samples=100_000))
    res = run_region_campaign(cfg)
    assert abs(res.columns["z_score"][0]) < 3


def test_decoupling_campaign_small():
    cfg = ScenarioConfig(mobility=MobilityParams(devices_per_class=30))
    res = run_decoupling_time_campaign(cfg)
    for v in ("20kmph", "30kmph", "50kmph"):
        probs = res.columns[f"cdf_{v}"]
        assert probs[-1] == 1.0
        assert all(b >= a for a, b in zip(probs, probs[1:]))
    s = res.metadata["summary"]
    assert s["20kmph"]["median_s"] > s["30kmph"]["median_s"] > s["50kmph"]["median_s"]


def test_formula_comparison_grid():
    knobs = CompareKnobs(distances_m=(100.0, 400.0), ds_fractions=(0.5, 1.0), alphas=(0.7,), p0s_dbm=(-80.0, -70.0), num_rbs=(1, 10))
    res = run_formula_comparison(ScenarioConfig(compare=knobs))
    c = res.columns
    assert res.n_rows == 2 * 2 * 1 * 2 * 2
    assert res.metadata["grid_shape"] == [2, 2, 1, 2, 2]
    for i in range(res.n_rows):
        if c["num_rbs"][i] == 1:
            assert c["tx_macro_db_consistent_dbm"][i] == c["tx_macro_paper_literal_dbm"][i]
        if c["d_small_m"][i] == c["d_macro_m"][i]:
            assert c["ratio_db_consistent"][i] == 1.0 and c["ratio_paper_literal"][i] == 1.0
    expected = list(itertools.product((100.0, 400.0), (0.5, 1.0)))
    got = list(dict.fromkeys(zip(c["d_macro_m"], [s / m for s, m in zip(c["d_small_m"], c["d_macro_m"])])))
    assert got == expected
