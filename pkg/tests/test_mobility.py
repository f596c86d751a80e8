import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dudesim.geometry import Association, Point, apollonius_circle
from dudesim.mobility import (
    KMPH,
    MobilityParams,
    Trajectory,
    TrajectorySample,
    decoupling_time_s,
    decoupling_times_for_class,
    empirical_cdf,
    sample_half_normal,
    simulate_trajectory,
    start_position,
    step,
)
from dudesim.scenario import default_layout

K = 10 ** (2 / 3)


def test_half_normal_mean():
    rng = np.random.default_rng(0)
    xs = [sample_half_normal(20.0, rng) for _ in range(100_000)]
    assert 19.6 <= np.mean(xs) <= 20.4
    assert min(xs) > 0


def test_half_normal_deterministic():
    a = [sample_half_normal(3.0, np.random.default_rng(42)) for _ in range(3)]
    b = [sample_half_normal(3.0, np.random.default_rng(42)) for _ in range(3)]
    assert a == b


def test_half_normal_rejects_bad_mean():
    with pytest.raises(ValueError):
        sample_half_normal(0.0, np.random.default_rng(0))


def test_step_zero_noise_limit(line_layout):
    params = MobilityParams(heading_halfwidth_rad=1e-15)
    new, length = step(Point(0.0, 0.0), line_layout, params, np.random.default_rng(1))
    assert new.x == pytest.approx(length, rel=1e-12)
    assert new.y == pytest.approx(0.0, abs=1e-9)


def test_step_heading_within_cone_and_drifts_toward_small(line_layout):
    params = MobilityParams()
    rng = np.random.default_rng(7)
    s = line_layout.small_pos
    gains = []
    for _ in range(10_000):
        pos = Point(rng.uniform(-500, 500), rng.uniform(-500, 500))
        new, length = step(pos, line_layout, params, rng)
        bearing = math.atan2(s.y - pos.y, s.x - pos.x)
        heading = math.atan2(new.y - pos.y, new.x - pos.x)
        off = (heading - bearing + math.pi) % (2 * math.pi) - math.pi
        assert abs(off) <= math.pi / 4 + 1e-9
        assert length > 0
        gains.append(pos.distance_to(s) - new.distance_to(s))
    assert np.mean(gains) > 0


def test_step_rejects_small_cell_position(line_layout):
    with pytest.raises(ValueError):
        step(line_layout.small_pos, line_layout, MobilityParams(), np.random.default_rng(0))


def test_trajectory_starting_in_small_cell_region():
    lay = default_layout()
    start = Point(lay.small_pos.x + 5.0, 0.0)
    traj = simulate_trajectory(start, lay, K, MobilityParams(), 20 * KMPH, 100.0, np.random.default_rng(0))
    assert len(traj.samples) == 1
    assert traj.samples[0].assoc is Association.COUPLED_SMALL
    assert not traj.timed_out


def test_trajectory_deterministic():
    lay = default_layout()
    params = MobilityParams()
    runs = []
    for _ in range(2):
        rng = np.random.default_rng(123)
        start = start_position(lay, params, rng)
        runs.append(simulate_trajectory(start, lay, K, params, 30 * KMPH, 3600.0, rng))
    assert runs[0] == runs[1]


def test_trajectories_reach_small_cell():
    lay = default_layout()
    params = dataclasses.replace(MobilityParams(), devices_per_class=1000)
    _, trajs = decoupling_times_for_class(lay, K, params, 20.0, seed=99)
    reached = sum(not t.timed_out for t in trajs)
    assert reached >= 990
    for t in trajs:
        times = [s.time_s for s in t.samples]
        assert times[0] == 0.0 and all(b > a for a, b in zip(times, times[1:]))
        assert t.samples[-1].assoc is Association.COUPLED_SMALL or t.timed_out


def test_trajectory_timeout_flagged():
    lay = default_layout()
    rng = np.random.default_rng(4)
    traj = simulate_trajectory(Point(-200.0, 0.0), lay, K, MobilityParams(), 1e-3, 1.0, rng)
    assert traj.termination == "timeout"


def _traj(assocs, times):
    return Trajectory([TrajectorySample(t, Point(float(i), 0.0), a) for i, (t, a) in enumerate(zip(times, assocs))])


def test_decoupling_time_fixtures():
    cm, dc, cs = Association.COUPLED_MACRO, Association.DECOUPLED, Association.COUPLED_SMALL
    assert decoupling_time_s(_traj([cm, cm, cs], [0.0, 3.0, 5.0])) == 0.0
    assert decoupling_time_s(_traj([cm, dc, cs], [0.0, 4.0, 16.0])) == 12.0


def test_decoupling_time_refined_on_straight_line():
    lay = default_layout()
    # walk straight along the axis at 10 m/s in 40 m steps
    xs = np.arange(100.0, 500.0, 40.0)
    from dudesim.geometry import classify

    samples = [TrajectorySample(i * 4.0, Point(x, 0.0), classify(Point(x, 0.0), lay, K)) for i, x in enumerate(xs)]
    traj = Trajectory(samples)
    c = apollonius_circle(lay, K).center.x - apollonius_circle(lay, K).radius_m
    exact = (c - 250.0) / 10.0
    assert decoupling_time_s(traj, lay, K, refine=True) == pytest.approx(exact, abs=1e-3)
    coarse = decoupling_time_s(traj)
    assert abs(coarse - exact) <= 4.0


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([TrajectorySample(1.0, Point(0, 0), Association.COUPLED_MACRO)])
    with pytest.raises(ValueError):
        _traj([Association.COUPLED_MACRO] * 2, [0.0, 0.0])


def test_empirical_cdf_examples():
    cdf = dict(empirical_cdf([1, 2, 3]))
    assert cdf[2] == pytest.approx(2 / 3)
    assert empirical_cdf([4.0, 4.0, 4.0]) == [(4.0, 1.0)]
    with pytest.raises(ValueError):
        empirical_cdf([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60))
def test_empirical_cdf_matches_brute_force(values):
    cdf = empirical_cdf(values)
    n = len(values)
    probs = [p for _, p in cdf]
    assert probs[-1] == 1.0
    assert all(b > a for a, b in zip(probs, probs[1:]))
    assert probs[0] == pytest.approx(sum(v == min(values) for v in values) / n)
    for v, p in cdf:
        assert p == pytest.approx(sum(x <= v for x in values) / n)


def test_speed_ordering_with_shared_seeds():
    lay = default_layout()
    params = dataclasses.replace(MobilityParams(), devices_per_class=40)
    means = []
    for v in (20.0, 30.0, 50.0):
        times, _ = decoupling_times_for_class(lay, K, params, v, seed=5)
        means.append(np.mean(times))
    assert means[0] > means[1] > means[2]
