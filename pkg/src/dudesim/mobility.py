"""Random walk toward the small cell, and decoupling-time statistics.

Each step has a half-normal length and a heading drawn uniformly within
``heading_halfwidth_rad`` of the bearing to the small cell.  The step
duration is the step length divided by a half-normal speed drawn for that
step.  Association is sampled at the walk vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from dudesim.geometry import Association, NetworkLayout, OutOfCoverageError, Point, classify

KMPH = 1000.0 / 3600.0


@dataclass(frozen=True)
class MobilityParams:
    step_mean_m: float = 10.0
    speed_classes_kmph: tuple[float, ...] = (20.0, 30.0, 50.0)
    heading_halfwidth_rad: float = math.pi / 4
    devices_per_class: int = 100
    start_radius_m: float = 200.0
    start_spread_rad: float = math.pi / 4
    max_time_s: float = 36000.0
    max_steps: int = 100_000

    def __post_init__(self) -> None:
        if not self.step_mean_m > 0:
            raise ValueError("step_mean_m must be positive")
        if not self.speed_classes_kmph or any(not v > 0 for v in self.speed_classes_kmph):
            raise ValueError("speed classes must be positive")
        if not (0 < self.heading_halfwidth_rad <= math.pi):
            raise ValueError("heading_halfwidth_rad must lie in (0, pi]")
        if self.devices_per_class < 1:
            raise ValueError("devices_per_class must be at least 1")
        if self.start_radius_m < 0 or not (0 <= self.start_spread_rad <= math.pi):
            raise ValueError("invalid start band")
        if not self.max_time_s > 0:
            raise ValueError("max_time_s must be positive")


@dataclass(frozen=True)
class TrajectorySample:
    time_s: float
    pos: Point
    assoc: Association


@dataclass
class Trajectory:
    samples: list[TrajectorySample] = field(default_factory=list)
    termination: str = "coupled_small"  # or "timeout", "left_coverage", "max_steps"
    double_crossings: int = 0

    def __post_init__(self) -> None:
        times = [s.time_s for s in self.samples]
        if times and times[0] != 0.0:
            raise ValueError("trajectory must start at t=0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def timed_out(self) -> bool:
        return self.termination != "coupled_small"


def sample_half_normal(mean: float, rng: np.random.Generator) -> float:
    """Half-normal draw ``|Z| * mean * sqrt(pi/2)``, whose expectation is ``mean``."""
    if not mean > 0:
        raise ValueError(f"half-normal mean must be positive, got {mean}")
    sigma = mean * math.sqrt(math.pi / 2.0)
    while True:
        v = abs(rng.standard_normal()) * sigma
        if v > 0:
            return v


def step(
    pos: Point, layout: NetworkLayout, params: MobilityParams, rng: np.random.Generator
) -> tuple[Point, float]:
    s = layout.small_pos
    if pos == s:
        raise ValueError("device already sits on the small cell; heading undefined")
    bearing = math.atan2(s.y - pos.y, s.x - pos.x)
    heading = bearing + rng.uniform(-params.heading_halfwidth_rad, params.heading_halfwidth_rad)
    length = sample_half_normal(params.step_mean_m, rng)
    return Point(pos.x + length * math.cos(heading), pos.y + length * math.sin(heading)), length


def start_position(layout: NetworkLayout, params: MobilityParams, rng: np.random.Generator) -> Point:
    """Point on an arc around the Macro, on the side facing away from the small cell."""
    m, s = layout.macro_pos, layout.small_pos
    away = math.atan2(m.y - s.y, m.x - s.x)
    angle = away + rng.uniform(-params.start_spread_rad, params.start_spread_rad)
    return Point(m.x + params.start_radius_m * math.cos(angle), m.y + params.start_radius_m * math.sin(angle))


def _is_jump(a: Association, b: Association) -> bool:
    return {a, b} == {Association.COUPLED_MACRO, Association.COUPLED_SMALL}


def simulate_trajectory(
    start: Point,
    layout: NetworkLayout,
    k: float,
    params: MobilityParams,
    speed_mean_mps: float,
    max_time_s: float,
    rng: np.random.Generator,
) -> Trajectory:
    """Walk from ``start`` until the device is served by the small cell in both links."""
    if not max_time_s > 0:
        raise ValueError("max_time_s must be positive")
    assoc = classify(start, layout, k)
    traj = Trajectory([TrajectorySample(0.0, start, assoc)])
    t, pos = 0.0, start
    for _ in range(params.max_steps):
        if assoc is Association.COUPLED_SMALL:
            return traj
        new_pos, length = step(pos, layout, params, rng)
        t += length / sample_half_normal(speed_mean_mps, rng)
        try:
            new_assoc = classify(new_pos, layout, k)
        except OutOfCoverageError:
            traj.termination = "left_coverage"
            return traj
        if _is_jump(assoc, new_assoc):
            traj.double_crossings += 1
        traj.samples.append(TrajectorySample(t, new_pos, new_assoc))
        pos, assoc = new_pos, new_assoc
        if t >= max_time_s and assoc is not Association.COUPLED_SMALL:
            traj.termination = "timeout"
            return traj
    if assoc is not Association.COUPLED_SMALL:
        traj.termination = "max_steps"
    return traj


def _crossing_fraction(
    a: Point, b: Point, layout: NetworkLayout, k: float, decoupled_at_a: bool, tol_m: float = 1e-3
) -> float:
    """Fraction along ``a -> b`` where decoupled membership first flips."""
    lo, hi = 0.0, 1.0
    length = a.distance_to(b)
    while (hi - lo) * length > tol_m:
        mid = 0.5 * (lo + hi)
        p = Point(a.x + mid * (b.x - a.x), a.y + mid * (b.y - a.y))
        if (classify(p, layout, k) is Association.DECOUPLED) == decoupled_at_a:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def decoupling_time_s(
    traj: Trajectory, layout: NetworkLayout | None = None, k: float | None = None, refine: bool = False
) -> float:
    """Time spent in the decoupling region.

    By default the association of a vertex holds until the next vertex.
    With ``refine=True`` (needs ``layout`` and ``k``) the boundary crossing
    inside a step is located by bisection, assuming constant speed along it.
    """
    total = 0.0
    for cur, nxt in zip(traj.samples, traj.samples[1:]):
        dt = nxt.time_s - cur.time_s
        in_cur = cur.assoc is Association.DECOUPLED
        in_nxt = nxt.assoc is Association.DECOUPLED
        if not refine or in_cur == in_nxt:
            if in_cur:
                total += dt
            continue
        if layout is None or k is None:
            raise ValueError("refined decoupling time needs layout and k")
        frac = _crossing_fraction(cur.pos, nxt.pos, layout, k, in_cur)
        total += dt * (frac if in_cur else 1.0 - frac)
    return total


def empirical_cdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Right-continuous step CDF: one ``(value, F(value))`` pair per distinct value."""
    if len(values) == 0:
        raise ValueError("empirical CDF of an empty sample")
    arr = np.sort(np.asarray(values, dtype=float))
    uniq, counts = np.unique(arr, return_counts=True)
    cum = np.cumsum(counts)
    n = arr.size
    return [(float(v), float(c) / n) for v, c in zip(uniq, cum)]


def device_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent per-device generators derived from one master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def decoupling_times_for_class(
    layout: NetworkLayout,
    k: float,
    params: MobilityParams,
    speed_kmph: float,
    seed: int,
    refine: bool = False,
) -> tuple[list[float], list[Trajectory]]:
    """Decoupling times of ``params.devices_per_class`` walkers at one mean speed.

    Device ``i`` always gets the ``i``-th spawned stream, so every speed
    class replays the same walks (common random numbers).
    """
    times, trajs = [], []
    for rng in device_rngs(seed, params.devices_per_class):
        start = start_position(layout, params, rng)
        traj = simulate_trajectory(start, layout, k, params, speed_kmph * KMPH, params.max_time_s, rng)
        trajs.append(traj)
        times.append(decoupling_time_s(traj, layout, k, refine=refine))
    return times, trajs
