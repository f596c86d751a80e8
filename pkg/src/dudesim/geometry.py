"""Planar geometry of the decoupling region for one Macro and one small cell.

A point is *decoupled* when the small cell wins the uplink (it is closer)
while the Macro still wins the downlink (``d_M < K d_S``).  Membership is
always evaluated from raw distances.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from dudesim.linkbudget import PL_SLOPE_DB, CellRadioConfig


class OutOfCoverageError(ValueError):
    """Raised when a point lies outside the Macro coverage disc."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class Association(enum.IntEnum):
    COUPLED_MACRO = 0
    DECOUPLED = 1
    COUPLED_SMALL = 2


@dataclass(frozen=True)
class Circle:
    center: Point
    radius_m: float

    def __post_init__(self) -> None:
        if not self.radius_m > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius_m}")

    @property
    def area_m2(self) -> float:
        return math.pi * self.radius_m**2


@dataclass(frozen=True)
class NetworkLayout:
    macro_pos: Point
    macro_radio: CellRadioConfig
    small_pos: Point
    small_radio: CellRadioConfig

    def __post_init__(self) -> None:
        if self.macro_pos == self.small_pos:
            raise ValueError("Macro and small cell must not share a position")
        if self.macro_pos.distance_to(self.small_pos) > self.macro_radio.coverage_radius_m:
            raise ValueError("small cell must lie inside the Macro coverage disc")

    @property
    def inter_site_distance_m(self) -> float:
        return self.macro_pos.distance_to(self.small_pos)

    def in_coverage(self, p: Point) -> bool:
        return p.distance_to(self.macro_pos) <= self.macro_radio.coverage_radius_m

    def dl_constant(self) -> float:
        return dl_constant_k(self.macro_radio.dl_tx_power_dbm, self.small_radio.dl_tx_power_dbm)


def dl_constant_k(macro_dl_dbm: float, small_dl_dbm: float) -> float:
    """Distance ratio at which both downlinks arrive with equal power.

    Equating ``P_M - PL(d_M)`` and ``P_S - PL(d_S)`` with noise ignored
    gives ``d_M / d_S = 10^((P_M - P_S) / 30)``.
    """
    if not macro_dl_dbm > small_dl_dbm:
        raise ValueError(
            "Macro downlink power must exceed the small cell's for a decoupling region to exist "
            f"(got {macro_dl_dbm} <= {small_dl_dbm})"
        )
    return 10.0 ** ((macro_dl_dbm - small_dl_dbm) / PL_SLOPE_DB)


def ul_prefers_small(p: Point, layout: NetworkLayout) -> bool:
    return p.distance_to(layout.macro_pos) > p.distance_to(layout.small_pos)


def dl_prefers_macro(p: Point, layout: NetworkLayout, k: float) -> bool:
    if not k > 1:
        raise ValueError(f"K must exceed 1, got {k}")
    return p.distance_to(layout.macro_pos) < k * p.distance_to(layout.small_pos)


def classify(p: Point, layout: NetworkLayout, k: float) -> Association:
    if not layout.in_coverage(p):
        raise OutOfCoverageError(f"point ({p.x:.3f}, {p.y:.3f}) is outside Macro coverage")
    ul_small = ul_prefers_small(p, layout)
    dl_macro = dl_prefers_macro(p, layout, k)
    if ul_small and dl_macro:
        return Association.DECOUPLED
    if ul_small:
        return Association.COUPLED_SMALL
    return Association.COUPLED_MACRO


def classify_xy(x: np.ndarray, y: np.ndarray, layout: NetworkLayout, k: float) -> np.ndarray:
    """Vectorised :func:`classify` without the coverage check.

    Returns integer :class:`Association` codes.
    """
    if not k > 1:
        raise ValueError(f"K must exceed 1, got {k}")
    m, s = layout.macro_pos, layout.small_pos
    d_m = np.hypot(x - m.x, y - m.y)
    d_s = np.hypot(x - s.x, y - s.y)
    ul_small = d_m > d_s
    dl_macro = d_m < k * d_s
    codes = np.full(np.shape(x), int(Association.COUPLED_MACRO), dtype=np.int8)
    codes[ul_small & dl_macro] = int(Association.DECOUPLED)
    codes[ul_small & ~dl_macro] = int(Association.COUPLED_SMALL)
    return codes


def apollonius_circle(layout: NetworkLayout, k: float) -> Circle:
    """Locus ``d_M = k d_S``; the small cell's downlink wins inside it."""
    if not k > 1:
        raise ValueError(f"K must exceed 1, got {k}")
    m, s = layout.macro_pos, layout.small_pos
    k2 = k * k
    cx = (k2 * s.x - m.x) / (k2 - 1.0)
    cy = (k2 * s.y - m.y) / (k2 - 1.0)
    radius = k * layout.inter_site_distance_m / (k2 - 1.0)
    return Circle(Point(cx, cy), radius)


def circular_segment_area(radius: float, offset: float) -> float:
    """Area of the part of a disc lying beyond a chord at ``offset`` from the center."""
    if abs(offset) >= radius:
        return 0.0 if offset > 0 else math.pi * radius**2
    return radius**2 * math.acos(offset / radius) - offset * math.sqrt(radius**2 - offset**2)


def region_area_semi_analytic(layout: NetworkLayout, k: float) -> float:
    """Decoupling-region area when the Apollonius disc is fully enclosed.

    The UL half-plane cuts the Macro disc along the perpendicular bisector,
    at ``|MS|/2`` from the Macro; the small cell's DL disc is then removed.
    """
    circle = apollonius_circle(layout, k)
    r_macro = layout.macro_radio.coverage_radius_m
    half = layout.inter_site_distance_m / 2.0
    if circle.center.distance_to(layout.macro_pos) + circle.radius_m > r_macro:
        raise ValueError("Apollonius disc is not contained in the Macro coverage disc")
    return circular_segment_area(r_macro, half) - circle.area_m2


def _count_decoupled_batch(
    seed_seq: np.random.SeedSequence, n: int, layout: NetworkLayout, k: float
) -> int:
    rng = np.random.default_rng(seed_seq)
    r_macro = layout.macro_radio.coverage_radius_m
    radius = r_macro * np.sqrt(rng.random(n))
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    x = layout.macro_pos.x + radius * np.cos(theta)
    y = layout.macro_pos.y + radius * np.sin(theta)
    return int(np.count_nonzero(classify_xy(x, y, layout, k) == Association.DECOUPLED))


def region_area_mc(
    layout: NetworkLayout,
    k: float | None,
    n_samples: int,
    seed: int,
    batch_size: int = 1 << 16,
    workers: int = 1,
) -> tuple[float, float]:
    """Monte Carlo area of the decoupling region inside the Macro disc.

    Samples are split into fixed batches, each with its own spawned seed,
    so the estimate does not depend on ``workers``.
    Returns ``(area_m2, standard_error_m2)``.
    """
    if k is None:
        k = layout.dl_constant()
    if n_samples < 1000:
        raise ValueError(f"n_samples must be at least 1000, got {n_samples}")
    sizes = [batch_size] * (n_samples // batch_size)
    if n_samples % batch_size:
        sizes.append(n_samples % batch_size)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(i: int) -> int:
        return _count_decoupled_batch(seqs[i], sizes[i], layout, k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(work, range(len(sizes))))
    else:
        hits = sum(map(work, range(len(sizes))))

    disc_area = math.pi * layout.macro_radio.coverage_radius_m**2
    p_hat = hits / n_samples
    return disc_area * p_hat, disc_area * math.sqrt(p_hat * (1.0 - p_hat) / n_samples)
