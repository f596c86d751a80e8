"""Interference zones of a decoupling device and the area they free for D2D pairs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from dudesim.geometry import Association, NetworkLayout, Point, classify
from dudesim.linkbudget import (
    PL_INTERCEPT_DB,
    PL_SLOPE_DB,
    PowerControlConfig,
    dbm_to_mw,
    mw_to_dbm,
    path_loss_db,
    received_power_dbm,
    uplink_tx_power_dbm,
)


class DegenerateZoneError(ValueError):
    pass


class ZoneOverlapError(ValueError):
    """Two coupled interference zones intersect, so their areas cannot be added."""


@dataclass(frozen=True)
class D2DConfig:
    lambda_dbm: float = -90.0
    r_pair_density: float = 1e-4  # pairs per m^2

    def __post_init__(self) -> None:
        if not math.isfinite(self.lambda_dbm):
            raise ValueError("lambda_dbm must be finite")
        if self.r_pair_density < 0:
            raise ValueError("r_pair_density must be non-negative")


@dataclass(frozen=True)
class InterferenceZone:
    center: Point
    radius_coupled_m: float
    radius_decoupled_m: float

    def __post_init__(self) -> None:
        if not (self.radius_coupled_m > 0 and self.radius_decoupled_m > 0):
            raise ValueError("zone radii must be positive")
        if self.radius_decoupled_m > self.radius_coupled_m:
            raise ValueError("decoupled zone cannot exceed the coupled zone")


def zone_radius_m(tx_dbm: float, lambda_dbm: float) -> float:
    """Distance at which a ``tx_dbm`` transmitter is received at exactly ``lambda_dbm``."""
    margin = tx_dbm - lambda_dbm
    if not margin > PL_INTERCEPT_DB:
        raise DegenerateZoneError(
            f"interference zone is below the 1 m reference distance (tx - lambda = {margin} dB)"
        )
    return 10.0 ** ((margin - PL_INTERCEPT_DB) / PL_SLOPE_DB)


def zone_pair(
    device_pos: Point, layout: NetworkLayout, cfg: PowerControlConfig, d2d: D2DConfig, k: float | None = None
) -> InterferenceZone:
    """Coupled (to Macro) and decoupled (to small cell) zones of one device."""
    if k is None:
        k = layout.dl_constant()
    assoc = classify(device_pos, layout, k)
    if assoc is not Association.DECOUPLED:
        raise ValueError(f"device at ({device_pos.x}, {device_pos.y}) is {assoc.name}, not DECOUPLED")
    tx_m = uplink_tx_power_dbm(cfg, path_loss_db(device_pos.distance_to(layout.macro_pos)))
    tx_s = uplink_tx_power_dbm(cfg, path_loss_db(device_pos.distance_to(layout.small_pos)))
    return InterferenceZone(
        center=device_pos,
        radius_coupled_m=zone_radius_m(tx_m, d2d.lambda_dbm),
        radius_decoupled_m=zone_radius_m(tx_s, d2d.lambda_dbm),
    )


def paper_literal_decoupled_radius(a: float, d_m: float, d_s: float, alpha: float) -> float:
    """``b = (a^30 - 10^(35 alpha - 1) (d_M^(30 alpha) - d_S^(30 alpha)))^(1/30)``.

    Kept for comparison reports only; NaN when the bracket is negative.
    """
    try:
        inner = a**30 - 10.0 ** (35.0 * alpha - 1.0) * (d_m ** (30.0 * alpha) - d_s ** (30.0 * alpha))
    except OverflowError:
        return math.nan
    if not math.isfinite(inner) or inner < 0:
        return math.nan
    return inner ** (1.0 / 30.0)


def excess_area_m2(zone: InterferenceZone) -> float:
    return math.pi * (zone.radius_coupled_m**2 - zone.radius_decoupled_m**2)


def total_excess_area_m2(zones: Sequence[InterferenceZone]) -> float:
    for z1, z2 in itertools.combinations(zones, 2):
        if z1.center.distance_to(z2.center) < z1.radius_coupled_m + z2.radius_coupled_m:
            raise ZoneOverlapError(
                f"interference zones centred at ({z1.center.x}, {z1.center.y}) and "
                f"({z2.center.x}, {z2.center.y}) overlap"
            )
    return math.fsum(excess_area_m2(z) for z in zones)


def extra_pairs(total_excess_m2: float, d2d: D2DConfig) -> float:
    if total_excess_m2 < 0:
        raise ValueError("excess area must be non-negative")
    return d2d.r_pair_density * total_excess_m2


def _rx_dbm(rx_pos: Point, src: Point, tx_dbm: float) -> float:
    d = rx_pos.distance_to(src)
    if d == 0:
        return math.inf
    return received_power_dbm(tx_dbm, path_loss_db(d))


def pair_enabled(
    rx_pos: Point,
    interferers: Iterable[tuple[Point, float]],
    lambda_dbm: float,
    aggregate: bool = False,
) -> bool:
    """True when interference at ``rx_pos`` stays strictly below ``lambda_dbm``.

    By default each interferer is tested on its own (single dominant
    interferer); ``aggregate=True`` sums all of them in mW first.
    """
    levels = [_rx_dbm(rx_pos, pos, tx) for pos, tx in interferers]
    if not levels:
        return True
    if aggregate:
        total = math.fsum(dbm_to_mw(v) for v in levels)
        return mw_to_dbm(total) < lambda_dbm
    return max(levels) < lambda_dbm
