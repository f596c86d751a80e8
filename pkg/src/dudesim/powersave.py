"""Uplink power saved by transmitting to the small cell instead of the Macro.

Savings are differences of linear powers (mW).  Sums use ``math.fsum`` so a
total does not depend on the order its terms were produced in.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

from dudesim.linkbudget import (
    FormulaMode,
    PowerControlConfig,
    dbm_to_mw,
    path_loss_db,
    uplink_tx_power_dbm,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MobileTransitSpec:
    """Device moving in a straight line from the Macro toward the small cell.

    ``d_m0``/``d_s0`` are the distances at the first transmission, which
    happens on the decoupling boundary.
    """

    d_m0: float
    d_s0: float
    velocity_mps: float
    interval_s: float
    n_tx: int

    def __post_init__(self) -> None:
        if self.velocity_mps < 0:
            raise ValueError("velocity_mps must be non-negative")
        if not self.interval_s > 0:
            raise ValueError("interval_s must be positive")
        if self.n_tx < 1:
            raise ValueError("n_tx must be at least 1")
        if not self.d_m0 > 0:
            raise ValueError("d_m0 must be positive")
        if not self.d_s0 - (self.n_tx - 1) * self.step_m > 0:
            raise ValueError("device passes the small cell before its last transmission")

    @property
    def step_m(self) -> float:
        return self.velocity_mps * self.interval_s


@dataclass(frozen=True)
class StaticDevice:
    d_m: float
    d_s: float

    def __post_init__(self) -> None:
        if not (0 < self.d_s < self.d_m):
            raise ValueError(f"static device needs 0 < d_s < d_m, got d_s={self.d_s}, d_m={self.d_m}")


def _safe_pow10(exponent: float) -> float:
    try:
        return 10.0**exponent
    except OverflowError:
        return math.inf


def power_ratio(d_s: float, d_m: float, cfg: PowerControlConfig) -> float:
    """Linear ratio ``P_T,S / P_T,M`` of the two uplink transmit powers."""
    if not (d_s > 0 and d_m > 0):
        raise ValueError(f"distances must be positive, got d_s={d_s}, d_m={d_m}")
    exponent = 3.0 * cfg.alpha
    if cfg.mode is FormulaMode.PAPER_LITERAL:
        exponent *= cfg.p0_dbm
    return _safe_pow10(exponent * math.log10(d_s / d_m))


def paper_literal_tx_power_mw(d: float, cfg: PowerControlConfig) -> float:
    """Transmit power written as ``10^((P0/10) * alpha * PL(d))``."""
    return _safe_pow10(cfg.p0_dbm / 10.0 * cfg.alpha * path_loss_db(d))


def power_saved_mw(d_m: float, d_s: float, cfg: PowerControlConfig) -> float:
    """Power saved by one uplink transmission sent to the small cell."""
    if d_s > d_m:
        raise ValueError(f"device is not in the decoupling region (d_s={d_s} > d_m={d_m})")
    if cfg.mode is FormulaMode.PAPER_LITERAL:
        return paper_literal_tx_power_mw(d_m, cfg) * (1.0 - power_ratio(d_s, d_m, cfg))
    tx_m = uplink_tx_power_dbm(cfg, path_loss_db(d_m))
    tx_s = uplink_tx_power_dbm(cfg, path_loss_db(d_s))
    # P_M (1 - P_S/P_M), kept accurate when the two powers nearly coincide
    return -dbm_to_mw(tx_m) * math.expm1((tx_s - tx_m) * math.log(10.0) / 10.0)


def mobile_saving_terms(spec: MobileTransitSpec, cfg: PowerControlConfig) -> list[float]:
    terms = []
    for i in range(spec.n_tx):
        shift = i * spec.step_m
        d_s = spec.d_s0 - shift
        if not d_s > 0:
            raise ValueError(f"transmission {i + 1} happens after passing the small cell")
        terms.append(power_saved_mw(spec.d_m0 + shift, d_s, cfg))
    return terms


def mobile_total_saved_mw(
    spec: MobileTransitSpec, cfg: PowerControlConfig, k: float | None = None
) -> float:
    """Total saving over ``n_tx`` transmissions of a device in straight-line transit.

    When ``k`` is given, transmissions that fall outside the decoupling
    region (``d_S < d_M < k d_S``) are still counted but reported in a warning.
    """
    terms = mobile_saving_terms(spec, cfg)
    if k is not None:
        outside = sum(
            1
            for i in range(spec.n_tx)
            if not (spec.d_s0 - i * spec.step_m < spec.d_m0 + i * spec.step_m < k * (spec.d_s0 - i * spec.step_m))
        )
        if outside:
            log.warning("%d of %d transmissions fall outside the decoupling region", outside, spec.n_tx)
    return math.fsum(terms)


def static_total_saved_mw(devices: Iterable[StaticDevice], cfg: PowerControlConfig) -> float:
    return math.fsum(power_saved_mw(dev.d_m, dev.d_s, cfg) for dev in devices)
