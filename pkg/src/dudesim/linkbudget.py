"""dB-domain radio arithmetic: path loss, fractional uplink power control, SINR.

Every power that gets mixed (summed or subtracted) is converted to mW first;
dBm is only used for transport and presentation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

PL_INTERCEPT_DB = 35.0
PL_SLOPE_DB = 30.0


class FormulaMode(str, enum.Enum):
    """How the power-control algebra is evaluated.

    DB_CONSISTENT is the dimensionally sound reading and the default.
    PAPER_LITERAL evaluates the closed forms exactly as originally printed,
    kept only so the two readings can be compared side by side.
    """

    DB_CONSISTENT = "DbConsistent"
    PAPER_LITERAL = "PaperLiteral"

    @classmethod
    def parse(cls, value: "str | FormulaMode") -> "FormulaMode":
        if isinstance(value, cls):
            return value
        for member in cls:
            if value.lower() in (member.value.lower(), member.name.lower()):
                return member
        raise ValueError(f"unknown formula mode {value!r}; expected DbConsistent or PaperLiteral")


@dataclass(frozen=True)
class PowerControlConfig:
    p0_dbm: float = -80.0
    alpha: float = 0.7
    pmax_dbm: float = 23.0
    num_rbs: int = 10
    noise_dbm: float = -102.0
    mode: FormulaMode = FormulaMode.DB_CONSISTENT

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must satisfy 0 < alpha <= 1, got {self.alpha}")
        if int(self.num_rbs) != self.num_rbs or self.num_rbs < 1:
            raise ValueError(f"num_rbs must be a positive integer, got {self.num_rbs}")
        if not math.isfinite(self.pmax_dbm):
            raise ValueError("pmax_dbm must be finite")
        if not math.isfinite(self.p0_dbm):
            raise ValueError("p0_dbm must be finite")
        if math.isnan(self.noise_dbm):
            raise ValueError("noise_dbm must not be NaN")
        object.__setattr__(self, "mode", FormulaMode.parse(self.mode))


@dataclass(frozen=True)
class CellRadioConfig:
    dl_tx_power_dbm: float
    coverage_radius_m: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.dl_tx_power_dbm):
            raise ValueError("dl_tx_power_dbm must be finite")
        if not self.coverage_radius_m > 0:
            raise ValueError(f"coverage_radius_m must be positive, got {self.coverage_radius_m}")


def dbm_to_mw(dbm: float) -> float:
    if dbm == -math.inf:
        return 0.0
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    if mw <= 0.0:
        return -math.inf
    return 10.0 * math.log10(mw)


def path_loss_db(d_m: float) -> float:
    """Distance-based path loss ``35 + 30 log10(d)`` with ``d`` in meters."""
    if not d_m > 0:
        raise ValueError(f"path loss needs a positive distance, got {d_m}")
    return PL_INTERCEPT_DB + PL_SLOPE_DB * math.log10(d_m)


def distance_for_path_loss_m(pl_db: float) -> float:
    """Inverse of :func:`path_loss_db`."""
    return 10.0 ** ((pl_db - PL_INTERCEPT_DB) / PL_SLOPE_DB)


def uplink_tx_power_dbm(cfg: PowerControlConfig, pl_db: float) -> float:
    """Open-loop fractional power control, capped at ``cfg.pmax_dbm``.

    DB_CONSISTENT: ``P0 + 10 log10(K) + alpha * PL``.
    PAPER_LITERAL: ``P0 * log10(K) + P0 + alpha * PL``.
    Both reduce to ``P0 + alpha * PL`` for a single resource block.
    """
    if pl_db < 0:
        raise ValueError(f"path loss must be non-negative, got {pl_db}")
    if cfg.mode is FormulaMode.PAPER_LITERAL:
        bandwidth_term = cfg.p0_dbm * math.log10(cfg.num_rbs)
    else:
        bandwidth_term = 10.0 * math.log10(cfg.num_rbs)
    return min(cfg.pmax_dbm, cfg.p0_dbm + bandwidth_term + cfg.alpha * pl_db)


def received_power_dbm(tx_dbm: float, pl_db: float) -> float:
    return tx_dbm - pl_db


def sinr_db(signal_dbm: float, interferers_dbm: Iterable[float], noise_dbm: float) -> float:
    """SINR with interference and noise summed in the linear domain."""
    denom_mw = math.fsum(dbm_to_mw(i) for i in interferers_dbm) + dbm_to_mw(noise_dbm)
    if denom_mw <= 0.0:
        raise ValueError("SINR undefined: no noise and no interference")
    return signal_dbm - mw_to_dbm(denom_mw)


def spectral_efficiency(sinr_db_value: float) -> float:
    """Shannon efficiency ``log2(1 + SINR)`` in bps/Hz."""
    if sinr_db_value == -math.inf:
        return 0.0
    return math.log2(1.0 + 10.0 ** (sinr_db_value / 10.0))


def tx_power_for_target_sinr_dbm(
    target_sinr_db: float,
    pl_db: float,
    interference_plus_noise_dbm: float,
    pmax_dbm: float,
) -> tuple[float, bool]:
    """Transmit power needed to hit ``target_sinr_db`` at the receiver.

    Returns ``(power_dbm, capped)``; ``capped`` is True when the target
    is unreachable within ``pmax_dbm``.
    """
    if pl_db < 0:
        raise ValueError(f"path loss must be non-negative, got {pl_db}")
    needed = target_sinr_db + interference_plus_noise_dbm + pl_db
    if needed > pmax_dbm:
        return pmax_dbm, True
    return needed, False
