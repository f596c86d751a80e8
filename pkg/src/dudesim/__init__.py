"""Downlink/uplink decoupling analysis for a Macro + small cell LTE deployment."""

from dudesim.linkbudget import (
    CellRadioConfig,
    FormulaMode,
    PowerControlConfig,
    path_loss_db,
    received_power_dbm,
    sinr_db,
    spectral_efficiency,
    tx_power_for_target_sinr_dbm,
    uplink_tx_power_dbm,
)
from dudesim.geometry import Association, Circle, NetworkLayout, Point

__all__ = [
    "Association",
    "CellRadioConfig",
    "Circle",
    "FormulaMode",
    "NetworkLayout",
    "Point",
    "PowerControlConfig",
    "path_loss_db",
    "received_power_dbm",
    "sinr_db",
    "spectral_efficiency",
    "tx_power_for_target_sinr_dbm",
    "uplink_tx_power_dbm",
]

__version__ = "0.1.0"
