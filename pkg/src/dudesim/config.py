"""Flat ``section.key = value`` configuration files.

Grammar, one entry per line::

    # comment (also allowed after a value)
    pc.alpha = 0.7
    mode = DbConsistent
    mobility.speed_classes_kmph = [20, 30, 50]
    transit.interferers = false

Values are numbers, ``true``/``false``, bare or double-quoted words, or
bracketed comma-separated number lists.  Every distance is given in km
(keys ending ``_km``) and converted to meters.  Missing keys take the
defaults below; unknown keys are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from dudesim.d2d import D2DConfig
from dudesim.geometry import NetworkLayout, Point
from dudesim.linkbudget import CellRadioConfig, FormulaMode, PowerControlConfig
from dudesim.mobility import MobilityParams
from dudesim.scenario import CompareKnobs, RegionKnobs, ScenarioConfig, TransitKnobs, ZoneKnobs


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class Param:
    default: Any
    kind: str  # float, int, bool, mode, floats, ints
    source: str


TABLE_I = "Table I (mobility)"
TABLE_II = "Table II (radio)"
TABLE_III = "Table III (D2D)"
ASSUMED = "assumed default"

PARAMS: dict[str, Param] = {
    "seed": Param(2016, "int", ASSUMED),
    "mode": Param("DbConsistent", "mode", ASSUMED),
    "layout.macro_x_km": Param(0.0, "float", ASSUMED),
    "layout.macro_y_km": Param(0.0, "float", ASSUMED),
    "layout.small_x_km": Param(0.5, "float", ASSUMED),
    "layout.small_y_km": Param(0.0, "float", ASSUMED),
    "layout.macro_dl_dbm": Param(40.0, "float", TABLE_II),
    "layout.small_dl_dbm": Param(20.0, "float", TABLE_II),
    "layout.macro_radius_km": Param(1.0, "float", TABLE_II),
    "layout.small_radius_km": Param(0.035, "float", TABLE_II),
    "pc.p0_dbm": Param(-80.0, "float", ASSUMED),
    "pc.alpha": Param(0.7, "float", TABLE_II),
    "pc.pmax_dbm": Param(23.0, "float", TABLE_II),
    "pc.num_rbs": Param(10, "int", TABLE_II),
    "pc.noise_dbm": Param(-102.0, "float", ASSUMED),
    "d2d.pair_density_per_m2": Param(1e-4, "float", ASSUMED),
    "mobility.step_mean_km": Param(0.01, "float", TABLE_I),
    "mobility.speed_classes_kmph": Param([20.0, 30.0, 50.0], "floats", TABLE_I),
    "mobility.heading_halfwidth_deg": Param(45.0, "float", TABLE_I),
    "mobility.devices_per_class": Param(100, "int", "mobility campaign (100 devices per speed)"),
    "mobility.start_radius_km": Param(0.2, "float", ASSUMED),
    "mobility.start_spread_deg": Param(45.0, "float", ASSUMED),
    "mobility.max_time_s": Param(36000.0, "float", ASSUMED),
    "region.samples": Param(1_000_000, "int", ASSUMED),
    "transit.start_km": Param(0.1, "float", ASSUMED),
    "transit.end_km": Param(0.49, "float", ASSUMED),
    "transit.spacing_m": Param(1.0, "float", ASSUMED),
    "transit.speeds_kmph": Param([30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0], "floats", "transit campaign speed set"),
    "transit.target_sinr_db": Param(0.0, "float", "transit campaign (0 dB target)"),
    "transit.interferers": Param(False, "bool", ASSUMED),
    "transit.interferer_small_x_km": Param(0.52, "float", ASSUMED),
    "transit.interferer_small_y_km": Param(0.02, "float", ASSUMED),
    "transit.interferer_macro_x_km": Param(-0.1, "float", ASSUMED),
    "transit.interferer_macro_y_km": Param(0.05, "float", ASSUMED),
    "zones.macro_radius_km": Param(0.8, "float", TABLE_III),
    "zones.small_distance_km": Param(0.8, "float", ASSUMED),
    "zones.device_distances_km": Param([0.6, 0.73], "floats", TABLE_III),
    "zones.bearing_deg": Param(15.0, "float", ASSUMED),
    "zones.lambdas_dbm": Param([-90.0, -95.0], "floats", TABLE_III),
    "compare.distances_km": Param([0.1, 0.3, 0.6], "floats", ASSUMED),
    "compare.ds_fractions": Param([0.25, 0.5, 1.0], "floats", ASSUMED),
    "compare.alphas": Param([0.5, 0.7, 1.0], "floats", ASSUMED),
    "compare.p0s_dbm": Param([-90.0, -80.0, -70.0], "floats", ASSUMED),
    "compare.num_rbs": Param([1, 10], "ints", ASSUMED),
    "compare.lambda_dbm": Param(-90.0, "float", TABLE_III),
}


def _parse_scalar(text: str) -> Any:
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _coerce(key: str, raw: Any) -> Any:
    kind = PARAMS[key].kind
    if kind in ("floats", "ints"):
        if not isinstance(raw, list):
            raw = [raw]
        elem = "float" if kind == "floats" else "int"
        return [_coerce_scalar(key, v, elem) for v in raw]
    if isinstance(raw, list):
        raise ConfigError(f"{key} expects a single {kind}, got a list")
    return _coerce_scalar(key, raw, kind)


def _coerce_scalar(key: str, raw: Any, kind: str) -> Any:
    if kind == "float":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{key} expects a number, got {raw!r}")
        if not math.isfinite(raw):
            raise ConfigError(f"{key} must be finite")
        return float(raw)
    if kind == "int":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{key} expects an integer, got {raw!r}")
        return raw
    if kind == "bool":
        if not isinstance(raw, bool):
            raise ConfigError(f"{key} expects true or false, got {raw!r}")
        return raw
    if kind == "mode":
        try:
            return FormulaMode.parse(str(raw)).value
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    raise AssertionError(kind)


def parse_text(text: str, path: str | None = None) -> dict[str, tuple[Any, int]]:
    """Parse config text into ``{key: (value, line_number)}``."""
    entries: dict[str, tuple[Any, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno, path)
        key, _, value = (part.strip() for part in body.partition("="))
        if not key or not value:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno, path)
        if key not in PARAMS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno, path)
        if value.startswith("["):
            if not value.endswith("]"):
                raise ConfigError(f"unterminated list for {key}", lineno, path)
            inner = value[1:-1].strip()
            raw: Any = [_parse_scalar(v.strip()) for v in inner.split(",")] if inner else []
        else:
            raw = _parse_scalar(value)
        try:
            entries[key] = (_coerce(key, raw), lineno)
        except ConfigError as exc:
            raise ConfigError(str(exc), lineno, path) from None
    return entries


def build_config(values: dict[str, Any], sources: dict[str, str] | None = None) -> ScenarioConfig:
    """Assemble a :class:`ScenarioConfig` from flat values; missing keys get defaults."""
    sources = sources or {}
    v = {key: values.get(key, p.default) for key, p in PARAMS.items()}
    km = 1000.0
    layout = NetworkLayout(
        macro_pos=Point(v["layout.macro_x_km"] * km, v["layout.macro_y_km"] * km),
        macro_radio=CellRadioConfig(v["layout.macro_dl_dbm"], v["layout.macro_radius_km"] * km),
        small_pos=Point(v["layout.small_x_km"] * km, v["layout.small_y_km"] * km),
        small_radio=CellRadioConfig(v["layout.small_dl_dbm"], v["layout.small_radius_km"] * km),
    )
    pc = PowerControlConfig(
        p0_dbm=v["pc.p0_dbm"],
        alpha=v["pc.alpha"],
        pmax_dbm=v["pc.pmax_dbm"],
        num_rbs=v["pc.num_rbs"],
        noise_dbm=v["pc.noise_dbm"],
        mode=FormulaMode.parse(v["mode"]),
    )
    mobility = MobilityParams(
        step_mean_m=v["mobility.step_mean_km"] * km,
        speed_classes_kmph=tuple(v["mobility.speed_classes_kmph"]),
        heading_halfwidth_rad=math.radians(v["mobility.heading_halfwidth_deg"]),
        devices_per_class=v["mobility.devices_per_class"],
        start_radius_m=v["mobility.start_radius_km"] * km,
        start_spread_rad=math.radians(v["mobility.start_spread_deg"]),
        max_time_s=v["mobility.max_time_s"],
    )
    transit = TransitKnobs(
        start_m=v["transit.start_km"] * km,
        end_m=v["transit.end_km"] * km,
        spacing_m=v["transit.spacing_m"],
        speeds_kmph=tuple(v["transit.speeds_kmph"]),
        target_sinr_db=v["transit.target_sinr_db"],
        interferers=v["transit.interferers"],
        interferer_small_region=Point(v["transit.interferer_small_x_km"] * km, v["transit.interferer_small_y_km"] * km),
        interferer_macro_region=Point(v["transit.interferer_macro_x_km"] * km, v["transit.interferer_macro_y_km"] * km),
    )
    if not (transit.spacing_m > 0 and transit.end_m > transit.start_m):
        raise ValueError("transit needs spacing_m > 0 and end_km > start_km")
    zones = ZoneKnobs(
        macro_radius_m=v["zones.macro_radius_km"] * km,
        small_distance_m=v["zones.small_distance_km"] * km,
        device_distances_m=tuple(d * km for d in v["zones.device_distances_km"]),
        bearing_deg=v["zones.bearing_deg"],
        lambdas_dbm=tuple(v["zones.lambdas_dbm"]),
    )
    compare = CompareKnobs(
        distances_m=tuple(d * km for d in v["compare.distances_km"]),
        ds_fractions=tuple(v["compare.ds_fractions"]),
        alphas=tuple(v["compare.alphas"]),
        p0s_dbm=tuple(v["compare.p0s_dbm"]),
        num_rbs=tuple(v["compare.num_rbs"]),
        lambda_dbm=v["compare.lambda_dbm"],
    )
    if any(not 0 < f <= 1 for f in compare.ds_fractions):
        raise ValueError("compare.ds_fractions must lie in (0, 1]")
    if v["region.samples"] < 1000:
        raise ValueError("region.samples must be at least 1000")
    provenance = {
        key: {"value": v[key], "source": sources.get(key, PARAMS[key].source if key not in values else "config file")}
        for key in PARAMS
    }
    return ScenarioConfig(
        layout=layout,
        pc=pc,
        d2d=D2DConfig(lambda_dbm=zones.lambdas_dbm[0] if zones.lambdas_dbm else -90.0,
                      r_pair_density=v["d2d.pair_density_per_m2"]),
        mobility=mobility,
        seed=v["seed"],
        region=RegionKnobs(n_samples=v["region.samples"]),
        transit=transit,
        zones=zones,
        compare=compare,
        provenance=provenance,
    )


def parse_config(path: str | Path | None, overrides: dict[str, Any] | None = None) -> ScenarioConfig:
    """Read a config file (or none) and apply command-line ``overrides``."""
    entries: dict[str, tuple[Any, int]] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", path=str(path)) from None
        entries = parse_text(text, str(path))
    values = {k: val for k, (val, _) in entries.items()}
    sources = {k: "config file" for k in values}
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        values[key] = _coerce(key, val)
        sources[key] = "command line"
    try:
        return build_config(values, sources)
    except ConfigError:
        raise
    except ValueError as exc:
        line = _blame_line(str(exc), entries)
        raise ConfigError(str(exc), line, str(path) if path is not None else None) from None


def _blame_line(message: str, entries: dict[str, tuple[Any, int]]) -> int | None:
    """Best-effort line number for a validation error raised after parsing."""
    for key, (_, line) in entries.items():
        leaf = key.rsplit(".", 1)[-1]
        for stem in (leaf, leaf.removesuffix("_km"), leaf.removesuffix("_dbm")):
            if stem and stem in message:
                return line
    return None
