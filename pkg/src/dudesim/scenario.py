"""End-to-end campaigns producing labelled numeric datasets.

Each ``run_*`` function checks its own invariants before returning and
raises :class:`CampaignAssertionError` when one fails.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from typing import Any

from dudesim import d2d as d2d_mod
from dudesim.d2d import D2DConfig, excess_area_m2, extra_pairs, paper_literal_decoupled_radius, zone_pair
from dudesim.geometry import (
    Association,
    NetworkLayout,
    Point,
    apollonius_circle,
    classify,
    dl_prefers_macro,
    region_area_mc,
    region_area_semi_analytic,
    ul_prefers_small,
)
from dudesim.linkbudget import (
    CellRadioConfig,
    FormulaMode,
    PowerControlConfig,
    dbm_to_mw,
    mw_to_dbm,
    path_loss_db,
    sinr_db,
    spectral_efficiency,
    tx_power_for_target_sinr_dbm,
    uplink_tx_power_dbm,
)
from dudesim.mobility import MobilityParams, decoupling_times_for_class, empirical_cdf
from dudesim.powersave import power_ratio, power_saved_mw


class CampaignAssertionError(AssertionError):
    pass


def default_layout() -> NetworkLayout:
    return NetworkLayout(
        macro_pos=Point(0.0, 0.0),
        macro_radio=CellRadioConfig(40.0, 1000.0),
        small_pos=Point(500.0, 0.0),
        small_radio=CellRadioConfig(20.0, 35.0),
    )


@dataclass(frozen=True)
class RegionKnobs:
    n_samples: int = 1_000_000


@dataclass(frozen=True)
class TransitKnobs:
    start_m: float = 100.0
    end_m: float = 490.0
    spacing_m: float = 1.0
    speeds_kmph: tuple[float, ...] = (30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0)
    target_sinr_db: float = 0.0
    interferers: bool = False
    interferer_small_region: Point = Point(520.0, 20.0)
    interferer_macro_region: Point = Point(-100.0, 50.0)


@dataclass(frozen=True)
class ZoneKnobs:
    macro_radius_m: float = 800.0
    small_distance_m: float = 800.0
    device_distances_m: tuple[float, ...] = (600.0, 730.0)
    bearing_deg: float = 15.0
    lambdas_dbm: tuple[float, ...] = (-90.0, -95.0)


@dataclass(frozen=True)
class CompareKnobs:
    distances_m: tuple[float, ...] = (100.0, 300.0, 600.0)
    ds_fractions: tuple[float, ...] = (0.25, 0.5, 1.0)
    alphas: tuple[float, ...] = (0.5, 0.7, 1.0)
    p0s_dbm: tuple[float, ...] = (-90.0, -80.0, -70.0)
    num_rbs: tuple[int, ...] = (1, 10)
    lambda_dbm: float = -90.0


@dataclass(frozen=True)
class ScenarioConfig:
    layout: NetworkLayout = field(default_factory=default_layout)
    pc: PowerControlConfig = field(default_factory=PowerControlConfig)
    d2d: D2DConfig = field(default_factory=D2DConfig)
    mobility: MobilityParams = field(default_factory=MobilityParams)
    seed: int = 2016
    region: RegionKnobs = field(default_factory=RegionKnobs)
    transit: TransitKnobs = field(default_factory=TransitKnobs)
    zones: ZoneKnobs = field(default_factory=ZoneKnobs)
    compare: CompareKnobs = field(default_factory=CompareKnobs)
    provenance: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def k(self) -> float:
        return self.layout.dl_constant()


@dataclass
class ScenarioResult:
    name: str
    columns: dict[str, list[float]]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns of {self.name!r} have unequal lengths {sorted(lengths)}")

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()), []))


def _jsonable(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.name != "provenance"}
    if isinstance(obj, FormulaMode):
        return obj.value
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def base_metadata(cfg: ScenarioConfig) -> dict[str, Any]:
    return {
        "seed": cfg.seed,
        "mode": cfg.pc.mode.value,
        "config": _jsonable(cfg),
        "provenance": _jsonable(cfg.provenance),
    }


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise CampaignAssertionError(msg)


# --- region ---------------------------------------------------------------


def run_region_campaign(cfg: ScenarioConfig) -> ScenarioResult:
    k = cfg.k
    circle = apollonius_circle(cfg.layout, k)
    area, se = region_area_mc(cfg.layout, k, cfg.region.n_samples, cfg.seed)
    try:
        analytic = region_area_semi_analytic(cfg.layout, k)
    except ValueError:
        analytic = math.nan
    z = (area - analytic) / se if se > 0 and math.isfinite(analytic) else math.nan
    meta = base_metadata(cfg)
    meta["n_samples"] = cfg.region.n_samples
    return ScenarioResult(
        "region",
        {
            "k": [k],
            "apollonius_center_x_m": [circle.center.x],
            "apollonius_center_y_m": [circle.center.y],
            "apollonius_radius_m": [circle.radius_m],
            "area_mc_m2": [area],
            "area_se_m2": [se],
            "area_semi_analytic_m2": [analytic],
            "z_score": [z],
        },
        meta,
    )


# --- decoupling time ------------------------------------------------------


def _speed_label(v: float) -> str:
    return f"{v:g}kmph"


def run_decoupling_time_campaign(cfg: ScenarioConfig, refine: bool = False) -> ScenarioResult:
    k = cfg.k
    columns: dict[str, list[float]] = {}
    summary: dict[str, Any] = {}
    for v in cfg.mobility.speed_classes_kmph:
        times, trajs = decoupling_times_for_class(cfg.layout, k, cfg.mobility, v, cfg.seed, refine=refine)
        cdf = empirical_cdf(times)
        lookup = dict(cdf)
        ordered = sorted(times)
        probs = [lookup[t] for t in ordered]
        _check(all(b >= a for a, b in zip(probs, probs[1:])), f"CDF at {v} km/h is not monotone")
        _check(probs[-1] == 1.0 and all(0.0 < p <= 1.0 for p in probs), f"CDF at {v} km/h is not a distribution")
        label = _speed_label(v)
        columns[f"time_s_{label}"] = ordered
        columns[f"cdf_{label}"] = probs
        summary[label] = {
            "mean_s": math.fsum(times) / len(times),
            "median_s": _median(times),
            "unfinished": sum(t.timed_out for t in trajs),
            "double_crossings": sum(t.double_crossings for t in trajs),
        }
    meta = base_metadata(cfg)
    meta["summary"] = summary
    meta["refine"] = refine
    return ScenarioResult("decoupling_time", columns, meta)


def _median(values: list[float]) -> float:
    s = sorted(values)
    n = len(s)
    return s[n // 2] if n % 2 else 0.5 * (s[n // 2 - 1] + s[n // 2])


# --- transit --------------------------------------------------------------


def _line_point(cfg: ScenarioConfig, offset_m: float) -> Point:
    m, s = cfg.layout.macro_pos, cfg.layout.small_pos
    d = cfg.layout.inter_site_distance_m
    return Point(m.x + offset_m * (s.x - m.x) / d, m.y + offset_m * (s.y - m.y) / d)


def _bisect_boundary(cfg: ScenarioConfig, k: float, lo: float, hi: float, before: Association, tol_m: float = 1e-3) -> float:
    """First offset in ``[lo, hi]`` where the association stops being ``before``."""
    while hi - lo > tol_m:
        mid = 0.5 * (lo + hi)
        if classify(_line_point(cfg, mid), cfg.layout, k) is before:
            lo = mid
        else:
            hi = mid
    return hi


def transit_landmarks(cfg: ScenarioConfig) -> dict[str, float]:
    """Offsets of A, B, C, D along the Macro -> small cell line."""
    k, t = cfg.k, cfg.transit
    a_assoc = classify(_line_point(cfg, t.start_m), cfg.layout, k)
    d_assoc = classify(_line_point(cfg, t.end_m), cfg.layout, k)
    if a_assoc is not Association.COUPLED_MACRO or d_assoc is not Association.COUPLED_SMALL:
        raise ValueError(
            f"transit must start coupled to the Macro and end coupled to the small cell "
            f"(got {a_assoc.name} -> {d_assoc.name})"
        )
    b = _bisect_boundary(cfg, k, t.start_m, t.end_m, Association.COUPLED_MACRO)
    c = _bisect_boundary(cfg, k, b, t.end_m, Association.DECOUPLED)
    return {"A": t.start_m, "B": b, "C": c, "D": t.end_m}


def _interference_at(cfg: ScenarioConfig, cell: str) -> list[float]:
    """Uplink interference (dBm) seen by ``cell`` from the other cell's interferer."""
    if not cfg.transit.interferers:
        return []
    lay = cfg.layout
    if cell == "macro":
        src, serving, victim = cfg.transit.interferer_small_region, lay.small_pos, lay.macro_pos
    else:
        src, serving, victim = cfg.transit.interferer_macro_region, lay.macro_pos, lay.small_pos
    tx = uplink_tx_power_dbm(cfg.pc, path_loss_db(src.distance_to(serving)))
    return [tx - path_loss_db(src.distance_to(victim))]


def run_transit_campaign(cfg: ScenarioConfig) -> ScenarioResult:
    k, t, pc, lay = cfg.k, cfg.transit, cfg.pc, cfg.layout
    marks = transit_landmarks(cfg)
    n = int(math.floor((t.end_m - t.start_m) / t.spacing_m + 1e-9)) + 1
    offsets = [t.start_m + i * t.spacing_m for i in range(n)]
    interference = {c: _interference_at(cfg, c) for c in ("macro", "small")}
    in_dbm = {
        c: mw_to_dbm(math.fsum(dbm_to_mw(v) for v in interference[c]) + dbm_to_mw(pc.noise_dbm))
        for c in ("macro", "small")
    }

    cols: dict[str, list[float]] = {
        name: []
        for name in (
            "position_m", "d_macro_m", "d_small_m", "association",
            "ul_cell_coupled", "ul_cell_decoupled",
            "sinr_coupled_db", "sinr_decoupled_db", "se_coupled", "se_decoupled",
            "tx_target_coupled_dbm", "tx_target_decoupled_dbm",
            "tx_target_coupled_capped", "tx_target_decoupled_capped",
        )
    }
    for off in offsets:
        p = _line_point(cfg, off)
        d = {"macro": p.distance_to(lay.macro_pos), "small": p.distance_to(lay.small_pos)}
        pl = {c: path_loss_db(d[c]) for c in d}
        coupled = "macro" if dl_prefers_macro(p, lay, k) else "small"
        decoupled = "small" if ul_prefers_small(p, lay) else "macro"
        cols["position_m"].append(off)
        cols["d_macro_m"].append(d["macro"])
        cols["d_small_m"].append(d["small"])
        cols["association"].append(float(classify(p, lay, k)))
        for policy, cell in (("coupled", coupled), ("decoupled", decoupled)):
            rx = uplink_tx_power_dbm(pc, pl[cell]) - pl[cell]
            sinr = sinr_db(rx, interference[cell], pc.noise_dbm)
            tx, capped = tx_power_for_target_sinr_dbm(t.target_sinr_db, pl[cell], in_dbm[cell], pc.pmax_dbm)
            cols[f"ul_cell_{policy}"].append(0.0 if cell == "macro" else 1.0)
            cols[f"sinr_{policy}_db"].append(sinr)
            cols[f"se_{policy}"].append(spectral_efficiency(sinr))
            cols[f"tx_target_{policy}_dbm"].append(tx)
            cols[f"tx_target_{policy}_capped"].append(float(capped))
    for v in t.speeds_kmph:
        cols[f"time_s_{_speed_label(v)}"] = [(off - t.start_m) / (v / 3.6) for off in offsets]

    result = ScenarioResult("transit", cols, base_metadata(cfg))
    result.metadata["landmarks_m"] = marks
    # the ordering only holds when both cells see the same noise floor
    result.metadata["ordering_checked"] = not t.interferers
    if not t.interferers:
        check_transit(result, marks)
    return result


def check_transit(result: ScenarioResult, marks: dict[str, float]) -> None:
    c = result.columns
    rows = range(result.n_rows)
    in_bc = [i for i in rows if marks["B"] <= c["position_m"][i] <= marks["C"]]
    for i in rows:
        se_c, se_d = c["se_coupled"][i], c["se_decoupled"][i]
        tx_c, tx_d = c["tx_target_coupled_dbm"][i], c["tx_target_decoupled_dbm"][i]
        at = c["position_m"][i]
        if c["association"][i] == Association.DECOUPLED:
            _check(se_d > se_c, f"decoupled SE not above coupled SE at {at} m")
            _check(tx_d < tx_c, f"decoupled tx power not below coupled at {at} m")
        else:
            _check(se_d == se_c, f"policies disagree outside the decoupling region at {at} m")
            _check(tx_d == tx_c, f"tx powers disagree outside the decoupling region at {at} m")
    for i, j in zip(in_bc, in_bc[1:]):
        _check(c["se_decoupled"][j] >= c["se_decoupled"][i], "decoupled SE decreases between B and C")
        _check(c["se_coupled"][j] <= c["se_coupled"][i], "coupled SE increases between B and C")


# --- interference zones ---------------------------------------------------


def zone_layout(cfg: ScenarioConfig) -> NetworkLayout:
    lay = cfg.layout
    return NetworkLayout(
        macro_pos=Point(0.0, 0.0),
        macro_radio=CellRadioConfig(lay.macro_radio.dl_tx_power_dbm, cfg.zones.macro_radius_m),
        small_pos=Point(cfg.zones.small_distance_m, 0.0),
        small_radio=lay.small_radio,
    )


def zone_device_positions(cfg: ScenarioConfig) -> list[Point]:
    theta = math.radians(cfg.zones.bearing_deg)
    return [Point(r * math.cos(theta), r * math.sin(theta)) for r in cfg.zones.device_distances_m]


def run_zone_campaign(cfg: ScenarioConfig) -> ScenarioResult:
    lay = zone_layout(cfg)
    k = lay.dl_constant()
    cols: dict[str, list[float]] = {
        name: []
        for name in (
            "device_distance_m", "lambda_dbm", "d_macro_m", "d_small_m",
            "radius_coupled_m", "radius_decoupled_m", "excess_area_m2", "extra_pairs",
        )
    }
    by_lambda: dict[float, list[tuple[float, float, float]]] = {}
    for r, pos in zip(cfg.zones.device_distances_m, zone_device_positions(cfg)):
        for lam in cfg.zones.lambdas_dbm:
            d2d = D2DConfig(lam, cfg.d2d.r_pair_density)
            zone = zone_pair(pos, lay, cfg.pc, d2d, k)
            a, b = zone.radius_coupled_m, zone.radius_decoupled_m
            _check(b < a, f"decoupled zone not smaller at {r} m, lambda {lam} dBm")
            area = excess_area_m2(zone)
            d_s = pos.distance_to(lay.small_pos)
            cols["device_distance_m"].append(r)
            cols["lambda_dbm"].append(lam)
            cols["d_macro_m"].append(pos.distance_to(lay.macro_pos))
            cols["d_small_m"].append(d_s)
            cols["radius_coupled_m"].append(a)
            cols["radius_decoupled_m"].append(b)
            cols["excess_area_m2"].append(area)
            cols["extra_pairs"].append(extra_pairs(area, d2d))
            by_lambda.setdefault(lam, []).append((d_s, a, b))

    for lam, rows in by_lambda.items():
        rows = sorted(rows)
        _check(
            all(b1 < b2 for (_, _, b1), (_, _, b2) in zip(rows, rows[1:])),
            f"decoupled zone does not shrink toward the small cell at lambda {lam} dBm",
        )
    lams = sorted(by_lambda, reverse=True)
    for hi, lo in zip(lams, lams[1:]):
        for (_, a_hi, b_hi), (_, a_lo, b_lo) in zip(sorted(by_lambda[hi]), sorted(by_lambda[lo])):
            _check(a_lo > a_hi and b_lo > b_hi, f"zones at {lo} dBm do not contain zones at {hi} dBm")

    meta = base_metadata(cfg)
    meta["k"] = k
    meta["small_cell_m"] = [lay.small_pos.x, lay.small_pos.y]
    return ScenarioResult("zones", cols, meta)


# --- formula comparison ---------------------------------------------------


def run_formula_comparison(cfg: ScenarioConfig) -> ScenarioResult:
    """Both formula modes side by side over a parameter grid; report only."""
    ck = cfg.compare
    names = (
        "d_macro_m", "d_small_m", "alpha", "p0_dbm", "num_rbs",
        "tx_macro_db_consistent_dbm", "tx_macro_paper_literal_dbm",
        "rx_macro_db_consistent_dbm", "rx_macro_paper_literal_dbm",
        "tx_macro_eq_literal_dbm",
        "ratio_db_consistent", "ratio_paper_literal",
        "saved_db_consistent_mw", "saved_paper_literal_mw",
        "radius_decoupled_db_consistent_m", "radius_decoupled_paper_literal_m",
    )
    cols: dict[str, list[float]] = {n: [] for n in names}
    grid = itertools.product(ck.distances_m, ck.ds_fractions, ck.alphas, ck.p0s_dbm, ck.num_rbs)
    for d_m, frac, alpha, p0, rbs in grid:
        d_s = d_m * frac
        db = dataclasses.replace(cfg.pc, alpha=alpha, p0_dbm=p0, num_rbs=rbs, mode=FormulaMode.DB_CONSISTENT)
        lit = dataclasses.replace(db, mode=FormulaMode.PAPER_LITERAL)
        pl_m = path_loss_db(d_m)
        tx_db = uplink_tx_power_dbm(db, pl_m)
        tx_lit = uplink_tx_power_dbm(lit, pl_m)
        try:
            a = d2d_mod.zone_radius_m(tx_db, ck.lambda_dbm)
            b_db = d2d_mod.zone_radius_m(uplink_tx_power_dbm(db, path_loss_db(d_s)), ck.lambda_dbm)
            b_lit = paper_literal_decoupled_radius(a, d_m, d_s, alpha)
        except d2d_mod.DegenerateZoneError:
            b_db = b_lit = math.nan
        row = (
            d_m, d_s, alpha, p0, float(rbs),
            tx_db, tx_lit,
            tx_db - pl_m, tx_lit - pl_m,
            p0 * alpha * pl_m,  # dBm form of 10^((P0/10) alpha PL)
            power_ratio(d_s, d_m, db), power_ratio(d_s, d_m, lit),
            power_saved_mw(d_m, d_s, db), power_saved_mw(d_m, d_s, lit),
            b_db, b_lit,
        )
        for name, value in zip(names, row):
            cols[name].append(value)
    meta = base_metadata(cfg)
    meta["grid_shape"] = [len(ck.distances_m), len(ck.ds_fractions), len(ck.alphas), len(ck.p0s_dbm), len(ck.num_rbs)]
    return ScenarioResult("formula_comparison", cols, meta)
