"""Command-line front end.

Exit codes: 0 success, 1 invalid input or configuration, 2 a campaign's
built-in check failed, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Callable, Sequence

from dudesim import d2d, geometry, linkbudget, powersave
from dudesim.config import ConfigError, parse_config
from dudesim.scenario import (
    CampaignAssertionError,
    ScenarioConfig,
    ScenarioResult,
    run_decoupling_time_campaign,
    run_formula_comparison,
    run_region_campaign,
    run_transit_campaign,
    run_zone_campaign,
)

OUTPUT_DIR_ENV = "DUDESIM_OUTPUT_DIR"

EXIT_OK, EXIT_INVALID, EXIT_ASSERTION, EXIT_IO = 0, 1, 2, 3


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def _json_value(v: Any) -> Any:
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def render_csv(result: ScenarioResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(result.columns)
    writer.writerow(names)
    for i in range(result.n_rows):
        writer.writerow([_fmt(result.columns[n][i]) for n in names])
    return buf.getvalue()


def render_json(result: ScenarioResult) -> str:
    doc = {"name": result.name, "metadata": result.metadata, "columns": result.columns}
    return json.dumps(_json_value(doc), indent=2, allow_nan=False) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(result: ScenarioResult, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """Write ``result`` to ``out_dir``; CSV output gets a ``.meta.json`` sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        data = out / f"{result.name}.csv"
        meta = out / f"{result.name}.meta.json"
        _atomic_write(data, render_csv(result))
        meta_doc = {"name": result.name, "metadata": result.metadata}
        _atomic_write(meta, json.dumps(_json_value(meta_doc), indent=2, allow_nan=False) + "\n")
        return [data, meta]
    if fmt == "json":
        data = out / f"{result.name}.json"
        _atomic_write(data, render_json(result))
        return [data]
    raise ValueError(f"unknown output format {fmt!r}")


CAMPAIGNS: dict[str, Callable[..., ScenarioResult]] = {
    "region": run_region_campaign,
    "mobility": run_decoupling_time_campaign,
    "transit": run_transit_campaign,
    "zones": run_zone_campaign,
    "compare": run_formula_comparison,
}


# --- calculators ----------------------------------------------------------


def _calc(name: str, args: list[float], cfg: ScenarioConfig) -> tuple[float, str]:
    pc = cfg.pc

    def need(n: int, usage: str) -> None:
        if len(args) != n:
            raise ValueError(f"calc {name} expects {usage}")

    if name == "path-loss":
        need(1, "DISTANCE_M")
        return linkbudget.path_loss_db(args[0]), "dB"
    if name == "k":
        need(2, "MACRO_DL_DBM SMALL_DL_DBM")
        return geometry.dl_constant_k(args[0], args[1]), ""
    if name == "uplink-power":
        need(1, "PATH_LOSS_DB")
        return linkbudget.uplink_tx_power_dbm(pc, args[0]), "dBm"
    if name == "zone-radius":
        need(2, "TX_DBM LAMBDA_DBM")
        return d2d.zone_radius_m(args[0], args[1]), "m"
    if name == "power-ratio":
        if len(args) == 3:
            pc = dataclasses.replace(pc, alpha=args[2])
        elif len(args) != 2:
            raise ValueError("calc power-ratio expects D_SMALL_M D_MACRO_M [ALPHA]")
        return powersave.power_ratio(args[0], args[1], pc), ""
    if name == "power-saved":
        need(2, "D_MACRO_M D_SMALL_M")
        return powersave.power_saved_mw(args[0], args[1], pc), "mW"
    if name == "excess-area":
        need(2, "RADIUS_COUPLED_M RADIUS_DECOUPLED_M")
        zone = d2d.InterferenceZone(geometry.Point(0.0, 0.0), args[0], args[1])
        return d2d.excess_area_m2(zone), "m^2"
    raise ValueError(f"unknown calculator {name!r}; choose from {', '.join(CALCULATORS)}")


CALCULATORS = ("path-loss", "k", "uplink-power", "zone-radius", "power-ratio", "power-saved", "excess-area")


# --- argument parsing -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="key = value config file (distances in km)")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--mode", choices=["DbConsistent", "PaperLiteral"], help="override the formula mode")

    outputs = argparse.ArgumentParser(add_help=False)
    outputs.add_argument(
        "-o", "--out", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or ./results)"
    )
    outputs.add_argument("-f", "--format", choices=["csv", "json"], default="csv")

    parser = argparse.ArgumentParser(prog="dudesim", description="Downlink/uplink decoupling campaigns.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("region", parents=[common, outputs], help="decoupling-region area (Monte Carlo + closed form)")
    sub.add_parser("transit", parents=[common, outputs], help="straight-line transit: SE and tx power")
    mob = sub.add_parser("mobility", parents=[common, outputs], help="decoupling-time CDFs for random walkers")
    mob.add_argument("--refine", action="store_true", help="bisect boundary crossings inside each step")
    sub.add_parser("zones", parents=[common, outputs], help="interference zones of a decoupling device")
    sub.add_parser("compare", parents=[common, outputs], help="DbConsistent vs PaperLiteral formula table")
    sub.add_parser("all", parents=[common, outputs], help="run every campaign")
    calc = sub.add_parser("calc", parents=[common], help="evaluate a single formula")
    calc.add_argument("name", choices=CALCULATORS)
    calc.add_argument("args", nargs="*", type=float)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = parse_config(ns.config, {"seed": ns.seed, "mode": ns.mode})
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if ns.command == "calc":
        try:
            value, unit = _calc(ns.name, list(ns.args), cfg)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        print(f"{value:.10g}{' ' + unit if unit else ''} (mode={cfg.pc.mode.value})")
        return EXIT_OK

    names = list(CAMPAIGNS) if ns.command == "all" else [ns.command]
    out_dir = ns.out or os.environ.get(OUTPUT_DIR_ENV) or "results"
    try:
        results = []
        for name in names:
            if name == "mobility":
                results.append(run_decoupling_time_campaign(cfg, refine=getattr(ns, "refine", False)))
            else:
                results.append(CAMPAIGNS[name](cfg))
    except CampaignAssertionError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        for result in results:
            for path in emit(result, out_dir, ns.format):
                print(path)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
