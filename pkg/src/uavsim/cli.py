"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
Progress goes to stderr; data goes to files (and stdout for ``linkbudget``).
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import replace
from datetime import datetime, timezone
import io
import json
import logging
import sys
import time

import numpy as np

from . import __version__
from .config import ConfigError, SimulationConfig, dump_config, load_config
from .dl_engine import CHANNELS, outage_table, run_dl_campaign
from .experiments import closed_loop_combination, p0_sweep, resolve_combination
from .link_budget import build_ce_table, format_table, table_csv_rows
from .stats import (cdf, ensure_dir, gain_report, read_samples_csv, read_table_csv, summarize,
                    write_plot_data, write_samples_csv, write_summary, write_table_csv)
from .ul_engine import run_ul_campaign

log = logging.getLogger("uavsim")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
UL_METRICS = ("sinr", "throughput", "tx_power")
CLASSES = ("terrestrial", "aerial", "all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, combination=True):
    p.add_argument("--config", help="YAML/JSON configuration file")
    p.add_argument("--seed", type=int, help="campaign seed (overrides config)")
    p.add_argument("--drops", type=int, help="number of Monte Carlo drops")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--scenario", choices=("UMa-AV", "RMa-AV", "UMi-AV"))
    p.add_argument("--case", choices=("case1", "case5"))
    p.add_argument("--workers", type=int, help="worker processes for drops")
    if combination:
        p.add_argument("--combination", help="ol1..ol6 (or 1..6) / cl1, cl2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uavsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run-ul", aliases=["run_ul"], help="uplink IoT/SINR/throughput campaign")
    _common(p)

    p = sub.add_parser("sweep-p0", aliases=["sweep_p0"], help="UAV P0 sweep against combination 1")
    _common(p, combination=False)
    p.add_argument("--p0-aerial", help="comma-separated UAV P0 values, first is the baseline")

    p = sub.add_parser("sweep-cl", aliases=["sweep_cl"],
                       help="closed-loop combination 2 against combination 1")
    _common(p, combination=False)

    p = sub.add_parser("run-dl", aliases=["run_dl"], help="downlink geometry SINR and outage")
    _common(p, combination=False)

    p = sub.add_parser("linkbudget", help="print the coverage-extension link budget")
    p.add_argument("--csv", action="store_true", help="emit CSV on stdout instead of the table")
    p.add_argument("--out", help="also write linkbudget.csv into this directory")
    return parser


def resolve(args) -> SimulationConfig:
    """Config file values, then command-line overrides."""
    cfg = load_config(args.config) if args.config else SimulationConfig()
    sc = cfg.scenario
    changes = {}
    if args.scenario:
        changes["scenario"] = args.scenario
    if args.case:
        changes.update(case=args.case, terrestrial_per_cell=None, aerial_per_cell=None)
    if args.seed is not None:
        changes["seed"] = args.seed
    if changes:
        try:
            sc = replace(sc, **changes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    camp = cfg.campaign
    camp_changes = {}
    if args.drops is not None:
        if args.drops < 1:
            raise UsageError("--drops must be >= 1")
        camp_changes["drops"] = args.drops
    if args.seed is not None:
        camp_changes["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        camp_changes["workers"] = args.workers
    if camp_changes:
        camp = replace(camp, **camp_changes)
    pc = cfg.power_control
    if getattr(args, "combination", None):
        try:
            pc = resolve_combination(args.combination, pc)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    sweep = cfg.p0_sweep
    if getattr(args, "p0_aerial", None):
        try:
            sweep = tuple(float(v) for v in args.p0_aerial.split(",") if v.strip())
        except ValueError as exc:
            raise UsageError(f"bad --p0-aerial list: {exc}") from exc
    return replace(cfg, scenario=sc, campaign=camp, power_control=pc, p0_sweep=sweep)


def _write_manifest(out, args, cfg: SimulationConfig, files):
    dump_config(cfg, out / "config.resolved.yaml")
    manifest = {
        "subcommand": args.command,
        "config": args.config,
        "seed": cfg.campaign.seed,
        "drops": cfg.campaign.drops,
        "out": str(out),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "argv": sys.argv[1:],
        "files": sorted(files),
        "resolved_config": cfg.to_dict(),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")


def _validate_csv(path, records):
    """Re-read a samples file and compare with what was meant to be written."""
    back = read_samples_csv(path)
    expected = {}
    for metric, cls, scen, comb, values in records:
        expected.setdefault((metric, cls, scen, comb), []).extend(np.ravel(values).tolist())
    if set(back) != {k for k, v in expected.items() if v}:
        raise RuntimeError(f"{path}: written keys do not re-parse")
    for k, v in back.items():
        if not np.array_equal(v, np.asarray(expected[k], float)):
            raise RuntimeError(f"{path}: values for {k} do not round-trip")


def _ul_records(result, scenario, label):
    records = [("iot", "all", scenario, label, result.samples("iot"))]
    for metric in UL_METRICS:
        for cls in CLASSES:
            records.append((metric, cls, scenario, label, result.samples(metric, cls)))
    records.append(("pcpc", "aerial", scenario, label, result.samples("pcpc", "aerial")))
    return [r for r in records if len(r[4])]


def _emit_cdfs(out, records, suffix=""):
    files = []
    for metric, cls, scen, comb, values in records:
        name = f"cdf_{metric}_{cls}{suffix or ''}_{comb or scen}.dat"
        write_plot_data(out / name, cdf(values, metric, cls))
        files.append(name)
    return files


def _summaries(records, percentiles):
    return {f"{m}.{c}.{s}.{comb}": summarize(v, percentiles) for m, c, s, comb, v in records}


def cmd_run_ul(args, cfg: SimulationConfig):
    out = ensure_dir(args.out)
    sc, pc = cfg.scenario, cfg.power_control
    label = pc.label or "config"
    t0 = time.perf_counter()
    result = run_ul_campaign(sc, pc, cfg.campaign.drops, cfg.ul, cfg.propagation_for(sc.scenario),
                             seed=cfg.campaign.seed, workers=cfg.campaign.workers)
    log.info("run-ul: %d drops in %.1f s", cfg.campaign.drops, time.perf_counter() - t0)
    records = _ul_records(result, sc.scenario, label)
    write_samples_csv(out / "samples.csv", records)
    _validate_csv(out / "samples.csv", records)
    summary = _summaries(records, cfg.campaign.percentiles)
    summary["achieved_ru.mean"] = float(result.achieved_ru.mean())
    write_summary(out / "summary.json", summary)
    files = ["samples.csv", "summary.json", *_emit_cdfs(out, records)]
    _write_manifest(out, args, cfg, files)
    return EXIT_OK


def _gain_rows(policies, results, scenario, percentiles):
    rows = [["metric", "class", "scenario", "combination", "statistic", "gain_percent"]]
    gains = {}
    base = results[0]
    for pol, res in zip(policies[1:], results[1:]):
        for cls in ("terrestrial", "aerial", "all"):
            b, c = base.samples("throughput", cls), res.samples("throughput", cls)
            if len(b) == 0 or len(c) == 0:
                continue
            rep = gain_report(b, c, percentiles)
            gains[f"throughput.{cls}.{pol.label}"] = rep
            for key, g in rep.items():
                rows.append(["throughput", cls, scenario, pol.label,
                             f"p{key}" if key != "mean" else "mean",
                             "undefined" if g is None else repr(float(g))])
        iot = gain_report(base.samples("iot"), res.samples("iot"), percentiles)
        gains[f"iot.all.{pol.label}"] = iot
    return rows, gains


def _run_comparison(args, cfg: SimulationConfig, policies, name):
    out = ensure_dir(args.out)
    sc = cfg.scenario
    params = cfg.propagation_for(sc.scenario)
    results, records = [], []
    for pol in policies:
        t0 = time.perf_counter()
        res = run_ul_campaign(sc, pol, cfg.campaign.drops, cfg.ul, params,
                              seed=cfg.campaign.seed, workers=cfg.campaign.workers)
        log.info("%s: %s (%d drops) in %.1f s", name, pol.label, cfg.campaign.drops,
                 time.perf_counter() - t0)
        results.append(res)
        records.extend(_ul_records(res, sc.scenario, pol.label))
    write_samples_csv(out / "samples.csv", records)
    _validate_csv(out / "samples.csv", records)
    rows, gains = _gain_rows(policies, results, sc.scenario, cfg.campaign.percentiles)
    write_table_csv(out / "gains.csv", rows)
    if read_table_csv(out / "gains.csv") != rows:
        raise RuntimeError("gains.csv does not round-trip")
    summary = {"gain": gains, **_summaries(records, cfg.campaign.percentiles),
               "combinations": {p.label: {"p0_terrestrial": p.p0_terrestrial,
                                          "p0_aerial": p.p0_aerial,
                                          "closed_loop_mode": p.closed_loop_mode,
                                          "aerial_target_mode": p.aerial_target_mode}
                                for p in policies}}
    write_summary(out / "summary.json", summary)
    files = ["samples.csv", "gains.csv", "summary.json", *_emit_cdfs(out, records)]
    _write_manifest(out, args, cfg, files)
    for row in rows[1:]:
        if row[1] == "terrestrial":
            print(",".join(row))
    return EXIT_OK


def cmd_sweep_p0(args, cfg: SimulationConfig):
    try:
        policies = p0_sweep(cfg.p0_sweep, cfg.power_control)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return _run_comparison(args, cfg, policies, "sweep-p0")


def cmd_sweep_cl(args, cfg: SimulationConfig):
    policies = [closed_loop_combination(1, cfg.power_control),
                closed_loop_combination(2, cfg.power_control)]
    return _run_comparison(args, cfg, policies, "sweep-cl")


def cmd_run_dl(args, cfg: SimulationConfig):
    out = ensure_dir(args.out)
    scenarios = (args.scenario,) if args.scenario else cfg.campaign.dl_scenarios
    per_scenario, records = {}, []
    for scen in scenarios:
        sc = replace(cfg.scenario, scenario=scen, inter_site_distance=None, antenna_height=None,
                     carrier_frequency=None, min_distance=None) \
            if scen != cfg.scenario.scenario else cfg.scenario
        t0 = time.perf_counter()
        res = run_dl_campaign(sc, cfg.campaign.drops, cfg.dl, cfg.propagation_for(scen),
                              seed=cfg.campaign.seed, workers=cfg.campaign.workers)
        log.info("run-dl: %s (%d drops) in %.1f s", scen, cfg.campaign.drops, time.perf_counter() - t0)
        uav = res.samples("aerial")
        if uav.size == 0:
            raise UsageError("no UAVs in the population; use case5 for downlink runs")
        per_scenario[scen] = uav
        records.append(("geometry_sinr", "aerial", scen, "", uav))
        terr = res.samples("terrestrial")
        if terr.size:
            records.append(("geometry_sinr", "terrestrial", scen, "", terr))
    write_samples_csv(out / "samples.csv", records)
    _validate_csv(out / "samples.csv", records)

    table = outage_table(per_scenario, cfg.dl.thresholds)
    rows = [["channel", *(f"{s} {col}" for s in scenarios for col in ("w/o CE", "w/ CE"))]]
    for ch in CHANNELS:
        rows.append([ch, *(repr(table[s][col][ch]) for s in scenarios for col in ("w/o CE", "w/ CE"))])
    write_table_csv(out / "outage.csv", rows)
    if read_table_csv(out / "outage.csv") != rows:
        raise RuntimeError("outage.csv does not round-trip")

    summary = {
        "outage": table,
        "geometry_sinr": {s: {**summarize(v, cfg.campaign.percentiles), "min": float(v.min())}
                          for s, v in per_scenario.items()},
        "thresholds": {**cfg.dl.thresholds.to_dict(),
                       "normal_thresholds_are_placeholders": True},
    }
    write_summary(out / "summary.json", summary)
    files = ["samples.csv", "outage.csv", "summary.json", *_emit_cdfs(out, records)]
    _write_manifest(out, args, cfg, files)

    width = max(len(c) for c in CHANNELS) + 8
    print("outage".ljust(width) + "".join(f"{h:>20}" for h in rows[0][1:]))
    for ch in CHANNELS:
        print(f"{ch} outage".ljust(width) + "".join(
            f"{100 * table[s][col][ch]:>19.1f}%" for s in scenarios for col in ("w/o CE", "w/ CE")))
    return EXIT_OK


def cmd_linkbudget(args):
    rows = build_ce_table()
    csv_rows = table_csv_rows(rows)
    if args.csv:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(csv_rows)
        sys.stdout.write(buf.getvalue())
    else:
        print(format_table(rows))
    if args.out:
        out = ensure_dir(args.out)
        write_table_csv(out / "linkbudget.csv", csv_rows)
        if read_table_csv(out / "linkbudget.csv") != csv_rows:
            raise RuntimeError("linkbudget.csv does not round-trip")
    return EXIT_OK


COMMANDS = {
    "run-ul": cmd_run_ul, "run_ul": cmd_run_ul,
    "sweep-p0": cmd_sweep_p0, "sweep_p0": cmd_sweep_p0,
    "sweep-cl": cmd_sweep_cl, "sweep_cl": cmd_sweep_cl,
    "run-dl": cmd_run_dl, "run_dl": cmd_run_dl,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "linkbudget":
            return cmd_linkbudget(args)
        cfg = resolve(args)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"uavsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any failure maps to the runtime exit code
        log.exception("runtime failure: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
