"""The prefetchlab command line.

``prefetchlab run --config cfg [--trace path | --workload spec] --out dir``
simulates one configuration and writes report.json and report.csv.
``prefetchlab sweep --param key=v1,v2,... ...`` repeats the run for each
value of one config key and writes one CSV row (and one JSON entry) per
point. Exit codes: 0 success, 2 configuration error, 3 trace I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Tuple

from .config import Config, ConfigError, load_config
from .core import TraceFormatError, read_trace
from .metrics import MetricsReport
from .sim import run_simulation
from .workloads import generate, parse_workload

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

# convenience aliases for common sweep parameters
_PARAM_ALIASES = {"degree": "prefetcher.degree", "latency": "sim.latency_events"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prefetchlab")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--trace", help="trace file (.btrace for binary)")
        p.add_argument("--workload", help="workload spec, e.g. strided:n=1000,stride=2")
        p.add_argument("--out", required=True, help="output directory")

    run_p = sub.add_parser("run", help="simulate one configuration")
    add_common(run_p)

    sweep_p = sub.add_parser("sweep", help="run once per value of one parameter")
    add_common(sweep_p)
    sweep_p.add_argument("--param", required=True,
                         help="key=v1,v2,... (key may be a config key or "
                              "an alias like 'degree')")
    return parser


def _load_inputs(args) -> Tuple[Config, list, str]:
    cfg = load_config(args.config) if args.config else Config()
    if bool(args.trace) == bool(args.workload):
        raise ConfigError("give exactly one of --trace or --workload")
    if args.trace:
        events = read_trace(args.trace)
        source = os.path.basename(args.trace)
    else:
        events, _ = generate(parse_workload(args.workload))
        source = args.workload
    return cfg, events, source


def _write_reports(out_dir: str, reports: List[MetricsReport]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    if len(reports) == 1:
        payload: object = reports[0].to_dict()
    else:
        payload = {"runs": [r.to_dict() for r in reports]}
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8") as fh:
        fh.write(MetricsReport.csv_header() + "\n")
        for report in reports:
            fh.write(report.csv_row() + "\n")


def _cmd_run(args) -> int:
    cfg, events, source = _load_inputs(args)
    report = run_simulation(cfg, events, source=source)
    _write_reports(args.out, [report])
    print(report.to_json())
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg, events, source = _load_inputs(args)
    key, sep, values_text = args.param.partition("=")
    if not sep or not values_text:
        raise ConfigError("--param must look like key=v1,v2,...")
    key = _PARAM_ALIASES.get(key.strip(), key.strip())
    values = [v.strip() for v in values_text.split(",") if v.strip()]
    if not values:
        raise ConfigError("--param needs at least one value")
    reports = []
    for value in values:
        point = cfg.copy()
        point.set(key, value)
        reports.append(run_simulation(point, events, source=source))
    _write_reports(args.out, reports)
    for report in reports:
        print(report.to_json())
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_sweep(args)
    except TraceFormatError as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
