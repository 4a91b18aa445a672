"""xbench: run experiment suites and gate on their thresholds.

Exit status 0 when every record passes, 1 on a threshold failure and 2 on
configuration or aliasing-guard errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np

from .config import SUITES, load_config
from .errors import ConfigError, GuardError, RegionError
from .plots import emit_plots
from .suites import RECORD_NAMES, run_suite

log = logging.getLogger("xbench")

J_KEYS = {"cm": "cm", "kernel": "kernel", "hardy": "hardy", "lowerbound": "lowerbound"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xbench", description=__doc__.splitlines()[0])
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--config", type=Path, help="flat key = value configuration file")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--seed", type=int, help="random seed (unsigned 64-bit)")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--j-min", type=int, help="smallest scale of the suite's main j range")
    p.add_argument("--j-max", type=int, help="largest scale of the suite's main j range")
    p.add_argument("--dim", type=int, choices=(1, 2, 3))
    p.add_argument("--no-figures", action="store_true", help="write plot tables but no PNG files")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def write_table(table, out: Path) -> Path:
    path = out / f"{table.name}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def configure(args):
    cfg = load_config(args.config, args.dim)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg.values["seed"] = args.seed
    if args.jobs is not None:
        cfg.values["jobs"] = args.jobs
    if args.out is not None:
        cfg.values["out"] = str(args.out)
    cfg.values["suites"] = ",".join(SUITES) if args.suite == "all" else args.suite
    for s in cfg.suites:
        if s in J_KEYS:
            if args.j_min is not None:
                cfg.values[f"{J_KEYS[s]}.j_min"] = args.j_min
            if args.j_max is not None:
                cfg.values[f"{J_KEYS[s]}.j_max"] = args.j_max
    unknown = set(cfg.windows) - RECORD_NAMES
    if unknown:
        raise ConfigError(f"window overrides name unknown records: {sorted(unknown)}")
    cfg.validate()
    return cfg


def run(cfg, figures: bool = True) -> tuple[dict, int]:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    results, report = [], {}
    for name in cfg.suites:
        log.info("running suite %s", name)
        res = run_suite(name, cfg)
        results.append(res)
        for table in res.tables:
            write_table(table, out)
        report[name] = {"runtime_s": round(res.runtime, 3), "records": [r.as_dict() for r in res.records]}
        for r in res.records:
            log.info("  %-32s %-5s measured=%s", r.name, "pass" if r.passed else "FAIL", r.measured)
    emit_plots(results, out, figures)
    failed = [r.name for res in results for r in res.records if not r.passed]
    summary = {
        "suites": report,
        "failed": failed,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.platform(),
            "seed": cfg["seed"],
            "dim": cfg["dim"],
        },
        "total_runtime_s": round(time.perf_counter() - start, 3),
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary, (1 if failed else 0)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = configure(args)
        summary, status = run(cfg, figures=not args.no_figures)
    except (ConfigError, GuardError, RegionError, FileNotFoundError) as exc:
        print(f"xbench: error: {exc}", file=sys.stderr)
        return 2
    for name in summary["failed"]:
        print(f"FAIL {name}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
